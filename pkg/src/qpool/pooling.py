"""Pooling partial posteriors back into the full-information posterior.

Quantum side: given each party's posterior about the shared system and the
prior rho, the pooled operator is the alternating chain

    M = alpha rho^+ beta rho^+ gamma ...   (rho^+ = inverse on support)

normalized by its trace. For the validated state families M is already
Hermitian PSD and equals the jointly conditioned state; outside them the
normalized Hermitian part is returned with a non-Hermiticity diagnostic.

Classical side: under conditional independence of the records given s,

    pooled(s) proportional to  prod_x p(s|x) / p(s)^(N-1)

which is exact Bayes. Both sides zero out anything outside the prior's
support and refuse to pool when nothing survives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ContractViolation,
    EmptyPoolError,
    SupportContainmentError,
    ZeroProbabilityError,
)
from .linalg import DEFAULT_TOL, pinv_on_support, support_projector
from .states import DensityOperator, _as_matrix, _freeze

HERMITICITY_WARN_TOL = 1e-6
CONTAINMENT_ATOL = 1e-8
DISTRIBUTION_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class PooledState:
    """Normalized Hermitian part of the pooling chain plus diagnostics.

    hermiticity_defect is max-abs(M - M^dag) / max-abs(M) of the raw chain;
    hermitian is False when it exceeds the warning threshold, which flags
    inputs outside the validated families.
    """

    matrix: np.ndarray
    hermiticity_defect: float
    hermitian: bool

    def __post_init__(self):
        object.__setattr__(self, "matrix", _freeze(self.matrix))

    def to_density(self) -> DensityOperator:
        """Validated density-operator view; raises if the pool is not PSD."""
        return DensityOperator(self.matrix)


@dataclass(frozen=True, eq=False)
class ClassicalDistribution:
    """Probability vector; nonnegative, sums to one."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64).reshape(-1)
        if p.size == 0:
            raise ContractViolation("distribution must have at least one entry")
        if p.min() < 0.0:
            raise ContractViolation(f"negative probability {p.min():.3e}")
        if abs(p.sum() - 1.0) > DISTRIBUTION_ATOL:
            raise ContractViolation(f"probabilities sum to {p.sum():.15g}, not 1")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)


@dataclass(frozen=True, eq=False)
class ClassicalJoint:
    """Joint probability array; the LAST axis is the hidden variable."""

    probabilities: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.probabilities, dtype=np.float64)
        if q.ndim < 2:
            raise ContractViolation("joint needs at least one record axis plus the hidden axis")
        if q.min() < 0.0:
            raise ContractViolation(f"negative probability {q.min():.3e}")
        if abs(q.sum() - 1.0) > DISTRIBUTION_ATOL:
            raise ContractViolation(f"probabilities sum to {q.sum():.15g}, not 1")
        q = q.copy()
        q.setflags(write=False)
        object.__setattr__(self, "probabilities", q)

    @property
    def n_records(self) -> int:
        return self.probabilities.ndim - 1

    def prior(self) -> ClassicalDistribution:
        axes = tuple(range(self.n_records))
        return ClassicalDistribution(self.probabilities.sum(axis=axes))


def pool_n(posteriors: Sequence, rho, tol: float = DEFAULT_TOL) -> PooledState:
    """Pool any number of partial posteriors against the prior rho."""
    mats = [_as_matrix(p) for p in posteriors]
    if not mats:
        raise ContractViolation("nothing to pool")
    r = _as_matrix(rho)
    if any(m.shape != r.shape for m in mats):
        raise ContractViolation("posterior and prior dimensions differ")
    proj = support_projector(r, tol)
    for i, m in enumerate(mats):
        leak = np.abs(m - proj @ m @ proj).max()
        if leak > CONTAINMENT_ATOL:
            raise SupportContainmentError(
                f"posterior {i} has support outside the prior's: defect {leak:.3e}"
            )
    inv = pinv_on_support(r, tol)
    chain = mats[0]
    for m in mats[1:]:
        chain = chain @ inv @ m
    scale = np.abs(chain).max()
    defect = float(np.abs(chain - chain.conj().T).max() / scale) if scale > 0.0 else 0.0
    herm = 0.5 * (chain + chain.conj().T)
    tr = float(np.trace(herm).real)
    if tr <= tol:
        raise EmptyPoolError(f"pooled operator has trace {tr:.3e}")
    return PooledState(herm / tr, defect, defect <= HERMITICITY_WARN_TOL)


def pool_two(alpha, beta, rho, tol: float = DEFAULT_TOL) -> PooledState:
    """Pool two partial posteriors: normalized Hermitian part of a rho^+ b."""
    return pool_n([alpha, beta], rho, tol)


def _as_probs(x) -> np.ndarray:
    if isinstance(x, ClassicalDistribution):
        return x.probabilities
    return ClassicalDistribution(np.asarray(x, dtype=np.float64)).probabilities


def classical_pool(prior, posteriors: Sequence) -> ClassicalDistribution:
    """Combine per-record posteriors: prod of posteriors over prior^(N-1)."""
    pr = _as_probs(prior)
    posts = [_as_probs(p) for p in posteriors]
    if not posts:
        raise ContractViolation("nothing to pool")
    if any(p.shape != pr.shape for p in posts):
        raise ContractViolation("posterior and prior sizes differ")
    on_support = pr > 0.0
    for i, p in enumerate(posts):
        if np.any(p[~on_support] > DISTRIBUTION_ATOL):
            raise SupportContainmentError(
                f"posterior {i} puts mass outside the prior's support"
            )
    out = np.zeros_like(pr)
    num = np.ones_like(pr[on_support])
    for p in posts:
        num = num * p[on_support]
    out[on_support] = num / pr[on_support] ** (len(posts) - 1)
    total = out.sum()
    if total <= 1e-300:
        raise EmptyPoolError("pooled distribution has zero mass")
    return ClassicalDistribution(out / total)


def classical_bayes(joint: ClassicalJoint, observed: Mapping[int, int]) -> ClassicalDistribution:
    """Exact posterior over the hidden variable given some observed records."""
    if not isinstance(joint, ClassicalJoint):
        joint = ClassicalJoint(np.asarray(joint, dtype=np.float64))
    if not observed:
        raise ContractViolation("no observations to condition on")
    q = joint.probabilities
    n_rec = joint.n_records
    fixed = {}
    for axis, value in observed.items():
        axis, value = int(axis), int(value)
        if not 0 <= axis < n_rec:
            raise ContractViolation(
                f"axis {axis} is not a record axis (hidden axis cannot be observed)"
            )
        if not 0 <= value < q.shape[axis]:
            raise ContractViolation(f"value {value} out of range on axis {axis}")
        fixed[axis] = value
    idx = tuple(fixed.get(a, slice(None)) for a in range(n_rec)) + (slice(None),)
    sliced = q[idx]
    if sliced.ndim > 1:
        sliced = sliced.sum(axis=tuple(range(sliced.ndim - 1)))
    mass = sliced.sum()
    if mass <= 0.0:
        raise ZeroProbabilityError("observed record has probability zero")
    return ClassicalDistribution(sliced / mass)


def is_conditionally_independent(joint: ClassicalJoint, tol: float = DEFAULT_TOL) -> bool:
    """True when the two records are independent given the hidden variable."""
    if not isinstance(joint, ClassicalJoint):
        joint = ClassicalJoint(np.asarray(joint, dtype=np.float64))
    q = joint.probabilities
    if q.ndim != 3:
        raise ContractViolation(
            f"independence test needs exactly two record axes, got {q.ndim - 1}"
        )
    for s in range(q.shape[2]):
        p_s = q[:, :, s].sum()
        if p_s <= tol:
            continue
        cond = q[:, :, s] / p_s
        product = np.outer(cond.sum(axis=1), cond.sum(axis=0))
        if np.abs(cond - product).max() > tol:
            return False
    return True
