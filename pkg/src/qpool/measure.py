"""POVMs and conditioning a joint state on measurement outcomes.

Parties measure their own subsystems; the shared system is never measured
directly. Conditioning multiplies the embedded effects into the joint state
and traces out everything but the shared system:

    g = Tr_parties[(E_0 (x) E_1 (x) ... (x) I_shared) W],  p = Tr(g)

For pure joint states built by choi_state there is an equivalent closed
form, sqrt(rho) u E^T u^dag sqrt(rho) with the transpose taken in the fixed
party product basis. Both routes are kept; agreement between them is a
cross-check, so neither may be rewritten in terms of the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ContractViolation, NotPSDError, NumericError, ZeroProbabilityError
from .linalg import DEFAULT_TOL, _require_hermitian, herm_eig, partial_trace, sqrt_psd, tensor
from .states import (
    PSD_ATOL,
    DensityOperator,
    MultipartiteState,
    _as_rng,
    _freeze,
    _require_isometry,
)

ZERO_PROBABILITY_TOL = 1e-12
COMPLETENESS_ATOL = 1e-10
PROBABILITY_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class Povm:
    """Measurement as a tuple of PSD effects summing to the identity."""

    effects: tuple[np.ndarray, ...]

    def __post_init__(self):
        effects = tuple(np.asarray(e, dtype=np.complex128) for e in self.effects)
        if not effects:
            raise ContractViolation("a POVM needs at least one effect")
        dim = effects[0].shape[0]
        total = np.zeros((dim, dim), dtype=np.complex128)
        for i, e in enumerate(effects):
            e = _require_hermitian(e, f"effect {i}")
            if e.shape[0] != dim:
                raise ContractViolation("effects differ in dimension")
            w, _ = herm_eig(e)
            if w[-1] < -PSD_ATOL:
                raise NotPSDError(
                    f"effect {i} has eigenvalue {w[-1]:.3e} below -{PSD_ATOL:.0e}"
                )
            total += e
        defect = np.abs(total - np.eye(dim)).max()
        if defect > COMPLETENESS_ATOL:
            raise ContractViolation(
                f"effects do not sum to the identity: max-abs defect {defect:.3e}"
            )
        object.__setattr__(self, "effects", tuple(_freeze(e) for e in effects))

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)


@dataclass(frozen=True, eq=False)
class ConditionedState:
    """A posterior state together with the probability of its outcome."""

    state: DensityOperator
    probability: float
    outcome_labels: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        p = float(self.probability)
        if not -PROBABILITY_ATOL <= p <= 1.0 + PROBABILITY_ATOL:
            raise ContractViolation(f"probability {p!r} outside [0, 1]")
        object.__setattr__(self, "probability", min(max(p, 0.0), 1.0))
        object.__setattr__(
            self,
            "outcome_labels",
            tuple((int(a), int(b)) for a, b in self.outcome_labels),
        )


def basis_povm(dim: int) -> Povm:
    """Projective measurement onto the standard basis."""
    eye = np.eye(dim, dtype=np.complex128)
    return Povm(tuple(np.outer(eye[k], eye[k]) for k in range(dim)))


def plus_minus_povm() -> Povm:
    """Qubit projective measurement onto (|0> +/- |1>)/sqrt(2)."""
    plus = np.array([1.0, 1.0], dtype=np.complex128) / np.sqrt(2.0)
    minus = np.array([1.0, -1.0], dtype=np.complex128) / np.sqrt(2.0)
    return Povm((np.outer(plus, plus.conj()), np.outer(minus, minus.conj())))


def embed_effect(effect: np.ndarray, slot: int, dims: Sequence[int]) -> np.ndarray:
    """Lift an effect on one subsystem to the joint space (identity elsewhere)."""
    dims = tuple(int(d) for d in dims)
    if not 0 <= slot < len(dims):
        raise ContractViolation(f"slot {slot} out of range for {len(dims)} subsystems")
    effect = np.asarray(effect, dtype=np.complex128)
    if effect.shape != (dims[slot], dims[slot]):
        raise ContractViolation(
            f"effect shape {effect.shape} does not match subsystem dim {dims[slot]}"
        )
    factors = [
        effect if i == slot else np.eye(d, dtype=np.complex128)
        for i, d in enumerate(dims)
    ]
    return tensor(*factors)


def _party_effects(
    w: MultipartiteState, effects_by_party: Mapping[int, np.ndarray]
) -> list[np.ndarray]:
    if not effects_by_party:
        raise ContractViolation("no effects given to condition on")
    factors = []
    for i, d in enumerate(w.party_dims):
        e = effects_by_party.get(i)
        if e is None:
            factors.append(np.eye(d, dtype=np.complex128))
        else:
            e = np.asarray(e, dtype=np.complex128)
            if e.shape != (d, d):
                raise ContractViolation(
                    f"party {i} effect shape {e.shape} does not match dim {d}"
                )
            factors.append(e)
    for slot in effects_by_party:
        if not 0 <= int(slot) < w.n_parties:
            raise ContractViolation(
                f"party index {slot} out of range; shared system cannot be measured"
            )
    return factors


def conditioned_operator(
    w: MultipartiteState, effects_by_party: Mapping[int, np.ndarray]
) -> tuple[np.ndarray, float]:
    """Unnormalized conditioned operator on the shared system and its trace.

    Linear in the effects, defined for every outcome including probability
    zero; the building block for both conditioning and consistency audits.
    """
    factors = _party_effects(w, effects_by_party)
    factors.append(np.eye(w.shared_dim, dtype=np.complex128))
    joint = tensor(*factors)
    g = partial_trace(joint @ w.density.matrix, w.dims, [len(w.dims) - 1])
    g = 0.5 * (g + g.conj().T)  # mathematically Hermitian; drop matmul noise
    p = float(np.trace(g).real)
    return g, p


def condition_on_effects(
    w: MultipartiteState,
    effects_by_party: Mapping[int, np.ndarray],
    outcome_labels: Sequence[tuple[int, int]] = (),
) -> ConditionedState:
    """Shared-system posterior after given parties observe given effects."""
    g, p = conditioned_operator(w, effects_by_party)
    if p <= ZERO_PROBABILITY_TOL:
        raise ZeroProbabilityError(
            f"outcome has probability {p:.3e}; no posterior state exists"
        )
    return ConditionedState(DensityOperator(g / p), p, tuple(outcome_labels))


def posterior_state(
    w: MultipartiteState, party: int, povm: Povm, outcome: int
) -> ConditionedState:
    """Posterior held by one party after seeing its own outcome."""
    if not 0 <= outcome < povm.n_outcomes:
        raise ContractViolation(f"outcome {outcome} out of range")
    return condition_on_effects(
        w, {party: povm.effects[outcome]}, [(party, outcome)]
    )


def joint_posterior_state(
    w: MultipartiteState, povms: Sequence[Povm], outcomes: Sequence[int]
) -> ConditionedState:
    """Posterior given every party's outcome (the full-information record)."""
    if len(povms) != w.n_parties or len(outcomes) != w.n_parties:
        raise ContractViolation(
            f"need one POVM and one outcome per party ({w.n_parties})"
        )
    effects = {}
    labels = []
    for i, (povm, a) in enumerate(zip(povms, outcomes)):
        if not 0 <= a < povm.n_outcomes:
            raise ContractViolation(f"outcome {a} out of range for party {i}")
        effects[i] = povm.effects[a]
        labels.append((i, int(a)))
    return condition_on_effects(w, effects, labels)


def closed_form_choi_update(
    rho,
    u: np.ndarray,
    effect: np.ndarray,
    tol: float = DEFAULT_TOL,
) -> ConditionedState:
    """Posterior for a choi_state computed without touching the joint state.

    Evaluates sqrt(rho) u E^T u^dag sqrt(rho), E transposed entrywise in the
    party product basis. Independent of condition_on_effects by design.
    """
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    d = np.asarray(effect, dtype=np.complex128).shape[0]
    u = _require_isometry(u, d)
    if u.shape[0] != rho.dim:
        raise ContractViolation(
            f"isometry rows {u.shape[0]} != shared dimension {rho.dim}"
        )
    root = sqrt_psd(rho.matrix, tol)
    m = root @ u
    g = m @ np.asarray(effect, dtype=np.complex128).T @ m.conj().T
    g = 0.5 * (g + g.conj().T)
    p = float(np.trace(g).real)
    if p <= ZERO_PROBABILITY_TOL:
        raise ZeroProbabilityError(
            f"outcome has probability {p:.3e}; no posterior state exists"
        )
    return ConditionedState(DensityOperator(g / p), p)


def joint_outcome_distribution(
    w: MultipartiteState, povms: Sequence[Povm]
) -> np.ndarray:
    """Probability array over all parties' outcomes, one axis per party."""
    if len(povms) != w.n_parties:
        raise ContractViolation(f"need one POVM per party ({w.n_parties})")
    for i, povm in enumerate(povms):
        if povm.dim != w.party_dims[i]:
            raise ContractViolation(
                f"POVM {i} dimension {povm.dim} does not match party dim "
                f"{w.party_dims[i]}"
            )
    marginal = partial_trace(w.density.matrix, w.dims, range(w.n_parties))
    shape = tuple(p.n_outcomes for p in povms)
    out = np.empty(shape, dtype=np.float64)
    for idx in np.ndindex(shape):
        joint = tensor(*(povms[i].effects[a] for i, a in enumerate(idx)))
        out[idx] = float(np.trace(joint @ marginal).real)
    total = out.sum()
    if abs(total - 1.0) > PROBABILITY_ATOL:
        raise ContractViolation(f"outcome probabilities sum to {total:.12g}, not 1")
    return np.clip(out, 0.0, None)


def random_povm(dim: int, n_outcomes: int, seed=None) -> Povm:
    """Random POVM: Gaussian PSD pieces whitened by their sum.

    Draws G_k = M_k^dag M_k and returns E_k = T^{-1/2} G_k T^{-1/2} with
    T = sum_k G_k, so completeness holds by construction. Retries on the
    (measure-zero) event that T is numerically singular.
    """
    if dim < 1 or n_outcomes < 1:
        raise ContractViolation("dim and n_outcomes must be positive")
    rng = _as_rng(seed)
    for _ in range(5):
        pieces = []
        for _ in range(n_outcomes):
            m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            pieces.append(m.conj().T @ m)
        total = sum(pieces)
        w, v = herm_eig(total)
        if w[-1] > 1e-9 * w[0]:
            whiten = (v / np.sqrt(w)) @ v.conj().T
            return Povm(tuple(whiten @ g @ whiten for g in pieces))
    raise NumericError("random POVM normalizer stayed singular after retries")
