"""Density operators, multipartite layouts, and the validated state families.

A multipartite state orders its subsystems as (party 0, party 1, ..., shared
system): the shared system everyone measures indirectly is always LAST. Flat
indices follow the row-major convention of :mod:`qpool.linalg`.

Two families of joint states make indirect-measurement pooling exact:

* pure states whose shared-system rank equals the product of the party
  ranks, parameterized by ``choi_state`` (a square root of the shared state
  composed with an isometry, in channel-state correspondence form);
* ``orthogonal_product_mixture``: mixtures of product states whose
  shared-system components live on mutually orthogonal blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ContractViolation,
    NotPSDError,
    OrthogonalityError,
    RankConditionError,
    SupportContainmentError,
)
from .linalg import (
    DEFAULT_TOL,
    _require_hermitian,
    herm_eig,
    partial_trace,
    rank_of,
    sqrt_psd,
    support_projector,
    tensor,
)

PSD_ATOL = 1e-10
TRACE_ATOL = 1e-10
ISOMETRY_ATOL = 1e-10

Isometry = np.ndarray


def _freeze(m: np.ndarray) -> np.ndarray:
    out = np.array(m, dtype=np.complex128, order="C")
    out.setflags(write=False)
    return out


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, DensityOperator):
        return x.matrix
    return np.asarray(x, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Unit-trace PSD Hermitian matrix; immutable after construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _require_hermitian(self.matrix, "density operator")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ContractViolation(f"density operator trace is {tr:.12g}, not 1")
        w, _ = herm_eig(m)
        if w[-1] < -PSD_ATOL:
            raise NotPSDError(f"density operator has eigenvalue {w[-1]:.3e}")
        object.__setattr__(self, "matrix", _freeze(m))

    @classmethod
    def _trusted(cls, matrix: np.ndarray) -> "DensityOperator":
        # For callers whose construction guarantees the invariants
        # (outer products of unit vectors, convex combos of valid states).
        self = object.__new__(cls)
        object.__setattr__(self, "matrix", _freeze(matrix))
        return self

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class MultipartiteState:
    """Joint state plus its subsystem layout; the shared system is dims[-1]."""

    density: DensityOperator
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 2:
            raise ContractViolation("need at least one party plus the shared system")
        if any(d < 1 for d in dims):
            raise ContractViolation(f"subsystem dimensions must be positive: {dims}")
        if math.prod(dims) != self.density.dim:
            raise ContractViolation(
                f"dims {dims} imply dimension {math.prod(dims)}, "
                f"state has {self.density.dim}"
            )
        object.__setattr__(self, "dims", dims)

    @property
    def n_parties(self) -> int:
        return len(self.dims) - 1

    @property
    def party_dims(self) -> tuple[int, ...]:
        return self.dims[:-1]

    @property
    def shared_dim(self) -> int:
        return self.dims[-1]


def pure_state(vector: np.ndarray, dims: Sequence[int]) -> MultipartiteState:
    """Multipartite state |v><v| from a (nearly) normalized state vector."""
    v = np.asarray(vector, dtype=np.complex128).reshape(-1)
    norm = float(np.linalg.norm(v))
    if not np.isfinite(norm) or abs(norm - 1.0) > 1e-8:
        raise ContractViolation(f"state vector norm is {norm:.12g}, not 1")
    v = v / norm
    return MultipartiteState(DensityOperator._trusted(np.outer(v, v.conj())), tuple(dims))


def reduced_state(w: MultipartiteState, keep: Sequence[int]) -> DensityOperator:
    """Reduced density operator on the kept subsystems."""
    return DensityOperator(partial_trace(w.density.matrix, w.dims, keep))


def shared_state(w: MultipartiteState) -> DensityOperator:
    """Reduced state of the shared system (the last subsystem)."""
    return reduced_state(w, [len(w.dims) - 1])


def _require_isometry(u: np.ndarray, cols: int) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[1] != cols or u.shape[0] < cols:
        raise ContractViolation(
            f"isometry must map dimension {cols} into >= {cols} rows, "
            f"got shape {u.shape}"
        )
    defect = np.abs(u.conj().T @ u - np.eye(cols)).max()
    if defect > ISOMETRY_ATOL:
        raise ContractViolation(
            f"not an isometry: max-abs(U^dag U - I) = {defect:.3e}"
        )
    return u


def choi_state(
    rho,
    party_dims: Sequence[int],
    u: np.ndarray,
    tol: float = DEFAULT_TOL,
) -> MultipartiteState:
    """Pure joint state whose shared-system marginal is rho.

    Builds sum_j |j> (x) (sqrt(rho) u |j>) over the product basis of the
    parties, with u an isometry from the party product space into the
    support of rho. Requires rank(rho) to equal the product of party_dims;
    that rank condition is exactly what makes pooling exact later.
    """
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    party_dims = tuple(int(d) for d in party_dims)
    if len(party_dims) < 2 or any(d < 1 for d in party_dims):
        raise ContractViolation(f"need at least two parties with positive dims: {party_dims}")
    d = math.prod(party_dims)
    r = rank_of(rho.matrix, tol)
    if r != d:
        raise RankConditionError(
            f"shared state rank {r} != product of party dims {d}"
        )
    u = _require_isometry(u, d)
    if u.shape[0] != rho.dim:
        raise ContractViolation(
            f"isometry rows {u.shape[0]} != shared dimension {rho.dim}"
        )
    p = support_projector(rho.matrix, tol)
    leak = np.abs(p @ u - u).max()
    if leak > 1e-8:
        raise SupportContainmentError(
            f"isometry range leaves the support of rho: defect {leak:.3e}"
        )
    m = sqrt_psd(rho.matrix, tol) @ u  # columns indexed by the party basis
    vec = np.ascontiguousarray(m.T).reshape(-1)
    return pure_state(vec, party_dims + (rho.dim,))


def _coerce_density_list(states, what: str) -> list[DensityOperator]:
    out = []
    for i, s in enumerate(states):
        if not isinstance(s, DensityOperator):
            try:
                s = DensityOperator(s)
            except ContractViolation as exc:
                raise ContractViolation(f"{what}[{i}]: {exc}") from exc
        out.append(s)
    return out


def orthogonal_product_mixture(
    weights: Sequence[float],
    states_a: Sequence,
    states_b: Sequence,
    states_shared: Sequence,
) -> MultipartiteState:
    """Mixture sum_s w_s A_s (x) B_s (x) R_s with mutually orthogonal R_s.

    The shared-system components must satisfy R_s R_t = 0 for s != t; that
    orthogonality is what lets each party's record be read off the shared
    system block by block.
    """
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.size == 0:
        raise ContractViolation("mixture needs at least one component")
    if w.min() < 0.0:
        raise ContractViolation(f"negative mixture weight {w.min():.3e}")
    if abs(w.sum() - 1.0) > TRACE_ATOL:
        raise ContractViolation(f"mixture weights sum to {w.sum():.12g}, not 1")
    if not (len(states_a) == len(states_b) == len(states_shared) == w.size):
        raise ContractViolation("weights and component lists must have equal length")
    aa = _coerce_density_list(states_a, "states_a")
    bb = _coerce_density_list(states_b, "states_b")
    rr = _coerce_density_list(states_shared, "states_shared")
    for name, lst in (("states_a", aa), ("states_b", bb), ("states_shared", rr)):
        if len({s.dim for s in lst}) != 1:
            raise ContractViolation(f"{name} components differ in dimension")
    for s in range(len(rr)):
        for t in range(s + 1, len(rr)):
            overlap = np.abs(rr[s].matrix @ rr[t].matrix).max()
            if overlap > 1e-10:
                raise OrthogonalityError(
                    f"shared components {s} and {t} overlap: max-abs {overlap:.3e}"
                )
    total = sum(
        w[s] * tensor(aa[s].matrix, bb[s].matrix, rr[s].matrix)
        for s in range(w.size)
    )
    dims = (aa[0].dim, bb[0].dim, rr[0].dim)
    return MultipartiteState(DensityOperator._trusted(total), dims)


def ghz_state() -> MultipartiteState:
    """Three-qubit (|000> + |111>)/sqrt(2) in the (party, party, shared) layout."""
    v = np.zeros(8, dtype=np.complex128)
    v[0] = v[7] = 1.0 / np.sqrt(2.0)
    return pure_state(v, (2, 2, 2))


def state_224() -> MultipartiteState:
    """Two qubits maximally entangled with a four-level shared system."""
    v = np.zeros(16, dtype=np.complex128)
    v[[0, 5, 10, 15]] = 0.5  # (e, f) paired with shared level 2e + f
    return pure_state(v, (2, 2, 4))


def is_maximal_rank_pure(w: MultipartiteState, tol: float = DEFAULT_TOL) -> bool:
    """True when w is pure and the shared rank equals the product of party ranks."""
    m = w.density.matrix
    purity = float(np.trace(m @ m).real)
    if abs(purity - 1.0) > tol:
        return False
    shared_rank = rank_of(partial_trace(m, w.dims, [len(w.dims) - 1]), tol)
    party_rank = 1
    for i in range(w.n_parties):
        party_rank *= rank_of(partial_trace(m, w.dims, [i]), tol)
    return shared_rank == party_rank


def haar_random_pure(dims: Sequence[int], seed=None) -> MultipartiteState:
    """Haar-random pure state on the given subsystem layout."""
    dims = tuple(int(d) for d in dims)
    rng = _as_rng(seed)
    n = math.prod(dims)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return pure_state(v / np.linalg.norm(v), dims)


def haar_random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    rng = _as_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density(dim: int, seed=None, rank: int | None = None) -> DensityOperator:
    """Random mixed state G G^dag / Tr with complex Gaussian G of given rank."""
    rng = _as_rng(seed)
    rank = dim if rank is None else int(rank)
    if not 1 <= rank <= dim:
        raise ContractViolation(f"rank must be in [1, {dim}], got {rank}")
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real)
