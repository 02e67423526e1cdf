"""Dense Hermitian linear algebra under one tolerance policy.

Composite indices are row-major throughout the package: for subsystem
dimensions (d0, d1, ...) the basis vector (i0, i1, ...) sits at flat index
i0*d1*... + i1*... + ... Subsystem 0 is the most significant digit.

Tolerances: Hermiticity and PSD checks are absolute (max-abs of h - h^dag,
eigenvalue floor -tol). Rank, support, and pseudo-inverse thresholds are
relative, tol * lambda_max, falling back to absolute 1e-12 when the largest
eigenvalue is not positive.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple

import numpy as np

from . import backend
from .errors import ContractViolation, NotHermitianError, NotPSDError

DEFAULT_TOL = 1e-9

HERMITICITY_ATOL = 1e-10

# Unit eigenvector columns of an n-dim matrix have a component of magnitude
# >= 1/sqrt(n); anything below this is roundoff noise, not an anchor.
_PHASE_ANCHOR_TOL = 1e-8

ComplexMatrix = np.ndarray


class EigenDecomposition(NamedTuple):
    """Eigenvalues in descending order and matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _require_square(m: np.ndarray, what: str) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ContractViolation(f"{what} must be a square matrix, got shape {m.shape}")
    return m.astype(np.complex128, copy=False)


def _require_hermitian(m: np.ndarray, what: str) -> np.ndarray:
    m = _require_square(m, what)
    defect = np.abs(m - m.conj().T).max() if m.size else 0.0
    if defect > HERMITICITY_ATOL:
        raise NotHermitianError(
            f"{what} is not Hermitian: max-abs(h - h^dag) = {defect:.3e}"
        )
    return m


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, row-major convention."""
    if not factors:
        raise ContractViolation("tensor() needs at least one factor")
    out = np.asarray(factors[0], dtype=np.complex128)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=np.complex128))
    return out


def partial_trace(m: np.ndarray, dims: Iterable[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in keep.

    dims gives the subsystem dimensions in index order; keep lists the
    subsystem indices to retain. Kept subsystems keep their relative order.
    """
    dims = tuple(int(d) for d in dims)
    keep = tuple(sorted(set(int(k) for k in keep)))
    m = _require_square(m, "partial_trace input")
    if any(d < 1 for d in dims):
        raise ContractViolation(f"subsystem dimensions must be positive, got {dims}")
    if math.prod(dims) != m.shape[0]:
        raise ContractViolation(
            f"dims {dims} imply dimension {math.prod(dims)}, matrix has {m.shape[0]}"
        )
    if not keep:
        raise ContractViolation("keep must name at least one subsystem")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise ContractViolation(f"keep {keep} out of range for {len(dims)} subsystems")

    n = len(dims)
    t = m.reshape(dims + dims)
    n_cur = n
    for idx in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=idx, axis2=idx + n_cur)
        n_cur -= 1
    d_keep = math.prod(dims[i] for i in keep)
    return np.ascontiguousarray(t.reshape(d_keep, d_keep))


def herm_eig(h: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, deterministic presentation.

    Eigenvalues come back in descending order (stable under ties); each
    eigenvector's first non-negligible component is made real positive.
    """
    h = _require_hermitian(h, "herm_eig input")
    w, v = backend.raw_eigh(0.5 * (h + h.conj().T))
    order = np.argsort(-w, kind="stable")
    w = np.ascontiguousarray(w[order])
    v = np.ascontiguousarray(v[:, order].astype(np.complex128, copy=False))
    for j in range(v.shape[1]):
        col = v[:, j]
        anchors = np.nonzero(np.abs(col) > _PHASE_ANCHOR_TOL)[0]
        a = col[anchors[0]]
        v[:, j] = col * (np.conj(a) / abs(a))
    return EigenDecomposition(w, v)


def _psd_eig(h: np.ndarray, tol: float, what: str) -> EigenDecomposition:
    dec = herm_eig(h)
    if dec.eigenvalues.size and dec.eigenvalues[-1] < -tol:
        raise NotPSDError(
            f"{what} has eigenvalue {dec.eigenvalues[-1]:.3e} below -{tol:.1e}"
        )
    return dec


def _support_threshold(w: np.ndarray, tol: float) -> float:
    wmax = float(w[0]) if w.size else 0.0
    return tol * wmax if wmax > 0.0 else 1e-12


def sqrt_psd(h: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Hermitian square root of a PSD matrix; negatives within tol clamp to 0."""
    w, v = _psd_eig(h, tol, "sqrt_psd input")
    roots = np.sqrt(np.clip(w, 0.0, None))
    return (v * roots) @ v.conj().T


def pinv_on_support(h: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Inverse on the support: eigenvalues above tol*lambda_max invert, rest 0."""
    w, v = _psd_eig(h, tol, "pinv_on_support input")
    mask = w > _support_threshold(w, tol)
    inv = np.zeros_like(w)
    inv[mask] = 1.0 / w[mask]
    return (v * inv) @ v.conj().T


def support_projector(h: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the span of above-threshold eigenvectors."""
    w, v = _psd_eig(h, tol, "support_projector input")
    cols = v[:, w > _support_threshold(w, tol)]
    return cols @ cols.conj().T


def rank_of(h: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    """Number of eigenvalues above the relative support threshold."""
    w, _ = _psd_eig(h, tol, "rank_of input")
    return int(np.count_nonzero(w > _support_threshold(w, tol)))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the sum of absolute eigenvalues of a - b (both Hermitian)."""
    a = _require_hermitian(a, "trace_distance first argument")
    b = _require_hermitian(b, "trace_distance second argument")
    if a.shape != b.shape:
        raise ContractViolation(
            f"trace_distance needs equal shapes, got {a.shape} and {b.shape}"
        )
    w, _ = herm_eig(a - b)
    return 0.5 * float(np.abs(w).sum())
