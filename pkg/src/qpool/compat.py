"""Support-overlap compatibility between partial posteriors.

Two posteriors about the same system are compatible (someone with all the
data could hold both) exactly when their supports intersect nontrivially.
The intersection of two projector ranges is the eigenvalue-2 eigenspace of
their sum, which is how the projector is computed here.
"""

from __future__ import annotations

import numpy as np

from .linalg import DEFAULT_TOL, herm_eig, support_projector
from .states import _as_matrix

# |eigenvalue - 2| below this counts as lying in both supports.
INTERSECTION_ATOL = 1e-8


def support_intersection_projector(a, b, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Projector onto the intersection of the supports of a and b."""
    pa = support_projector(_as_matrix(a), tol)
    pb = support_projector(_as_matrix(b), tol)
    w, v = herm_eig(pa + pb)
    cols = v[:, np.abs(w - 2.0) <= INTERSECTION_ATOL]
    return cols @ cols.conj().T


def bfm_compatible(a, b, tol: float = DEFAULT_TOL) -> bool:
    """True when the supports of a and b have nonzero intersection."""
    p = support_intersection_projector(a, b, tol)
    return float(np.trace(p).real) > 0.5


def state_in_intersection(omega, a, b, tol: float = DEFAULT_TOL) -> bool:
    """True when omega lives entirely inside supp(a) intersect supp(b)."""
    m = _as_matrix(omega)
    p = support_intersection_projector(a, b, tol)
    return bool(np.abs(p @ m @ p - m).max() <= tol)
