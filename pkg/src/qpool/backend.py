"""Eigensolver backend selection.

Two interchangeable backends compute raw Hermitian eigendecompositions:

* ``numba`` -- the jitted cyclic Jacobi kernel in :mod:`qpool._jacobi`
* ``numpy`` -- ``np.linalg.eigh``

The env var ``QPOOL_BACKEND`` forces one; unset means numba when
importable, numpy otherwise. Resolution is lazy so the numpy path never
pays the numba import. Both backends feed the same post-processing in
:mod:`qpool.linalg`, which fixes ordering and eigenvector phases, so
results are interchangeable up to roundoff.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ContractViolation, NumericError

ENV_VAR = "QPOOL_BACKEND"

_impl = None
_name = None


def _numpy_eigh(h: np.ndarray):
    return np.linalg.eigh(h)


def _resolve():
    global _impl, _name
    choice = os.environ.get(ENV_VAR, "").strip().lower() or None
    if choice not in (None, "numba", "numpy"):
        raise ContractViolation(
            f"{ENV_VAR} must be 'numba' or 'numpy', got {choice!r}"
        )
    if choice != "numpy":
        try:
            from ._jacobi import jacobi_eigh
        except ImportError:
            if choice == "numba":
                raise ContractViolation(
                    f"{ENV_VAR}=numba but numba is not importable"
                ) from None
            jacobi_eigh = None
        if jacobi_eigh is not None:

            def _numba_eigh(h: np.ndarray):
                w, v, ok = jacobi_eigh(np.ascontiguousarray(h, dtype=np.complex128))
                if not ok:
                    raise NumericError(
                        "Jacobi eigensolver did not converge within the sweep cap"
                    )
                return w, v

            _impl, _name = _numba_eigh, "numba"
            return
    _impl, _name = _numpy_eigh, "numpy"


def current_backend() -> str:
    """Name of the backend in use ('numba' or 'numpy')."""
    if _name is None:
        _resolve()
    return _name


def raw_eigh(h: np.ndarray):
    """Eigenvalues and eigenvector columns of Hermitian h, unordered contract."""
    if _impl is None:
        _resolve()
    return _impl(h)


def warm_up() -> str:
    """Trigger backend resolution (and JIT compilation) on a tiny matrix."""
    raw_eigh(np.array([[1.0, 0.5j], [-0.5j, 0.0]], dtype=np.complex128))
    return _name
