"""Cyclic Jacobi eigensolver for Hermitian matrices, compiled with numba.

One full sweep visits every strict upper-triangle entry in row order and
applies a complex Givens rotation that zeroes it. Convergence is declared
when the off-diagonal Frobenius norm drops below OFFDIAG_TOL scaled by
max(1, ||h||_F). The rotation eliminating h[p, q] satisfies
cot(2*theta) = (h[p,p] - h[q,q]) / (2*|h[p,q]|).
"""

import numpy as np
from numba import njit

MAX_SWEEPS = 100
OFFDIAG_TOL = 1e-13


@njit(cache=True, nogil=True)
def jacobi_eigh(a):
    """Diagonalize Hermitian a. Returns (eigenvalues, eigenvector columns, ok)."""
    n = a.shape[0]
    h = a.copy()
    v = np.eye(n, dtype=np.complex128)
    w = np.empty(n, dtype=np.float64)
    if n <= 1:
        for i in range(n):
            w[i] = h[i, i].real
        return w, v, True

    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += h[i, j].real ** 2 + h[i, j].imag ** 2
    thresh = OFFDIAG_TOL * max(1.0, np.sqrt(fro))
    skip = thresh / (2.0 * n)

    ok = False
    for _ in range(MAX_SWEEPS):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += h[i, j].real ** 2 + h[i, j].imag ** 2
        if np.sqrt(2.0 * off) <= thresh:
            ok = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = h[p, q]
                r = abs(g)
                if r <= skip:
                    continue
                tau = (h[p, p].real - h[q, q].real) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = (t * c) * np.conj(g / r)
                cs = np.conj(s)
                for k in range(n):
                    hkp = h[k, p]
                    hkq = h[k, q]
                    h[k, p] = c * hkp + s * hkq
                    h[k, q] = -cs * hkp + c * hkq
                for k in range(n):
                    hpk = h[p, k]
                    hqk = h[q, k]
                    h[p, k] = c * hpk + cs * hqk
                    h[q, k] = -s * hpk + c * hqk
                h[p, q] = 0.0
                h[q, p] = 0.0
                h[p, p] = complex(h[p, p].real, 0.0)
                h[q, q] = complex(h[q, q].real, 0.0)
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp + s * vkq
                    v[k, q] = -cs * vkp + c * vkq

    for i in range(n):
        w[i] = h[i, i].real
    return w, v, ok
