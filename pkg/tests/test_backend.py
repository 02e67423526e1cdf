import subprocess
import sys

import numpy as np
import pytest

from qpool import backend
from qpool._jacobi import jacobi_eigh
from qpool.errors import ContractViolation

from conftest import random_hermitian


@pytest.fixture
def fresh_backend(monkeypatch):
    # resolution caches per process; reset so env changes take effect
    monkeypatch.setattr(backend, "_impl", None)
    monkeypatch.setattr(backend, "_name", None)
    return monkeypatch


@pytest.mark.parametrize("n", [2, 3, 5, 9, 16])
def test_jacobi_matches_lapack_eigenvalues(rng, n):
    h = np.ascontiguousarray(random_hermitian(rng, n))
    w, v, ok = jacobi_eigh(h)
    assert ok
    np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(h), atol=1e-11)
    np.testing.assert_allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-11)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-12)


def test_jacobi_diagonal_is_immediate():
    w, v, ok = jacobi_eigh(np.diag([3.0, 1.0, 2.0]).astype(complex))
    assert ok
    np.testing.assert_allclose(np.sort(w), [1.0, 2.0, 3.0])
    np.testing.assert_allclose(np.abs(v), np.eye(3), atol=1e-15)


def test_env_selects_numpy(fresh_backend):
    fresh_backend.setenv(backend.ENV_VAR, "numpy")
    assert backend.current_backend() == "numpy"


def test_env_selects_numba(fresh_backend):
    fresh_backend.setenv(backend.ENV_VAR, "numba")
    assert backend.current_backend() == "numba"


def test_env_rejects_unknown(fresh_backend):
    fresh_backend.setenv(backend.ENV_VAR, "cuda")
    with pytest.raises(ContractViolation):
        backend.current_backend()


def test_backends_agree_through_public_eig(fresh_backend, rng):
    from qpool.linalg import herm_eig

    h = random_hermitian(rng, 7)
    fresh_backend.setenv(backend.ENV_VAR, "numpy")
    w_np, v_np = herm_eig(h)
    fresh_backend.setattr(backend, "_impl", None)
    fresh_backend.setattr(backend, "_name", None)
    fresh_backend.setenv(backend.ENV_VAR, "numba")
    w_nb, v_nb = herm_eig(h)
    np.testing.assert_allclose(w_np, w_nb, atol=1e-11)
    # shared phase fixing makes the eigenvector columns comparable too
    assert np.abs(np.abs(v_np.conj().T @ v_nb) - np.eye(7)).max() < 1e-9


def test_warm_up_reports_backend(fresh_backend):
    fresh_backend.setenv(backend.ENV_VAR, "numpy")
    assert backend.warm_up() == "numpy"


def test_numpy_fallback_when_numba_missing():
    code = (
        "import sys; sys.modules['numba'] = None\n"
        "import qpool\n"
        "print(qpool.current_backend())\n"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True,
        env={"PATH": "/usr/bin:/bin", "QPOOL_BACKEND": ""},
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "numpy"
