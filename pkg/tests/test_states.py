import numpy as np
import pytest

from qpool.errors import (
    ContractViolation,
    NotPSDError,
    OrthogonalityError,
    RankConditionError,
    SupportContainmentError,
)
from qpool.linalg import rank_of, tensor, trace_distance
from qpool.states import (
    DensityOperator,
    MultipartiteState,
    choi_state,
    ghz_state,
    haar_random_pure,
    haar_random_unitary,
    is_maximal_rank_pure,
    orthogonal_product_mixture,
    pure_state,
    random_density,
    reduced_state,
    shared_state,
    state_224,
)


def test_density_operator_validates():
    DensityOperator(np.eye(2) / 2)
    with pytest.raises(ContractViolation):
        DensityOperator(np.eye(2))  # trace 2
    with pytest.raises(NotPSDError):
        DensityOperator(np.diag([1.5, -0.5]))
    with pytest.raises(ContractViolation):
        DensityOperator(np.array([[0.5, 0.5], [0.0, 0.5]]))


def test_density_matrix_is_frozen():
    d = DensityOperator(np.eye(2) / 2)
    with pytest.raises(ValueError):
        d.matrix[0, 0] = 9.0


def test_ghz_state_vector():
    g = ghz_state()
    assert g.dims == (2, 2, 2)
    v = np.zeros(8)
    v[0] = v[7] = 1 / np.sqrt(2)
    np.testing.assert_allclose(g.density.matrix, np.outer(v, v), atol=1e-15)
    # every single-party marginal and the shared marginal are maximally mixed
    for party in range(2):
        np.testing.assert_allclose(
            reduced_state(g, [party]).matrix, np.eye(2) / 2, atol=1e-15
        )
    np.testing.assert_allclose(shared_state(g).matrix, np.eye(2) / 2, atol=1e-15)


def test_state_224_structure():
    w = state_224()
    assert w.dims == (2, 2, 4)
    v = np.zeros(16)
    v[[0, 5, 10, 15]] = 0.5
    np.testing.assert_allclose(w.density.matrix, np.outer(v, v), atol=1e-15)
    np.testing.assert_allclose(shared_state(w).matrix, np.eye(4) / 4, atol=1e-15)
    assert is_maximal_rank_pure(w)


def test_ghz_fails_rank_condition():
    # shared marginal has rank 2 but the product of party ranks is 4
    assert not is_maximal_rank_pure(ghz_state())


def test_pure_state_norm_check():
    with pytest.raises(ContractViolation):
        pure_state(np.array([1.0, 1.0]), (2, 1))
    with pytest.raises(ContractViolation):
        MultipartiteState(DensityOperator(np.eye(4) / 4), (2,))
    with pytest.raises(ContractViolation):
        MultipartiteState(DensityOperator(np.eye(4) / 4), (2, 3))


def test_choi_state_reduces_to_prior(rng):
    rho = random_density(4, rng)
    u = haar_random_unitary(4, rng)
    w = choi_state(rho, (2, 2), u)
    assert w.dims == (2, 2, 4)
    np.testing.assert_allclose(shared_state(w).matrix, rho.matrix, atol=1e-12)
    assert is_maximal_rank_pure(w)
    assert abs(np.trace(w.density.matrix @ w.density.matrix) - 1) < 1e-12


def test_choi_state_three_parties(rng):
    rho = random_density(8, rng)
    u = haar_random_unitary(8, rng)
    w = choi_state(rho, (2, 2, 2), u)
    assert w.dims == (2, 2, 2, 8)
    np.testing.assert_allclose(shared_state(w).matrix, rho.matrix, atol=1e-12)


def test_choi_state_224_identity_isometry():
    # maximally mixed prior with the identity coupling is the worked example
    w = choi_state(DensityOperator(np.eye(4) / 4), (2, 2), np.eye(4))
    assert trace_distance(w.density.matrix, state_224().density.matrix) < 1e-12


def test_choi_rejects_rank_deficient_prior(rng):
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    v /= np.linalg.norm(v)
    rho = DensityOperator(np.outer(v, v.conj()))
    with pytest.raises(RankConditionError):
        choi_state(rho, (2, 2), np.eye(4))


def test_choi_rejects_isometry_leaving_support():
    rho = DensityOperator(np.diag([0.5, 0.5, 0.0, 0.0]))
    # rank 2 prior with 2 x 1 parties is fine dimensionally, but the
    # isometry must map into the support
    u = np.zeros((4, 2))
    u[2, 0] = 1.0
    u[3, 1] = 1.0
    with pytest.raises(SupportContainmentError):
        choi_state(rho, (2, 1), u)


def test_choi_rejects_non_isometry():
    with pytest.raises(ContractViolation):
        choi_state(DensityOperator(np.eye(4) / 4), (2, 2), np.eye(4) * 2)


def test_orthogonal_product_mixture(rng):
    r0 = np.zeros((4, 4), dtype=complex)
    r0[:2, :2] = random_density(2, rng).matrix
    r1 = np.zeros((4, 4), dtype=complex)
    r1[2:, 2:] = random_density(2, rng).matrix
    w = orthogonal_product_mixture(
        [0.3, 0.7],
        [random_density(2, rng), random_density(2, rng)],
        [random_density(3, rng), random_density(3, rng)],
        [DensityOperator(r0), DensityOperator(r1)],
    )
    assert w.dims == (2, 3, 4)
    assert rank_of(shared_state(w).matrix) <= 4


def test_mixture_rejects_overlapping_shared_blocks(rng):
    same = random_density(2, rng)
    with pytest.raises(OrthogonalityError):
        orthogonal_product_mixture(
            [0.5, 0.5],
            [random_density(2, rng)] * 2,
            [random_density(2, rng)] * 2,
            [same, same],
        )


def test_mixture_rejects_bad_weights(rng):
    blocks = [
        DensityOperator(np.diag([1.0, 0.0])),
        DensityOperator(np.diag([0.0, 1.0])),
    ]
    parties = [random_density(2, rng)] * 2
    with pytest.raises(ContractViolation):
        orthogonal_product_mixture([0.5, 0.6], parties, parties, blocks)
    with pytest.raises(ContractViolation):
        orthogonal_product_mixture([1.1, -0.1], parties, parties, blocks)


def test_haar_unitary_is_unitary(rng):
    u = haar_random_unitary(5, rng)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(5), atol=1e-12)


def test_haar_pure_mean_is_maximally_mixed():
    rng = np.random.default_rng(0)
    acc = np.zeros((4, 4), dtype=complex)
    for _ in range(1000):
        acc += haar_random_pure((2, 2), rng).density.matrix
    assert np.abs(acc / 1000 - np.eye(4) / 4).max() < 0.05


def test_random_density_rank_control(rng):
    d = random_density(5, rng, rank=2)
    assert rank_of(d.matrix) == 2
    assert np.trace(d.matrix).real == pytest.approx(1.0, abs=1e-12)


def test_reduced_state_pair(rng):
    w = haar_random_pure((2, 3, 4), rng)
    pair = reduced_state(w, [0, 2])
    assert pair.matrix.shape == (8, 8)
    # tracing the remaining party from the pair must match the single marginal
    from qpool.linalg import partial_trace

    np.testing.assert_allclose(
        partial_trace(pair.matrix, (2, 4), [0]),
        reduced_state(w, [0]).matrix,
        atol=1e-12,
    )
