import numpy as np
import pytest

from qpool.errors import ContractViolation, NotPSDError, ZeroProbabilityError
from qpool.linalg import tensor, trace_distance
from qpool.measure import (
    Povm,
    basis_povm,
    closed_form_choi_update,
    condition_on_effects,
    conditioned_operator,
    embed_effect,
    joint_outcome_distribution,
    joint_posterior_state,
    plus_minus_povm,
    posterior_state,
    random_povm,
)
from qpool.states import (
    DensityOperator,
    choi_state,
    ghz_state,
    haar_random_unitary,
    random_density,
    shared_state,
    state_224,
)


def test_povm_completeness_required():
    e = np.diag([0.5, 0.5])
    with pytest.raises(ContractViolation):
        Povm([e, e, e])
    Povm([e, e])


def test_povm_rejects_negative_effect():
    with pytest.raises(NotPSDError):
        Povm([np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])])


def test_basis_and_plus_minus():
    b = basis_povm(3)
    assert b.n_outcomes == 3
    np.testing.assert_allclose(sum(b.effects), np.eye(3), atol=1e-15)
    pm = plus_minus_povm()
    np.testing.assert_allclose(pm.effects[0], np.full((2, 2), 0.5), atol=1e-15)
    np.testing.assert_allclose(
        pm.effects[1], np.array([[0.5, -0.5], [-0.5, 0.5]]), atol=1e-15
    )


def test_embed_effect_matches_kron(rng):
    e = random_density(3, rng).matrix
    dims = (2, 3, 4)
    np.testing.assert_allclose(
        embed_effect(e, 1, dims), tensor(np.eye(2), e, np.eye(4)), atol=1e-15
    )


def test_posterior_ghz_is_maximally_mixed():
    g = ghz_state()
    pm = plus_minus_povm()
    for outcome in (0, 1):
        for party in (0, 1):
            c = posterior_state(g, party, pm, outcome)
            assert c.probability == pytest.approx(0.5, abs=1e-12)
            np.testing.assert_allclose(c.state.matrix, np.eye(2) / 2, atol=1e-12)


def test_joint_posterior_ghz_plus_plus():
    g = ghz_state()
    pm = plus_minus_povm()
    c = joint_posterior_state(g, (pm, pm), (0, 0))
    assert c.probability == pytest.approx(0.25, abs=1e-12)
    np.testing.assert_allclose(c.state.matrix, np.full((2, 2), 0.5), atol=1e-12)
    # outcome parity flips the coherence sign
    c2 = joint_posterior_state(g, (pm, pm), (0, 1))
    np.testing.assert_allclose(
        c2.state.matrix, np.array([[0.5, -0.5], [-0.5, 0.5]]), atol=1e-12
    )


def test_224_posteriors_match_hand_values():
    w = state_224()
    pm = plus_minus_povm()
    a = posterior_state(w, 0, pm, 0)
    assert a.probability == pytest.approx(0.5, abs=1e-12)
    expect = np.zeros((4, 4))
    expect[np.ix_([0, 2], [0, 2])] = 0.25
    expect[np.ix_([1, 3], [1, 3])] = 0.25
    np.testing.assert_allclose(a.state.matrix, expect, atol=1e-12)
    j = joint_posterior_state(w, (pm, pm), (0, 0))
    assert j.probability == pytest.approx(0.25, abs=1e-12)
    np.testing.assert_allclose(j.state.matrix, np.full((4, 4), 0.25), atol=1e-12)


def test_conditioned_operator_traces_to_probability(rng):
    w = state_224()
    povm = random_povm(2, 3, rng)
    g, p = conditioned_operator(w, {0: povm.effects[1]})
    assert np.trace(g).real == pytest.approx(p, abs=1e-12)
    dist = joint_outcome_distribution(w, (povm, Povm([np.eye(2)])))
    assert p == pytest.approx(dist[1, 0], abs=1e-12)


def test_condition_rejects_shared_slot():
    w = state_224()
    with pytest.raises(ContractViolation):
        conditioned_operator(w, {2: np.eye(4)})


def test_zero_probability_outcome_raises():
    w = state_224()
    # |0><0| on party 0 and |1><1|-ish projector chosen to kill all weight:
    # measuring party 0 in the basis and asking for an effect orthogonal
    # to its marginal support
    e = np.zeros((2, 2))
    with pytest.raises(ZeroProbabilityError):
        condition_on_effects(w, {0: e})


def test_closed_form_matches_general_conditioning(rng):
    rho = random_density(4, rng)
    u = haar_random_unitary(4, rng)
    w = choi_state(rho, (2, 2), u)
    pa = random_povm(2, 2, rng)
    pb = random_povm(2, 3, rng)
    for a in range(2):
        for b in range(3):
            joint_effect = tensor(pa.effects[a], pb.effects[b])
            cf = closed_form_choi_update(rho, u, joint_effect)
            gen = condition_on_effects(w, {0: pa.effects[a], 1: pb.effects[b]})
            assert cf.probability == pytest.approx(gen.probability, abs=1e-12)
            assert trace_distance(cf.state.matrix, gen.state.matrix) < 1e-12


def test_closed_form_transpose_not_conjugate(rng):
    # an effect with complex entries distinguishes E^T from E^dagger
    rho = DensityOperator(np.eye(2) / 2)
    u = haar_random_unitary(2, rng)
    w = choi_state(rho, (2, 1), u)
    y_plus = np.array([[0.5, -0.5j], [0.5j, 0.5]])
    cf = closed_form_choi_update(rho, u, y_plus)
    gen = condition_on_effects(w, {0: y_plus})
    assert trace_distance(cf.state.matrix, gen.state.matrix) < 1e-12
    wrong = (u @ y_plus.conj().T @ u.conj().T) / 2 / cf.probability
    assert trace_distance(wrong, gen.state.matrix) > 1e-3


def test_joint_distribution_normalizes(rng):
    w = state_224()
    pa = random_povm(2, 4, rng)
    pb = random_povm(2, 2, rng)
    dist = joint_outcome_distribution(w, (pa, pb))
    assert dist.shape == (4, 2)
    assert dist.sum() == pytest.approx(1.0, abs=1e-10)
    assert (dist >= 0).all()


def test_random_povm_is_valid(rng):
    for n in (2, 3, 5):
        p = random_povm(3, n, rng)
        assert p.n_outcomes == n
        np.testing.assert_allclose(sum(p.effects), np.eye(3), atol=1e-10)


def test_povm_dim_mismatch_rejected():
    w = state_224()
    with pytest.raises(ContractViolation):
        posterior_state(w, 0, basis_povm(3), 0)
