import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from glatais.errors import ConvergenceError, DomainError, InfeasibleError, ParameterError
from glatais.glasso import GlassoOptions, gl_objective, graphical_lasso, kkt_residual, solve_glasso
from oracles import gl_oracle, gl_primal, random_spd


def spd(seed, n=5):
    return random_spd(np.random.default_rng(seed), n)


@pytest.mark.parametrize("lam", [0.0, 0.3, 2.0])
def test_identity_is_fixed_point(lam):
    np.testing.assert_allclose(graphical_lasso(np.eye(4), GlassoOptions(lam)), np.eye(4), atol=1e-12)


def test_lambda_zero_inverse():
    s = spd(0)
    np.testing.assert_allclose(graphical_lasso(s, GlassoOptions(0.0)), np.linalg.inv(s), atol=1e-6)


def test_two_by_two_diagonal_regime():
    s = np.array([[2.0, 0.8], [0.8, 1.0]])
    theta = graphical_lasso(s, GlassoOptions(0.4))
    np.testing.assert_allclose(theta, np.diag([0.5, 1.0]), atol=1e-12)
    ref, gap, _ = gl_oracle(s, 0.4)
    assert gap <= 1e-10
    np.testing.assert_allclose(theta, ref, atol=1e-6)


def test_objective_examples():
    assert gl_objective(np.eye(3), np.eye(3), 7.0) == pytest.approx(1.5)
    assert gl_objective(2 * np.eye(2), np.eye(2), 1.0) == pytest.approx(2 - np.log(2))


def test_objective_rejects_non_pd():
    with pytest.raises(DomainError):
        gl_objective(-np.eye(2), np.eye(2), 0.1)
    with pytest.raises(DomainError):
        kkt_residual(np.zeros((2, 2)), np.eye(2), 0.1)


def test_kkt_examples():
    assert kkt_residual(np.eye(2), np.eye(2), 0.5) == 0.0
    s = spd(1)
    assert kkt_residual(np.linalg.inv(s), s, 0.0) <= 1e-10
    s2 = np.array([[1.0, 0.9], [0.9, 1.0]])
    assert kkt_residual(np.eye(2), s2, 0.1) == pytest.approx(0.35)


def test_solution_beats_mle():
    s = spd(2)
    theta = graphical_lasso(s, GlassoOptions(0.1))
    assert gl_objective(theta, s, 0.1) <= gl_objective(np.linalg.inv(s), s, 0.1) + 1e-9


def test_errors():
    with pytest.raises(ParameterError):
        graphical_lasso(np.array([[1.0, 0.2], [0.3, 1.0]]), GlassoOptions(0.1))
    with pytest.raises(ParameterError):
        graphical_lasso(np.ones((2, 3)), GlassoOptions(0.1))
    with pytest.raises(InfeasibleError):
        graphical_lasso(np.array([[1.0, 1.0], [1.0, 1.0]]), GlassoOptions(0.0))
    with pytest.raises(InfeasibleError):
        graphical_lasso(np.zeros((3, 3)), GlassoOptions(0.1))
    with pytest.raises(ParameterError):
        GlassoOptions(-0.1)


def test_convergence_error_carries_iterate():
    s = spd(3, 8)
    with pytest.raises(ConvergenceError) as info:
        solve_glasso(s, GlassoOptions(0.01, max_iter=1, tol=1e-14))
    assert info.value.last_iterate.shape == (8, 8)
    assert info.value.residual > 1e-14


def test_singular_covariance_with_penalty():
    # rank-deficient S still has a finite minimizer when lambda > 0
    x = np.random.default_rng(4).standard_normal((6, 3))
    s = x @ x.T / 3
    res = solve_glasso(s, GlassoOptions(0.2))
    assert res.kkt <= 1e-6
    assert np.linalg.eigvalsh(res.theta)[0] > 0


@given(st.integers(0, 10**6), st.sampled_from([0.01, 0.05, 0.2, 0.6]))
def test_objective_nonincreasing(seed, lam):
    s = spd(seed, 6)
    res = solve_glasso(s, GlassoOptions(lam))
    obj = np.array(res.objectives)
    assert np.all(np.diff(obj) <= 1e-10 * np.maximum(1, np.abs(obj[:-1])))
    assert res.kkt <= 1e-6


@given(st.integers(0, 10**6), st.floats(0.01, 0.5))
def test_matches_standard_form(seed, lam):
    # the standard objective tr(S T) - logdet T + lam' |T|_1 with lam' = 2 lam
    # is exactly twice ours, so its oracle minimizer must coincide
    s = spd(seed)
    ref, gap, _ = gl_oracle(s, lam)
    theta = graphical_lasso(s, GlassoOptions(lam))
    np.testing.assert_allclose(theta, ref, atol=1e-5)
    assert gl_primal(theta, s, lam) - gl_primal(ref, s, lam) <= 1e-9


def test_matches_sklearn_standard_form():
    covariance = pytest.importorskip("sklearn.covariance")
    for seed in range(10):
        s = spd(seed)
        lam = 0.05
        _, ref = covariance.graphical_lasso(s, alpha=2 * lam, tol=1e-12, enet_tol=1e-12, max_iter=2000)
        theta = graphical_lasso(s, GlassoOptions(lam, tol=1e-9))
        np.testing.assert_allclose(theta, ref, atol=1e-6)


@given(st.integers(0, 10**6))
def test_diagonal_regime(seed):
    s = spd(seed)
    off = s - np.diag(np.diag(s))
    lam = 0.5 * np.abs(off).max() * 1.0001
    theta = graphical_lasso(s, GlassoOptions(lam))
    np.testing.assert_array_equal(theta - np.diag(np.diag(theta)), 0)
    np.testing.assert_allclose(np.diag(theta), 1 / np.diag(s), atol=1e-8)


@given(st.integers(0, 10**6), st.sampled_from([0.02, 0.1, 0.3]))
def test_permutation_equivariance(seed, lam):
    rng = np.random.default_rng(seed)
    s = random_spd(rng, 6)
    perm = rng.permutation(6)
    p = np.eye(6)[perm]
    a = graphical_lasso(p @ s @ p.T, GlassoOptions(lam, tol=1e-9))
    b = p @ graphical_lasso(s, GlassoOptions(lam, tol=1e-9)) @ p.T
    np.testing.assert_allclose(a, b, atol=1e-7)


@given(st.integers(0, 10**6))
def test_sparsity_monotone_in_lambda(seed):
    s = spd(seed, 7)
    counts = [np.count_nonzero(np.triu(graphical_lasso(s, GlassoOptions(lam)), 1))
              for lam in np.linspace(0.01, 0.8, 12)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_warm_start_same_answer():
    s = spd(5, 8)
    cold = solve_glasso(s, GlassoOptions(0.05, tol=1e-9))
    warm = solve_glasso(s, GlassoOptions(0.05, tol=1e-9), init=graphical_lasso(s, GlassoOptions(0.1)))
    np.testing.assert_allclose(cold.theta, warm.theta, atol=1e-7)


def test_ill_conditioned_input():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((10, 40)) * np.exp(rng.normal(0, 1.5, (10, 1)))
    s = x @ x.T / 40
    assert np.linalg.cond(s) > 1e3
    for lam in (0.01, 0.1):
        assert solve_glasso(s, GlassoOptions(lam)).kkt <= 1e-6
