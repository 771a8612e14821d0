import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from glatais.atais import ProposalState
from glatais.errors import DomainError, InfeasibleError, ParameterError
from glatais.evaluation import (
    EdgeSet,
    ThresholdSpec,
    baseline_atais_inverse,
    baseline_oracle_gl,
    baseline_standard_gl,
    f_score,
    support_from_precision,
)
from glatais.ggm import Graph, ObservationSet, centered_covariance, make_precision, sample_observations
from glatais.gl_atais import GlAtaisConfig
from glatais.glasso import GlassoOptions, graphical_lasso
from glatais.mean_model import MeanModel, benchmark_model, mean_matrix

pairs = st.tuples(st.integers(0, 5), st.integers(0, 5)).filter(lambda e: e[0] != e[1])
edge_sets = st.frozensets(pairs, max_size=10).map(lambda es: EdgeSet(6, es))


def const_model(n):
    # f_r = phi for every r
    return MeanModel(n, n, lambda phi, t: np.asarray(phi))


def test_support_examples():
    assert len(support_from_precision(np.diag([1.0, 2.0, 3.0]))) == 0
    theta = np.eye(3)
    theta[0, 1] = theta[1, 0] = 1.0
    assert support_from_precision(theta, ThresholdSpec("absolute", 0.5)).edges == {(0, 1)}
    theta[1, 2] = theta[2, 1] = 0.4
    assert support_from_precision(theta, ThresholdSpec("relative-to-max", 0.5)).edges == {(0, 1)}


def test_support_threshold_is_strict():
    theta = np.eye(2)
    theta[0, 1] = theta[1, 0] = 1e-4
    assert len(support_from_precision(theta)) == 0


@given(st.integers(0, 10**6))
def test_support_permutation(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((6, 6)) * (rng.random((6, 6)) < 0.4)
    theta = a + a.T
    perm = rng.permutation(6)
    p = np.eye(6)[perm]
    est = support_from_precision(p @ theta @ p.T, ThresholdSpec("absolute", 0.1))
    base = support_from_precision(theta, ThresholdSpec("absolute", 0.1))
    # row i of the permuted matrix is row perm[i] of the original
    mapped = {tuple(sorted((int(perm[i]), int(perm[j])))) for i, j in est.edges}
    assert mapped == base.edges


def test_f_score_examples():
    a = EdgeSet(4, frozenset({(0, 1), (2, 3)}))
    assert f_score(a, a) == 1.0
    assert f_score(EdgeSet(4, frozenset({(0, 2)})), a) == 0.0
    assert f_score(EdgeSet(4, frozenset({(0, 1)})), a) == pytest.approx(2 / 3)
    assert f_score(EdgeSet(4, frozenset()), EdgeSet(4, frozenset())) == 1.0
    with pytest.raises(ParameterError):
        f_score(EdgeSet(3, frozenset()), a)


@given(edge_sets, edge_sets)
def test_f_score_properties(est, truth):
    f = f_score(est, truth)
    assert 0.0 <= f <= 1.0
    assert f_score(est, est) == 1.0
    if len(est) == len(truth):
        assert f == pytest.approx(f_score(truth, est))
    false_pos = est.edges - truth.edges
    if false_pos:
        trimmed = EdgeSet(6, est.edges - {min(false_pos)})
        assert f_score(trimmed, truth) >= f - 1e-15


def test_edge_set_normalizes():
    assert EdgeSet(3, frozenset({(2, 0)})).edges == {(0, 2)}
    assert EdgeSet.from_graph(Graph(3, frozenset({(1, 0)}))).edges == {(0, 1)}
    with pytest.raises(ParameterError):
        EdgeSet(3, frozenset({(1, 1)}))
    with pytest.raises(ParameterError):
        ThresholdSpec("percentile", 0.1)


def well_separated(n=5):
    return make_precision(Graph(n, frozenset({(0, 1), (2, 3), (1, 4)})), 0.5)


def test_standard_equals_oracle_constant_mean():
    diffs = []
    truth = EdgeSet(5, frozenset({(0, 1), (2, 3), (1, 4)}))
    for seed in range(20):
        rng = np.random.default_rng(seed)
        c = rng.uniform(-3, 3, 5)
        obs = sample_observations(well_separated(), const_model(5), c, np.zeros(5000), rng)
        opts = GlassoOptions(0.05)
        a = f_score(support_from_precision(baseline_standard_gl(obs, opts)), truth)
        b = f_score(support_from_precision(baseline_oracle_gl(obs, const_model(5), c, opts)), truth)
        diffs.append(a - b)
    assert abs(np.mean(diffs)) <= 0.05


def test_oracle_recovers_large_sample():
    rng = np.random.default_rng(1)
    theta = well_separated()
    c = rng.uniform(-2, 2, 5)
    obs = sample_observations(theta, const_model(5), c, np.zeros(10000), rng)
    # smaller lambdas keep the two-hop pair (0, 4) that lasso shrinkage is known to admit
    est = baseline_oracle_gl(obs, const_model(5), c, GlassoOptions(0.1))
    assert f_score(support_from_precision(est), EdgeSet(5, frozenset({(0, 1), (2, 3), (1, 4)}))) == 1.0
    assert np.linalg.eigvalsh(est)[0] > 0


def test_oracle_covariance_matches_centering():
    rng = np.random.default_rng(2)
    model = benchmark_model()
    phi = rng.uniform(-2, 2, 4)
    obs = sample_observations(np.eye(10), model, phi, np.linspace(0, 4, 30), rng)
    s = centered_covariance(obs, mean_matrix(model, phi, obs.timestamps))
    np.testing.assert_array_equal(baseline_oracle_gl(obs, model, phi, GlassoOptions(0.1)),
                                  graphical_lasso(s, GlassoOptions(0.1)))


def test_standard_gl_rejects_zero_data():
    obs = ObservationSet(np.zeros((3, 5)), np.arange(5.0))
    with pytest.raises(InfeasibleError):
        baseline_standard_gl(obs, GlassoOptions(0.1))


def test_atais_inverse_large_sample():
    rng = np.random.default_rng(3)
    theta = well_separated()
    c = rng.uniform(-2, 2, 5)
    obs = sample_observations(theta, const_model(5), c, np.zeros(10000), rng)
    cfg = GlAtaisConfig(K=2, K0=0, P=5, init_proposal=ProposalState(c, 1e-12 * np.eye(5)))
    est = baseline_atais_inverse(obs, const_model(5), cfg, rng=np.random.default_rng(0))
    np.testing.assert_array_equal(est, est.T)
    assert np.linalg.norm(est - theta) / np.linalg.norm(theta) <= 0.15


def test_atais_inverse_huge_ridge():
    rng = np.random.default_rng(4)
    obs = sample_observations(well_separated(), const_model(5), np.zeros(5), np.zeros(50), rng)
    cfg = GlAtaisConfig(K=2, K0=1, P=5)
    est = baseline_atais_inverse(obs, const_model(5), cfg, ridge=1e8, rng=np.random.default_rng(0))
    np.testing.assert_allclose(est, 1e-8 * np.eye(5), atol=1e-14)
    assert len(support_from_precision(est)) == 0


def test_atais_inverse_singular():
    # a node that never varies makes the covariance exactly singular
    x = np.random.default_rng(5).standard_normal((3, 6))
    x[2] = 0.0
    zero = MeanModel(1, 3, lambda phi, t: np.zeros(3))
    obs = ObservationSet(x, np.arange(6.0))
    with pytest.raises(DomainError):
        baseline_atais_inverse(obs, zero, GlAtaisConfig(K=1, K0=0, P=2), ridge=0.0,
                               rng=np.random.default_rng(0))
