"""Support recovery scoring and the baseline estimators."""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DomainError, NotPositiveDefiniteError, ParameterError
from .ggm import Graph, centered_covariance, cholesky_precision
from .gl_atais import alternate
from .glasso import graphical_lasso
from .mean_model import mean_matrix


@dataclass(frozen=True)
class EdgeSet:
    n: int
    edges: frozenset = frozenset()

    def __post_init__(self):
        norm = set()
        for i, j in self.edges:
            if i == j:
                raise ParameterError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ParameterError(f"edge ({i}, {j}) outside [0, {self.n})")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    def __len__(self):
        return len(self.edges)

    @classmethod
    def from_graph(cls, graph: Graph):
        return cls(graph.n, graph.edges)


@dataclass(frozen=True)
class ThresholdSpec:
    """Edge cut-off: ``absolute`` uses ``value`` directly, ``relative-to-max``
    scales it by the largest off-diagonal magnitude."""

    kind: str = "absolute"
    value: float = 1e-4

    def __post_init__(self):
        if self.kind not in ("absolute", "relative-to-max"):
            raise ParameterError(f"unknown threshold kind {self.kind!r}")
        if not self.value > 0:
            raise ParameterError(f"threshold must be positive, got {self.value}")


def support_from_precision(theta, t=None):
    t = t or ThresholdSpec()
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    iu = np.triu_indices(n, k=1)
    mags = np.abs(theta[iu])
    if t.kind == "absolute":
        cut = t.value
    else:
        cut = t.value * (mags.max() if mags.size else 0.0)
    keep = mags > cut
    return EdgeSet(n, frozenset(zip(iu[0][keep].tolist(), iu[1][keep].tolist())))


def f_score(estimated, truth):
    """Harmonic mean of edge precision and recall.

    Two empty edge sets score 1; exactly one empty set scores 0.
    """
    if estimated.n != truth.n:
        raise ParameterError(f"node counts differ: {estimated.n} vs {truth.n}")
    if not estimated.edges and not truth.edges:
        return 1.0
    tp = len(estimated.edges & truth.edges)
    if tp == 0:
        return 0.0
    precision = tp / len(estimated.edges)
    recall = tp / len(truth.edges)
    return 2.0 * precision * recall / (precision + recall)


def baseline_standard_gl(obs, opts=None):
    """Center every column by the overall sample mean, then graphical lasso."""
    if obs.n_samples < 2:
        raise ParameterError("standard GL needs at least two samples")
    mu = obs.x.mean(axis=1, keepdims=True)
    s = centered_covariance(obs, np.broadcast_to(mu, obs.x.shape))
    return graphical_lasso(s, opts)


def baseline_oracle_gl(obs, model, phi_true, opts=None):
    """Center with the true mean ``f_r(phi_true)``, then graphical lasso."""
    s = centered_covariance(obs, mean_matrix(model, phi_true, obs.timestamps))
    return graphical_lasso(s, opts)


def default_ridge(s):
    return 1e-6 * np.trace(s) / s.shape[0]


def baseline_atais_inverse(obs, model, cfg, ridge=None, rng=None):
    """Same alternating loop with the lasso step replaced by a plain inverse.

    Each precision update is ``(S + ridge I)^-1``; ``ridge=None`` uses
    ``1e-6 tr(S) / N`` computed from that iteration's covariance. The
    log-posterior carries no sparsity penalty here. Returns the dense inverse
    at the final MAP mean.
    """
    if ridge is not None and ridge < 0:
        raise ParameterError(f"ridge must be nonnegative, got {ridge}")
    if rng is None:
        rng = np.random.default_rng()

    def inverse_step(s, previous):
        r = default_ridge(s) if ridge is None else ridge
        a = s + r * np.eye(s.shape[0])
        try:
            chol = cholesky_precision(a)
        except NotPositiveDefiniteError:
            raise DomainError("centered covariance is singular; use a positive ridge") from None
        inv = linalg.cho_solve((chol, True), np.eye(s.shape[0]))
        return 0.5 * (inv + inv.T)

    _, phi_map, _ = alternate(obs, model, cfg, rng, inverse_step, posterior_lam=0.0)
    # re-derive from the final mean so the estimate always comes from the data,
    # even when no candidate ever beat the identity record
    s = centered_covariance(obs, mean_matrix(model, phi_map, obs.timestamps))
    return inverse_step(s, None)
