"""Gaussian graphical model primitives.

Precision matrices are plain ``(N, N)`` float arrays; :func:`cholesky_precision`
is the single place that checks they are symmetric positive definite.
"""
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import linalg

from .errors import NotPositiveDefiniteError, ParameterError
from .mean_model import mean_matrix

SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph on nodes ``0 .. n-1``.

    ``edges`` holds pairs ``(i, j)`` with ``i < j``; ``weights`` maps each
    edge to a nonzero weight.
    """

    n: int
    edges: frozenset = frozenset()
    weights: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"graph needs at least one node, got n={self.n}")
        normalized = set()
        for i, j in self.edges:
            if i == j:
                raise ParameterError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ParameterError(f"edge ({i}, {j}) outside [0, {self.n})")
            normalized.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(normalized))
        weights = {}
        for e in self.edges:
            wt = self.weights.get(e, self.weights.get((e[1], e[0]), 1.0))
            if wt == 0:
                raise ParameterError(f"edge {e} has zero weight")
            weights[e] = float(wt)
        object.__setattr__(self, "weights", weights)

    def adjacency(self):
        a = np.zeros((self.n, self.n))
        for (i, j), wt in self.weights.items():
            a[i, j] = a[j, i] = wt
        return a


@dataclass(frozen=True)
class ObservationSet:
    """``N x R`` samples ``x`` with one timestamp per column."""

    x: np.ndarray
    timestamps: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        tau = np.array(self.timestamps, dtype=float).reshape(-1)
        if x.ndim != 2:
            raise ParameterError(f"observations must be N x R, got shape {x.shape}")
        if x.shape[1] != tau.size:
            raise ParameterError(
                f"{x.shape[1]} columns but {tau.size} timestamps")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(tau)):
            raise ParameterError("observations and timestamps must be finite")
        if np.any(np.diff(tau) < 0):
            raise ParameterError("timestamps must be nondecreasing")
        x.setflags(write=False)
        tau.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "timestamps", tau)

    @property
    def n_nodes(self):
        return self.x.shape[0]

    @property
    def n_samples(self):
        return self.x.shape[1]


def cholesky_precision(theta):
    """Lower Cholesky factor of ``theta``; raises if it is not symmetric PD."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
        raise ParameterError(f"precision must be square, got shape {theta.shape}")
    scale = max(np.abs(theta).max(), 1.0)
    if np.abs(theta - theta.T).max() > SYMMETRY_RTOL * scale:
        raise NotPositiveDefiniteError("precision matrix is not symmetric")
    try:
        return linalg.cholesky(theta, lower=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"precision matrix is not positive definite: {exc}") from None


def logdet_pd(theta):
    chol = cholesky_precision(theta)
    return 2.0 * np.log(np.diag(chol)).sum()


def generate_er_graph(n, p, rng):
    """Erdos-Renyi graph: each unordered pair kept independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"edge probability must lie in [0, 1], got {p}")
    if n < 1:
        raise ParameterError(f"graph needs at least one node, got n={n}")
    pairs = list(combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p
    return Graph(n, frozenset(e for e, k in zip(pairs, keep) if k))


def make_precision(graph, eps_margin=0.1):
    """``A + eps I`` with ``eps`` lifting the smallest eigenvalue to ``eps_margin``."""
    if eps_margin <= 0:
        raise ParameterError(f"eps_margin must be positive, got {eps_margin}")
    a = graph.adjacency()
    lam_min = np.linalg.eigvalsh(a)[0] if graph.n > 0 else 0.0
    eps = max(0.0, -lam_min) + eps_margin
    return a + eps * np.eye(graph.n)


def sample_observations(theta, mean, phi_true, timestamps, rng):
    """Draw ``x_r = f_r(phi_true) + v_r`` with ``v_r ~ N(0, theta^-1)``.

    The noise is ``L^{-T} z`` for ``theta = L L^T`` and standard normal ``z``,
    so ``theta`` is never inverted explicitly.
    """
    chol = cholesky_precision(theta)
    tau = np.asarray(timestamps, dtype=float).reshape(-1)
    if not np.all(np.isfinite(tau)):
        raise ParameterError("timestamps must be finite")
    z = rng.standard_normal((chol.shape[0], tau.size))
    noise = linalg.solve_triangular(chol, z, lower=True, trans="T")
    return ObservationSet(mean_matrix(mean, phi_true, tau) + noise, tau)


def centered_covariance(obs, means):
    """``(1/R) sum_r (x_r - m_r)(x_r - m_r)^T``."""
    x = obs.x if isinstance(obs, ObservationSet) else np.asarray(obs, dtype=float)
    means = np.asarray(means, dtype=float)
    if means.shape != x.shape:
        raise ParameterError(f"means shape {means.shape} does not match observations {x.shape}")
    resid = x - means
    cov = resid @ resid.T / x.shape[1]
    return 0.5 * (cov + cov.T)
