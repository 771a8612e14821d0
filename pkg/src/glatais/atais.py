"""Adaptive importance sampling over the mean parameters.

One round draws particles from a Gaussian proposal, scores each by the
conditional log-posterior given a precision matrix, keeps the best one as
the MAP candidate and refits the proposal from the self-normalized weights.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from .errors import DegenerateCloudError, NotPositiveDefiniteError, ParameterError
from .ggm import cholesky_precision

SCALINGS = ("paper", "full")
_CHUNK_ELEMS = 4_000_000


@dataclass(frozen=True)
class ProposalState:
    """Gaussian proposal ``N(mu, sigma)`` over the mean parameters."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).reshape(-1)
        sigma = np.array(self.sigma, dtype=float)
        if sigma.shape != (mu.size, mu.size):
            raise ParameterError(f"proposal covariance shape {sigma.shape} does not match mean size {mu.size}")
        try:
            chol = cholesky_precision(sigma)
        except NotPositiveDefiniteError as exc:
            raise ParameterError(f"proposal covariance is not positive definite: {exc}") from None
        mu.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "_chol", chol)

    @property
    def dim(self):
        return self.mu.size

    def logpdf(self, phis):
        """Normalized Gaussian log density at each row of ``phis``."""
        phis = np.atleast_2d(np.asarray(phis, dtype=float))
        z = linalg.solve_triangular(self._chol, (phis - self.mu).T, lower=True)
        half_logdet = np.log(np.diag(self._chol)).sum()
        return -0.5 * (z * z).sum(axis=0) - half_logdet - 0.5 * self.dim * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class ParticleCloud:
    particles: np.ndarray
    log_weights: np.ndarray
    norm_weights: np.ndarray

    @property
    def ess(self):
        return effective_sample_size(self.norm_weights)


def normalize_log_weights(log_weights):
    """Softmax of ``log_weights`` via log-sum-exp; ``-inf`` entries get weight 0."""
    lw = np.asarray(log_weights, dtype=float)
    lse = logsumexp(lw)
    if not np.isfinite(lse):
        raise DegenerateCloudError("all importance weights are zero")
    return np.exp(lw - lse)


def effective_sample_size(norm_weights):
    w = np.asarray(norm_weights, dtype=float)
    return 1.0 / np.sum(w * w)


def draw_particles(prop, n_particles, rng):
    """``n_particles`` i.i.d. draws from the proposal, one per row."""
    if n_particles < 1:
        raise ParameterError(f"need at least one particle, got {n_particles}")
    z = rng.standard_normal((n_particles, prop.dim))
    return prop.mu + z @ prop._chol.T


class PosteriorTerms:
    """Parameter-independent pieces of the conditional log-posterior for one ``theta``.

    Evaluating many particles against the same precision matrix reuses the
    factorization, the log-determinant and the penalty.
    """

    def __init__(self, obs, model, theta, lam, scaling="full"):
        if scaling not in SCALINGS:
            raise ParameterError(f"scaling must be one of {SCALINGS}, got {scaling!r}")
        theta = np.asarray(theta, dtype=float)
        chol = cholesky_precision(theta)
        self.obs = obs
        self.model = model
        self.theta = np.ascontiguousarray(theta)
        self._xt = np.ascontiguousarray(obs.x.T)
        logdet = 2.0 * np.log(np.diag(chol)).sum()
        det_weight = 0.5 * obs.n_samples if scaling == "full" else 0.5
        penalty = lam * (np.abs(theta).sum() - np.abs(np.diag(theta)).sum())
        self.constant = det_weight * logdet - penalty

    def _generic(self, phis):
        x = self._xt
        chunk = max(1, _CHUNK_ELEMS // max(1, x.size))
        out = np.empty(phis.shape[0])
        for start in range(0, phis.shape[0], chunk):
            block = phis[start:start + chunk]
            with np.errstate(invalid="ignore", over="ignore"):
                resid = x[None, :, :] - self.model.batch(block, self.obs.timestamps)
                quad = np.einsum("prn,prn->p", resid @ self.theta, resid)
            out[start:start + chunk] = -0.5 * quad
        return out

    def __call__(self, phis):
        """Log-posterior for each row of ``phis``; ``-inf`` where the mean is not finite."""
        phis = np.ascontiguousarray(np.atleast_2d(np.asarray(phis, dtype=float)))
        if self.model.batch_quadform is not None:
            out = -0.5 * self.model.batch_quadform(phis, self.obs.timestamps, self._xt, self.theta)
        else:
            out = self._generic(phis)
        out += self.constant + np.broadcast_to(self.model.log_prior(phis), out.shape)
        out[~np.isfinite(out)] = -np.inf
        return out


def log_posterior(phi, obs, model, theta, lam, scaling="full"):
    """Conditional log-posterior of one parameter vector.

    ``-0.5 sum_r (x_r - f_r)' theta (x_r - f_r) + c logdet(theta) + log g(phi)
    - lam |theta|_1,offdiag`` with ``c = 1/2`` for ``scaling="paper"`` and
    ``c = R/2`` for ``scaling="full"``.
    """
    return float(PosteriorTerms(obs, model, theta, lam, scaling)(phi)[0])


def select_map_particle(particles, obs, model, theta, lam, scaling="full", log_post=None):
    """Index and value of the highest-posterior particle; ties go to the lowest index."""
    particles = np.atleast_2d(np.asarray(particles, dtype=float))
    if particles.shape[0] < 1:
        raise ParameterError("empty particle set")
    if log_post is None:
        log_post = PosteriorTerms(obs, model, theta, lam, scaling)(particles)
    if not np.any(np.isfinite(log_post)):
        raise DegenerateCloudError("every particle has zero posterior density")
    idx = int(np.argmax(log_post))
    return idx, particles[idx].copy()


def importance_weights(particles, obs, model, theta, lam, scaling, prop, log_post=None):
    """Weights ``pi / q`` in the log domain plus their self-normalized form."""
    particles = np.atleast_2d(np.asarray(particles, dtype=float))
    if log_post is None:
        log_post = PosteriorTerms(obs, model, theta, lam, scaling)(particles)
    log_w = np.asarray(log_post, dtype=float) - prop.logpdf(particles)
    return ParticleCloud(particles, log_w, normalize_log_weights(log_w))


def adapt_proposal(cloud, phi_map_new, delta):
    """Recenter on the MAP point; covariance is the weighted particle spread plus ``delta I``."""
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    w = cloud.norm_weights
    phi_bar = w @ cloud.particles
    # Gram form keeps the spread positive semidefinite under rounding
    root = (cloud.particles - phi_bar) * np.sqrt(w)[:, None]
    cov = root.T @ root
    cov = 0.5 * (cov + cov.T) + delta * np.eye(cloud.particles.shape[1])
    return ProposalState(np.asarray(phi_map_new, dtype=float), cov)
