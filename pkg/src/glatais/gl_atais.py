"""Alternating estimation of the mean parameters and the sparse precision.

Each iteration:

1. draw particles from the current proposal and keep the one with the
   highest conditional log-posterior given the current precision estimate
   (the identity during the first ``K0`` warm-up iterations);
2. center the data with that candidate's mean and run the graphical lasso
   on the centered covariance;
3. accept the (candidate, precision) pair only if it raises the
   log-posterior record, then refit the proposal around the record holder.
"""
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .atais import (
    SCALINGS,
    PosteriorTerms,
    ProposalState,
    adapt_proposal,
    draw_particles,
    importance_weights,
    log_posterior,
    select_map_particle,
)
from .errors import ConvergenceError, DegenerateCloudError, ParameterError, RunError
from .ggm import centered_covariance
from .glasso import GlassoOptions, graphical_lasso
from .mean_model import PriorSpec, log_prior


@dataclass(frozen=True)
class GlAtaisConfig:
    """Settings for :func:`run`.

    ``delta`` is the jitter added to the adapted proposal covariance; with
    ``delta_decay`` it shrinks as ``delta / k`` at iteration ``k``. A ``None``
    prior keeps the model's own; a ``None`` initial proposal means
    ``N(0, 4 I)``. ``glasso_opts.lam`` is overridden by ``lam``.
    """

    K: int = 30
    K0: int = 5
    P: int = 3000
    lam: float = 0.1
    delta: float = 1e-3
    delta_decay: bool = False
    prior: Optional[PriorSpec] = None
    scaling: str = "full"
    init_proposal: Optional[ProposalState] = None
    glasso_opts: GlassoOptions = field(default_factory=GlassoOptions)

    def __post_init__(self):
        if self.K < 1:
            raise ParameterError(f"K must be at least 1, got {self.K}")
        if not 0 <= self.K0 < self.K:
            raise ParameterError(f"need 0 <= K0 < K, got K0={self.K0}, K={self.K}")
        if self.P < 1:
            raise ParameterError(f"P must be at least 1, got {self.P}")
        if not self.lam >= 0:
            raise ParameterError(f"lambda must be nonnegative, got {self.lam}")
        if not self.delta > 0:
            raise ParameterError(f"delta must be positive, got {self.delta}")
        if self.scaling not in SCALINGS:
            raise ParameterError(f"scaling must be one of {SCALINGS}, got {self.scaling!r}")
        if self.glasso_opts.lam != self.lam:
            object.__setattr__(self, "glasso_opts", replace(self.glasso_opts, lam=self.lam))

    def proposal_for(self, dim):
        if self.init_proposal is not None:
            if self.init_proposal.dim != dim:
                raise ParameterError(
                    f"initial proposal has dimension {self.init_proposal.dim}, model has {dim}")
            return self.init_proposal
        return ProposalState(np.zeros(dim), 4.0 * np.eye(dim))

    def delta_at(self, k):
        return self.delta / (k + 1) if self.delta_decay else self.delta


@dataclass(frozen=True)
class IterationRecord:
    phi_hat: np.ndarray
    theta_hat: np.ndarray
    phi_map: np.ndarray
    theta_gl: np.ndarray
    candidate_value: float
    value: float
    accepted: bool
    warmup: bool
    map_index: int
    ess: float
    proposal: ProposalState


@dataclass
class RunTrace:
    initial_phi: np.ndarray
    initial_theta: np.ndarray
    initial_value: float
    iterations: list = field(default_factory=list)

    def __len__(self):
        return len(self.iterations)

    @property
    def values(self):
        return np.array([it.value for it in self.iterations])


def warmup_objective(phi, obs, model, prior=None):
    """``0.5 sum_r |x_r - f_r(phi)|^2 - log g(phi)``, minimized during warm-up."""
    prior = prior or model.prior
    means = model.batch(np.asarray(phi, dtype=float)[None, :], obs.timestamps)[0]
    resid = obs.x.T - means
    return 0.5 * float(np.sum(resid * resid)) - log_prior(phi, prior)


def initial_record(obs, model, cfg, rng=None):
    """Iteration-zero record: proposal mean, identity precision and their log-posterior."""
    model = _with_prior(model, cfg)
    phi0 = cfg.proposal_for(model.dim_params).mu.copy()
    theta0 = np.eye(obs.n_nodes)
    return phi0, theta0, log_posterior(phi0, obs, model, theta0, cfg.lam, cfg.scaling)


def _with_prior(model, cfg):
    return model if cfg.prior is None else replace(model, prior=cfg.prior)


def alternate(obs, model, cfg, rng, precision_step, posterior_lam=None):
    """Shared alternating loop.

    ``precision_step(S, previous)`` maps a centered covariance (and the
    previous estimate, for warm starts) to a precision matrix.
    ``posterior_lam`` overrides the penalty weight inside the log-posterior.
    """
    model = _with_prior(model, cfg)
    lam = cfg.lam if posterior_lam is None else posterior_lam
    n = obs.n_nodes
    identity = np.eye(n)

    phi_map = cfg.proposal_for(model.dim_params).mu.copy()
    theta_gl = identity
    value = log_posterior(phi_map, obs, model, theta_gl, lam, cfg.scaling)
    trace = RunTrace(phi_map.copy(), theta_gl.copy(), value)

    prop = cfg.proposal_for(model.dim_params)
    previous = None
    warm_terms = PosteriorTerms(obs, model, identity, lam, cfg.scaling)
    for k in range(cfg.K):
        warm = k < cfg.K0
        terms = warm_terms if warm else PosteriorTerms(obs, model, theta_gl, lam, cfg.scaling)
        try:
            particles = draw_particles(prop, cfg.P, rng)
            lp = terms(particles)
            idx, phi_hat = select_map_particle(particles, obs, model, terms.theta, lam,
                                               cfg.scaling, log_post=lp)
            means = model.batch(phi_hat[None, :], obs.timestamps)[0].T
            s = centered_covariance(obs, means)
            theta_hat = precision_step(s, previous)
        except (ConvergenceError, DegenerateCloudError) as exc:
            raise RunError(f"iteration {k}: {exc}", iteration=k, trace=trace) from exc
        previous = theta_hat

        candidate = log_posterior(phi_hat, obs, model, theta_hat, lam, cfg.scaling)
        accepted = candidate > value
        if accepted:
            phi_map, theta_gl, value = phi_hat, theta_hat, candidate

        cloud = importance_weights(particles, obs, model, terms.theta, lam, cfg.scaling, prop,
                                   log_post=lp)
        prop = adapt_proposal(cloud, phi_map, cfg.delta_at(k))
        trace.iterations.append(IterationRecord(
            phi_hat=phi_hat, theta_hat=theta_hat, phi_map=phi_map, theta_gl=theta_gl,
            candidate_value=candidate, value=value, accepted=accepted, warmup=warm,
            map_index=idx, ess=float(cloud.ess), proposal=prop))
    return theta_gl, phi_map, trace


def run(obs, model, cfg, rng):
    """Estimate ``(theta, phi)`` jointly; returns ``(theta_gl, phi_map, trace)``."""
    def glasso_step(s, previous):
        return graphical_lasso(s, cfg.glasso_opts, init=previous)

    return alternate(obs, model, cfg, rng, glasso_step)
