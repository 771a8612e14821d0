"""Parametric time-varying means and their parameter priors."""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import DomainError, ParameterError, SingularityError


@dataclass(frozen=True)
class PriorSpec:
    """Prior on the mean parameters, up to an additive constant.

    ``kind`` is ``"improper-uniform"`` (log density 0 everywhere) or
    ``"isotropic-gaussian"`` with standard deviation ``sigma``.
    """

    kind: str = "improper-uniform"
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("improper-uniform", "isotropic-gaussian"):
            raise ParameterError(f"unknown prior kind {self.kind!r}")
        if self.kind == "isotropic-gaussian" and not self.sigma > 0:
            raise ParameterError(f"gaussian prior needs sigma > 0, got {self.sigma}")


def log_prior(phi, spec):
    """Log prior density without normalizing constant; vectorized over leading axes."""
    phi = np.asarray(phi, dtype=float)
    if spec.kind == "improper-uniform":
        out = np.zeros(phi.shape[:-1])
    else:
        out = -np.sum(phi * phi, axis=-1) / (2.0 * spec.sigma ** 2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MeanModel:
    """Mean function ``f(phi, tau) -> R^N`` with a prior over ``phi``.

    ``batch_evaluator``, when given, maps ``(P, M)`` parameters and ``(R,)``
    timestamps to a ``(P, R, N)`` array and must agree with ``evaluator``.
    It may return non-finite entries where ``evaluator`` would raise.
    ``batch_quadform(phis, tau, x, theta)``, when given, returns
    ``sum_r (x_r - f_r)' theta (x_r - f_r)`` per particle directly (``x`` is
    ``(R, N)``), with ``+inf`` where the mean is not finite.
    """

    dim_params: int
    dim_nodes: int
    evaluator: Callable
    batch_evaluator: Optional[Callable] = None
    batch_quadform: Optional[Callable] = None
    prior: PriorSpec = field(default_factory=PriorSpec)

    def evaluate(self, phi, tau):
        return np.asarray(self.evaluator(np.asarray(phi, dtype=float), float(tau)), dtype=float)

    def log_prior(self, phi):
        return log_prior(phi, self.prior)

    def batch(self, phis, timestamps):
        phis = np.atleast_2d(np.asarray(phis, dtype=float))
        tau = np.asarray(timestamps, dtype=float).reshape(-1)
        if self.batch_evaluator is not None:
            return self.batch_evaluator(phis, tau)
        out = np.empty((phis.shape[0], tau.size, self.dim_nodes))
        for p, phi in enumerate(phis):
            for r, t in enumerate(tau):
                try:
                    out[p, r] = self.evaluate(phi, t)
                except DomainError:
                    out[p, r] = np.nan
        return out


def mean_matrix(model, phi, timestamps):
    """``N x R`` matrix whose column ``r`` is ``f(phi, tau_r)``."""
    tau = np.asarray(timestamps, dtype=float).reshape(-1)
    cols = [model.evaluate(phi, t) for t in tau]
    if not cols:
        return np.empty((model.dim_nodes, 0))
    return np.stack(cols, axis=1)


def _benchmark_terms(p1, p2, p3, p4, t):
    # broadcasting core shared by the scalar and batched evaluators
    return (
        -p4 * t + 5.0 * p1 ** 2,
        2.0 * p3 * np.sin(-p2 * t),
        p1 - p3 + p1 * np.cos(2.0 * t),
        3.0 * p4 + 3.0 * p2 + p1 * np.exp(0.1 * t),
        p3 ** 2 - 2.0 * p1 + 3.0 * p2 - np.exp(0.8 * p3) * np.exp(1.0 - t),
        5.0 * (p4 + p3) - p2 * np.log(1.0 + 2.0 * t),
        3.0 * p2 - 0.2 * t * np.sin(p3),
        3.0 * p1 + 5.0 * p3 - 20.0 * np.sin(p4) * np.cos(2.0 * t + np.pi / 4.0),
        p2 + 4.0 * p4 + 5.0 * np.exp(1.0 / (1.0 + p3)) * t,
        5.0 * p1 + 10.0 * p3 - 5.0 * p4 * np.sin(t),
    )


def eval_benchmark_mean(phi, tau):
    """Ten-node benchmark mean with four parameters.

    Raises :class:`SingularityError` at ``phi[2] == -1`` and
    :class:`DomainError` for ``tau <= -0.5`` (the log term).
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (4,):
        raise ParameterError(f"benchmark mean takes 4 parameters, got shape {phi.shape}")
    if not np.all(np.isfinite(phi)):
        raise ParameterError("parameters must be finite")
    if phi[2] == -1.0:
        raise SingularityError("benchmark mean is singular at phi_3 = -1")
    if tau <= -0.5:
        raise DomainError(f"benchmark mean undefined at tau={tau} (needs tau > -0.5)")
    with np.errstate(over="ignore"):
        return np.array(_benchmark_terms(*phi, float(tau)))


def _benchmark_batch(phis, tau):
    p = phis[:, None, :]
    t = tau[None, :]
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return np.stack(_benchmark_terms(p[..., 0], p[..., 1], p[..., 2], p[..., 3], t), axis=-1)


def benchmark_model(prior=None):
    return MeanModel(
        dim_params=4,
        dim_nodes=10,
        evaluator=eval_benchmark_mean,
        batch_evaluator=_benchmark_batch,
        batch_quadform=kernels.benchmark_quadform,
        prior=prior or PriorSpec(),
    )
