"""Graphical lasso in the half-scaled form

    minimize  0.5 tr(S T) - 0.5 logdet T + lam * sum_{i != j} |T_ij|.

This is half of the usual ``tr(S T) - logdet T + rho |T|_1`` objective with
``rho = 2 * lam``; pass ``2 * lam`` when comparing against tools that use the
standard scaling (scikit-learn's ``alpha``, for instance). The diagonal is
not penalized.

The solver is primal block coordinate descent: each row/column is replaced
by the exact minimizer of the objective with the rest of ``T`` held fixed,
which reduces to a lasso solved by coordinate descent (see
``glatais._kernels_py``). Iterates stay symmetric positive definite, zeros
are exact, and the objective is nonincreasing sweep to sweep.

Coordinate descent crawls on badly conditioned covariances, so once two
consecutive sweeps agree on the support and signs the solver tries Newton
steps on the smooth problem restricted to that support. A Newton step is
kept only if it lowers the objective without flipping a sign; otherwise the
sweeps carry on.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import kernels
from .errors import ConvergenceError, InfeasibleError, NotPositiveDefiniteError, ParameterError
from .ggm import cholesky_precision


@dataclass(frozen=True)
class GlassoOptions:
    lam: float = 0.1
    max_iter: int = 500
    tol: float = 1e-6

    def __post_init__(self):
        if not self.lam >= 0:
            raise ParameterError(f"lambda must be nonnegative, got {self.lam}")
        if not self.tol > 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ParameterError(f"max_iter must be positive, got {self.max_iter}")


@dataclass
class GlassoResult:
    theta: np.ndarray
    kkt: float
    sweeps: int
    objectives: list = field(default_factory=list)


def _inverse_pd(theta):
    chol = cholesky_precision(theta)
    inv = linalg.cho_solve((chol, True), np.eye(theta.shape[0]))
    return 0.5 * (inv + inv.T), 2.0 * np.log(np.diag(chol)).sum()


def offdiag_l1(theta):
    return np.abs(theta).sum() - np.abs(np.diag(theta)).sum()


def gl_objective(theta, s, lam):
    """Half-scaled graphical lasso objective; raises on non-PD ``theta``."""
    theta = np.asarray(theta, dtype=float)
    _, logdet = _inverse_pd(theta)
    return 0.5 * np.sum(np.asarray(s) * theta) - 0.5 * logdet + lam * offdiag_l1(theta)


def _kkt(theta, w, s, lam):
    g = 0.5 * (s - w)
    nz = theta != 0
    off = ~np.eye(theta.shape[0], dtype=bool)
    viol = np.where(nz, np.abs(g + lam * np.sign(theta)), np.maximum(np.abs(g) - lam, 0.0))
    viol = np.where(off, viol, np.abs(g))
    return float(viol.max()) if viol.size else 0.0


def kkt_residual(theta, s, lam):
    """Largest violation of the optimality conditions at ``theta``.

    With ``W = theta^-1`` and ``G = (S - W) / 2``: ``|G_ii|`` on the diagonal,
    ``|G_ij + lam sign(theta_ij)|`` on nonzero off-diagonals and
    ``max(|G_ij| - lam, 0)`` on zero ones.
    """
    theta = np.asarray(theta, dtype=float)
    w, _ = _inverse_pd(theta)
    return _kkt(theta, w, np.asarray(s, dtype=float), lam)


def _check_input(s):
    s = np.array(s, dtype=float, order="C")
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ParameterError(f"covariance must be square, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ParameterError("covariance has non-finite entries")
    scale = max(np.abs(s).max(), 1.0)
    if np.abs(s - s.T).max() > 1e-10 * scale:
        raise ParameterError("covariance is not symmetric")
    return 0.5 * (s + s.T)


def _support_key(theta):
    return np.sign(theta[np.triu_indices(theta.shape[0], k=1)]).tobytes()


def _newton_polish(theta, s, lam, tol, max_steps=50):
    """Active-set Newton iterations on the nonzero entries of ``theta``.

    Signs are held fixed, so the penalty is linear on the free set. An entry
    whose Newton path would cross zero is set to exactly zero and dropped
    from the free set. Returns the improved iterate, or ``None`` when no step
    was accepted.
    """
    n = theta.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    keep = theta[iu, ju] != 0
    rows = np.concatenate([np.arange(n), iu[keep]])
    cols = np.concatenate([np.arange(n), ju[keep]])
    cur = theta.copy()
    w, logdet = _inverse_pd(cur)
    f_cur = 0.5 * np.sum(s * cur) - 0.5 * logdet + lam * offdiag_l1(cur)
    improved = False
    for _ in range(max_steps):
        off = rows != cols
        # d/d param of the trace term counts symmetric entries twice
        scale = np.where(off, np.sqrt(2.0), np.sqrt(0.5))
        signs = np.sign(cur[rows, cols])
        grad = np.where(off, s[rows, cols] - w[rows, cols] + 2.0 * lam * signs,
                        0.5 * (s[rows, cols] - w[rows, cols]))
        if np.abs(np.where(off, 0.5 * grad, grad)).max() <= 0.1 * tol:
            break
        m = (w[np.ix_(rows, rows)] * w[np.ix_(cols, cols)]
             + w[np.ix_(rows, cols)] * w[np.ix_(cols, rows)])
        hess = 0.5 * np.outer(scale, scale) * m
        # Jacobi scaling; the raw Hessian inherits cond(S)^2
        d = 1.0 / np.sqrt(np.diag(hess))
        try:
            factor = linalg.cho_factor(hess * np.outer(d, d), lower=True)
        except linalg.LinAlgError:
            break
        step = -d * linalg.cho_solve(factor, d * grad)
        vals = cur[rows, cols]
        crossing = off & (vals * step < 0)
        ratios = np.full(vals.shape, np.inf)
        ratios[crossing] = -vals[crossing] / step[crossing]
        hit = int(np.argmin(ratios))
        t = min(1.0, ratios[hit])
        slope = grad @ step
        accepted = False
        while t > 1e-12:
            new_vals = vals + t * step
            if t == ratios[hit]:
                new_vals[hit] = 0.0
            cand = cur.copy()
            cand[rows, cols] = new_vals
            cand[cols, rows] = new_vals
            try:
                w_c, logdet_c = _inverse_pd(cand)
            except NotPositiveDefiniteError:
                t *= 0.5
                continue
            f_c = 0.5 * np.sum(s * cand) - 0.5 * logdet_c + lam * offdiag_l1(cand)
            if f_c <= f_cur + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted or f_c >= f_cur:
            break
        cur, w, f_cur, improved = cand, w_c, f_c, True
        free = cur[rows, cols] != 0
        free[~off] = True
        rows, cols = rows[free], cols[free]
    return cur if improved else None


def solve_glasso(s, opts=None, init=None):
    """Run the solver and return a :class:`GlassoResult` with the objective trace.

    ``init`` is an optional positive definite warm start.
    """
    opts = opts or GlassoOptions()
    s = _check_input(s)
    n = s.shape[0]
    lam = opts.lam

    if lam == 0:
        try:
            theta, _ = _inverse_pd(s)
        except NotPositiveDefiniteError:
            raise InfeasibleError("lambda = 0 needs a positive definite covariance") from None
        return GlassoResult(theta, kkt_residual(theta, s, 0.0), 0, [gl_objective(theta, s, 0.0)])

    diag = np.diag(s)
    if np.any(diag <= 0):
        raise InfeasibleError(
            "covariance has a non-positive diagonal entry; the objective has no finite minimizer")

    if init is None:
        theta = np.diag(1.0 / diag)
        w = np.diag(diag)
    else:
        theta = np.array(init, dtype=float, order="C")
        w, _ = _inverse_pd(theta)
        w = np.ascontiguousarray(w)

    rho = 2.0 * lam
    objectives = [gl_objective(theta, s, lam)]
    kkt = _kkt(theta, w, s, lam)
    sweeps = 0
    support = _support_key(theta)
    while kkt > opts.tol:
        if sweeps >= opts.max_iter:
            raise ConvergenceError(
                f"graphical lasso did not reach tol={opts.tol} in {opts.max_iter} sweeps "
                f"(kkt residual {kkt:.3g})", last_iterate=theta, residual=kkt)
        kernels.glasso_sweep(theta, w, s, rho)
        sweeps += 1
        # refresh the inverse so rounding in the rank updates cannot accumulate
        w_exact, logdet = _inverse_pd(theta)
        w = np.ascontiguousarray(w_exact)
        objectives.append(0.5 * np.sum(s * theta) - 0.5 * logdet + lam * offdiag_l1(theta))
        kkt = _kkt(theta, w, s, lam)
        new_support = _support_key(theta)
        # stalled sweeps can keep toggling one tiny entry, so also try periodically
        if kkt > opts.tol and (new_support == support or sweeps % 10 == 0):
            polished = _newton_polish(theta, s, lam, opts.tol)
            if polished is not None:
                theta = np.ascontiguousarray(polished)
                w_exact, logdet = _inverse_pd(theta)
                w = np.ascontiguousarray(w_exact)
                objectives.append(0.5 * np.sum(s * theta) - 0.5 * logdet + lam * offdiag_l1(theta))
                kkt = _kkt(theta, w, s, lam)
        support = new_support
    return GlassoResult(theta, kkt, sweeps, objectives)


def graphical_lasso(s, opts=None, init=None):
    """Sparse precision estimate for covariance ``s``; see :func:`solve_glasso`."""
    return solve_glasso(s, opts, init).theta
