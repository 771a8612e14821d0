"""Pure NumPy versions of the compiled kernels.

Both implementations share one contract so ``glatais.kernels`` can pick
either at import. Two kernels live here: the graphical lasso block sweep
and the particle scoring loop for the ten-node benchmark mean.

Block update for column ``j`` of the standard-form problem
``tr(S T) - logdet T + rho * sum_{i != j} |T_ij|``: write ``A`` for the
inverse of ``T`` with row/column ``j`` removed and ``c`` for the Schur
complement ``T_jj - t' A t``. The objective separates into
``-log c + S_jj c`` (minimized at ``c = 1 / S_jj``) and the lasso

    0.5 t' A t + (s_j / S_jj)' t + (rho / S_jj) |t|_1,

so each block step is exact and the primal objective never increases.
"""
import numpy as np


def _soft(r, t):
    return np.sign(r) * max(abs(r) - t, 0.0)


def lasso_cd(a, b, t, x, tol=1e-12, max_iter=10000):
    """Coordinate descent for ``0.5 x'Ax + b'x + t|x|_1``, in place on ``x``.

    Returns the number of passes used.
    """
    n = a.shape[0]
    ax = a @ x
    for it in range(max_iter):
        max_delta = 0.0
        for i in range(n):
            r = b[i] + ax[i] - a[i, i] * x[i]
            new = -_soft(r, t) / a[i, i]
            delta = new - x[i]
            if delta != 0.0:
                x[i] = new
                ax += a[:, i] * delta
                max_delta = max(max_delta, abs(delta))
        if max_delta <= tol:
            return it + 1
    return max_iter


def glasso_sweep(theta, w, s, rho, inner_tol=1e-12, inner_max_iter=10000):
    """One pass of exact block minimization over every row/column.

    ``theta`` and ``w`` (its inverse) are updated in place. Returns the
    largest number of inner passes any block needed.
    """
    n = theta.shape[0]
    worst = 0
    for j in range(n):
        idx = np.arange(n) != j
        sjj = s[j, j]
        w12 = w[idx, j]
        a = w[np.ix_(idx, idx)] - np.outer(w12, w12) / w[j, j]
        b = s[idx, j] / sjj
        x = theta[idx, j].copy()
        worst = max(worst, lasso_cd(a, b, rho / sjj, x, inner_tol, inner_max_iter))
        u = a @ x
        theta[idx, j] = x
        theta[j, idx] = x
        theta[j, j] = 1.0 / sjj + x @ u
        w[j, j] = sjj
        w[idx, j] = -u * sjj
        w[j, idx] = -u * sjj
        w[np.ix_(idx, idx)] = a + sjj * np.outer(u, u)
    return worst


_CHUNK = 512


def benchmark_quadform(phis, tau, x, theta):
    """``sum_r (x_r - f_r)' theta (x_r - f_r)`` per particle for the benchmark mean.

    ``x`` is ``(R, 10)``. Non-finite results come back as ``+inf``.
    """
    phis = np.asarray(phis, dtype=float)
    tau = np.asarray(tau, dtype=float)
    c2 = np.cos(2.0 * tau)
    e01 = np.exp(0.1 * tau)
    e1m = np.exp(1.0 - tau)
    lg = np.log(1.0 + 2.0 * tau)
    c2q = np.cos(2.0 * tau + np.pi / 4.0)
    s1 = np.sin(tau)
    out = np.empty(phis.shape[0])
    for start in range(0, phis.shape[0], _CHUNK):
        p = phis[start:start + _CHUNK]
        p1, p2, p3, p4 = (p[:, i:i + 1] for i in range(4))
        e = np.empty((p.shape[0], tau.size, 10))
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            e[..., 0] = x[:, 0] - (-p4 * tau + 5.0 * p1 * p1)
            e[..., 1] = x[:, 1] - 2.0 * p3 * np.sin(-p2 * tau)
            e[..., 2] = x[:, 2] - (p1 - p3 + p1 * c2)
            e[..., 3] = x[:, 3] - (3.0 * p4 + 3.0 * p2 + p1 * e01)
            e[..., 4] = x[:, 4] - (p3 * p3 - 2.0 * p1 + 3.0 * p2 - np.exp(0.8 * p3) * e1m)
            e[..., 5] = x[:, 5] - (5.0 * (p4 + p3) - p2 * lg)
            e[..., 6] = x[:, 6] - (3.0 * p2 - 0.2 * tau * np.sin(p3))
            e[..., 7] = x[:, 7] - (3.0 * p1 + 5.0 * p3 - 20.0 * np.sin(p4) * c2q)
            e[..., 8] = x[:, 8] - (p2 + 4.0 * p4 + 5.0 * np.exp(1.0 / (1.0 + p3)) * tau)
            e[..., 9] = x[:, 9] - (5.0 * p1 + 10.0 * p3 - 5.0 * p4 * s1)
            q = np.einsum("prn,prn->p", e @ theta, e)
        out[start:start + _CHUNK] = q
    out[~np.isfinite(out)] = np.inf
    return out
