"""Reference implementations that share no code with the package.

Everything here is deliberately slow and dense.
"""
import numpy as np


def gl_primal(theta, s, lam):
    sign, logdet = np.linalg.slogdet(theta)
    if sign <= 0:
        return np.inf
    off = np.abs(theta).sum() - np.abs(np.diag(theta)).sum()
    return 0.5 * np.sum(s * theta) - 0.5 * logdet + lam * off


def gl_dual_point(theta, s, lam):
    """Project ``theta^-1`` onto the dual feasible box ``|W - S| <= 2 lam`` off the diagonal, ``diag W = diag S``."""
    w = np.linalg.inv(theta)
    w = 0.5 * (w + w.T)
    w = np.clip(w, s - 2 * lam, s + 2 * lam)
    np.fill_diagonal(w, np.diag(s))
    return w


def gl_dual(w):
    sign, logdet = np.linalg.slogdet(w)
    if sign <= 0:
        return -np.inf
    return 0.5 * (logdet + w.shape[0])


def _prox(z, t):
    out = np.sign(z) * np.maximum(np.abs(z) - t, 0.0)
    np.fill_diagonal(out, np.diag(z))
    return out


def gl_oracle(s, lam, gap_tol=1e-10, max_iter=500_000, polish=2000):
    """Proximal gradient with backtracking on the half-scaled graphical lasso.

    Runs until the duality gap is at most ``gap_tol``, then up to ``polish``
    further iterations (stopping early once the gap is below 1e-14).
    Returns ``(theta, gap, iterations)``; the primal value is certified to be
    within ``gap`` of the optimum.
    """
    if lam == 0:
        theta = np.linalg.inv(s)
        return 0.5 * (theta + theta.T), 0.0, 0
    theta = np.diag(1.0 / np.diag(s))
    step = 1.0
    extra = None
    gap = np.inf
    for it in range(max_iter):
        # smooth part h = 0.5 tr(S T) - 0.5 logdet T, gradient (S - T^-1) / 2
        chol = np.linalg.cholesky(theta)
        chol_inv = np.linalg.inv(chol)
        grad = 0.5 * (s - chol_inv.T @ chol_inv)
        step *= 1.5
        while True:
            cand = _prox(theta - step * grad, step * lam)
            cand = 0.5 * (cand + cand.T)
            d = cand - theta
            # logdet(T + d) - logdet T through log1p keeps tiny decreases visible
            mu = np.linalg.eigvalsh(chol_inv @ d @ chol_inv.T)
            if mu.min() > -1:
                dh = 0.5 * np.sum(s * d) - 0.5 * np.log1p(mu).sum()
                if dh <= np.sum(grad * d) + np.sum(d * d) / (2 * step):
                    break
            step *= 0.5
            if step < 1e-20:
                # no further decrease is representable
                return theta, gap, it
        theta = cand
        if it % 10 == 0:
            gap = gl_primal(theta, s, lam) - gl_dual(gl_dual_point(theta, s, lam))
            if extra is None and gap <= gap_tol:
                extra = polish
            if extra is not None:
                extra -= 10
                if extra <= 0 or gap <= 1e-14:
                    return theta, gap, it
    raise RuntimeError(f"oracle did not converge, gap {gap}")


def kkt_violation(theta, s, lam):
    w = np.linalg.inv(theta)
    g = 0.5 * (s - w)
    worst = np.abs(np.diag(g)).max()
    n = s.shape[0]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if theta[i, j] != 0:
                worst = max(worst, abs(g[i, j] + lam * np.sign(theta[i, j])))
            else:
                worst = max(worst, abs(g[i, j]) - lam)
    return worst


def lasso_oracle(a, b, t):
    """Minimize ``0.5 x'Ax + b'x + t|x|_1`` by brute force over sign patterns."""
    m = b.size
    best, best_x = np.inf, None
    for code in range(3 ** m):
        signs = np.array([(code // 3 ** k) % 3 - 1 for k in range(m)], dtype=float)
        free = signs != 0
        x = np.zeros(m)
        if free.any():
            sub = a[np.ix_(free, free)]
            x[free] = np.linalg.solve(sub, -(b[free] + t * signs[free]))
            if np.any(np.sign(x[free]) != signs[free]):
                continue
        val = 0.5 * x @ a @ x + b @ x + t * np.abs(x).sum()
        if val < best:
            best, best_x = val, x
    return best_x


def random_spd(rng, n, dof=None):
    dof = dof or 2 * n
    x = rng.standard_normal((n, dof))
    return x @ x.T / dof
