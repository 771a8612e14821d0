# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: graphical lasso block sweep and benchmark particle scoring.

Mirrors ``glatais._kernels_py``; see that module for the derivation of
each update.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sin, cos, exp, log, isfinite, INFINITY, M_PI

cnp.import_array()


cdef inline double soft(double r, double t) nogil:
    if r > t:
        return r - t
    if r < -t:
        return r + t
    return 0.0


cdef int lasso_cd_skip(const double[:, ::1] a, const double[::1] b, double t,
                       double[::1] x, double[::1] ax, Py_ssize_t skip,
                       double tol, int max_iter) nogil:
    # Minimize 0.5 x'Ax + b'x + t|x|_1 over coordinates != skip.
    # ax holds A @ x on entry and is kept in sync.
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, k
    cdef double r, new, delta, max_delta
    cdef int it
    for it in range(max_iter):
        max_delta = 0.0
        for i in range(n):
            if i == skip:
                continue
            r = b[i] + ax[i] - a[i, i] * x[i]
            new = -soft(r, t) / a[i, i]
            delta = new - x[i]
            if delta != 0.0:
                x[i] = new
                for k in range(n):
                    if k != skip:
                        ax[k] += a[k, i] * delta
                if fabs(delta) > max_delta:
                    max_delta = fabs(delta)
        if max_delta <= tol:
            return it + 1
    return max_iter


def lasso_cd(const double[:, ::1] a, const double[::1] b, double t, double[::1] x,
             double tol=1e-12, int max_iter=10000):
    """Coordinate descent for 0.5 x'Ax + b'x + t|x|_1, in place on ``x``."""
    cdef double[::1] ax = np.asarray(a) @ np.asarray(x)
    return lasso_cd_skip(a, b, t, x, ax, -1, tol, max_iter)


def glasso_sweep(double[:, ::1] theta, double[:, ::1] w, const double[:, ::1] s,
                 double rho, double inner_tol=1e-12, int inner_max_iter=10000):
    """One pass of exact block minimization over every row/column."""
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double sjj, t, w22, quad
    cdef double[:, ::1] a = np.empty((n, n))
    cdef double[::1] b = np.empty(n)
    cdef double[::1] x = np.empty(n)
    cdef double[::1] ax = np.empty(n)
    cdef int used, worst = 0
    with nogil:
        for j in range(n):
            sjj = s[j, j]
            w22 = w[j, j]
            # inverse of theta with row/column j removed, from the current w
            for i in range(n):
                if i == j:
                    continue
                for k in range(n):
                    if k != j:
                        a[i, k] = w[i, k] - w[i, j] * w[k, j] / w22
                b[i] = s[i, j] / sjj
                x[i] = theta[i, j]
            for i in range(n):
                if i == j:
                    continue
                ax[i] = 0.0
                for k in range(n):
                    if k != j:
                        ax[i] += a[i, k] * x[k]
            t = rho / sjj
            used = lasso_cd_skip(a, b, t, x, ax, j, inner_tol, inner_max_iter)
            if used > worst:
                worst = used
            quad = 0.0
            for i in range(n):
                if i != j:
                    quad += x[i] * ax[i]
            theta[j, j] = 1.0 / sjj + quad
            w[j, j] = sjj
            for i in range(n):
                if i == j:
                    continue
                theta[i, j] = x[i]
                theta[j, i] = x[i]
                w[i, j] = -ax[i] * sjj
                w[j, i] = w[i, j]
            for i in range(n):
                if i == j:
                    continue
                for k in range(n):
                    if k != j:
                        w[i, k] = a[i, k] + sjj * ax[i] * ax[k]
    return worst


def benchmark_quadform(const double[:, ::1] phis, const double[::1] tau,
                       const double[:, ::1] x, const double[:, ::1] theta):
    """``sum_r (x_r - f_r)' theta (x_r - f_r)`` per particle for the benchmark mean.

    ``x`` is ``(R, 10)``. Non-finite results come back as ``+inf``.
    """
    cdef Py_ssize_t n_part = phis.shape[0], n_obs = tau.shape[0]
    cdef Py_ssize_t p, r, i, k
    cdef double p1, p2, p3, p4, t, acc, row
    cdef double a1, e08, s3, s4, epole
    cdef double e[10]
    cdef double[:, ::1] tt = np.empty((n_obs, 6))
    out_arr = np.empty(n_part)
    cdef double[::1] out = out_arr
    if x.shape[0] != n_obs or x.shape[1] != 10 or theta.shape[0] != 10 or theta.shape[1] != 10:
        raise ValueError("benchmark kernel expects 10 nodes")
    for r in range(n_obs):
        t = tau[r]
        tt[r, 0] = cos(2.0 * t)
        tt[r, 1] = exp(0.1 * t)
        tt[r, 2] = exp(1.0 - t)
        tt[r, 3] = log(1.0 + 2.0 * t)
        tt[r, 4] = cos(2.0 * t + M_PI / 4.0)
        tt[r, 5] = sin(t)
    with nogil:
        for p in range(n_part):
            p1 = phis[p, 0]
            p2 = phis[p, 1]
            p3 = phis[p, 2]
            p4 = phis[p, 3]
            a1 = 5.0 * p1 * p1
            e08 = exp(0.8 * p3)
            s3 = sin(p3)
            s4 = sin(p4)
            epole = exp(1.0 / (1.0 + p3))
            acc = 0.0
            for r in range(n_obs):
                t = tau[r]
                e[0] = x[r, 0] - (-p4 * t + a1)
                e[1] = x[r, 1] - 2.0 * p3 * sin(-p2 * t)
                e[2] = x[r, 2] - (p1 - p3 + p1 * tt[r, 0])
                e[3] = x[r, 3] - (3.0 * p4 + 3.0 * p2 + p1 * tt[r, 1])
                e[4] = x[r, 4] - (p3 * p3 - 2.0 * p1 + 3.0 * p2 - e08 * tt[r, 2])
                e[5] = x[r, 5] - (5.0 * (p4 + p3) - p2 * tt[r, 3])
                e[6] = x[r, 6] - (3.0 * p2 - 0.2 * t * s3)
                e[7] = x[r, 7] - (3.0 * p1 + 5.0 * p3 - 20.0 * s4 * tt[r, 4])
                e[8] = x[r, 8] - (p2 + 4.0 * p4 + 5.0 * epole * t)
                e[9] = x[r, 9] - (5.0 * p1 + 10.0 * p3 - 5.0 * p4 * tt[r, 5])
                for i in range(10):
                    row = 0.0
                    for k in range(10):
                        row = row + theta[i, k] * e[k]
                    acc = acc + e[i] * row
            out[p] = acc if isfinite(acc) else INFINITY
    return out_arr
