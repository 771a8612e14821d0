"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel and problem size with the best-of-N wall time of
each backend and the speedup.
"""
import argparse
import timeit

import numpy as np

from glatais import _kernels_py

try:
    from glatais import _kernels as compiled
except ImportError:
    compiled = None


def spd(rng, n):
    x = rng.standard_normal((n, 3 * n))
    return x @ x.T / (3 * n)


def bench_lasso(rng, n):
    a = spd(rng, n) + 0.1 * np.eye(n)
    b = rng.standard_normal(n)

    def go(impl):
        x = np.zeros(n)
        impl.lasso_cd(a, b, 0.2, x)
    return go


def bench_sweep(rng, n):
    s = spd(rng, n)

    def go(impl):
        theta = np.diag(1 / np.diag(s))
        w = np.diag(np.diag(s)).copy()
        for _ in range(5):
            impl.glasso_sweep(theta, w, s, 0.1)
    return go


def bench_quadform(rng, n_particles):
    phis = rng.uniform(-2, 2, (n_particles, 4))
    tau = np.linspace(0, 4, 100)
    x = rng.standard_normal((100, 10))
    theta = spd(rng, 10)

    def go(impl):
        impl.benchmark_quadform(phis, tau, x, theta)
    return go


CASES = [
    ("lasso_cd", "n=10", bench_lasso, 10),
    ("lasso_cd", "n=50", bench_lasso, 50),
    ("glasso_sweep x5", "n=10", bench_sweep, 10),
    ("glasso_sweep x5", "n=40", bench_sweep, 40),
    ("benchmark_quadform", "P=300 R=100", bench_quadform, 300),
    ("benchmark_quadform", "P=3000 R=100", bench_quadform, 3000),
]


def best_time(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if compiled is None:
        print("compiled extension not built; only the NumPy fallback is available")
    print(f"{'kernel':20s} {'size':14s} {'numpy':>12s} {'cython':>12s} {'speedup':>8s}")
    for name, size, make, arg in CASES:
        go = make(np.random.default_rng(0), arg)
        t_py = best_time(lambda: go(_kernels_py), args.repeat)
        if compiled is None:
            print(f"{name:20s} {size:14s} {t_py * 1e3:10.3f}ms {'-':>12s} {'-':>8s}")
            continue
        t_c = best_time(lambda: go(compiled), args.repeat)
        print(f"{name:20s} {size:14s} {t_py * 1e3:10.3f}ms {t_c * 1e3:10.3f}ms {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
