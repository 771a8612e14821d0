"""Kernel dispatch: compiled extension when built, NumPy otherwise.

Set ``GLATAIS_PURE_PYTHON=1`` before import to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("GLATAIS_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py
    else:
        BACKEND = "cython"
else:
    _impl = _kernels_py

glasso_sweep = _impl.glasso_sweep
lasso_cd = _impl.lasso_cd
benchmark_quadform = _impl.benchmark_quadform

__all__ = ["BACKEND", "benchmark_quadform", "glasso_sweep", "lasso_cd"]
