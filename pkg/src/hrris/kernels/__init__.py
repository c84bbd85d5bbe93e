"""Kernel selection: compiled Cython sweep when available, numpy fallback otherwise.

Set HRRIS_PURE_PYTHON=1 to force the fallback (used by the benchmark and the
parity tests).
"""

import os

from ._sweep_py import sweep_impl as python_sweep

try:
    from ._sweep_cy import sweep_impl as compiled_sweep
except ImportError:  # extension not built
    compiled_sweep = None

HAVE_COMPILED = compiled_sweep is not None

if HAVE_COMPILED and not os.environ.get("HRRIS_PURE_PYTHON"):
    sweep = compiled_sweep
    BACKEND = "compiled"
else:
    sweep = python_sweep
    BACKEND = "python"

__all__ = ["sweep", "python_sweep", "compiled_sweep", "HAVE_COMPILED", "BACKEND"]
