"""Fixed-step integration kernels with compiled and pure-Python twins.

The Cython extension is used when it imported cleanly; otherwise the
pure-Python module takes over with identical semantics.  Set
GYROKIT_PURE_PYTHON=1 to force the fallback (the benchmark does this
implicitly by importing both modules directly).
"""

import os

from . import _llg_py

if os.environ.get("GYROKIT_PURE_PYTHON", "").strip().lower() in {"1", "true", "yes"}:
    _impl = _llg_py
    BACKEND = "python"
else:
    try:
        from . import _llg_cy as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _llg_py
        BACKEND = "python"

rk4_static = _impl.rk4_static
rk4_sampled = _impl.rk4_sampled

__all__ = ["BACKEND", "rk4_static", "rk4_sampled"]
