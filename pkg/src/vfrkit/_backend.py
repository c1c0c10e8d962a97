"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure-NumPy kernels.
Set VFRKIT_BACKEND=python to force the fallback (used by the benchmark
and by tests that compare the two lanes).
"""
import os

from . import _kernels_py

if os.environ.get("VFRKIT_BACKEND", "").lower() == "python":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

jacobi_eigh = _impl.jacobi_eigh
hungarian = _impl.hungarian
