"""Numba switch.

Set HDPREDUCE_DISABLE_JIT=1 to route every hot kernel through its pure-numpy
twin. If numba is not importable the numpy path is used regardless.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

JIT_AVAILABLE = numba is not None
JIT_DISABLED = os.environ.get("HDPREDUCE_DISABLE_JIT", "").strip().lower() in (
    "1", "true", "yes", "on")
JIT_ENABLED = JIT_AVAILABLE and not JIT_DISABLED


def njit(fn):
    if not JIT_AVAILABLE:  # pragma: no cover
        return fn
    return numba.njit(cache=True)(fn)
