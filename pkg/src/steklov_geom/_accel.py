"""Numba switch.

Set ``STEKLOV_DISABLE_NUMBA=1`` to route every hot kernel through its
pure-numpy fallback. The flag is read once, at import time. Numba
versions are still defined (lazily compiled) when numba is importable so
that the benchmark can compare both paths in one process.
"""
import os

_FLAG = os.environ.get("STEKLOV_DISABLE_NUMBA", "").strip().lower()
NUMBA_DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False
    _njit = None

USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    if HAVE_NUMBA:
        return _njit(cache=True)(func)
    return func


def pick(numba_impl, numpy_impl):
    return numba_impl if USE_NUMBA else numpy_impl


def backend():
    return "numba" if USE_NUMBA else "numpy"
