"""Numba switch.

Set ``COARSEKIT_DISABLE_NUMBA=1`` to force the pure-numpy kernels. When numba
is not importable the fallback is used automatically.
"""
import os

_disabled = os.environ.get("COARSEKIT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:  # pragma: no cover - depends on environment
    if _disabled:
        raise ImportError
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise a no-op decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


BACKEND = "numba" if HAVE_NUMBA else "numpy"
