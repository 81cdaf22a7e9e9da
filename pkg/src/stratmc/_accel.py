"""Numba switch.

Set ``STRATMC_DISABLE_NUMBA=1`` in the environment to run every kernel
through its pure-numpy path. Without numba installed the numpy path is used
automatically.
"""
import os

_disabled = os.environ.get("STRATMC_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    from numba import njit as _njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _disabled


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise a no-op decorator.

    Kernels are always compiled lazily on first call, so importing the
    package stays cheap even when numba is active.
    """
    if HAVE_NUMBA:
        return _njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda f: f
