"""Optional numba acceleration.

Set ``EPRPHASE_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. to
compare against them or on platforms without numba.
"""

import os

_DISABLED = os.environ.get("EPRPHASE_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(func):
    """``numba.njit(cache=True, nogil=True)`` when numba is importable, else identity."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)
