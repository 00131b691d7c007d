"""Backend selection for the hot kernels.

Set ``BIPARA_DISABLE_NUMBA=1`` before importing :mod:`bipara` to force the
pure-numpy path. The flag is read once at import time; use
:func:`bipara.kernels.set_backend` to switch at runtime.
"""

import os

ENV_FLAG = "BIPARA_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional extra
    numba = None
    HAVE_NUMBA = False


def numba_requested():
    return os.environ.get(ENV_FLAG, "").strip().lower() not in {"1", "true", "yes", "on"}


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, else identity."""
    if HAVE_NUMBA:
        return numba.njit(cache=True)(func)
    return func
