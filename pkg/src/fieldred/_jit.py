"""Numba switch.

Kernels are compiled with numba when it is importable and the environment
variable ``FIELDRED_DISABLE_NUMBA`` is unset (or ``0``).  Otherwise the
decorated functions run as plain Python and the dispatchers in
:mod:`fieldred.kernels` pick the vectorised numpy variants where one exists.
"""

from __future__ import annotations

import os

_flag = os.environ.get("FIELDRED_DISABLE_NUMBA", "0").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    import numba as _numba
except ImportError:
    _numba = None

HAVE_NUMBA = _numba is not None


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, identity otherwise."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn
