"""Optional numba acceleration.

Kernels are written twice: a numba ``@njit`` loop version and a vectorised
numpy version.  Setting ``HYPERSLICE_NO_NUMBA=1`` (or running without numba
installed) selects the numpy path.  Both paths consume identical random
streams and return identical results.
"""
from __future__ import annotations

import os

try:
    import numba as nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None
    HAVE_NUMBA = False


def _env_disabled() -> bool:
    return os.environ.get("HYPERSLICE_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and not _env_disabled()


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return nb.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func


def backend_name(use_numba: bool | None = None) -> str:
    if use_numba is None:
        use_numba = USE_NUMBA
    return "numba" if use_numba else "numpy"
