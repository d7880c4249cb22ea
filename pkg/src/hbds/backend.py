"""Kernel backend selection.

The mobility fill and pairwise contact sweep dominate runtime, so they exist
twice: a numba @njit version and a pure-numpy fallback with identical
floating-point behavior. HBDS_BACKEND=numba|numpy picks the default; numpy is
used automatically when numba is not importable.
"""

from __future__ import annotations

import os

_ENV_VAR = "HBDS_BACKEND"
_VALID = ("numba", "numpy")


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def default_backend() -> str:
    name = os.environ.get(_ENV_VAR, "").strip().lower()
    if name:
        if name not in _VALID:
            raise ValueError(f"{_ENV_VAR} must be one of {_VALID}, got {name!r}")
        return name
    return "numba" if _numba_available() else "numpy"


def get_kernels(name: str | None = None):
    """Return the kernel module for ``name`` (or the environment default)."""
    chosen = name if name is not None else default_backend()
    if chosen == "numpy":
        from . import _kernels_numpy
        return _kernels_numpy
    if chosen == "numba":
        from . import _kernels_numba
        return _kernels_numba
    raise ValueError(f"unknown backend {chosen!r}, expected one of {_VALID}")
