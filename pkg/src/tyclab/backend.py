"""Kernel backend selection.

The hot numeric kernels in :mod:`tyclab.kernels` are written once in a
numba-compilable numpy style. By default they are JIT-compiled with
``numba.njit``; setting the environment variable ``TYCLAB_NUMBA=0`` (or
``off``/``false``/``numpy``) before import selects the pure-numpy fallback
path instead. The fallback is identical code, just slower.
"""
from __future__ import annotations

import os

ENV_FLAG = "TYCLAB_NUMBA"

_DISABLE_VALUES = {"0", "off", "false", "no", "numpy"}


def _numba_requested() -> bool:
    return os.environ.get(ENV_FLAG, "auto").strip().lower() not in _DISABLE_VALUES


NUMBA_ENABLED = False
if _numba_requested():
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False


def jit_kernel(func):
    """njit-wrap ``func`` when the numba backend is active, else return it as is."""
    if NUMBA_ENABLED:
        import numba

        return numba.njit(cache=True, fastmath=False)(func)
    return func


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
