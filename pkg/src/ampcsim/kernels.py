"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``AMPCSIM_PURE=1`` to force the pure-Python kernels.
"""
from __future__ import annotations

import logging
import os

log = logging.getLogger(__name__)

if os.environ.get("AMPCSIM_PURE", "") not in ("", "0"):
    from . import _pykernels as impl
    BACKEND = "python"
else:
    try:
        from . import _ckernels as impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _pykernels as impl
        BACKEND = "python"
        log.info("compiled kernels unavailable; using the pure-Python fallback")

_NAMES = ("prim_batch", "mis_batch", "mm_batch", "walk_batch", "chase_batch", "walk_min_batch")


def use_backend(name: str) -> str:
    """Switch every kernel to ``"cython"`` or ``"python"``; returns the previous backend."""
    global BACKEND
    if name == "cython":
        from . import _ckernels as mod
    elif name == "python":
        from . import _pykernels as mod
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    prev = BACKEND
    for fn in _NAMES:
        globals()[fn] = getattr(mod, fn)
    BACKEND = name
    return prev


use_backend(BACKEND)

from ._pykernels import (  # noqa: E402  (shared constants)
    COMPONENT_DONE, EXPLORED, HIT_LOWER, IN_SET, NOT_IN_SET, TRUNCATED,
)
