"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``HIVEVEC_PURE_PYTHON=1`` to force the numpy kernel at import time.
"""

from __future__ import annotations

import contextlib
import os

from hivevec.raster import _fallback

try:
    from hivevec.raster import _kernels
except ImportError:  # extension not built
    _kernels = None

_KERNELS = {"python": _fallback.distance_field}
if _kernels is not None:
    _KERNELS["cython"] = _kernels.distance_field

if os.environ.get("HIVEVEC_PURE_PYTHON", "").strip() not in ("", "0") or _kernels is None:
    _active = "python"
else:
    _active = "cython"


def available() -> list[str]:
    return sorted(_KERNELS)


def active() -> str:
    return _active


def distance_field(*args):
    return _KERNELS[_active](*args)


def set_backend(name: str) -> None:
    global _active
    if name not in _KERNELS:
        raise ValueError(f"backend {name!r} unavailable; have {available()}")
    _active = name


@contextlib.contextmanager
def using(name: str):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)
