"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; otherwise
the numpy lane is used.  ``MOCK2APP_KERNELS=numpy|native`` forces a lane
(useful for benchmarking and for pinning deterministic reruns to one
backend).
"""

from __future__ import annotations

import importlib
import os

from . import _numpy

_FORCED = os.environ.get("MOCK2APP_KERNELS", "").strip().lower()

_native = None
if _FORCED != "numpy":
    try:
        _native = importlib.import_module(__name__ + "._native")
    except ImportError:
        if _FORCED == "native":
            raise ImportError(
                "MOCK2APP_KERNELS=native but the compiled extension is not "
                "available; reinstall with a working C compiler")

_impl = _native if _native is not None else _numpy

BACKEND: str = _impl.NAME

conv2d_forward = _impl.conv2d_forward
conv2d_backward = _impl.conv2d_backward
maxpool2x2_forward = _impl.maxpool2x2_forward
maxpool2x2_backward = _impl.maxpool2x2_backward


def available_backends() -> dict[str, object]:
    """Importable kernel modules keyed by name."""
    out: dict[str, object] = {"numpy": _numpy}
    if _native is not None:
        out["native"] = _native
    return out


def get_backend(name: str):
    try:
        return available_backends()[name]
    except KeyError:
        raise KeyError(f"unknown kernel backend {name!r}; "
                       f"have {sorted(available_backends())}") from None
