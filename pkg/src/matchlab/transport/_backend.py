"""Solver backend selection.

The compiled extension (``matchlab.transport._kernels``) is preferred; the
pure-Python module is the fallback.  ``MATCHLAB_BACKEND=python|compiled``
forces a choice (``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os
from types import ModuleType

from ..errors import ConfigurationError
from . import _py_kernels

_COMPILED: ModuleType | None
try:
    from . import _kernels as _COMPILED  # type: ignore[attr-defined]
except ImportError:
    _COMPILED = None


def available_backends() -> dict[str, ModuleType]:
    out = {"python": _py_kernels}
    if _COMPILED is not None:
        out["compiled"] = _COMPILED
    return out


def get_backend(name: str) -> ModuleType:
    backends = available_backends()
    if name not in backends:
        raise ConfigurationError(
            f"backend {name!r} unavailable; have {sorted(backends)}"
        )
    return backends[name]


def _select() -> ModuleType:
    forced = os.environ.get("MATCHLAB_BACKEND", "").strip().lower()
    if forced in ("python", "compiled"):
        return get_backend(forced)
    if forced and forced != "auto":
        raise ConfigurationError(f"MATCHLAB_BACKEND must be auto|python|compiled, got {forced!r}")
    return _COMPILED if _COMPILED is not None else _py_kernels


active = _select()


def active_backend_name() -> str:
    return active.BACKEND_NAME
