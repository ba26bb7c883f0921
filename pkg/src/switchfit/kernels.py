"""Selects the filter kernel backend at import time.

The compiled extension is preferred when it imported cleanly; setting
SWITCHFIT_KERNEL=py or SWITCHFIT_KERNEL=c forces a backend (the latter
raises if the extension is unavailable).
"""

from __future__ import annotations

import os

from . import _kernel_py

try:
    from . import _kernel_c
except ImportError:
    _kernel_c = None

_BACKENDS = {"py": _kernel_py}
if _kernel_c is not None:
    _BACKENDS["c"] = _kernel_c


def get_backend(name: str | None = None):
    """Return a kernel module; ``name`` overrides the default choice."""
    if name is None:
        name = os.environ.get("SWITCHFIT_KERNEL", "").strip().lower() or None
    if name is None:
        return _kernel_c if _kernel_c is not None else _kernel_py
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown kernel backend {name!r}; available: {sorted(_BACKENDS)}"
        ) from None


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def active_backend_name() -> str:
    backend = get_backend()
    return "c" if backend.IS_COMPILED else "py"
