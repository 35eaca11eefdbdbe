"""Kernel backend selection.

The compiled Cython core is preferred when importable; the pure-NumPy module
is the fallback. ``TAMPKIT_BACKEND=python|compiled`` forces a choice.
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCED = os.environ.get("TAMPKIT_BACKEND", "").lower()

if _FORCED == "python":
    kernels = _kernels_py
    BACKEND_NAME = "python"
else:
    try:
        from . import _kernels_c as kernels  # type: ignore[no-redef]
        BACKEND_NAME = "compiled"
    except ImportError:
        if _FORCED == "compiled":
            raise
        kernels = _kernels_py
        BACKEND_NAME = "python"


def get_backend(name: str | None = None):
    """Return a kernel module by name ('python', 'compiled', or None for the default)."""
    if name in (None, ""):
        return kernels
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels_c
        return _kernels_c
    raise ValueError(f"unknown backend {name!r}")
