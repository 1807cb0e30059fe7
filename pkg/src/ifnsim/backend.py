"""Stepping-kernel selection.

The compiled Cython kernel is preferred when the extension was built;
otherwise the NumPy fallback is used. Both implement the identical update
sequence and produce bit-identical traces. ``IFNSIM_KERNEL=python`` or
``IFNSIM_KERNEL=cython`` forces a choice (the latter raises if the
extension is unavailable).
"""
from __future__ import annotations

import os

from . import _kernel_py


def _load():
    choice = os.environ.get("IFNSIM_KERNEL", "").strip().lower()
    if choice in ("py", "python", "numpy"):
        return _kernel_py
    try:
        from . import _kernel  # type: ignore[attr-defined]
    except ImportError:
        if choice in ("c", "cython", "compiled"):
            raise ImportError(
                "IFNSIM_KERNEL requested the compiled kernel but the "
                "extension is not built; reinstall with a C compiler available"
            )
        return _kernel_py
    return _kernel


kernel = _load()


def active_kernel():
    """The kernel module the engine will use by default."""
    return kernel


def available_kernels() -> list:
    """All importable kernels (compiled first when present)."""
    out = []
    try:
        from . import _kernel  # type: ignore[attr-defined]

        out.append(_kernel)
    except ImportError:
        pass
    out.append(_kernel_py)
    return out
