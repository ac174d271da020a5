"""Kernel backend selection.

The compiled extension is used when it imports; ``SIMCLUST_PURE_PYTHON=1``
forces the pure-Python fallback (useful for debugging and for the backend
benchmark).
"""

import os

from . import _fallback

BACKEND = "python"
kernels = _fallback

if not os.environ.get("SIMCLUST_PURE_PYTHON"):
    try:
        from . import _kernels as kernels  # noqa: F811

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        kernels = _fallback

OK = _fallback.OK
UNDERFLOW = _fallback.UNDERFLOW


def has_compiled():
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True


def get_kernels(name=None):
    """Return the kernel module for ``name`` ('compiled' or 'python')."""
    if name is None:
        return kernels
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
