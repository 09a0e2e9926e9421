"""Kernel backend selection.

The compiled Cython module is preferred; the numpy fallback is used when the
extension was not built. Set ``STAM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("STAM_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

supermodular_scan = _impl.supermodular_scan
supermodular_local_scan = _impl.supermodular_local_scan
extreme_supports = _impl.extreme_supports

__all__ = [
    "BACKEND",
    "supermodular_scan",
    "supermodular_local_scan",
    "extreme_supports",
]
