"""Select the compiled kernels when available, else the NumPy fallback.

Set ``CDQAOA_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py as fallback

if os.environ.get("CDQAOA_PURE_PYTHON", "") not in ("", "0"):
    kernels = fallback
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = fallback

BACKEND = kernels.BACKEND
