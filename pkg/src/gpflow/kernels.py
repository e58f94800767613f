"""Kernel backend selection.

The compiled Cython module is used when it imports; otherwise the numpy
implementation is used. Set ``GPFLOW_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("GPFLOW_PURE_PYTHON", "") not in ("", "0"):
    backend = _kernels_py
else:
    try:
        from . import _kernels_c as backend
    except ImportError:  # extension not built
        backend = _kernels_py

BACKEND = backend.BACKEND
