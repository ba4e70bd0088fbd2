"""Recurrence kernels: compiled Cython core with a numpy fallback.

The compiled module is used when it imports cleanly. Set
``ASPECTTAG_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _recurrence_py as python_backend

compiled_backend = None
if os.environ.get("ASPECTTAG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _recurrence as compiled_backend
    except ImportError:
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

__all__ = ["backend", "BACKEND", "python_backend", "compiled_backend"]
