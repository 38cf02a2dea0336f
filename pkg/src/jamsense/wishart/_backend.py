"""Select the compiled kernels when importable, else the pure-Python twin.

Set ``JAMSENSE_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("JAMSENSE_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
    COMPILED = False
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
        COMPILED = True
    except ImportError:
        kernels = _kernels_py
        COMPILED = False

BACKEND = "cython" if COMPILED else "python"
