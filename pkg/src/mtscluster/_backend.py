"""Select the kernel implementation at import time.

The compiled extension is preferred. Setting ``MTSCLUSTER_PURE_PYTHON=1``
forces the pure-Python kernels (useful for debugging and benchmarking).
"""

from __future__ import annotations

import os

from . import _pycore

if os.environ.get("MTSCLUSTER_PURE_PYTHON", "").strip() not in ("", "0"):
    kernels = _pycore
    BACKEND = "python"
else:
    try:
        from . import _core as kernels  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        kernels = _pycore
        BACKEND = "python"


def use(name: str) -> None:
    """Switch backend at runtime (``"cython"`` or ``"python"``)."""
    global kernels, BACKEND
    if name == "python":
        kernels, BACKEND = _pycore, "python"
    elif name == "cython":
        from . import _core  # type: ignore[attr-defined]

        kernels, BACKEND = _core, "cython"
    else:
        raise ValueError(f"unknown backend {name!r}")
