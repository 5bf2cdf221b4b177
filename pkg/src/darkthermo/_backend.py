"""Select the steady-state kernels at import time.

The compiled ``_kernels`` extension is used when it was built; otherwise the
numpy fallback takes over.  Set ``DARKTHERMO_PURE_PYTHON=1`` to force the
fallback.
"""

import os

from . import _fallback

try:
    if os.environ.get("DARKTHERMO_PURE_PYTHON", "").strip() not in ("", "0"):
        raise ImportError("compiled kernel disabled by DARKTHERMO_PURE_PYTHON")
    from . import _kernels
except ImportError:
    _kernels = None

BACKEND = "cython" if _kernels is not None else "python"


def get_solver(name=None):
    """Return ``solve_shifted`` of the named backend (default: active one)."""
    name = name or BACKEND
    if name == "python":
        return _fallback.solve_shifted
    if name == "cython":
        if _kernels is None:
            raise ImportError("compiled kernel darkthermo._kernels is not available")
        return _kernels.solve_shifted
    raise ValueError(f"unknown backend {name!r}")


def get_condition(name=None):
    """Return ``condition_shifted`` of the named backend (default: active one)."""
    name = name or BACKEND
    if name == "python":
        return _fallback.condition_shifted
    if name == "cython":
        if _kernels is None:
            raise ImportError("compiled kernel darkthermo._kernels is not available")
        return _kernels.condition_shifted
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    return ["python"] + (["cython"] if _kernels is not None else [])
