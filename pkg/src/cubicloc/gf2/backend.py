"""Select the GF(2) elimination kernel at import time.

The compiled extension is preferred. Setting ``CUBICLOC_PURE_PYTHON=1``
forces the numpy fallback (used by the benchmark and the backend tests).
"""
import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

KERNELS = {"python": _fallback.echelon_inplace}
if _compiled is not None:
    KERNELS["cython"] = _compiled.echelon_inplace

if os.environ.get("CUBICLOC_PURE_PYTHON") or _compiled is None:
    BACKEND = "python"
else:
    BACKEND = "cython"

echelon_inplace = KERNELS[BACKEND]


def use_backend(name: str) -> None:
    """Switch the active kernel (``"cython"`` or ``"python"``)."""
    global BACKEND, echelon_inplace
    if name not in KERNELS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(KERNELS)}")
    BACKEND = name
    echelon_inplace = KERNELS[name]
