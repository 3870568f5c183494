"""Pick the compiled kernels when available, else the NumPy fallback.

Set ``EDGEADAIN_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and not os.environ.get("EDGEADAIN_PURE_PYTHON"):
    kernels = _compiled
    BACKEND = "compiled"
else:
    kernels = _pykernels
    BACKEND = "python"


def get_kernels(name=None):
    """Return the kernel module for ``name`` ("compiled", "python" or None = active)."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built; run `python setup.py build_ext --inplace`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    return ["compiled", "python"] if _compiled is not None else ["python"]
