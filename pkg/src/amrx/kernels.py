"""Backend selection for the hot loops.

The compiled `_kernels` extension is used when it was built; otherwise, or
when ``AMRX_PURE_PYTHON=1`` is set, the pure-Python `_pykernels` stand in.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("AMRX_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    else:
        _impl = _compiled
        BACKEND = "cython"
else:
    _compiled = None

hill_climb = _impl.hill_climb
match_count = _impl.match_count
em_estep = _impl.em_estep


def backends():
    """Available implementations by name, for cross-checking and benchmarks."""
    out = {"python": _pykernels}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
