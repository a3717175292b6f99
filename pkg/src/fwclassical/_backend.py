"""Kernel backend selection.

The compiled extension is used when it was built; otherwise, or when
``FWCLASSICAL_PURE_PYTHON`` is set to a non-empty value other than ``0``,
the numpy fallback is used.
"""
import os

from . import _kernels_py

_force_python = os.environ.get("FWCLASSICAL_PURE_PYTHON", "") not in ("", "0")

try:
    if _force_python:
        raise ImportError("pure-Python backend requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py

OK = _kernels_py.OK
FORBIDDEN = _kernels_py.FORBIDDEN
NON_MONOTONE = _kernels_py.NON_MONOTONE
NO_BRACKET = _kernels_py.NO_BRACKET


def get_kernels(name=None):
    """Return the kernel module for ``name`` ('cython' or 'python'; default: active)."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def momentum_roots(w, d0, coeffs, c2, u_init, rtol=1e-15):
    return _impl.momentum_roots(w, d0, coeffs, c2, u_init, rtol)
