"""Hot kernels with a compiled core and a pure-Python fallback.

The Cython extension ``_core`` is used when it was built; otherwise, or when
the environment variable ``FGCOUPLED_PURE_PYTHON`` is set to a non-empty
value other than ``0``, the NumPy implementations in ``_fallback`` are used.
Both expose ``pair_slacks``, ``grid_scan`` and ``picard_affine`` with
identical semantics and bit-identical results.
"""

import os

from . import _fallback
from ._fallback import (
    BANACH,
    CHATTERJEA,
    CONVERGED,
    DIVERGED,
    HYBRID,
    KANNAN,
    MAX_ITER,
    QUASI,
    REICH,
)

_force_python = os.environ.get("FGCOUPLED_PURE_PYTHON", "") not in ("", "0")

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

if _core is not None and not _force_python:
    backend = _core
    BACKEND = "cython"
else:
    backend = _fallback
    BACKEND = "python"

pair_slacks = backend.pair_slacks
grid_scan = backend.grid_scan
picard_affine = backend.picard_affine


def available_backends():
    """Mapping of backend name to module for every backend importable here."""
    out = {"python": _fallback}
    if _core is not None:
        out["cython"] = _core
    return out


__all__ = [
    "BACKEND", "available_backends", "pair_slacks", "grid_scan", "picard_affine",
    "BANACH", "KANNAN", "CHATTERJEA", "REICH", "HYBRID", "QUASI",
    "CONVERGED", "MAX_ITER", "DIVERGED",
]
