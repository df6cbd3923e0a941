"""Hot numerical kernels with a compiled core and a numpy fallback.

The compiled extension ``_native`` is used when it imports cleanly; set the
environment variable ``DOAKIT_PURE_PYTHON=1`` to force the numpy fallback.
Both backends expose the same functions:

diagonal_sums(B)
    Lag sums of a square matrix, lag ``m - n`` from ``-(M-1)`` to ``M-1``.
scan_quadratic(sums, psi)
    ``a(psi)^H B a(psi)`` over a phase grid, from the lag sums of ``B``.
local_maxima(power)
    Strict-left / non-strict-right local maxima.
aberth(coeffs, init, max_iter)
    Simultaneous polynomial root iteration.
newton_step(coeffs, roots)
    One guarded Newton correction per root.
"""

import os
from types import ModuleType

from . import _python

__all__ = [
    "BACKEND",
    "available_backends",
    "get_backend",
    "diagonal_sums",
    "scan_quadratic",
    "local_maxima",
    "aberth",
    "newton_step",
]

try:
    from . import _native
except ImportError:  # extension not built
    _native = None


def available_backends():
    names = ["python"]
    if _native is not None:
        names.insert(0, "native")
    return names


def get_backend(name: str) -> ModuleType:
    if name == "python":
        return _python
    if name == "native":
        if _native is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _native
    raise ValueError(f"unknown kernel backend {name!r}")


if _native is not None and os.environ.get("DOAKIT_PURE_PYTHON", "") in ("", "0"):
    _impl = _native
    BACKEND = "native"
else:
    _impl = _python
    BACKEND = "python"

diagonal_sums = _impl.diagonal_sums
scan_quadratic = _impl.scan_quadratic
local_maxima = _impl.local_maxima
aberth = _impl.aberth
newton_step = _impl.newton_step
