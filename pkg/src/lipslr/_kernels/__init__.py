"""Hot kernels with a compiled core and a pure-Python fallback.

The compiled module is used when importable unless ``LIPSLR_KERNELS=python``
is set in the environment.  ``BACKEND`` names the active implementation.
"""
import os

from . import _fallback

fallback = _fallback
native = None
if os.environ.get("LIPSLR_KERNELS", "").lower() != "python":
    try:
        from . import _native as native
    except ImportError:
        native = None

_NAMES = ("simplex_iterate", "pressure_F", "pressure_dF", "pipe_pressure", "pipe_pressure_many")


def set_backend(name: str) -> str:
    """Switch the active implementation (``"native"`` or ``"python"``); returns the previous one."""
    global BACKEND
    if name == "native" and native is None:
        raise RuntimeError("compiled kernels are not available")
    if name not in ("native", "python"):
        raise ValueError(f"unknown kernel backend {name!r}")
    impl = native if name == "native" else _fallback
    g = globals()
    for n in _NAMES:
        g[n] = getattr(impl, n)
    prev = g.get("BACKEND")
    BACKEND = name
    return prev


BACKEND = None
set_backend("native" if native is not None else "python")

from ._fallback import (  # noqa: E402
    BUDGET, INFEASIBLE, NUMERICAL, OPTIMAL, UNBOUNDED,
    PIPE_BRACKET, PIPE_NOCONV, PIPE_OK,
)

__all__ = [
    "BACKEND", "fallback", "native", "set_backend", "simplex_iterate", "pressure_F", "pressure_dF",
    "pipe_pressure", "pipe_pressure_many", "OPTIMAL", "INFEASIBLE", "UNBOUNDED",
    "BUDGET", "NUMERICAL", "PIPE_OK", "PIPE_BRACKET", "PIPE_NOCONV",
]
