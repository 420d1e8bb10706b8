"""Sampling kernels with a compiled core and a pure-Python fallback.

The compiled backend is used when its extension module is importable;
``SWITCHDIFF_BACKEND=python`` forces the fallback and
``SWITCHDIFF_BACKEND=cython`` makes a missing extension a hard error.

Results are bit-reproducible within a backend. Across backends the integer
stream is identical and derived doubles agree to within 1 ulp per
transcendental call (numpy's SIMD log/exp vs libm).
"""

import os

_requested = os.environ.get("SWITCHDIFF_BACKEND", "auto").strip().lower()

if _requested in ("python", "fallback"):
    from . import _fallback as _impl
elif _requested in ("auto", "", "cython"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "cython":
            raise
        from . import _fallback as _impl
else:
    raise ValueError(
        f"SWITCHDIFF_BACKEND={_requested!r}: expected 'auto', 'cython' or 'python'"
    )

BACKEND = _impl.BACKEND
uniforms = _impl.uniforms
cycle_time_totals = _impl.cycle_time_totals
cycle_terminal_state = _impl.cycle_terminal_state
horizon_terminal_exact = _impl.horizon_terminal_exact
horizon_terminal_em = _impl.horizon_terminal_em

__all__ = [
    "BACKEND",
    "uniforms",
    "cycle_time_totals",
    "cycle_terminal_state",
    "horizon_terminal_exact",
    "horizon_terminal_em",
]
