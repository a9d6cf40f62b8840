"""Backend selection for the numeric kernels.

The compiled Cython extension ``kdtli._core`` is preferred; the numpy/scipy
reference implementation is the fallback and can be forced with the
environment variable ``KDTLI_PURE_PYTHON=1``. Both expose the same API and
agree to near machine precision (asserted in the test suite).
"""

import os

_forced_pure = os.environ.get("KDTLI_PURE_PYTHON", "").strip().lower() not in ("", "0", "false")

if _forced_pure:
    from . import _reference as _impl
else:
    try:
        from kdtli import _core as _impl   # type: ignore[attr-defined]
    except ImportError:
        from . import _reference as _impl

BACKEND = _impl.BACKEND_NAME
bessel_j = _impl.bessel_j
bessel_j_array = _impl.bessel_j_array
first_harmonic = _impl.first_harmonic

__all__ = ["BACKEND", "bessel_j", "bessel_j_array", "first_harmonic"]
