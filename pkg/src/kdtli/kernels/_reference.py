"""Pure numpy/scipy fallback for the compiled kernels.

Mirrors the API of the Cython extension ``kdtli._core`` exactly; selected at
import time by :mod:`kdtli.kernels` when the extension is unavailable or
``KDTLI_PURE_PYTHON=1`` is set.
"""

from math import fsum

import numpy as np
from scipy.special import jv

BACKEND_NAME = "reference"


def bessel_j(m, x):
    """Integer-order Bessel function of the first kind, scalar."""
    return float(jv(int(m), float(x)))


def bessel_j_array(m, x):
    """Integer-order Bessel J evaluated on an array of arguments."""
    return np.asarray(jv(int(m), np.asarray(x, dtype=float)), dtype=float)


def first_harmonic(weights, bessel_args, phases, attenuations, prefactor):
    """Weighted complex first harmonic of the fringe pattern.

    Computes sum_i w_i * prefactor * |J_1(arg_i)| * atten_i * exp(1j*phase_i)
    and returns (re, im). Summation is compensated (math.fsum), so the result
    is independent of evaluation order.
    """
    w = np.asarray(weights, dtype=float)
    args = np.asarray(bessel_args, dtype=float)
    ph = np.asarray(phases, dtype=float)
    att = np.asarray(attenuations, dtype=float)
    amp = w * prefactor * np.abs(jv(1, args)) * att
    return fsum(amp * np.cos(ph)), fsum(amp * np.sin(ph))
