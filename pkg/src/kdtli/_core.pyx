# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: integer-order Bessel J and the fused first-harmonic sum.

The Bessel implementation uses the ascending power series for small argument
and Miller's downward recurrence with even-order normalization otherwise;
both deliver close to machine precision, which the toolkit's identity checks
require (rational minimax approximations of textbook heritage stop near 1e-8
and are not good enough here).
"""

from libc.math cimport cos, exp, fabs, sin, sqrt, cbrt

import numpy as np

BACKEND_NAME = "compiled"


cdef double _bessj_series(int m, double x):
    # ascending series sum_k (-1)^k (x/2)^(m+2k) / (k! (m+k)!), m >= 0.
    # Used for x <= 8 where alternating cancellation stays below ~1e3 ulp.
    cdef double half = 0.5 * x
    cdef double term = 1.0
    cdef int k
    for k in range(1, m + 1):          # (x/2)^m / m!
        term *= half / k
    cdef double total = term
    cdef double x2 = -half * half
    k = 1
    while True:
        term *= x2 / (k * <double>(m + k))
        total += term
        if fabs(term) <= 1e-17 * (fabs(total) + 1e-300):
            break
        k += 1
        if k > 300:
            break
    return total


cdef double _bessj_miller(int m, double x):
    # Miller's algorithm: downward recurrence from a start order well above
    # both m and x, normalized with J_0 + 2*sum_{k even >= 2} J_k = 1.
    cdef int start = m if m > <int>x else <int>x
    start += 20 + <int>(8.0 * cbrt(x if x > 1.0 else 1.0))
    if start % 2 == 0:
        start += 1                      # odd start keeps the even-sum bookkeeping simple
    cdef double jp = 0.0                # J_{k+1}
    cdef double jc = 1e-30              # J_k at k = start
    cdef double jm                      # J_{k-1}
    cdef double norm = 0.0              # J_0 + 2 sum even
    cdef double result = 0.0
    cdef bint captured = False
    cdef int k
    for k in range(start, 0, -1):
        jm = (2.0 * k / x) * jc - jp
        jp = jc
        jc = jm
        if (k - 1) % 2 == 0 and (k - 1) > 0:
            norm += 2.0 * jc
        if (k - 1) == m:
            result = jc
            captured = True
        if fabs(jc) > 1e100:            # rescale to dodge overflow
            jc *= 1e-100
            jp *= 1e-100
            norm *= 1e-100
            if captured:
                result *= 1e-100
    # after the loop jc holds J_0 (the (k-1)>0 guard kept it out of the even
    # sum), completing  norm = J_0 + 2*sum_{k even >= 2} J_k  = 1 / scale.
    norm += jc
    return result / norm


cdef double _bessj(int m, double x):
    cdef double sign = 1.0
    if m < 0:
        m = -m
        if m % 2 == 1:
            sign = -sign
    if x < 0.0:
        x = -x
        if m % 2 == 1:
            sign = -sign
    if x == 0.0:
        return 1.0 if m == 0 else 0.0
    if x <= 8.0:
        return sign * _bessj_series(m, x)
    return sign * _bessj_miller(m, x)


def bessel_j(m, x):
    """Integer-order Bessel function of the first kind, scalar."""
    return _bessj(<int>m, <double>x)


def bessel_j_array(m, x):
    """Integer-order Bessel J evaluated on an array of arguments."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef int mm = <int>m
    cdef Py_ssize_t i
    for i in range(xv.shape[0]):
        ov[i] = _bessj(mm, xv[i])
    return out


def first_harmonic(weights, bessel_args, phases, attenuations, prefactor):
    """Weighted complex first harmonic of the fringe pattern.

    Computes sum_i w_i * prefactor * |J_1(arg_i)| * atten_i * exp(1j*phase_i)
    and returns (re, im). Kahan-compensated summation keeps the result
    independent of evaluation order.
    """
    cdef const double[::1] wv = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(bessel_args, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(phases, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(attenuations, dtype=np.float64)
    if not (wv.shape[0] == av.shape[0] == pv.shape[0] == tv.shape[0]):
        raise ValueError("first_harmonic: input arrays must share one length")
    cdef double pref = <double>prefactor
    cdef double re = 0.0, im = 0.0
    cdef double cre = 0.0, cim = 0.0      # Kahan compensations
    cdef double amp, term, y, t
    cdef Py_ssize_t i
    for i in range(wv.shape[0]):
        amp = wv[i] * pref * fabs(_bessj(1, av[i])) * tv[i]
        term = amp * cos(pv[i])
        y = term - cre
        t = re + y
        cre = (t - re) - y
        re = t
        term = amp * sin(pv[i])
        y = term - cim
        t = im + y
        cim = (t - im) - y
        im = t
    return re, im
