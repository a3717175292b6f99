# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.  Same contract as ``_kernels_py``."""
import numpy as np
from libc.math cimport sqrt, fabs

DEF OK = 0
DEF FORBIDDEN = 1
DEF NON_MONOTONE = 2
DEF NO_BRACKET = 3
DEF MAX_EXPAND = 200
DEF MAX_ITER = 400


cdef inline void _residual(double u, double g0, double c2, const double[:, ::1] coeffs,
                           Py_ssize_t i, Py_ssize_t K, double* g, double* dg) noexcept nogil:
    cdef double q = 0.0, dq = 0.0, a
    cdef Py_ssize_t j
    for j in range(K - 1, -1, -1):
        a = coeffs[i, j]
        if j == 0:
            a += c2
        dq = dq * u + q
        q = q * u + a
    dg[0] = dq * u + q
    g[0] = q * u + g0


cdef signed char _solve_one(double w, double d0, const double[:, ::1] coeffs, Py_ssize_t i,
                            Py_ssize_t K, double c2, double u_init, double rtol,
                            double* P) noexcept nogil:
    cdef double sq, g0, lo, hi, glo, ghi, u, g, dg, newton, new, step
    cdef Py_ssize_t it
    cdef bint allzero = True

    if w < 0:
        return FORBIDDEN
    if d0 >= 0:
        sq = sqrt(d0)
        g0 = (sq - w) * (sq + w)
    else:
        g0 = d0 - w * w
    if g0 > 0:
        return FORBIDDEN
    if g0 == 0:
        P[0] = 0.0
        return OK

    for it in range(K):
        if coeffs[i, it] != 0.0:
            allzero = False
            break
    if allzero:
        P[0] = sqrt(-g0 / c2)
        return OK

    lo = 0.0
    glo = g0
    hi = u_init
    _residual(hi, g0, c2, coeffs, i, K, &ghi, &dg)
    for it in range(MAX_EXPAND):
        if ghi > 0:
            break
        if ghi < glo:
            return NON_MONOTONE
        lo = hi
        glo = ghi
        hi *= 4.0
        _residual(hi, g0, c2, coeffs, i, K, &ghi, &dg)
    if ghi <= 0:
        return NO_BRACKET

    u = lo - glo * (hi - lo) / (ghi - glo)
    for it in range(MAX_ITER):
        _residual(u, g0, c2, coeffs, i, K, &g, &dg)
        if dg <= 0:
            return NON_MONOTONE
        if g == 0:
            break
        if g < 0:
            lo = u
        else:
            hi = u
        newton = u - g / dg
        if newton > lo and newton < hi:
            new = newton
        else:
            new = 0.5 * (lo + hi)
        step = fabs(new - u)
        u = new
        if step <= rtol * fabs(new) or hi - lo <= rtol * hi:
            break
    P[0] = sqrt(u)
    return OK


def momentum_roots(w, d0, coeffs, double c2, double u_init, double rtol=1e-15):
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[::1] dv = np.ascontiguousarray(d0, dtype=np.float64)
    cdef Py_ssize_t n = wv.shape[0]
    cdef const double[:, ::1] cv = np.ascontiguousarray(coeffs, dtype=np.float64).reshape(n, -1)
    cdef Py_ssize_t K = cv.shape[1]
    P_arr = np.full(n, np.nan)
    st_arr = np.empty(n, dtype=np.int8)
    cdef double[::1] Pv = P_arr
    cdef signed char[::1] sv = st_arr
    cdef Py_ssize_t i
    cdef double p
    with nogil:
        for i in range(n):
            p = 0.0
            sv[i] = _solve_one(wv[i], dv[i], cv, i, K, c2, u_init, rtol, &p)
            if sv[i] == OK:
                Pv[i] = p
    return P_arr, st_arr
