# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot numerical kernels.

Mirrors :mod:`besselheat._pycore` function for function; the algorithms are
identical, only the loops run per element in C instead of per array in NumPy.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, log, cos, sin, fabs, ceil, M_PI, INFINITY

from ._scalar import gamma

cnp.import_array()

BACKEND = "cython"

DEF ASYM_TERMS = 12
DEF JV_TERMS = 60
cdef double J_SERIES_MAX = 12.0


def switch_point(double nu):
    return max(30.0, nu * nu)


cdef void _asym_coeffs(double nu, int n, double* c) nogil:
    cdef int k
    cdef double nu2 = 4.0 * nu * nu
    c[0] = 1.0
    for k in range(1, n + 1):
        c[k] = c[k - 1] * (nu2 - (2 * k - 1) * (2 * k - 1)) / (4.0 * k)


cdef inline double _ive_series1(double nu, double z, double rg) nogil:
    # rg = 1 / Gamma(nu + 1)
    cdef double half, term, total, q
    cdef int k = 0
    if z <= 0.0:
        if nu == 0.0:
            return 1.0
        return 0.0 if nu > 0.0 else INFINITY
    half = 0.5 * z
    term = exp(nu * log(half) - z) * rg
    total = term
    q = half * half
    while True:
        term = term * q / ((k + 1.0) * (k + 1.0 + nu))
        total += term
        k += 1
        if k > half + 2 and term <= 1e-17 * total:
            break
    return total


DEF NTAB = 512


cdef inline void _ive_series3(double nu, double z, double rg, const double* r0,
                              const double* r1, const double* r2,
                              double* b0, double* b1, double* b2) nogil:
    # r0[k] = 1/((k+1)(k+1+nu)), r1[k] = 1/(k+2+nu), r2[k] = 1/(k+3+nu)
    cdef double half, q, t0, t1, t2, s0, s1, s2
    cdef int k = 0
    if z < 1e-300:
        z = 1e-300
    half = 0.5 * z
    q = half * half
    t0 = exp(nu * log(half) - z) * rg
    t1 = t0 * half / (nu + 1.0)
    t2 = t1 * half / (nu + 2.0)
    s0 = t0
    s1 = t1
    s2 = t2
    while k < NTAB:
        t0 = t0 * q * r0[k]
        t1 = t0 * half * r1[k]
        t2 = t1 * half * r2[k]
        s0 += t0
        s1 += t1
        s2 += t2
        k += 1
        if k > half + 2 and t0 <= 1e-17 * s0:
            break
    b0[0] = s0
    b1[0] = s1
    b2[0] = s2


cdef inline double _asym_sum(const double* c, double z) nogil:
    cdef double w = 1.0 / (2.0 * z)
    cdef double acc = 0.0
    cdef int k
    for k in range(ASYM_TERMS, -1, -1):
        acc = acc * (-w) + c[k]
    return acc


def ive(double nu, z):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zz = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = zz.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double c[ASYM_TERMS + 1]
    cdef double zs = switch_point(nu)
    cdef double rg = 1.0 / gamma(nu + 1.0)
    _asym_coeffs(nu, ASYM_TERMS, c)
    with nogil:
        for i in range(n):
            if zz[i] >= zs:
                out[i] = _asym_sum(c, zz[i]) / sqrt(2.0 * M_PI * zz[i])
            else:
                out[i] = _ive_series1(nu, zz[i], rg)
    return out


cdef inline void _diffs1(double nu, double z, double zs, const double* c0,
                         const double* c01, const double* c12, double rg0,
                         const double* r0, const double* r1, const double* r2,
                         double* a0, double* d01, double* d12) nogil:
    cdef double r, b0, b1, b2
    if z >= zs:
        r = 1.0 / sqrt(2.0 * M_PI * z)
        a0[0] = _asym_sum(c0, z) * r
        d01[0] = _asym_sum(c01, z) * r
        d12[0] = _asym_sum(c12, z) * r
    else:
        _ive_series3(nu, z, rg0, r0, r1, r2, &b0, &b1, &b2)
        a0[0] = b0
        d01[0] = b0 - b1
        d12[0] = b1 - b2


cdef class _DiffPlan:
    cdef double nu, zs, rg0
    cdef double r0[NTAB]
    cdef double r1[NTAB]
    cdef double r2[NTAB]
    cdef double c0[ASYM_TERMS + 1]
    cdef double c01[ASYM_TERMS + 1]
    cdef double c12[ASYM_TERMS + 1]

    def __init__(self, double nu):
        cdef double c1[ASYM_TERMS + 1]
        cdef double c2[ASYM_TERMS + 1]
        cdef int k
        self.nu = nu
        self.zs = switch_point(nu + 2.0)
        self.rg0 = 1.0 / gamma(nu + 1.0)
        for k in range(NTAB):
            self.r0[k] = 1.0 / ((k + 1.0) * (k + 1.0 + nu))
            self.r1[k] = 1.0 / (k + 2.0 + nu)
            self.r2[k] = 1.0 / (k + 3.0 + nu)
        _asym_coeffs(nu, ASYM_TERMS, self.c0)
        _asym_coeffs(nu + 1.0, ASYM_TERMS, c1)
        _asym_coeffs(nu + 2.0, ASYM_TERMS, c2)
        for k in range(ASYM_TERMS + 1):
            self.c01[k] = self.c0[k] - c1[k]
            self.c12[k] = c1[k] - c2[k]

    cdef inline void eval(self, double z, double* a0, double* d01, double* d12) nogil:
        _diffs1(self.nu, z, self.zs, self.c0, self.c01, self.c12, self.rg0,
                self.r0, self.r1, self.r2, a0, d01, d12)


def ive_diffs(double nu, z):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zz = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = zz.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a0 = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d01 = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d12 = np.empty(n)
    cdef _DiffPlan plan = _DiffPlan(nu)
    cdef double t0, t1, t2
    with nogil:
        for i in range(n):
            plan.eval(zz[i], &t0, &t1, &t2)
            a0[i] = t0
            d01[i] = t1
            d12[i] = t2
    return a0, d01, d12


cdef double _jv_series1(double nu, double z, double rg) nogil:
    cdef double half, term, total, q
    cdef int k = 0
    if z <= 0.0:
        if nu == 0.0:
            return 1.0
        return 0.0 if nu > 0.0 else INFINITY
    half = 0.5 * z
    term = exp(nu * log(half)) * rg
    total = term
    q = -half * half
    while k < 200:
        term = term * q / ((k + 1.0) * (k + 1.0 + nu))
        total += term
        k += 1
        if k > half + 2 and fabs(term) <= 1e-17 * fabs(total) + 1e-300:
            break
    return total


cdef double _jv_asym1(double nu, double z, const double* c) nogil:
    cdef double w = 1.0 / (2.0 * z)
    cdef double P = 0.0, Q = 0.0, term = 1.0, t, at, prev = INFINITY, sign, omega
    cdef int k
    for k in range(JV_TERMS + 1):
        t = c[k] * term
        at = fabs(t)
        if at >= prev:
            break
        sign = 1.0 if (k // 2) % 2 == 0 else -1.0
        if k % 2 == 0:
            P += sign * t
        else:
            Q += sign * t
        prev = at
        if at <= 1e-17:
            break
        term *= w
    omega = z - (0.5 * nu + 0.25) * M_PI
    return sqrt(2.0 / (M_PI * z)) * (P * cos(omega) - Q * sin(omega))


def jv(double nu, z):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zz = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = zz.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double c[JV_TERMS + 1]
    cdef double cb0[JV_TERMS + 1]
    cdef double cb1[JV_TERMS + 1]
    cdef double zb = max(J_SERIES_MAX, 0.55 * nu * nu)
    cdef double rg = 1.0 / gamma(nu + 1.0)
    cdef int nrec = <int>ceil(nu - 2.0)
    cdef double base = nu - nrec
    cdef double jm, jc, jn, x
    cdef int k
    _asym_coeffs(nu, JV_TERMS, c)
    _asym_coeffs(base, JV_TERMS, cb0)
    _asym_coeffs(base + 1.0, JV_TERMS, cb1)
    with nogil:
        for i in range(n):
            x = zz[i]
            if x >= zb:
                out[i] = _jv_asym1(nu, x, c)
            elif x >= J_SERIES_MAX and x > nu:
                jm = _jv_asym1(base, x, cb0)
                jc = _jv_asym1(base + 1.0, x, cb1)
                for k in range(1, nrec):
                    jn = 2.0 * (base + k) / x * jc - jm
                    jm = jc
                    jc = jn
                out[i] = jc if nrec >= 1 else jm
            else:
                out[i] = _jv_series1(nu, x, rg)
    return out


def heat_w(double mu, s, x, y):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ss = np.ascontiguousarray(s, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yy = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = xx.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double c[ASYM_TERMS + 1]
    cdef double zs = switch_point(mu)
    cdef double rg = 1.0 / gamma(mu + 1.0)
    cdef double u, a, sv, xv, yv
    _asym_coeffs(mu, ASYM_TERMS, c)
    with nogil:
        for i in range(n):
            sv = ss[i]
            xv = xx[i]
            yv = yy[i]
            u = xv * yv / (2.0 * sv)
            if u >= zs:
                a = _asym_sum(c, u) / sqrt(2.0 * M_PI * u)
            else:
                a = _ive_series1(mu, u, rg)
            out[i] = sqrt(xv * yv) / (2.0 * sv) * a * exp(-(xv - yv) * (xv - yv) / (4.0 * sv))
    return out


cdef int _K = 0
cdef int _KT = 1
cdef int _DX = 2


cdef _kernel_loop(int kind, double mu, s, x, y):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ss = np.ascontiguousarray(s, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yy = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = xx.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef _DiffPlan plan = _DiffPlan(mu)
    cdef double a0, d01, d12, a1, u, sv, xv, yv, g, br
    with nogil:
        for i in range(n):
            sv = ss[i]
            xv = xx[i]
            yv = yy[i]
            u = xv * yv / (2.0 * sv)
            plan.eval(u, &a0, &d01, &d12)
            g = sqrt(xv * yv) / (2.0 * sv) * exp(-(xv - yv) * (xv - yv) / (4.0 * sv))
            if kind == _K:
                a1 = a0 - d01
                br = (xv - yv) * (xv - yv) * a1 + xv * xv * d01 - yv * yv * d12
                out[i] = g * br / (4.0 * sv * sv)
            elif kind == _KT:
                br = (((xv - yv) * (xv - yv) * a0 + 2.0 * xv * yv * d01) / (4.0 * sv * sv)
                      - (mu + 1.0) * a0 / sv)
                out[i] = g * br
            else:
                a1 = a0 - d01
                br = (mu + 0.5) * a0 / xv + ((yv - xv) * a1 - xv * d01) / (2.0 * sv)
                out[i] = g * br
    return out


def kernel_k(double mu, s, x, y):
    return _kernel_loop(_K, mu, s, x, y)


def kernel_kt(double mu, s, x, y):
    return _kernel_loop(_KT, mu, s, x, y)


def kernel_dxw(double mu, s, x, y):
    return _kernel_loop(_DX, mu, s, x, y)
