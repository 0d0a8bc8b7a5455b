# cython: language_level=3
"""Compiled hot loops. Semantics mirror flk._fallback exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, isfinite, M_PI, pow

cnp.import_array()

ctypedef cnp.float64_t f64


def neumaier_sum(const f64[:] x):
    """Return (sum, sum of |x|, index of first non-finite term or -1)."""
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double s = 0.0, c = 0.0, t, v, sabs = 0.0
    for i in range(n):
        v = x[i]
        if not isfinite(v):
            return 0.0, 0.0, i
        t = s + v
        if fabs(s) >= fabs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        sabs += fabs(v)
    return s + c, sabs, -1


def checkpoint_sums(const f64[:] x, const cnp.int64_t[:] idx):
    """Compensated prefix sums sum(x[:idx[k]]) for ascending idx."""
    cdef Py_ssize_t i = 0, k, m = idx.shape[0]
    cdef double s = 0.0, c = 0.0, t, v, sabs = 0.0
    out = np.empty(m, dtype=np.float64)
    outabs = np.empty(m, dtype=np.float64)
    cdef f64[:] o = out
    cdef f64[:] oa = outabs
    for k in range(m):
        while i < idx[k]:
            v = x[i]
            t = s + v
            if fabs(s) >= fabs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
            sabs += fabs(v)
            i += 1
        o[k] = s + c
        oa[k] = sabs
    return out, outabs


cdef inline double horner(const f64[:] c, Py_ssize_t deg, double n) nogil:
    cdef double r = 0.0
    cdef Py_ssize_t j
    for j in range(deg, -1, -1):
        r = r * n + c[j]
    return r


def twisted_terms(long n0, long n_end, double kval0,
                  const f64[:] kup, const f64[:] klow, double kx,
                  const f64[:] num, const f64[:] den,
                  const f64[:] acc_init, const cnp.int64_t[:] acc_scale,
                  const f64[:] acc_shift, const cnp.int64_t[:] acc_order,
                  const f64[:] p_coef, const cnp.int64_t[:] p_acc,
                  const cnp.int64_t[:] p_power, const f64[:, :] p_poly,
                  const cnp.int64_t[:] p_deg):
    """Terms kernel(n) * R(n) * h(n) for n = n0..n_end.

    kernel(n) = prod (kup)_n / prod (klow)_n * kx^n, advanced by its term
    ratio from kval0 = kernel(n0).  R = num/den (ascending coefficients).
    h(n) = sum_i p_coef[i] * poly_i(n) * A_{p_acc[i]}(n)^{p_power[i]}
    where A_a(n) = H^{(order)}_{scale*n + shift}, started from acc_init and
    advanced with Kahan-compensated increments.  No pieces means h = 1.
    """
    cdef Py_ssize_t length = n_end - n0 + 1
    cdef Py_ssize_t na = acc_init.shape[0], npc = p_coef.shape[0]
    cdef Py_ssize_t nu = kup.shape[0], nl = klow.shape[0]
    cdef Py_ssize_t dn = num.shape[0] - 1, dd = den.shape[0] - 1
    out = np.empty(length, dtype=np.float64)
    cdef f64[:] o = out
    acc_arr = np.array(acc_init, dtype=np.float64)
    carry_arr = np.zeros(na, dtype=np.float64)
    cdef f64[:] acc = acc_arr
    cdef f64[:] carry = carry_arr
    cdef double kv = kval0, nn, r, h, a, base, inc, y, t, pw
    cdef long n, j, sc
    cdef Py_ssize_t i, q
    for q in range(length):
        n = n0 + q
        nn = <double>n
        if q > 0:
            r = kx
            for i in range(nu):
                r *= kup[i] + nn - 1.0
            for i in range(nl):
                r /= klow[i] + nn - 1.0
            kv *= r
            for i in range(na):
                sc = acc_scale[i]
                base = sc * (nn - 1.0) + acc_shift[i]
                inc = 0.0
                for j in range(1, sc + 1):
                    if acc_order[i] == 1:
                        inc += 1.0 / (base + j)
                    else:
                        inc += 1.0 / pow(base + j, <double>acc_order[i])
                y = inc - carry[i]
                t = acc[i] + y
                carry[i] = (t - acc[i]) - y
                acc[i] = t
        if npc == 0:
            h = 1.0
        else:
            h = 0.0
            for i in range(npc):
                pw = 1.0
                if p_acc[i] >= 0:
                    a = acc[p_acc[i]]
                    for j in range(p_power[i]):
                        pw *= a
                h += p_coef[i] * horner(p_poly[i], p_deg[i], nn) * pw
        o[q] = kv * horner(num, dn, nn) / horner(den, dd, nn) * h
    return out


def hyp_terms(const f64[:] a, const f64[:] b, double x, long nterms):
    """First nterms terms of the pFq series by the term-ratio recurrence."""
    out = np.empty(nterms, dtype=np.float64)
    cdef f64[:] o = out
    cdef double t = 1.0, r
    cdef long k
    cdef Py_ssize_t i, p = a.shape[0], q = b.shape[0]
    if nterms <= 0:
        return out
    o[0] = 1.0
    for k in range(1, nterms):
        r = x / k
        for i in range(p):
            r *= a[i] + (k - 1)
        for i in range(q):
            r /= b[i] + (k - 1)
        t *= r
        o[k] = t
    return out


def agm_ke(const f64[:] m, const f64[:] mc):
    """K(sqrt m) and E(sqrt m) by the AGM, given m and mc = 1 - m."""
    cdef Py_ssize_t i, n = m.shape[0]
    K = np.empty(n, dtype=np.float64)
    E = np.empty(n, dtype=np.float64)
    cdef f64[:] Ko = K
    cdef f64[:] Eo = E
    cdef double a, b, c, an, s, p2
    cdef int it
    for i in range(n):
        if mc[i] <= 0.0:
            Ko[i] = float("inf")
            Eo[i] = 1.0
            continue
        a = 1.0
        b = sqrt(mc[i])
        s = 0.5 * m[i]
        p2 = 0.5
        c = 0.0
        for it in range(60):
            an = 0.5 * (a + b)
            # c_{n+1} = c_n^2 / (4 a_{n+1}) avoids the cancellation in (a - b)/2
            if it == 0:
                c = m[i] / (4.0 * an)
            else:
                c = c * c / (4.0 * an)
            b = sqrt(a * b)
            a = an
            p2 *= 2.0
            s += p2 * c * c
            if c <= 1e-17 * a:
                break
        Ko[i] = M_PI / (2.0 * a)
        Eo[i] = Ko[i] * (1.0 - s)
    return K, E


def k_moments(long nmax):
    """mu_m = int_0^1 x^m K(sqrt x) dx, m = 0..nmax, by the forward recurrence
    (m + 1/2)^2 mu_m = 1/2 + m^2 mu_{m-1}, mu_0 = 2."""
    out = np.empty(nmax + 1, dtype=np.float64)
    cdef f64[:] o = out
    cdef long k
    cdef double mu = 2.0, h
    o[0] = mu
    for k in range(1, nmax + 1):
        h = k + 0.5
        mu = (0.5 + (<double>k) * k * mu) / (h * h)
        o[k] = mu
    return out
