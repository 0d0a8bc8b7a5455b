"""Pure-Python versions of the compiled kernels in _kernels.pyx.

Same signatures, same summation order, so results agree with the
compiled path to the last bit on IEEE hardware (up to libm differences in
sqrt/pow, which are correctly rounded on every platform we target).
"""

from __future__ import annotations

import math

import numpy as np


def neumaier_sum(x):
    s = 0.0
    c = 0.0
    sabs = 0.0
    for i, v in enumerate(x):
        v = float(v)
        if not math.isfinite(v):
            return 0.0, 0.0, i
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        sabs += abs(v)
    return s + c, sabs, -1


def checkpoint_sums(x, idx):
    out = np.empty(len(idx), dtype=np.float64)
    outabs = np.empty(len(idx), dtype=np.float64)
    s = c = sabs = 0.0
    i = 0
    xs = x.tolist() if hasattr(x, "tolist") else list(x)
    for k, stop in enumerate(idx):
        stop = int(stop)
        while i < stop:
            v = xs[i]
            t = s + v
            if abs(s) >= abs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
            sabs += abs(v)
            i += 1
        out[k] = s + c
        outabs[k] = sabs
    return out, outabs


def _horner(coefs, deg, n):
    r = 0.0
    for j in range(deg, -1, -1):
        r = r * n + coefs[j]
    return r


def twisted_terms(n0, n_end, kval0, kup, klow, kx, num, den,
                  acc_init, acc_scale, acc_shift, acc_order,
                  p_coef, p_acc, p_power, p_poly, p_deg):
    length = n_end - n0 + 1
    kup = [float(v) for v in kup]
    klow = [float(v) for v in klow]
    num = [float(v) for v in num]
    den = [float(v) for v in den]
    dn, dd = len(num) - 1, len(den) - 1
    acc = [float(v) for v in acc_init]
    carry = [0.0] * len(acc)
    scales = [int(v) for v in acc_scale]
    shifts = [float(v) for v in acc_shift]
    orders = [int(v) for v in acc_order]
    pieces = [
        (float(p_coef[i]), int(p_acc[i]), int(p_power[i]),
         [float(v) for v in p_poly[i]], int(p_deg[i]))
        for i in range(len(p_coef))
    ]
    out = [0.0] * length
    kv = float(kval0)
    for q in range(length):
        n = n0 + q
        nn = float(n)
        if q > 0:
            r = kx
            for a in kup:
                r *= a + nn - 1.0
            for b in klow:
                r /= b + nn - 1.0
            kv *= r
            for i in range(len(acc)):
                sc = scales[i]
                base = sc * (nn - 1.0) + shifts[i]
                inc = 0.0
                for j in range(1, sc + 1):
                    if orders[i] == 1:
                        inc += 1.0 / (base + j)
                    else:
                        inc += 1.0 / math.pow(base + j, float(orders[i]))
                y = inc - carry[i]
                t = acc[i] + y
                carry[i] = (t - acc[i]) - y
                acc[i] = t
        if not pieces:
            h = 1.0
        else:
            h = 0.0
            for coef, ai, power, poly, deg in pieces:
                pw = 1.0
                if ai >= 0:
                    a = acc[ai]
                    for _ in range(power):
                        pw *= a
                h += coef * _horner(poly, deg, nn) * pw
        out[q] = kv * _horner(num, dn, nn) / _horner(den, dd, nn) * h
    return np.array(out, dtype=np.float64)


def hyp_terms(a, b, x, nterms):
    out = np.empty(max(nterms, 0), dtype=np.float64)
    if nterms <= 0:
        return out
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    t = 1.0
    out[0] = 1.0
    for k in range(1, nterms):
        r = x / k
        for ai in a:
            r *= ai + (k - 1)
        for bi in b:
            r /= bi + (k - 1)
        t *= r
        out[k] = t
    return out


def agm_ke(m, mc):
    n = len(m)
    K = np.empty(n, dtype=np.float64)
    E = np.empty(n, dtype=np.float64)
    for i in range(n):
        mi, mci = float(m[i]), float(mc[i])
        if mci <= 0.0:
            K[i] = math.inf
            E[i] = 1.0
            continue
        a, b = 1.0, math.sqrt(mci)
        s, p2 = 0.5 * mi, 0.5
        c = 0.0
        for it in range(60):
            an = 0.5 * (a + b)
            if it == 0:
                c = mi / (4.0 * an)
            else:
                c = c * c / (4.0 * an)
            b = math.sqrt(a * b)
            a = an
            p2 *= 2.0
            s += p2 * c * c
            if c <= 1e-17 * a:
                break
        K[i] = math.pi / (2.0 * a)
        E[i] = K[i] * (1.0 - s)
    return K, E


def k_moments(nmax):
    out = np.empty(nmax + 1, dtype=np.float64)
    mu = 2.0
    out[0] = mu
    for k in range(1, nmax + 1):
        h = k + 0.5
        mu = (0.5 + float(k) * k * mu) / (h * h)
        out[k] = mu
    return out
