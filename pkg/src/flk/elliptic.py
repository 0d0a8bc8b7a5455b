"""Complete elliptic integrals K, E and the family J_m(x).

J_m(x) = int_0^{pi/2} (1 - x sin^2 t)^(m - 1/2) dt, so J_0(x) = K(sqrt x),
J_1(x) = E(sqrt x).  Public K/E entry points take the modulus k; the J_m
and moment functions take x = k^2.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _backend
from .errors import Divergent, OutsideDomain, ReconstructionFailed
from .hyper import HypergeometricSpec, pFq
from .numerics import (EPS, ValueWithError, compensated_sum, levin_u_accelerate, prefix_sums,
                       reconcile, tanh_sinh_integrate)

HALF_PI = 0.5 * math.pi


# --------------------------------------------------------------- K and E

def ke_arrays(m, mc=None):
    """Vectorised (K, E) at parameter m = k^2; pass mc = 1 - m when it is
    known more accurately than 1 - m (e.g. a quadrature distance)."""
    m = np.ascontiguousarray(np.atleast_1d(m), dtype=np.float64)
    if mc is None:
        mc = 1.0 - m
    mc = np.ascontiguousarray(np.broadcast_to(mc, m.shape), dtype=np.float64)
    return _backend.agm_ke(m, mc)


def ellipK_m(m: float, mc: float | None = None) -> ValueWithError:
    m = float(m)
    mc = 1.0 - m if mc is None else float(mc)
    if mc <= 0:
        if mc == 0:
            raise Divergent("K diverges at k = 1")
        raise OutsideDomain("K needs k^2 < 1")
    if m < 0:
        raise OutsideDomain("K needs k^2 >= 0")
    K, _ = _backend.agm_ke(np.array([m]), np.array([mc]))
    v = float(K[0])
    return ValueWithError(v, 4 * EPS * v)


def ellipE_m(m: float, mc: float | None = None) -> ValueWithError:
    m = float(m)
    mc = 1.0 - m if mc is None else float(mc)
    if mc < 0 or m < 0:
        raise OutsideDomain("E needs 0 <= k^2 <= 1")
    if mc == 0:
        return ValueWithError(1.0, 0.0)
    K, E = _backend.agm_ke(np.array([m]), np.array([mc]))
    return ValueWithError(float(E[0]), 8 * EPS * float(K[0]))


def _modulus(k: float) -> tuple[float, float]:
    k = abs(float(k))
    if k > 1:
        raise OutsideDomain(f"modulus {k!r} > 1")
    return k * k, (1.0 - k) * (1.0 + k)


def ellipK(k: float) -> ValueWithError:
    """K(k) = int_0^{pi/2} dt / sqrt(1 - k^2 sin^2 t)."""
    m, mc = _modulus(k)
    return ellipK_m(m, mc)


def ellipE(k: float) -> ValueWithError:
    """E(k) = int_0^{pi/2} sqrt(1 - k^2 sin^2 t) dt."""
    m, mc = _modulus(k)
    return ellipE_m(m, mc)


def ellipK_maclaurin(k: float) -> ValueWithError:
    """K(k) = (pi/2) sum C(2n,n)^2 k^(2n) / 16^n, for cross-checks at k^2 <= 1/2."""
    m, _ = _modulus(k)
    if m >= 1:
        raise Divergent("K diverges at k = 1")
    return HALF_PI * pFq(HypergeometricSpec([0.5, 0.5], [1.0], m), tol=1e-15)


# ------------------------------------------------------------------ J_m

def _check_x(x: float) -> float:
    x = float(x)
    if not 0 <= x < 1:
        raise OutsideDomain(f"x = {x!r} outside [0, 1)")
    return x


def frakJ_theta(m: int, x: float, tol: float = 1e-15) -> ValueWithError:
    """J_m(x) by the trapezoid rule in t; the integrand is smooth and
    pi-periodic, so doubling the panel count converges geometrically."""
    x = _check_x(x)
    e = m - 0.5
    n = 8
    prev = None
    while True:
        t = np.linspace(0.0, HALF_PI, n + 1)
        s = np.sin(t)
        g = (1.0 - x * s * s) ** e
        g[0] *= 0.5
        g[-1] *= 0.5
        val = HALF_PI / n * compensated_sum(g).value
        if prev is not None:
            d = abs(val - prev)
            if d <= tol * max(1.0, abs(val)) or n >= 1 << 20:
                return ValueWithError(val, d + 4 * EPS * abs(val), n + 1)
        prev = val
        n *= 2


def frakJ_coefficients(m: int, n: int) -> np.ndarray:
    """Maclaurin coefficients c_0..c_{n-1} of J_m:
    c_j = (pi/2) (2m-1)!! C(2j,j)^2 / (16^j (1-2j)(3-2j)...(2m-1-2j))."""
    out = np.empty(n)
    c = HALF_PI
    for j in range(n):
        out[j] = c
        c *= -((2 * j + 1) * (2 * m - 1 - 2 * j)) / (2.0 * j + 2) ** 2
    return out


def frakJ_maclaurin(m: int, x: float, tol: float = 1e-16, max_terms: int = 200_000) -> ValueWithError:
    x = _check_x(x)
    if x == 0:
        return ValueWithError(HALF_PI, 0.0, 1)
    n = 64
    while True:
        c = frakJ_coefficients(m, n)
        t = c * x ** np.arange(n)
        s = compensated_sum(t)
        # past j = m the ratio |t_{j+1}/t_j| < x, so a geometric bound applies
        nxt = abs(t[-1]) * x
        bound = nxt / (1 - x)
        if n > m + 2 and (bound <= tol * abs(s.value) or n >= max_terms):
            return ValueWithError(s.value, s.abs_error + bound, n)
        n *= 2


def frakJ_closed(m: int, x: float) -> ValueWithError | None:
    """K/E form for m <= 2, None otherwise."""
    x = _check_x(x)
    if m > 2:
        return None
    K = ellipK_m(x)
    if m == 0:
        return K
    E = ellipE_m(x)
    if m == 1:
        return E
    return (x - 1) / 3 * K + (4 - 2 * x) / 3 * E


def frakJ(m: int, x: float) -> ValueWithError:
    """J_m(x) reconciled across t-quadrature, Maclaurin stream and (m <= 2)
    the K/E form."""
    m = int(m)
    if m < 0:
        raise OutsideDomain("m must be >= 0")
    x = _check_x(x)
    routes = {"theta-quadrature": frakJ_theta(m, x), "maclaurin": frakJ_maclaurin(m, x)}
    closed = frakJ_closed(m, x)
    if closed is not None:
        routes["closed-form"] = closed
    return reconcile(routes, 1e-13, f"frakJ({m}, {x!r})")


# -------------------------------------------------------------- moments

def _fl_moments(eta: float, n: int) -> np.ndarray:
    """int_0^1 x^eta P_i(2x-1) dx for i < n (zero past i = eta for integer eta)."""
    out = np.zeros(n)
    a = 1.0 / (eta + 1.0)
    for i in range(n):
        out[i] = a
        a *= (eta - i) / (eta + i + 2.0)
        if a == 0.0:
            break
    return out


def _fl_series(coef_fn, eta: float, n_alt: int = 60) -> ValueWithError:
    """sum_i coef_fn(i) * int x^eta P_i(2x-1) dx.

    Finite for integer eta >= 0; otherwise the moments alternate in sign
    once i > eta and the tail is summed with Levin-u.
    """
    if eta >= 0 and eta == math.floor(eta):
        n = int(eta) + 1
        i = np.arange(n)
        t = coef_fn(i) * _fl_moments(eta, n)
        return compensated_sum(t)
    k0 = int(math.ceil(max(eta, 0.0))) + 1
    n = k0 + n_alt
    i = np.arange(n)
    t = coef_fn(i) * _fl_moments(eta, n)
    head = compensated_sum(t[:k0])
    S, _ = prefix_sums(t[k0:], np.arange(1, n - k0 + 1))
    acc = levin_u_accelerate(S)
    return ValueWithError(head.value + acc.value, head.abs_error + acc.abs_error, n)


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not eta > -1:
        raise OutsideDomain("moments need eta > -1")
    return eta


def fl_coefficients_J(m: int, i):
    """FL coefficients of J_m in P_i(2x-1): 2 (2m)! (-1)^m / prod_{k=-m}^{m} (2i+2k+1)."""
    i = np.asarray(i, dtype=float)
    den = np.ones_like(i)
    for k in range(-m, m + 1):
        den = den * (2 * i + 2 * k + 1)
    return 2.0 * math.factorial(2 * m) * (-1) ** m / den


def moment_K(eta: float) -> ValueWithError:
    """int_0^1 K(sqrt x) x^eta dx by the FL route and by
    (pi/(2 eta + 2)) 3F2[1/2, 1/2, eta+1; 1, eta+2; 1]."""
    eta = _check_eta(eta)
    fl = _fl_series(lambda i: 2.0 / (2 * i + 1.0), eta)
    hyp = math.pi / (2 * eta + 2) * pFq(HypergeometricSpec([0.5, 0.5, eta + 1], [1.0, eta + 2], 1.0))
    return reconcile({"FL": fl, "3F2": hyp}, 1e-10, f"moment_K({eta!r})")


def moment_E(eta: float) -> ValueWithError:
    """int_0^1 E(sqrt x) x^eta dx by its two 3F2 forms (at 1 and at -1)."""
    eta = _check_eta(eta)
    at1 = math.pi / (2 * (1 + eta)) * pFq(HypergeometricSpec([-0.5, 0.5, 1 + eta], [1.0, 2 + eta], 1.0))
    atm1 = 4 / (3 * (1 + eta)) * pFq(HypergeometricSpec([-0.5, 1.0, -eta], [2.5, 2 + eta], -1.0))
    return reconcile({"3F2 at 1": at1, "3F2 at -1": atm1}, 1e-10, f"moment_E({eta!r})")


def moment_Jm_routes(m: int, eta: float) -> dict:
    """The four independent evaluations of int_0^1 J_m(x) x^eta dx."""
    m = int(m)
    if m < 0:
        raise OutsideDomain("m must be >= 0")
    eta = _check_eta(eta)
    pref = 2.0 * 4 ** m / (math.comb(2 * m, m) * (2 * m + 1))
    return {
        "3F2 terminating-in-eta": pref * pFq(HypergeometricSpec([-eta, 1.0, m + 1.0], [1.5, 1.5 + m], 1.0)),
        "3F2 at 1": math.pi / (2 * (1 + eta)) * pFq(HypergeometricSpec([0.5 - m, 0.5, 1 + eta], [1.0, 2 + eta], 1.0)),
        "3F2 at -1": pref / (eta + 1) * pFq(HypergeometricSpec([0.5 - m, 1.0, -eta], [1.5 + m, 2 + eta], -1.0)),
        "FL": _fl_series(lambda i: fl_coefficients_J(m, i), eta),
    }


def moment_Jm(m: int, eta: float) -> ValueWithError:
    """int_0^1 J_m(x) x^eta dx by three 3F2 forms plus the FL series."""
    return reconcile(moment_Jm_routes(m, eta), 1e-10, f"moment_Jm({m}, {eta!r})")


# ------------------------------------------------------- J_m at x = 1/2

def _recurrence_residual(m: int, x: float) -> float:
    J = [frakJ_theta(k, x).value for k in (m - 1, m, m + 1)]
    lhs = (2 * m + 1) * J[2]
    rhs = 2 * m * (2 - x) * J[1] - (2 * m - 1) * (1 - x) * J[0]
    return abs(lhs - rhs) / max(1.0, abs(lhs))


@lru_cache(maxsize=1)
def verify_recurrence(samples: int = 50, seed: int = 20190121) -> float:
    """Check (2m+1) J_{m+1} = 2m(2-x) J_m - (2m-1)(1-x) J_{m-1} at random
    points; returns the worst relative residual."""
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(samples):
        m = rng.randint(1, 12)
        x = rng.uniform(0.0, 0.95)
        worst = max(worst, _recurrence_residual(m, x))
    if worst > 1e-12:
        raise ReconstructionFailed(f"J_m recurrence check failed (residual {worst:.3g})")
    return worst


def jm_half_rationals(m: int) -> tuple[Fraction, Fraction]:
    """(e_m, k_m) with J_m(1/2) = e_m E(1/sqrt 2) + k_m K(1/sqrt 2), exact."""
    e = [Fraction(0), Fraction(1)]
    k = [Fraction(1), Fraction(0)]
    for j in range(1, m):
        # at x = 1/2: (2j+1) J_{j+1} = 3j J_j - (j - 1/2) J_{j-1}
        a = Fraction(3 * j, 2 * j + 1)
        b = Fraction(2 * j - 1, 2 * (2 * j + 1))
        e.append(a * e[j] - b * e[j - 1])
        k.append(a * k[j] - b * k[j - 1])
    return e[m], k[m]


def jm_half_3f2(m: int) -> ValueWithError:
    pref = 2.0 * 4 ** m / (math.comb(2 * m, m) * (2 * m + 1))
    spec = HypergeometricSpec([(1 - 2 * m) / 4, (3 - 2 * m) / 4, 0.5],
                              [(2 * m + 3) / 4, (2 * m + 5) / 4], -1.0)
    return pref * pFq(spec)


def jm_half(m: int) -> tuple[ValueWithError, Fraction, Fraction]:
    """J_m(1/2) by its 3F2[-1] form and by t-quadrature, with the exact
    rationals e_m, k_m; the two-term form must reproduce the value to 1e-11."""
    m = int(m)
    if not 0 <= m <= 40:
        raise OutsideDomain("jm_half supports 0 <= m <= 40")
    verify_recurrence()
    value = reconcile({"3F2 at -1": jm_half_3f2(m), "theta-quadrature": frakJ_theta(m, 0.5)},
                      1e-12, f"jm_half({m})")
    e, k = jm_half_rationals(m)
    K = ellipK_m(0.5, 0.5)
    E = ellipE_m(0.5, 0.5)
    two_term = float(e) * E.value + float(k) * K.value
    resid = abs(two_term - value.value)
    if resid > 1e-11 * max(1.0, abs(value.value)):
        raise ReconstructionFailed(f"e_m E + k_m K misses J_{m}(1/2) by {resid:.3g}")
    return value, e, k


# -------------------------------------------------- K^2 weighted integrals

ZETA3 = 1.2020569031595942854


def ksq_integral(a: int, b: int, tol: float = 1e-15) -> ValueWithError:
    """int_0^1 x^a (1-x)^b K(sqrt x)^2 dx by tanh-sinh (log^2 singularity at 1)."""
    def f(x, dl, dr):
        K, _ = ke_arrays(x, dr)
        return x ** a * dr ** b * K * K

    return tanh_sinh_integrate(f, 0.0, 1.0, "right", tol, vectorized=True, with_distances=True)


def ksq_weighted_integral(a: int, b: int, max_den: int = 1 << 16) -> tuple[Fraction, Fraction, ValueWithError]:
    """Fit int_0^1 x^a (1-x)^b K^2(sqrt x) dx = p + q zeta(3) with rationals
    p, q of denominator <= max_den, by an integer-relation search."""
    import mpmath

    a, b = int(a), int(b)
    if a < 0 or b < 0:
        raise OutsideDomain("a, b must be >= 0")
    v = ksq_integral(a, b)
    with mpmath.workdps(15):
        rel = mpmath.pslq([v.value, 1, ZETA3], tol=1e-12, maxcoeff=max_den * 4, maxsteps=20000)
    if rel is None or rel[0] == 0:
        raise ReconstructionFailed(f"no p + q zeta(3) relation for (a, b) = ({a}, {b})")
    d = int(rel[0])
    p = Fraction(-int(rel[1]), d)
    q = Fraction(-int(rel[2]), d)
    if p.denominator > max_den or q.denominator > max_den:
        raise ReconstructionFailed(f"relation denominators exceed {max_den}")
    resid = abs(float(p) + float(q) * ZETA3 - v.value)
    if resid > 1e-10:
        raise ReconstructionFailed(f"fit residual {resid:.3g} too large")
    return p, q, v
