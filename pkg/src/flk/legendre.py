"""Legendre polynomials, shifted-Legendre moments and FL coefficient streams.

Shifted polynomials are P~_n(x) = P_n(2x - 1) on [0, 1].  A function f on
(0, 1) is expanded as f = sum c_n P~_n with c_n = (2n+1) int_0^1 P~_n f dx
(no normalisation), so int_0^1 K(sqrt x) f dx = 2 sum c_n / (2n+1)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import OutsideDomain, UnknownFunction
from .numerics import (EPS, TailEstimate, ValueWithError, compensated_sum, levin_u_accelerate,
                       prefix_sums, sum_array_with_tail, tanh_sinh_integrate)
from .specfun import harmonic

SQRT2 = math.sqrt(2.0)
ALPHA = SQRT2 - 1.0  # sqrt 2 - 1


# ------------------------------------------------------------- polynomials

def legendre_P(n: int, x: float) -> ValueWithError:
    """P_n(x) by the three-term recurrence."""
    n = int(n)
    if n < 0:
        raise OutsideDomain("n must be >= 0")
    x = float(x)
    p0, p1 = 1.0, x
    if n == 0:
        return ValueWithError(1.0, 0.0)
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
    return ValueWithError(p1, 2 * (n + 1) * EPS * max(1.0, abs(p1)))


def legendre_P_binomial(n: int, x: float) -> float:
    """P_n(x) = 2^-n sum_k C(n,k)^2 (x-1)^(n-k) (x+1)^k, evaluated exactly
    in rationals (the terms cancel heavily for x near -1)."""
    q = Fraction(float(x))
    total = sum(math.comb(n, k) ** 2 * (q - 1) ** (n - k) * (q + 1) ** k for k in range(n + 1))
    return float(total / 2 ** n)


def shifted_legendre_table(nmax: int, x) -> np.ndarray:
    """Rows P~_0(x) .. P~_nmax(x) for an array of x in [0, 1]."""
    x = np.asarray(x, dtype=float)
    t = 2.0 * x - 1.0
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = t
    for k in range(1, nmax):
        out[k + 1] = ((2 * k + 1) * t * out[k] - k * out[k - 1]) / (k + 1)
    return out


def shifted_legendre(n: int, x: float) -> float:
    return legendre_P(n, 2.0 * float(x) - 1.0).value


def xPnPl_overlap(N: int, L: int) -> ValueWithError:
    """int_0^1 x P~_N P~_L dx (tridiagonal in N, L)."""
    N, L = int(N), int(L)
    if N < 0 or L < 0:
        raise OutsideDomain("N, L must be >= 0")
    if N == L + 1:
        v = Fraction(2 * L + 2, 4 * (2 * L + 1) * (2 * L + 3))
    elif N == L:
        v = Fraction(1, 2 * (2 * L + 1))
    elif N == L - 1:
        v = Fraction(2 * L, 4 * (2 * L - 1) * (2 * L + 1))
    else:
        v = Fraction(0)
    return ValueWithError(float(v), EPS * float(v) / 2)


# ------------------------------------------------------------------ moments

def power_moments(eta: float, n: int) -> np.ndarray:
    """int_0^1 x^eta P~_k dx for k = 0..n-1, by
    m_0 = 1/(eta+1), m_k = m_{k-1} (eta - k + 1) / (eta + k + 1)."""
    out = np.zeros(n)
    a = 1.0 / (eta + 1.0)
    for k in range(n):
        out[k] = a
        a *= (eta - k) / (eta + k + 2.0)
        if a == 0.0:
            break
    return out


def shifted_moment_power(i, n: int) -> ValueWithError:
    """Raw moment int_0^1 x^i P~_n(x) dx.

    Integer i >= 0: (i!)^2 / ((i-n)! (i+n+1)!), zero when n > i.  Real
    i > -1: (-1)^n Gamma(n-i) Gamma(1+i) / (Gamma(-i) Gamma(n+2+i)),
    evaluated as a product so no Gamma poles are touched.
    """
    n = int(n)
    if n < 0:
        raise OutsideDomain("n must be >= 0")
    if isinstance(i, (int, np.integer)) or (isinstance(i, float) and i.is_integer() and i >= 0):
        i = int(i)
        if i < 0:
            raise OutsideDomain("integer power must be >= 0")
        if n > i:
            return ValueWithError(0.0, 0.0)
        v = Fraction(math.factorial(i) ** 2, math.factorial(i - n) * math.factorial(i + n + 1))
        return ValueWithError(float(v), EPS * float(v) / 2)
    eta = float(i)
    if not eta > -1:
        raise OutsideDomain("power must be > -1")
    v = power_moments(eta, n + 1)[n]
    return ValueWithError(v, 2 * (n + 1) * EPS * abs(v))


def _ln_moment_quad(f: Callable, flags) -> ValueWithError:
    return tanh_sinh_integrate(f, 0.0, 1.0, flags, 1e-14, with_distances=True)


def _m_ln1mx(n: int) -> float:
    return -1.0 / (n * (n + 1))


def _m_ln2_1mx(n: int) -> float:
    Hnm1 = harmonic(n - 1).value
    return (4 * n + 2) / (n * n * (n + 1) ** 2) + 4 * Hnm1 / (n * (n + 1))


def _m_ln1msqrtx(n: int) -> float:
    return ((-1) ** n - 4 * n - 2) / (2 * n * (n + 1) * (2 * n + 1))


def _m_ln1mx_lnx(n: int) -> float:
    return -((-1) ** n + 1) / (n * n * (n + 1) ** 2)


def _m_arcsine(n: int) -> float:
    if n % 2:
        return 0.0
    return math.pi * 2 * math.comb(n, n // 2) ** 2 / 2 ** (2 * n + 1)


# fn_id -> (closed form in n, first valid n, integrand for n below that)
_NAMED = {
    "ln(1-x)": (_m_ln1mx, 1, lambda x, dl, dr: math.log(dr)),
    "ln^2(1-x)": (_m_ln2_1mx, 1, lambda x, dl, dr: math.log(dr) ** 2),
    "ln(1-sqrt(x))": (_m_ln1msqrtx, 1, lambda x, dl, dr: math.log1p(-math.sqrt(x)) if x < 0.5
                      else math.log(dr / (1 + math.sqrt(x)))),
    "ln(1-x)ln(x)": (_m_ln1mx_lnx, 1, lambda x, dl, dr: math.log(dr) * math.log(dl)),
    "1/sqrt(x(1-x))": (_m_arcsine, 0, None),
}


def named_moment_ids() -> list[str]:
    return list(_NAMED)


def shifted_moment_named(fn_id: str, n: int) -> ValueWithError:
    """int_0^1 f(x) P~_n(x) dx for the named functions in named_moment_ids().

    The log family has closed forms for n >= 1; n = 0 is computed by
    quadrature.
    """
    if fn_id not in _NAMED:
        raise UnknownFunction(f"no moment formula for {fn_id!r}")
    n = int(n)
    if n < 0:
        raise OutsideDomain("n must be >= 0")
    rule, first, integrand = _NAMED[fn_id]
    if n < first:
        return _ln_moment_quad(integrand, "both")
    v = rule(n)
    return ValueWithError(v, 8 * EPS * max(abs(v), 1e-300))


def shifted_moments_named(fn_id: str, n: int) -> np.ndarray:
    """Array of shifted_moment_named(fn_id, k) for k < n."""
    if fn_id not in _NAMED:
        raise UnknownFunction(f"no moment formula for {fn_id!r}")
    rule, first, _ = _NAMED[fn_id]
    k = np.arange(n, dtype=float)
    if fn_id == "ln^2(1-x)":
        out = np.empty(n)
        kk = k[1:]
        Hm1 = np.concatenate([[0.0], np.cumsum(1.0 / kk[:-1])])
        out[1:] = (4 * kk + 2) / (kk * kk * (kk + 1) ** 2) + 4 * Hm1 / (kk * (kk + 1))
    else:
        out = np.array([rule(int(j)) if j >= first else 0.0 for j in range(n)])
    for j in range(min(first, n)):
        out[j] = shifted_moment_named(fn_id, j).value
    return out


# --------------------------------------------------------- FL coefficients

@dataclass(frozen=True)
class FLCoefficients:
    """Coefficient stream c_n of f = sum c_n P~_n.

    ``generator`` maps an integer array of indices to coefficient values.
    ``tail`` models the terms c_n / (2n+1)^2 of the pairing with K(sqrt x);
    ``n_max`` is set for numerically computed streams.
    """

    source: str
    generator: Callable[[np.ndarray], np.ndarray]
    tail: TailEstimate
    n_max: int | None = None
    errors: np.ndarray | None = field(default=None, compare=False, repr=False)

    def values(self, n: int) -> np.ndarray:
        if self.n_max is not None and n > self.n_max + 1:
            raise OutsideDomain(f"stream {self.source} only has {self.n_max + 1} coefficients")
        return np.asarray(self.generator(np.arange(n)), dtype=float)

    def __call__(self, n: int) -> ValueWithError:
        v = float(self.values(n + 1)[n])
        err = float(self.errors[n]) if self.errors is not None else 8 * EPS * abs(v)
        return ValueWithError(v, err)

    def evaluate(self, x: float, N: int) -> float:
        """Truncated series sum_{n<N} c_n P~_n(x)."""
        c = self.values(N)
        P = shifted_legendre_table(N - 1, np.array([x]))[:, 0]
        return compensated_sum(c * P).value


def _asin_integrals(n: np.ndarray) -> np.ndarray:
    """I_k = int_0^1 x^(2k+2) / (1 + x^2) dx by I_k = 1/(2k+1) - I_{k-1}, I_{-1} = pi/4."""
    top = int(n.max()) + 1 if n.size else 0
    out = np.empty(top)
    prev = math.pi / 4
    for k in range(top):
        prev = 1.0 / (2 * k + 1) - prev
        out[k] = prev
    return out[n]


def _alpha_integrals(n: np.ndarray) -> np.ndarray:
    """int_0^alpha x^(2k+1) / (1 + x^2) dx = sum_j (-1)^j alpha^(2k+2j+2) / (2k+2j+2)."""
    a2 = ALPHA * ALPHA
    out = np.empty(n.shape)
    for idx, k in enumerate(n):
        terms = []
        p = a2 ** (k + 1)
        j = 0
        while True:
            t = (-1) ** j * p / (2 * k + 2 * j + 2)
            terms.append(t)
            if abs(t) < 1e-19 * abs(terms[0]):
                break
            p *= a2
            j += 1
        out[idx] = math.fsum(terms)
    return out


def _power_coeffs(eta: float):
    def gen(n):
        n = np.asarray(n)
        top = int(n.max()) + 1 if n.size else 0
        return ((2 * np.arange(top) + 1) * power_moments(eta, top))[n]
    return gen


_A2 = ALPHA * ALPHA

_CATALOG = {
    "K(sqrt(x))": (lambda n: 2.0 / (2 * n + 1.0),
                   TailEstimate("power-law", exponent=3.0)),
    "E(sqrt(x))": (lambda n: -4.0 / ((2 * n - 1.0) * (2 * n + 1.0) * (2 * n + 3.0)),
                   TailEstimate("power-law", exponent=5.0)),
    "1/sqrt(2-x)": (lambda n: 2.0 * ALPHA ** (2 * n + 1.0),
                    TailEstimate("geometric", ratio=_A2)),
    "(2-x)^(-3/2)": (lambda n: (2 * n + 1.0) * SQRT2 * ALPHA ** (2 * n + 1.0),
                     TailEstimate("geometric", ratio=_A2)),
    "sqrt(2-x)": (lambda n: 2.0 * ALPHA ** (2 * n + 1.0) * (3 + SQRT2 + 2 * SQRT2 * n)
                  / ((1 - 2.0 * n) * (2 * n + 3.0)),
                  TailEstimate("geometric", ratio=_A2)),
    "arcsin(sqrt(x))/sqrt(x)": (lambda n: 2.0 / (2 * n + 1.0) - 4.0 * _asin_integrals(np.asarray(n)),
                                TailEstimate("power-law", exponent=4.0)),
    "1/(1+sqrt(1-x/2))": (lambda n: 8.0 * (ALPHA ** (2 * n + 1.0) / (2 * SQRT2)
                                           - (2 * n + 1.0) * _alpha_integrals(np.asarray(n))),
                          TailEstimate("geometric", ratio=_A2)),
    "frakJ(x)": (lambda n: 48.0 / ((2 * n + 5.0) * (2 * n + 3.0) * (2 * n + 1.0) * (2 * n - 1.0) * (2 * n - 3.0)),
                 TailEstimate("power-law", exponent=7.0)),
    "x(1-x)K(sqrt(x))": (lambda n: 8.0 * (9 - 4.0 * n - 4.0 * n * n)
                         / ((2 * n + 1.0) * (4.0 * n * n + 4 * n - 15) ** 2),
                         TailEstimate("power-law", exponent=5.0)),
}



def catalog_ids() -> list[str]:
    return list(_CATALOG) + ["x^eta"]


def fl_catalog(fn_id: str, eta: float | None = None) -> FLCoefficients:
    """Closed-form FL coefficient stream for a catalog function.

    ``x^eta`` needs ``eta > -1``; its coefficients are
    (2n+1) int_0^1 x^eta P~_n dx.
    """
    if fn_id == "x^eta":
        if eta is None or not eta > -1:
            raise OutsideDomain("x^eta needs eta > -1")
        eta = float(eta)
        if eta >= 0 and eta.is_integer():
            tail = TailEstimate("none")
        else:
            tail = TailEstimate("alternating")
        return FLCoefficients(f"x^{eta:g}", _power_coeffs(eta), tail)
    if fn_id not in _CATALOG:
        raise UnknownFunction(f"{fn_id!r} is not in the FL catalog")
    gen, tail = _CATALOG[fn_id]

    def vec(n, gen=gen):
        return np.asarray(gen(np.asarray(n, dtype=np.int64)), dtype=float)

    return FLCoefficients(fn_id, vec, tail)


def fl_numeric(f: Callable, n_max: int, singularity_flags="both", *, vectorized: bool = False,
               with_distances: bool = False, tol: float = 1e-13) -> FLCoefficients:
    """c_n = (2n+1) int_0^1 P~_n f dx for n <= n_max by tanh-sinh.

    f is evaluated once per node (results are cached across n).
    """
    cache: dict = {}

    def fx(x, dl=None, dr=None):
        if vectorized:
            return f(x, dl, dr) if with_distances else f(x)
        key = float(x)
        if key not in cache:
            cache[key] = f(x, dl, dr) if with_distances else f(x)
        return cache[key]

    vals = np.empty(n_max + 1)
    errs = np.empty(n_max + 1)
    for n in range(n_max + 1):
        if vectorized:
            def g(x, dl, dr, n=n):
                P = shifted_legendre_table(n, x)[n]
                return (2 * n + 1) * P * np.asarray(fx(x, dl, dr), dtype=float)
        else:
            def g(x, dl, dr, n=n):
                return (2 * n + 1) * shifted_legendre(n, x) * fx(x, dl, dr)
        r = tanh_sinh_integrate(g, 0.0, 1.0, singularity_flags, tol, vectorized=vectorized,
                                with_distances=True)
        vals[n] = r.value
        errs[n] = r.abs_error
    return FLCoefficients("numeric", lambda n: vals[np.asarray(n)], TailEstimate("none"),
                          n_max=n_max, errors=errs)


def fl_integrate_against_K(c: FLCoefficients, tol: float = 1e-13, n_terms: int = 200_000) -> ValueWithError:
    """int_0^1 K(sqrt x) f(x) dx = 2 sum c_n / (2n+1)^2."""
    if c.n_max is not None:
        n = c.n_max + 1
        i = np.arange(n)
        t = 2.0 * c.values(n) / (2 * i + 1.0) ** 2
        s = compensated_sum(t)
        err = s.abs_error + float(np.sum(2.0 * c.errors / (2 * i + 1.0) ** 2))
        # the unseen coefficients are bounded by the last one's size
        err += abs(t[-1]) * n
        return ValueWithError(s.value, err, n)
    tail = c.tail
    if tail.kind == "geometric":
        n = int(math.log(tol * 1e-3) / math.log(tail.ratio)) + 20
        i = np.arange(n)
        t = 2.0 * c.values(n) / (2 * i + 1.0) ** 2
        return sum_array_with_tail(t, 0, tail)
    if tail.kind == "power-law":
        i = np.arange(n_terms)
        t = 2.0 * c.values(n_terms) / (2 * i + 1.0) ** 2
        return sum_array_with_tail(t, 0, tail)
    if tail.kind == "alternating":
        n = 80
        i = np.arange(n)
        t = 2.0 * c.values(n) / (2 * i + 1.0) ** 2
        # skip the non-alternating head before accelerating
        k0 = 0
        while k0 < n - 20 and t[k0] * t[k0 + 1] > 0:
            k0 += 1
        head = compensated_sum(t[:k0])
        S, _ = prefix_sums(t[k0:], np.arange(1, n - k0 + 1))
        acc = levin_u_accelerate(S)
        return ValueWithError(head.value + acc.value, head.abs_error + acc.abs_error, n)
    # finite / terminating stream
    n = 4096
    t = 2.0 * c.values(n) / (2 * np.arange(n) + 1.0) ** 2
    nz = np.flatnonzero(t)
    n = int(nz[-1]) + 1 if nz.size else 1
    return compensated_sum(t[:n])
