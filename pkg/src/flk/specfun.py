"""Scalar special functions and constants.

Gamma and log-gamma wrap the C library (math.gamma / math.lgamma); the
digamma family, Hurwitz zeta, polylogarithms and the constants G, zeta(3)
are computed here.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import GammaPole, HarmonicPole, OutsideDomain
from .numerics import EPS, TailEstimate, ValueWithError, sum_with_tail

EULER_GAMMA = 0.57721566490153286061


# ------------------------------------------------------------------ gamma

def _is_nonpos_int(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma(x: float) -> ValueWithError:
    x = float(x)
    if _is_nonpos_int(x):
        raise GammaPole(f"gamma has a pole at {x!r}")
    v = math.gamma(x)
    return ValueWithError(v, 4 * EPS * abs(v))


def log_gamma(x: float) -> ValueWithError:
    x = float(x)
    if x <= 0:
        if _is_nonpos_int(x):
            raise GammaPole(f"log_gamma has a pole at {x!r}")
        raise OutsideDomain("log_gamma is defined here for x > 0 only")
    v = math.lgamma(x)
    return ValueWithError(v, 4 * EPS * max(1.0, abs(v)))


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n (B_1 = -1/2)."""
    return _bernoulli_table(n + 1)[n]


@lru_cache(maxsize=8)
def _bernoulli_table(size: int) -> tuple:
    B = [Fraction(0)] * size
    for m in range(size):
        s = Fraction(0)
        for k in range(m):
            s += math.comb(m + 1, k) * B[k]
        B[m] = Fraction(1) if m == 0 else -s / (m + 1)
    return tuple(B)


def _bernoulli_floats(n: int) -> list:
    return [float(b) for b in _bernoulli_table(n + 1)]


# -------------------------------------------------------- digamma family

def digamma(x: float) -> float:
    x = float(x)
    if _is_nonpos_int(x):
        raise GammaPole(f"digamma has a pole at {x!r}")
    if x < 0.5:
        # psi(1 - x) - psi(x) = pi cot(pi x)
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * x)
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    B = _bernoulli_floats(16)
    x2 = 1.0 / (x * x)
    s = 0.0
    p = x2
    for k in range(1, 9):
        s += B[2 * k] / (2 * k) * p
        p *= x2
    return acc + math.log(x) - 0.5 / x - s


def trigamma(x: float) -> float:
    x = float(x)
    if _is_nonpos_int(x):
        raise GammaPole(f"trigamma has a pole at {x!r}")
    if x < 0.5:
        sp = math.sin(math.pi * x)
        return -trigamma(1.0 - x) + (math.pi * math.pi) / (sp * sp)
    acc = 0.0
    while x < 10.0:
        acc += 1.0 / (x * x)
        x += 1.0
    B = _bernoulli_floats(16)
    x2 = 1.0 / (x * x)
    s = 0.0
    p = x2 / x
    for k in range(1, 9):
        s += B[2 * k] * p
        p *= x2
    return acc + 1.0 / x + 0.5 * x2 + s


def hurwitz_zeta(s: float, q: float) -> float:
    """sum_{k>=0} (k + q)^-s for s > 1, q > 0 by Euler-Maclaurin."""
    s = float(s)
    q = float(q)
    if not s > 1:
        raise OutsideDomain("hurwitz_zeta needs s > 1")
    if q <= 0:
        raise OutsideDomain("hurwitz_zeta needs q > 0")
    M = max(0, int(math.ceil(20 - q)))
    head = math.fsum((q + k) ** (-s) for k in range(M))
    N = q + M
    tail = N ** (1 - s) / (s - 1) + 0.5 * N ** (-s)
    B = _bernoulli_floats(30)
    fact = 1.0  # (2j)!
    rising = s  # s (s+1) ... (s+2j-2)
    for j in range(1, 15):
        fact *= (2 * j - 1) * (2 * j)
        term = B[2 * j] / fact * rising * N ** (-s - 2 * j + 1)
        tail += term
        if abs(term) < 1e-18 * abs(tail):
            break
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return head + tail


def zeta(s: float) -> float:
    """Riemann zeta for real s > 1, and zeta(0), zeta(-n) from Bernoulli numbers."""
    if s == 0:
        return -0.5
    if s < 0 and s == math.floor(s):
        n = int(-s)
        return float((-1) ** n * bernoulli(n + 1) / (n + 1))
    return hurwitz_zeta(s, 1.0)


# ------------------------------------------------------- harmonic numbers

@dataclass(frozen=True)
class HarmonicArg:
    a: float
    b: int = 1


def harmonic(a, b: int | None = None) -> ValueWithError:
    """Generalized harmonic number H_a^(b) = zeta(b) - zeta(b, a + 1).

    Accepts a HarmonicArg or (a, b).  H_a^(0) = a by convention.
    """
    if isinstance(a, HarmonicArg):
        a, b = a.a, a.b
    if b is None:
        b = 1
    a = float(a)
    b = int(b)
    if b < 0:
        raise ValueError("harmonic order must be >= 0")
    if b == 0:
        return ValueWithError(a, 0.0)
    if a == math.floor(a):
        if a < 0:
            raise HarmonicPole(f"H_{a:g}^({b}) has a pole")
        n = int(a)
        if n <= 100_000:
            v = math.fsum(1.0 / k ** b for k in range(1, n + 1))
            return ValueWithError(v, EPS * abs(v))
    if a <= -1:
        # a + 1 may sit on a pole of psi
        if _is_nonpos_int(a + 1):
            raise HarmonicPole(f"H_{a:g}^({b}) has a pole")
    if b == 1:
        v = digamma(a + 1.0) + EULER_GAMMA
        return ValueWithError(v, 8 * EPS * (abs(v) + abs(math.log(abs(a) + 2))))
    if b == 2:
        v = math.pi ** 2 / 6 - trigamma(a + 1.0)
        return ValueWithError(v, 8 * EPS * max(1.0, abs(v)))
    if a + 1 <= 0:
        raise HarmonicPole("orders >= 3 are only supported for a > -1")
    v = zeta(b) - hurwitz_zeta(b, a + 1.0)
    return ValueWithError(v, 16 * EPS * max(1.0, abs(v)))


# --------------------------------------------------------------- constants

@lru_cache(maxsize=None)
def catalan_G() -> ValueWithError:
    """G = sum (-1)^n / (2n+1)^2 with Levin-u acceleration."""
    res = sum_with_tail(lambda n: (-1.0) ** n / (2.0 * n + 1.0) ** 2,
                        TailEstimate("alternating"), 1e-15, 200)
    return ValueWithError(res.value, max(res.abs_error, EPS * res.value), res.terms)


@lru_cache(maxsize=None)
def zeta3() -> ValueWithError:
    """zeta(3) = (5/2) sum_{k>=1} (-1)^(k+1) / (k^3 C(2k, k))."""
    terms = []
    for k in range(1, 40):
        terms.append((-1) ** (k + 1) / (k ** 3 * float(math.comb(2 * k, k))))
    v = 2.5 * math.fsum(terms)
    return ValueWithError(v, 2 * EPS * v, len(terms))


# ----------------------------------------------------------- polylogs

@dataclass(frozen=True)
class ComplexValue:
    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError("ComplexValue components must be finite")

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def of(cls, z) -> "ComplexValue":
        if isinstance(z, ComplexValue):
            return z
        z = complex(z)
        return cls(z.real, z.imag)


def _as_complex(z) -> complex:
    return complex(z) if not isinstance(z, ComplexValue) else complex(z.re, z.im)


def polylog(s: int, z) -> complex:
    """Li_s(z) for integer s >= 1 and |z| <= 1."""
    s = int(s)
    z = _as_complex(z)
    r = abs(z)
    if r > 1 + 1e-15:
        raise OutsideDomain(f"|z| = {r!r} > 1")
    if z == 0:
        return 0j
    if s == 1:
        return -cmath.log(1 - z)
    if z == 1:
        return complex(zeta(s))
    if r <= 0.75:
        out = 0j
        p = z
        k = 1
        while True:
            t = p / k ** s
            out += t
            if abs(t) < 1e-18 * max(abs(out), 1e-300) or k > 400:
                break
            k += 1
            p *= z
        return out
    # expansion in mu = ln z, valid for |mu| < 2 pi
    mu = cmath.log(z)
    H = math.fsum(1.0 / j for j in range(1, s))
    out = mu ** (s - 1) / math.factorial(s - 1) * (H - cmath.log(-mu))
    p = 1 + 0j  # mu^k / k!
    for k in range(0, 120):
        if k != s - 1:
            t = zeta(s - k) * p
            out += t
            if k > s and t != 0 and abs(t) < 1e-18 * abs(out):
                break
        p *= mu / (k + 1)
    return out


def dilog(z) -> ComplexValue:
    return ComplexValue.of(polylog(2, z))


def trilog(z) -> ComplexValue:
    return ComplexValue.of(polylog(3, z))


def rogers_L(x: float) -> ValueWithError:
    """Rogers dilogarithm L(x) = Li_2(x) + ln(x) ln(1 - x) / 2 on (0, 1)."""
    x = float(x)
    if not 0 < x < 1:
        raise OutsideDomain("rogers_L needs 0 < x < 1")
    v = polylog(2, x).real + 0.5 * math.log(x) * math.log1p(-x)
    return ValueWithError(v, 16 * EPS * max(1.0, abs(v)))
