"""Generalized hypergeometric series pFq and related generating functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend
from .errors import Divergent, OutsideDomain, ParameterPole
from .numerics import (EPS, TailEstimate, ValueWithError, compensated_sum, levin_u_accelerate,
                       prefix_sums, reconcile, sum_array_with_tail, term_cap)


def _nonpos_int(v: float) -> bool:
    return v <= 0 and v == math.floor(v)


def pochhammer(x: float, n: int) -> float:
    """Rising factorial (x)_n = x (x+1) ... (x+n-1)."""
    if n < 0:
        raise ValueError("pochhammer needs n >= 0")
    r = 1.0
    for k in range(n):
        r *= x + k
    return r


@dataclass(frozen=True)
class HypergeometricSpec:
    upper: tuple
    lower: tuple
    x: float

    def __init__(self, upper: Sequence[float], lower: Sequence[float], x: float):
        object.__setattr__(self, "upper", tuple(float(a) for a in upper))
        object.__setattr__(self, "lower", tuple(float(b) for b in lower))
        object.__setattr__(self, "x", float(x))

    @property
    def p(self) -> int:
        return len(self.upper)

    @property
    def q(self) -> int:
        return len(self.lower)

    @property
    def excess(self) -> float:
        """sum(lower) - sum(upper)."""
        return math.fsum(self.lower) - math.fsum(self.upper)

    def terminating_order(self) -> int | None:
        """Index of the last nonzero term when an upper parameter is 0, -1, ..."""
        orders = [int(-a) for a in self.upper if _nonpos_int(a)]
        return min(orders) if orders else None

    def classify(self) -> str:
        """One of terminating, entire, interior, boundary-1, boundary-minus1.

        Raises ParameterPole or Divergent when the series is not defined.
        """
        N = self.terminating_order()
        for b in self.lower:
            if _nonpos_int(b) and (N is None or -b <= N - 1):
                raise ParameterPole(f"lower parameter {b:g} hits a pole before the series ends")
        if N is not None:
            return "terminating"
        if self.x == 0:
            return "terminating"
        if self.p <= self.q:
            return "entire"
        if self.p > self.q + 1:
            raise Divergent(f"{self.p}F{self.q} with p > q + 1 diverges for x != 0")
        ax = abs(self.x)
        if ax < 1:
            return "interior"
        if ax > 1:
            raise Divergent(f"|x| = {ax:g} > 1")
        s = self.excess
        if self.x == 1:
            if s <= 0:
                raise Divergent(f"x = 1 needs sum(lower) - sum(upper) > 0, got {s:g}")
            return "boundary-1"
        if s <= -1:
            raise Divergent(f"x = -1 needs sum(lower) - sum(upper) > -1, got {s:g}")
        return "boundary-minus1"

    def term_ratio(self, k: int) -> float:
        """t_{k+1} / t_k."""
        r = self.x / (k + 1)
        for a in self.upper:
            r *= a + k
        for b in self.lower:
            r /= b + k
        return r

    def terms(self, n: int) -> np.ndarray:
        return _backend.hyp_terms(np.asarray(self.upper, dtype=np.float64),
                                  np.asarray(self.lower, dtype=np.float64), self.x, int(n))


def pFq(spec: HypergeometricSpec | None = None, tol: float = 1e-12, *, upper=None,
        lower=None, x=None, max_terms: int = 2_000_000) -> ValueWithError:
    """Sum a pFq series.

    Call as pFq(HypergeometricSpec(...)) or pFq(upper=..., lower=..., x=...).
    x = 1 boundary series are summed with a power-law tail fit of the known
    exponent sum(lower) - sum(upper) + 1; x = -1 with Levin-u.  When the
    target tolerance cannot be met within max_terms the best estimate is
    returned with its (larger) abs_error.
    """
    if spec is None:
        spec = HypergeometricSpec(upper, lower, x)
    kind = spec.classify()
    if kind == "terminating":
        N = spec.terminating_order()
        if N is None:
            return ValueWithError(1.0, 0.0, 1)
        t = spec.terms(N + 1)
        s = compensated_sum(t)
        return ValueWithError(s.value, s.abs_error + (N + 1) * EPS * float(np.abs(t).sum()) * 0.5, N + 1)
    if kind in ("entire", "interior"):
        return _sum_geometric(spec, tol, term_cap(max_terms))
    if kind == "boundary-1":
        return _sum_boundary(spec, tol, term_cap(max_terms))
    return _sum_alternating(spec, tol, term_cap(max_terms))


def _settle_index(spec: HypergeometricSpec) -> int:
    """First index past which every parameter + k is positive."""
    neg = [-v for v in spec.upper + spec.lower if v < 0]
    return int(math.ceil(max(neg))) + 1 if neg else 0


def _sum_geometric(spec, tol, max_terms):
    ax = abs(spec.x)
    k0 = _settle_index(spec)
    if ax > 0 and spec.p == spec.q + 1:
        n = int(math.ceil(math.log(tol * 1e-3) / math.log(ax))) + 2 * k0 + 50
    else:
        n = 64 + 2 * k0
    big = max([abs(v) for v in spec.upper + spec.lower] + [1.0])
    n += int(4 * big)
    while True:
        n = min(n, max_terms)
        t = spec.terms(n)
        if not np.all(np.isfinite(t)):
            raise OutsideDomain("pFq terms overflowed")
        s = compensated_sum(t)
        last = n - 1
        rho = max(abs(spec.term_ratio(last)), ax if spec.p == spec.q + 1 else 0.0)
        if rho < 1:
            # bound the remaining terms once the ratio has settled
            nxt = abs(t[last] * spec.term_ratio(last))
            bound = nxt / (1 - rho)
        else:
            bound = math.inf
        err = s.abs_error + bound
        if err <= tol * max(1.0, abs(s.value)) or n >= max_terms:
            if not math.isfinite(err):
                err = abs(t[last]) * n
            return ValueWithError(s.value, err, n)
        n *= 2


def _sum_boundary(spec, tol, max_terms):
    s = spec.excess
    tail = TailEstimate("power-law", exponent=s + 1.0)
    n = min(max_terms, 40_000)
    best = None
    while True:
        t = spec.terms(n)
        res = sum_array_with_tail(t, 0, tail)
        if best is None or res.abs_error < best.abs_error:
            best = res
        if res.abs_error <= tol * max(1.0, abs(res.value)) or n >= max_terms or n >= 640_000:
            return best
        n = min(max_terms, n * 4)


def _sum_alternating(spec, tol, max_terms):
    k0 = _settle_index(spec)
    best = None
    for m in (40, 60):
        n = min(max_terms, k0 + m)
        t = spec.terms(n)
        head = compensated_sum(t[:k0]) if k0 else ValueWithError(0.0)
        S, _ = prefix_sums(t[k0:], np.arange(1, n - k0 + 1))
        acc = levin_u_accelerate(S)
        res = ValueWithError(head.value + acc.value, head.abs_error + acc.abs_error, n)
        if best is None or res.abs_error < best.abs_error:
            best = res
        if res.abs_error <= tol * max(1.0, abs(res.value)):
            break
    return best


# ------------------------------------------------- generating functions

def gf_c4n2n(x: float) -> ValueWithError:
    """sum_n C(4n, 2n) x^(2n) / 16^n = (1/sqrt(1+x) + 1/sqrt(1-x)) / 2."""
    x = float(x)
    if not -1 < x < 1:
        raise OutsideDomain("gf_c4n2n needs |x| < 1 (poles at x = +-1)")
    v = 0.5 * (1.0 / math.sqrt(1.0 + x) + 1.0 / math.sqrt(1.0 - x))
    closed = ValueWithError(v, 4 * EPS * v)
    # the same series as 2F1[1/4, 3/4; 1/2; x^2]
    series = pFq(HypergeometricSpec([0.25, 0.75], [0.5], x * x), tol=1e-13)
    return reconcile({"closed-form": closed, "series": series}, 1e-12, "gf_c4n2n")


def gf_c4n2n_c2nn(y: float) -> ValueWithError:
    """sum_n C(4n,2n) C(2n,n) y^n / 64^n, by its series (= 2F1[1/4,3/4;1;y])
    and by 2 / (pi sqrt(1 + sqrt y)) K(sqrt(2 sqrt(y) / (1 + sqrt y)))."""
    from .elliptic import ellipK_m

    y = float(y)
    if not 0 <= y < 1:
        raise OutsideDomain("gf_c4n2n_c2nn needs 0 <= y < 1")
    series = pFq(HypergeometricSpec([0.25, 0.75], [1.0], y), tol=1e-14)
    r = math.sqrt(y)
    m = 2 * r / (1 + r)
    mc = (1 - r) / (1 + r)
    K = ellipK_m(m, mc)
    pref = 2.0 / (math.pi * math.sqrt(1 + r))
    kform = ValueWithError(pref * K.value, pref * K.abs_error + 4 * EPS * pref * K.value)
    return reconcile({"series": series, "K-form": kform}, 1e-12, "gf_c4n2n_c2nn")


_LN1S2 = math.log1p(math.sqrt(2.0))
_QUARTER_CLOSED = {
    1: 4 / math.pi * _LN1S2,
    3: 4 * math.sqrt(2) / (15 * math.pi) + 16 / (15 * math.pi) * _LN1S2,
    5: 68 * math.sqrt(2) / (315 * math.pi) + 64 / (105 * math.pi) * _LN1S2,
}


def quarter_integer_3f2_family(m: int) -> ValueWithError:
    """sum_n C(4n,2n) C(2n,n) / (64^n (2n + m)) for odd m, summed as
    (1/m) 3F2[1/4, 3/4, m/2; 1, m/2 + 1; 1]; closed forms attached for m = 1, 3, 5."""
    m = int(m)
    if m < 1 or m % 2 == 0 or m > 9:
        raise OutsideDomain("m must be an odd integer in 1..9")
    spec = HypergeometricSpec([0.25, 0.75, m / 2], [1.0, m / 2 + 1], 1.0)
    series = pFq(spec, tol=1e-13) / m
    series = ValueWithError(series.value, series.abs_error, series.terms)
    if m in _QUARTER_CLOSED:
        v = _QUARTER_CLOSED[m]
        return reconcile({"series": series, "closed-form": ValueWithError(v, 8 * EPS * v)},
                         1e-10, f"quarter_integer_3f2_family({m})")
    return series
