"""Registry of closed-form identities with independent evaluation plans,
and the runner that checks each plan against the closed form.

Each record has one or more plans (twisted series, pFq value, integral,
double sum, FL pairing, ...), a right-hand side built from the constants
in ``constants()``, and a tolerance class.  Parameterised families carry a
grid; ``verify_all`` expands them to ids such as ``PI4_RATIO[eta=2.7]``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _backend
from .elliptic import (_fl_series, fl_coefficients_J, ke_arrays, ksq_integral, ksq_weighted_integral,
                       moment_Jm_routes, moment_K)
from .errors import FLKError, ToleranceNotReached, UnknownFunction
from .hyper import HypergeometricSpec, pFq
from .legendre import fl_catalog, fl_integrate_against_K, shifted_moments_named
from .numerics import (EPS, SingleReduction, TailEstimate, ValueWithError, double_sum,
                       sum_array_with_tail, tanh_sinh_integrate, term_cap)
from .series import (TwistedTermSpec, H, const, evaluate_twisted, integral_route, param_deriv_lhs_spec,
                     param_deriv_rhs, _C, _series, _SMALL)
from .specfun import catalan_G, dilog, trilog, zeta3

TOL_CLASSES = {"tight": 1e-10, "standard": 1e-8, "loose": 1e-5}


@lru_cache(maxsize=None)
def constants() -> dict:
    """Constants the right-hand sides are built from."""
    s2 = math.sqrt(2.0)
    return {
        "pi": math.pi,
        "ln2": math.log(2.0),
        "L": math.log1p(s2),  # ln(1 + sqrt 2)
        "G": catalan_G().value,
        "zeta3": zeta3().value,
        "gamma14": math.gamma(0.25),
        "sqrt2": s2,
        "imLi2": dilog(complex(0.0, s2 - 1.0)).im,
        "imLi3": trilog(complex(0.5, 0.5)).im,
    }


# ------------------------------------------------------------------ records

@dataclass(frozen=True)
class Plan:
    """One way of evaluating the left-hand side.

    ``evaluate(params, tol)`` returns a ValueWithError; ``tol_class``
    overrides the record's class for this plan (double sums by direct
    truncation are judged loosely).
    """

    method: str
    evaluate: Callable[[dict, float], ValueWithError]
    tol_class: str | None = None


@dataclass(frozen=True)
class IdentityRecord:
    id: str
    formula: str
    plans: tuple
    rhs: Callable[[dict], float | None]
    tol_class: str
    citation: str
    tags: tuple = ()
    grid: tuple = ()

    @property
    def parameterized(self) -> bool:
        return bool(self.grid)

    def points(self) -> list[dict]:
        return [dict(p) for p in self.grid] if self.grid else [{}]

    def rhs_value(self, params: dict | None = None) -> float | None:
        return self.rhs(dict(params or {}))

    @property
    def tol(self) -> float:
        return TOL_CLASSES[self.tol_class]


def _grid(**axes) -> tuple:
    names = list(axes)
    out = [()]
    for n in names:
        out = [p + ((n, v),) for p in out for v in axes[n]]
    return tuple(out)


def point_id(rid: str, params: dict) -> str:
    if not params:
        return rid
    return rid + "[" + ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                                for k, v in params.items()) + "]"


_POINT_RE = re.compile(r"^([A-Z0-9_]+)(?:\[(.*)\])?$")


def parse_point_id(text: str) -> tuple[str, dict]:
    m = _POINT_RE.match(text.strip())
    if not m:
        raise UnknownFunction(f"malformed identity id {text!r}")
    params = {}
    if m.group(2):
        for item in m.group(2).split(","):
            k, _, v = item.partition("=")
            params[k.strip()] = _number(v.strip())
    return m.group(1), params


def _number(v):
    if isinstance(v, (int, float)):
        return v
    f = float(v)
    return int(f) if f == int(f) and "." not in str(v) else f


# ------------------------------------------------------------ plan builders

def _series_plan(spec_fn, scale: float = 1.0, method: str = "series") -> Plan:
    def run(p, tol):
        spec = spec_fn(p) if callable(spec_fn) else spec_fn
        return scale * evaluate_twisted(spec, tol=tol / max(abs(scale), 1e-300))
    return Plan(method, run)


def _pfq_plan(upper, lower, x, scale: float = 1.0, method: str = "pFq") -> Plan:
    def run(p, tol):
        return scale * pFq(HypergeometricSpec(upper, lower, x), tol=min(tol, 1e-12))
    return Plan(method, run)


def _integral_plan(iid: str, scale: float = 1.0, params=None) -> Plan:
    def run(p, tol):
        return scale * integral_route(iid, params(p) if callable(params) else params)
    return Plan("integral", run)


def _fl_pair_plan(fn_id: str, eta=None) -> Plan:
    def run(p, tol):
        return fl_integrate_against_K(fl_catalog(fn_id, eta))
    return Plan("FL-pairing", run)


def _fl_moment_plan(coef: Callable[[np.ndarray], np.ndarray], moment_id: str, tail: TailEstimate,
                    n: int = 4000) -> Plan:
    """sum_n c_n int P~_n(x) g(x) dx from the FL coefficients of one factor and
    the shifted-Legendre moments of the other."""
    def run(p, tol):
        m = shifted_moments_named(moment_id, n)
        t = coef(np.arange(n, dtype=float)) * m
        return sum_array_with_tail(t, 0, tail)
    return Plan("FL-moments", run)


def _k_coef(i):
    return 2.0 / (2 * i + 1)


def _e_coef(i):
    return -4.0 / ((2 * i - 1) * (2 * i + 1) * (2 * i + 3))


# double sums ---------------------------------------------------------------

@lru_cache(maxsize=4)
def _tables(n: int):
    c = np.empty(n)
    c[0] = 1.0
    k = np.arange(1, n, dtype=float)
    c[1:] = np.cumprod(((2 * k - 1) / (2 * k)) ** 2)
    Hn = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, n, dtype=float))])
    lf = np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, 2 * n + 4, dtype=float)))])
    return c, Hn, lf


def _k_moments(n: int) -> np.ndarray:
    """mu_k = int_0^1 x^k K(sqrt x) dx for k <= n."""
    return _backend.k_moments(int(n))


def _double_direct(term_fn, n_diag=3000) -> Plan:
    def run(p, tol):
        try:
            return double_sum(term_fn, "diagonal-truncation-with-tail", tol=TOL_CLASSES["loose"],
                              n_diag=n_diag)
        except ToleranceNotReached as e:
            return e.best
    return Plan("direct-truncation", run, tol_class="loose")


def _double_reduced(outer, tail, start=0, n_terms=200_000) -> Plan:
    def run(p, tol):
        return double_sum(None, "reduce-to-single", tol=max(tol, 1e-12),
                          reduction=SingleReduction(outer, tail, start, n_terms))
    return Plan("reduce-to-single", run)


def _dz_direct(m, n):
    c, _, _ = _tables(8000)
    return c[m] * c[n] / ((m + n + 1.0) * (2 * m + 3.0))


def _dz_outer(m):
    # sum_n c_n / (m + n + 1) = (2/pi) mu_m
    c, _, _ = _tables(int(m[-1]) + 1)
    mu = _k_moments(int(m[-1]))
    return c[m] / (2 * m + 3.0) * (2 / math.pi) * mu[m]


def _dhn_direct(m, n):
    c, Hn, _ = _tables(8000)
    return c[m] * Hn[n] / ((n + 1.0) * (m + n + 2.0))


def _dhn_outer(n):
    # sum_m c_m / (m + n + 2) = (2/pi) mu_{n+1}
    _, Hn, _ = _tables(int(n[-1]) + 2)
    mu = _k_moments(int(n[-1]) + 1)
    return 2 / math.pi * Hn[n] * mu[n + 1] / (n + 1.0)


def _dfact_direct(m, n):
    # (n+1)! n! H_n / ((2m+1) (n-m+1)! (m+n+2)!), zero once m > n + 1
    _, Hn, lf = _tables(8000)
    n = np.asarray(n)
    ok = n + 1 >= m
    nn = np.where(ok, n, m)
    logt = lf[nn + 1] + lf[nn] - lf[np.where(ok, nn - m + 1, 0)] - lf[nn + m + 2]
    return np.where(ok, Hn[nn] * np.exp(logt) / (2 * m + 1.0), 0.0)


def _dfact_outer(n):
    # the inner finite sum over m is mu_{n+1} / (2 (n+1)!^2)
    _, Hn, _ = _tables(int(n[-1]) + 2)
    mu = _k_moments(int(n[-1]) + 1)
    return 0.5 * Hn[n] * mu[n + 1] / (n + 1.0)


# ratio families --------------------------------------------------------------

def _pi4_pfq(p, tol):
    e = p["eta"]
    num = pFq(HypergeometricSpec([-e, 0.5, 1.0], [1.5, 2 + e], -1.0))
    den = pFq(HypergeometricSpec([0.5, 0.5, 1 + e], [1.0, 2 + e], 1.0))
    return num / den


def _pi4_moment(p, tol):
    e = p["eta"]
    num = pFq(HypergeometricSpec([-e, 0.5, 1.0], [1.5, 2 + e], -1.0))
    den = moment_K(e) * ((2 * e + 2) / math.pi)
    return num / den


def _jm_ratio_pfq(m, e):
    num = pFq(HypergeometricSpec([0.5 - m, 1.0, -e], [1.5 + m, 2 + e], -1.0))
    den = pFq(HypergeometricSpec([0.5 - m, 0.5, 1 + e], [1.0, 2 + e], 1.0))
    return num / den


def _jm_ratio_fl(m, e):
    num = pFq(HypergeometricSpec([0.5 - m, 1.0, -e], [1.5 + m, 2 + e], -1.0))
    den = _fl_series(lambda i: fl_coefficients_J(m, i), e) * (2 * (1 + e) / math.pi)
    return num / den


def _jm_pref(m):
    return 4.0 ** (m + 1) / (math.comb(2 * m, m) * (2 * m + 1))


# exact right-hand sides ---------------------------------------------------------

def _shifted_power_moment(eta: int, i: int) -> Fraction:
    """int_0^1 x^eta P_i(2x-1) dx for integers 0 <= i <= eta."""
    return Fraction(math.factorial(eta) ** 2, math.factorial(eta - i) * math.factorial(eta + i + 1))


def _exact_moment(coef: Callable[[int], Fraction], eta) -> float | None:
    if eta != int(eta) or eta < 0:
        return None
    eta = int(eta)
    return float(sum(coef(i) * _shifted_power_moment(eta, i) for i in range(eta + 1)))


def _e_coef_exact(i: int) -> Fraction:
    return Fraction(-4, (2 * i - 1) * (2 * i + 1) * (2 * i + 3))


def _j_coef_exact(m: int):
    def c(i: int) -> Fraction:
        den = 1
        for k in range(-m, m + 1):
            den *= 2 * i + 2 * k + 1
        return Fraction(2 * math.factorial(2 * m) * (-1) ** m, den)
    return c


def _w_series(p, tol):
    n = term_cap(200_000)
    m = np.arange(n, dtype=float)
    a, b, c = 2 * m - 1, 2 * m + 1, 2 * m + 3
    w = 1 / a + 2 / b + 1 / c + 1 / a ** 2 - 1 / c ** 2
    return sum_array_with_tail(w / b, 0, TailEstimate("power-law", exponent=2.0))


def _ksq_fit_plan(a, b) -> Plan:
    def run(p, tol):
        P, Q, v = ksq_weighted_integral(a, b)
        fit = float(P) + float(Q) * constants()["zeta3"]
        return ValueWithError(fit, abs(fit - v.value) + v.abs_error, v.terms)
    return Plan("rational-fit", run)


def _ksq_quad_plan(a, b) -> Plan:
    return Plan("quadrature", lambda p, tol: ksq_integral(a, b))


# ------------------------------------------------------------------ registry

def _c(name):
    return constants()[name]


def _build() -> tuple:
    pi = math.pi
    T = TwistedTermSpec
    recs = []

    def add(rid, formula, plans, rhs, tol_class, citation, tags=(), grid=()):
        recs.append(IdentityRecord(rid, formula, tuple(plans), rhs, tol_class, citation, tuple(tags), grid))

    # hypergeometric values at 1
    add("PARBELOS_DUAL", "3F2[1/4,1/2,3/4; 1,3/2; 1] = (8/pi) artanh(tan(pi/8))",
        [_pfq_plan([0.25, 0.5, 0.75], [1.0, 1.5], 1.0),
         _series_plan(T("c4n2n_c2nn", den=(1.0, 2.0)))],
        lambda p: 8 / pi * math.atanh(math.tan(pi / 8)), "tight",
        "quarter-integer 3F2 at 1; palindromic companion of the parbelos constant",
        ("hypergeometric",))
    add("PARBELOS", "3F2[-1/2,1/4,3/4; 1/2,1; 1] = (sqrt2 + ln(1+sqrt2))/pi",
        [_pfq_plan([-0.5, 0.25, 0.75], [0.5, 1.0], 1.0),
         _series_plan(T("c4n2n_c2nn", num=(-1.0,), den=(-1.0, 2.0)))],
        lambda p: (_c("sqrt2") + _c("L")) / pi, "tight",
        "the parbelos constant as a quarter-integer 3F2 at 1", ("hypergeometric",))
    add("CATALAN_4F3", "4F3[1/2,1/2,1,1; 2,2,2; 1] = 16(3 - 2G + pi(ln2 - 1))/pi",
        [_pfq_plan([0.5, 0.5, 1.0, 1.0], [2.0, 2.0, 2.0], 1.0),
         _series_plan(T("c2nn_sq", den=(1.0, 3.0, 3.0, 1.0)))],
        lambda p: 16 * (3 - 2 * _c("G") + pi * (_c("ln2") - 1)) / pi, "tight",
        "Catalan-type 4F3 from the standard integral formula for Catalan numbers",
        ("hypergeometric", "imported"))
    add("LN_TRIO", "sum C(4n,2n)C(2n,n)/(64^n (2n+m)) for m = 1, 3, 5",
        [Plan("pFq", lambda p, tol: pFq(HypergeometricSpec([0.25, 0.75, p["m"] / 2],
                                                           [1.0, p["m"] / 2 + 1], 1.0), tol=1e-13) / p["m"]),
         _series_plan(lambda p: T("c4n2n_c2nn", den=(float(p["m"]), 2.0)))],
        lambda p: {1: 4 / pi * _c("L"),
                   3: 4 * _c("sqrt2") / (15 * pi) + 16 / (15 * pi) * _c("L"),
                   5: 68 * _c("sqrt2") / (315 * pi) + 64 / (105 * pi) * _c("L")}[p["m"]],
        "tight", "quarter-integer 3F2 family reduced by Wallis-type closed forms",
        ("hypergeometric",), _grid(m=(1, 3, 5)))
    add("DILOG_4F3", "(3/16) 4F3[1,1,5/4,7/4; 2,2,2; 1] = 6ln2 - 2ln(1+sqrt2) - (16/pi) Im Li2(i(sqrt2-1))",
        [_pfq_plan([1.0, 1.0, 1.25, 1.75], [2.0, 2.0, 2.0], 1.0, scale=3 / 16),
         _series_plan(T("c4n2n_c2nn", den=(0.0, 1.0), n0=1))],
        lambda p: 6 * _c("ln2") - 2 * _c("L") - 16 / pi * _c("imLi2"), "tight",
        "FL expansion of a dilogarithmic function paired with the quarter-integer kernel",
        ("hypergeometric", "polylog"))
    add("LI3_SERIES", "sum C(2n,n)^2 (2n+1)/(16^n (n+1)^4) = 16 - 6pi^2 - 32ln2 + 24ln^2 2 "
        "+ (64G - 32 + 256 Im Li3((1+i)/2))/pi",
        [_series_plan(T("c2nn_sq", num=(1.0, 2.0), den=(1.0, 4.0, 6.0, 4.0, 1.0))),
         _pfq_plan([0.5, 1.5, 1.0, 1.0, 1.0], [2.0, 2.0, 2.0, 2.0], 1.0)],
        lambda p: (16 - 6 * pi ** 2 - 32 * _c("ln2") + 24 * _c("ln2") ** 2
                   + (64 * _c("G") - 32 + 256 * _c("imLi3")) / pi), "tight",
        "trilogarithmic evaluation from moments of K against polylogarithmic weights",
        ("polylog",))

    # moment ratios
    add("PI4_RATIO", "3F2[-eta,1/2,1; 3/2,2+eta; -1] / 3F2[1/2,1/2,1+eta; 1,2+eta; 1] = pi/4",
        [Plan("3F2-ratio", _pi4_pfq), Plan("moment-ratio", _pi4_moment)],
        lambda p: pi / 4, "tight",
        "two evaluations of the moments of K(sqrt x): FL expansion of x^eta versus Maclaurin series",
        ("ratio", "moments"), _grid(eta=(-0.5, 0, 1, 2.7, 10)))
    add("RATIO_15PI32", "3F2[-3/2,1,-eta; 7/2,2+eta; -1] / 3F2[-3/2,1/2,1+eta; 1,2+eta; 1] = 15pi/32",
        [Plan("3F2-ratio", lambda p, tol: _jm_ratio_pfq(2, p["eta"])),
         Plan("FL-ratio", lambda p, tol: _jm_ratio_fl(2, p["eta"]))],
        lambda p: 15 * pi / 32, "tight",
        "moments of the generalized elliptic integral with m = 2 by two expansions",
        ("ratio", "moments"), _grid(eta=(-0.5, 0, 1, 4)))
    add("RATIO_PI_JM", "4^(m+1)/(C(2m,m)(2m+1)) 3F2[1/2-m,1,-eta; 3/2+m,2+eta; -1] "
        "/ 3F2[1/2-m,1/2,1+eta; 1,2+eta; 1] = pi",
        [Plan("3F2-ratio", lambda p, tol: _jm_pref(p["m"]) * _jm_ratio_pfq(p["m"], p["eta"])),
         Plan("FL-ratio", lambda p, tol: _jm_pref(p["m"]) * _jm_ratio_fl(p["m"], p["eta"]))],
        lambda p: pi, "tight",
        "moments of J_m(x) = int (1 - x sin^2)^(m-1/2) by FL and Maclaurin expansions",
        ("ratio", "moments"), _grid(m=tuple(range(6)), eta=(0, 0.5, 2)))
    add("E_MOMENT_DUAL", "int x^eta E(sqrt x) = pi/(2(1+eta)) 3F2[-1/2,1/2,1+eta; 1,2+eta; 1] "
        "= 4/(3(1+eta)) 3F2[-1/2,1,-eta; 5/2,2+eta; -1]",
        [Plan("3F2 at 1", lambda p, tol: math.pi / (2 * (1 + p["eta"])) * pFq(
            HypergeometricSpec([-0.5, 0.5, 1 + p["eta"]], [1.0, 2 + p["eta"]], 1.0))),
         Plan("3F2 at -1", lambda p, tol: 4 / (3 * (1 + p["eta"])) * pFq(
             HypergeometricSpec([-0.5, 1.0, -p["eta"]], [2.5, 2 + p["eta"]], -1.0))),
         Plan("FL", lambda p, tol: _fl_series(_e_coef, p["eta"]))],
        lambda p: _exact_moment(_e_coef_exact, p["eta"]), "tight",
        "moments of E(sqrt x) from its FL expansion and its Maclaurin series",
        ("moments",), _grid(eta=(0, 0.5, 1, 2)))
    add("TRIPLEFORM", "int x^eta J_m(x) dx: three 3F2 forms and the FL series agree",
        [Plan(name, (lambda name: lambda p, tol: moment_Jm_routes(p["m"], p["eta"])[name])(name))
         for name in ("3F2 terminating-in-eta", "3F2 at 1", "3F2 at -1", "FL")],
        lambda p: _exact_moment(_j_coef_exact(p["m"]), p["eta"]), "tight",
        "moments of the generalized complete elliptic integral J_m",
        ("moments",), _grid(m=tuple(range(7)), eta=(0, 0.5, 2)))

    # harmonic-binomial series
    hb = ("harmonic-binomial",)
    add("HN_MINUS_HALF", "sum C(4n,2n)C(2n,n)(H_n - H_{n-1/2})/64^n = pi/sqrt2 - (2sqrt2/pi) ln^2(1+sqrt2)",
        [_series_plan(T("c4n2n_c2nn", harmonics=(H(0), H(-0.5, coef=-1)), decay=(2, 0))),
         _integral_plan("hn_minus_half_kform")],
        lambda p: pi / _c("sqrt2") - 2 * _c("sqrt2") / pi * _c("L") ** 2, "tight",
        "H_n - H_{n-1/2} = 2 int y^(2n)/(1+y) dy against the quarter-integer generating function", hb)
    add("HALF_PLUS_NH", "sum C(4n,2n)C(2n,n)(1/2 + n(H_{n-1/2} - H_n))/64^n "
        "= 3pi/(16sqrt2) + (2 + 2sqrt2 L - 3L^2)/(4sqrt2 pi), L = ln(1+sqrt2)",
        [_series_plan(T("c4n2n_c2nn", harmonics=(const(0.5), H(-0.5, poly=(0, 1)), H(0, coef=-1, poly=(0, 1))),
                        decay=(2, 0))),
         _integral_plan("half_plus_nh_kform")],
        lambda p: 3 * pi / (16 * _c("sqrt2")) + (2 + 2 * _c("sqrt2") * _c("L") - 3 * _c("L") ** 2)
        / (4 * _c("sqrt2") * pi), "tight",
        "shifted FL expansion of sqrt(2-x) paired with K(sqrt x)", hb)
    add("HN_2NM1", "sum C(2n,n)^2 H_n/(16^n (2n-1)) = (8ln2 - 4)/pi",
        [_series_plan(T("c2nn_sq", den=(-1.0, 2.0), harmonics=(H(0),), n0=1)),
         _integral_plan("one_minus_E_over_1mx", scale=-2 / pi)],
        lambda p: (8 * _c("ln2") - 4) / pi, "tight",
        "FL series of E(sqrt x) integrated against 1/(1-x) after subtracting E(1)", hb)
    add("HNP1_REL", "sum C(2n,n)^2 H_{n+1}/(16^n (n+1)(2n-1)) = (96ln2 - 88)/(9pi)",
        [_series_plan(T("c2nn_sq", den=(-1.0, 1.0, 2.0), harmonics=(H(1),)))],
        lambda p: (96 * _c("ln2") - 88) / (9 * pi), "tight",
        "companion of the H_n/(2n-1) series by partial fractions", hb + ("imported",))
    add("HSQ_PLUS_H2_NP1", "sum C(2n,n)^2 (H_n^2 + H_n^(2))/(16^n (n+1)) = 64ln^2 2/pi - 8pi/3",
        [_series_plan(T("c2nn_sq", den=(1.0, 1.0), harmonics=(H(0, power=2), H(0, order=2)))),
         _integral_plan("hsq_h2_np1")],
        lambda p: 64 * _c("ln2") ** 2 / pi - 8 * pi / 3, "tight",
        "moments of ln^2(1-x) against the K(sqrt x) Maclaurin series", hb)
    add("H2_NP1", "sum C(2n,n)^2 H_n^(2)/(16^n (n+1)) = 32G/pi + 2pi/3 - 16ln2",
        [_series_plan(T("c2nn_sq", den=(1.0, 1.0), harmonics=(H(0, order=2),))),
         _integral_plan("h2_np1")],
        lambda p: 32 * _c("G") / pi + 2 * pi / 3 - 16 * _c("ln2"), "tight",
        "FL moments of ln(1-x) ln(x) paired with K(sqrt x)", hb)
    add("HSQ_2NM1SQ", "sum C(2n,n)^2 (H_n^2 + H_n^(2))/(16^n (2n-1)^2) = (64 + 64ln^2 2 - 96ln2)/pi - 8pi/3",
        [_series_plan(T("c2nn_sq", den=(1.0, -4.0, 4.0), harmonics=(H(0, power=2), H(0, order=2)), n0=1))],
        lambda p: (64 + 64 * _c("ln2") ** 2 - 96 * _c("ln2")) / pi - 8 * pi / 3, "tight",
        "ln^2(1-x) moments against the E(sqrt x) expansion", hb)
    add("H2N_2NM1", "sum C(2n,n)^2 H_{2n}/(16^n (2n-1)) = (6ln2 - 2)/pi",
        [_series_plan(T("c2nn_sq", den=(-1.0, 2.0), harmonics=(H(0, scale=2),), n0=1)),
         _integral_plan("E_minus_1_over_1mk", scale=2 / pi)],
        lambda p: (6 * _c("ln2") - 2) / pi, "tight",
        "H_{2n} = int (1-x^(2n))/(1-x) dx against the Maclaurin series of E", hb)
    add("H2N_NP1", "sum C(2n,n)^2 H_{2n}/(16^n (n+1)) = 2 + (4 - 12ln2)/pi",
        [_series_plan(T("c2nn_sq", den=(1.0, 1.0), harmonics=(H(0, scale=2),))),
         _integral_plan("h2n_np1")],
        lambda p: 2 + (4 - 12 * _c("ln2")) / pi, "tight",
        "H_{2n} as an integral against the antiderivative of K(sqrt x)", hb + ("imported",))
    add("QUARTER_HARM", "sum C(2n,n)^2 (H_{n+1/4} - H_{n-1/4})/16^n = Gamma(1/4)^4/(8pi^2) - 4G/pi",
        [_series_plan(T("c2nn_sq", harmonics=(H(0.25), H(-0.25, coef=-1)), decay=(2, 0))),
         _integral_plan("quarter_harm_K")],
        lambda p: _c("gamma14") ** 4 / (8 * pi ** 2) - 4 * _c("G") / pi, "tight",
        "H_{n+1/4} - H_{n-1/4} = int x^(n-1/4)/(1+sqrt x) dx against K(sqrt x)", hb)
    add("H2N_2NM1SQ", "sum C(2n,n)^2 H_{2n}/(16^n (2n-1)^2) = (4G + 6 - 12ln2)/pi",
        [_series_plan(T("c2nn_sq", den=(1.0, -4.0, 4.0), harmonics=(H(0, scale=2),), n0=1))],
        lambda p: (4 * _c("G") + 6 - 12 * _c("ln2")) / pi, "tight",
        "the W(m) sequence and the moments of K(sqrt x)/sqrt(1-x)", hb)
    add("HN_HALF_NP1", "sum C(2n,n)^2 (H_n - H_{n-1/2})/(16^n (n+1)) = 4 - 8/pi",
        [_series_plan(T("c2nn_sq", den=(1.0, 1.0), harmonics=(H(0), H(-0.5, coef=-1)), decay=(3, 0))),
         _integral_plan("hn_half_np1")],
        lambda p: 4 - 8 / pi, "tight",
        "variant of the H_n - H_{n-1/2} series with the K(sqrt x) antiderivative", hb)
    add("C2018NEW_HN_NP1SQ", "sum C(2n,n)^2 H_n/(16^n (n+1)^2) = 16 + (32G - 64ln2)/pi - 16ln2",
        [_series_plan(T("c2nn_sq", den=(1.0, 2.0, 1.0), harmonics=(H(0),)))],
        lambda p: 16 + (32 * _c("G") - 64 * _c("ln2")) / pi - 16 * _c("ln2"), "tight",
        "harmonic series with a squared shifted denominator", ("harmonic-binomial-extra", "imported"))
    add("GAMMA4", "2pi sum C(2n,n)^2/(16^n (4n+1)) = int K(sqrt x)/sqrt(x(1-x)) dx = Gamma(1/4)^4/(8pi)",
        [_series_plan(T("c2nn_sq", den=(1.0, 4.0)), scale=2 * pi),
         _integral_plan("K_over_sqrt_x1mx")],
        lambda p: _c("gamma14") ** 4 / (8 * pi), "tight",
        "Maclaurin series of K integrated against 1/sqrt(x(1-x))", ("elliptic-integral",))
    add("PARAM_DERIV", "sum C(2i,i)^2 (2H_{2i} - H_i)/(16^i (i+j+1)) = (8 j!^2/pi) "
        "sum_{i<=j} ((2i+1)(H_{i-1/2} + ln2) + 1)/((2i+1)^2 (j-i)! (i+j+1)!)",
        [_series_plan(lambda p: param_deriv_lhs_spec(p["j"]))],
        lambda p: param_deriv_rhs(p["j"]).value, "standard",
        "derivative in the moment parameter of the pi ratio for J_m", ("series",), _grid(j=(0, 1, 5)))
    add("W_3PI2_8", "sum_m W(m)/(2m+1) = int x K(sqrt x)/sqrt(1-x) dx = 3pi^2/8",
        [Plan("series", _w_series), _integral_plan("xK_over_sqrt1mx")],
        lambda p: 3 * pi ** 2 / 8, "tight",
        "FL coefficients of K(sqrt x)/sqrt(1-x) against x", ("series",))

    # double series
    ds = ("double-series",)
    add("DOUBLE_ZETA3_G", "sum_{m,n} C(2m,m)^2 C(2n,n)^2/(16^(m+n) (m+n+1)(2m+3)) = (7zeta3 - 4G)/pi^2",
        [_double_reduced(_dz_outer, TailEstimate("power-law", exponent=3.0, log_power=1)),
         _double_direct(_dz_direct)],
        lambda p: (7 * _c("zeta3") - 4 * _c("G")) / pi ** 2, "standard",
        "inner sum over n is (2/pi) times a moment of K(sqrt x)", ds)
    add("DOUBLE_HN", "sum_{m,n} C(2m,m)^2 H_n/(16^m (n+1)(m+n+2)) = (48 + 32(ln2 - 2)ln2)/pi - 4pi/3",
        [_double_reduced(_dhn_outer, TailEstimate("power-law", exponent=2.0, log_power=2)),
         _double_direct(_dhn_direct)],
        lambda p: (48 + 32 * (_c("ln2") - 2) * _c("ln2")) / pi - 4 * pi / 3, "standard",
        "int K(sqrt x) ln^2(1-x) dx through the moments of K", ds)
    add("DOUBLE_FACT_HN", "sum_{n,m} (n+1)! n! H_n/((2m+1)(n-m+1)!(m+n+2)!) = 12 - pi^2/3 + 8ln^2 2 - 16ln2",
        [_double_reduced(_dfact_outer, TailEstimate("power-law", exponent=2.0, log_power=2)),
         _double_direct(_dfact_direct)],
        lambda p: 12 - pi ** 2 / 3 + 8 * _c("ln2") ** 2 - 16 * _c("ln2"), "standard",
        "finite factorial form of the moments of K(sqrt x)", ds)

    # squares of K
    for a, b, P, Q in ((1, 0, Fraction(1, 2), Fraction(7, 4)), (2, 0, Fraction(17, 32), Fraction(77, 64)),
                       (2, 2, Fraction(-126, 2 ** 14), Fraction(1757, 2 ** 14))):
        add(f"KSQ_{a}_{b}", f"int x^{a} (1-x)^{b} K(sqrt x)^2 dx = {P} + {Q} zeta3",
            [_ksq_quad_plan(a, b), _ksq_fit_plan(a, b)],
            (lambda P, Q: lambda p: float(P) + float(Q) * _c("zeta3"))(P, Q), "tight",
            "Q + zeta(3)Q structure of the weighted integrals of K^2", ("elliptic-integral", "ksq"))

    # single integrals of K and E
    ei = ("elliptic-integral",)
    add("K_INT", "int K(sqrt x) dx = 2",
        [_integral_plan("K"), _fl_pair_plan("x^eta", 0.0)], lambda p: 2.0, "tight",
        "constant FL coefficient of K(sqrt x)", ei)
    add("SQRTX_K", "int sqrt(x) K(sqrt x) dx = (1 + 2G)/2",
        [_integral_plan("sqrtx_K"), _fl_pair_plan("x^eta", 0.5)], lambda p: (1 + 2 * _c("G")) / 2, "tight",
        "FL expansion of sqrt(x) paired with K(sqrt x)", ei)
    add("K_LN1MX", "int K(sqrt x) ln(1-x) dx = 8ln2 - 8",
        [_integral_plan("K_ln1mx"),
         _fl_moment_plan(_k_coef, "ln(1-x)", TailEstimate("power-law", exponent=3.0))],
        lambda p: 8 * _c("ln2") - 8, "tight", "Legendre moments of ln(1-x)", ei)
    add("K_LN2_1MX", "int K(sqrt x) ln^2(1-x) dx = 48 - 4pi^2/3 + 32(ln2 - 2)ln2",
        [_integral_plan("K_ln2_1mx"),
         _fl_moment_plan(_k_coef, "ln^2(1-x)", TailEstimate("power-law", exponent=3.0, log_power=1))],
        lambda p: 48 - 4 * pi ** 2 / 3 + 32 * (_c("ln2") - 2) * _c("ln2"), "tight",
        "Legendre moments of ln^2(1-x) with harmonic numbers", ei)
    add("K_OVER_SQRTX", "int K(sqrt x)/sqrt(x) dx = 4G",
        [_integral_plan("K_over_sqrtx"), _fl_pair_plan("x^eta", -0.5)], lambda p: 4 * _c("G"), "tight",
        "FL expansion of x^(-1/2) paired with K(sqrt x)", ei)
    add("ONE_MINUS_E", "int (1 - E(sqrt x))/(1-x) dx = 2 - 4ln2",
        [_integral_plan("one_minus_E_over_1mx"),
         _series_plan(T("c2nn_sq", den=(-1.0, 2.0), harmonics=(H(0),), n0=1), scale=-pi / 2)],
        lambda p: 2 - 4 * _c("ln2"), "tight",
        "Maclaurin series of E integrated term by term against 1/(1-x)", ei)
    add("E_LN1MX", "int E(sqrt x) ln(1-x) dx = (4/9)(12ln2 - 11)",
        [_integral_plan("E_ln1mx"),
         _fl_moment_plan(_e_coef, "ln(1-x)", TailEstimate("power-law", exponent=5.0))],
        lambda p: 4 / 9 * (12 * _c("ln2") - 11), "tight", "FL series of E(sqrt x) against ln(1-x)", ei)
    add("K_OVER_SQRT_2MX", "int K(sqrt x)/sqrt(2-x) dx = pi^2/4 - ln^2(sqrt2 - 1)",
        [_integral_plan("K_over_sqrt_2mx"), _fl_pair_plan("1/sqrt(2-x)")],
        lambda p: pi ** 2 / 4 - _c("L") ** 2, "tight",
        "geometric FL coefficients of 1/sqrt(2-x)", ei)
    add("K_2MX_M32", "int K(sqrt x)(2-x)^(-3/2) dx = sqrt2 ln(1+sqrt2)",
        [_integral_plan("K_2mx_m32"), _fl_pair_plan("(2-x)^(-3/2)")],
        lambda p: _c("sqrt2") * _c("L"), "tight", "FL coefficients of (2-x)^(-3/2)", ei)
    add("K_SQRT_2MX", "int K(sqrt x) sqrt(2-x) dx = (8 + 3pi^2 + 8sqrt2 L - 12L^2)/16",
        [_integral_plan("K_sqrt_2mx"), _fl_pair_plan("sqrt(2-x)")],
        lambda p: (8 + 3 * pi ** 2 + 8 * _c("sqrt2") * _c("L") - 12 * _c("L") ** 2) / 16, "tight",
        "shifted FL expansion of sqrt(2-x)", ei)
    return tuple(sorted(recs, key=lambda r: r.id))


@lru_cache(maxsize=None)
def registry() -> tuple:
    """All identity records, ordered by id."""
    return _build()


def lookup(rid: str) -> IdentityRecord:
    base, _ = parse_point_id(rid)
    for r in registry():
        if r.id == base:
            return r
    raise UnknownFunction(f"unknown identity {rid!r}")


# ------------------------------------------------------------------ reports

@dataclass
class PlanResult:
    method: str
    value: float | None
    abs_error: float | None
    terms: int = 0
    status: str = "pass"
    reason: str = ""


@dataclass
class VerificationReport:
    id: str
    plans: list
    rhs_value: float | None
    abs_dev: float | None
    rel_dev: float | None
    status: str
    terms_used: int
    runtime_ms: float
    tol: float = 0.0
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "plans": [{"method": p.method, "value": p.value, "abs_error": p.abs_error} for p in self.plans],
            "rhs_value": self.rhs_value,
            "abs_dev": self.abs_dev,
            "rel_dev": self.rel_dev,
            "status": self.status,
            "terms_used": self.terms_used,
            "runtime_ms": self.runtime_ms,
        }

    def text(self) -> str:
        dev = "n/a" if self.abs_dev is None else f"{self.abs_dev:.3g}"
        line = f"{self.status.upper():8s} {self.id:32s} dev={dev:9s} tol={self.tol:.0e} {self.runtime_ms:8.1f} ms"
        return line + (f"  ({self.reason})" if self.reason else "")


@contextmanager
def _term_cap(max_terms: int | None):
    if max_terms is None:
        yield
        return
    old = os.environ.get("FLK_MAX_TERMS")
    os.environ["FLK_MAX_TERMS"] = str(int(max_terms))
    try:
        yield
    finally:
        if old is None:
            del os.environ["FLK_MAX_TERMS"]
        else:
            os.environ["FLK_MAX_TERMS"] = old


_STATUS_RANK = {"pass": 0, "tol-miss": 1, "fail": 2}


def _judge(v: ValueWithError, rhs: float, tol: float) -> str:
    budget = tol * (abs(rhs) if rhs else 1.0)
    dev = abs(v.value - rhs)
    if not math.isfinite(v.value) or dev > budget + v.abs_error:
        return "fail"
    return "pass" if v.abs_error <= budget else "tol-miss"


def _run_point(rec: IdentityRecord, params: dict, tol: float | None = None,
               max_terms: int | None = None, method: str | None = None) -> VerificationReport:
    t0 = time.perf_counter()
    plans = [p for p in rec.plans if method is None or p.method == method]
    pid = point_id(rec.id, params)
    if not plans:
        raise UnknownFunction(f"{rec.id} has no plan {method!r}; plans are "
                              + ", ".join(p.method for p in rec.plans))
    results: list[PlanResult] = []
    values: list[tuple[PlanResult, ValueWithError, float]] = []
    with _term_cap(max_terms):
        try:
            rhs = rec.rhs_value(params)
        except (FLKError, ArithmeticError, ValueError) as e:
            rhs, rhs_err = None, f"rhs: {type(e).__name__}: {e}"
        else:
            rhs_err = ""
        for plan in plans:
            ptol = tol if tol is not None else TOL_CLASSES[plan.tol_class or rec.tol_class]
            try:
                v = plan.evaluate(params, ptol)
                pr = PlanResult(plan.method, v.value, v.abs_error, v.terms)
                values.append((pr, v, ptol))
            except ToleranceNotReached as e:
                best = e.best
                pr = PlanResult(plan.method, getattr(best, "value", None), getattr(best, "abs_error", None),
                                getattr(best, "terms", 0), "tol-miss", f"{type(e).__name__}: {e}")
                if best is not None:
                    values.append((pr, best, ptol))
            except (FLKError, ArithmeticError, ValueError, OverflowError) as e:
                pr = PlanResult(plan.method, None, None, 0, "fail", f"{type(e).__name__}: {e}")
            results.append(pr)
    reasons = [f"{p.method}: {p.reason}" for p in results if p.reason]
    if rhs_err:
        reasons.append(rhs_err)
    # a record without a closed form is judged by the consensus of its plans
    ok = [(pr, v, t) for pr, v, t in values if math.isfinite(v.value)]
    if rhs is None and ok:
        ref = min(ok, key=lambda x: x[1].abs_error)[1]
        ref_value, ref_err = ref.value, ref.abs_error
    else:
        # closed forms are sums of a few rounded constants
        ref_value, ref_err = rhs, (256 * EPS * max(1.0, abs(rhs)) if rhs is not None else 0.0)
    if ref_value is not None:
        for pr, v, t in ok:
            if pr.status == "tol-miss" and pr.reason:
                continue
            if v is not None and rhs is None and v.value == ref_value and v.abs_error == ref_err:
                pr.status = "pass" if v.abs_error <= t * max(abs(ref_value), 1e-300) else "tol-miss"
                continue
            pr.status = _judge(ValueWithError(v.value, v.abs_error + ref_err), ref_value, t)
    # plans must also agree with each other
    for i in range(len(ok)):
        for j in range(i + 1, len(ok)):
            (p1, v1, t1), (p2, v2, t2) = ok[i], ok[j]
            scale = max(abs(v1.value), 1e-300)
            if abs(v1.value - v2.value) > v1.abs_error + v2.abs_error + max(t1, t2) * scale:
                reasons.append(f"plans {p1.method} and {p2.method} disagree")
                p1.status = p2.status = "fail"
    status = max((p.status for p in results), key=_STATUS_RANK.get) if results else "fail"
    best = min(ok, key=lambda x: x[1].abs_error) if ok else None
    if best is not None and ref_value is not None:
        abs_dev = abs(best[1].value - ref_value)
        rel_dev = abs_dev / abs(ref_value) if ref_value else abs_dev
    else:
        abs_dev = rel_dev = None
    rec_tol = tol if tol is not None else rec.tol
    return VerificationReport(pid, results, rhs if rhs is not None else ref_value, abs_dev, rel_dev, status,
                              sum(p.terms for p in results), round((time.perf_counter() - t0) * 1e3, 3),
                              rec_tol, "; ".join(reasons))


def verify(rid: str, *, tol: float | None = None, max_terms: int | None = None,
           method: str | None = None, **params) -> VerificationReport:
    """Evaluate every plan of one identity (one grid point) and compare.

    ``rid`` may carry parameters (``PI4_RATIO[eta=2.7]``) or they may be
    passed as keywords; without either, the first grid point is used.
    Evaluator errors become a failing report, never an exception.
    """
    rec = lookup(rid)
    _, p = parse_point_id(rid)
    p.update(params)
    if rec.grid:
        names = [k for k, _ in rec.grid[0]]
        unknown = set(p) - set(names)
        if unknown:
            raise UnknownFunction(f"{rec.id} has no parameter(s) {sorted(unknown)}")
        if set(p) != set(names):
            first = dict(rec.grid[0])
            first.update(p)
            p = first
        p = {k: p[k] for k in names}
    elif p:
        raise UnknownFunction(f"{rec.id} takes no parameters")
    return _run_point(rec, p, tol, max_terms, method)


def expand_points(tag: str | None = None, ids: Iterable[str] | None = None) -> list[tuple[str, dict]]:
    recs = registry() if ids is None else [lookup(i) for i in ids]
    out = []
    for r in recs:
        if tag is not None and tag not in r.tags:
            continue
        for p in r.points():
            out.append((r.id, p))
    return sorted(out, key=lambda rp: point_id(*rp))


def _verify_task(args):
    rid, params, tol, max_terms = args
    return _run_point(lookup(rid), params, tol, max_terms)


def verify_all(tag: str | None = None, *, ids: Iterable[str] | None = None, tol: float | None = None,
               max_terms: int | None = None, workers: int | None = None) -> list[VerificationReport]:
    """Reports for every grid point of every (tagged) record, ordered by id."""
    tasks = [(rid, p, tol, max_terms) for rid, p in expand_points(tag, ids)]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(tasks) <= 1:
        return [_verify_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_verify_task, tasks, chunksize=1))


# ------------------------------------------------------------ serialization

FIELDS = ("id", "plans", "rhs_value", "abs_dev", "rel_dev", "status", "terms_used", "runtime_ms")


def _num(v) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return "null"
    if isinstance(v, int) and not isinstance(v, bool):
        return str(v)
    return format(float(v), ".17g")


def _json_value(v) -> str:
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, list):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if isinstance(v, str):
        return json.dumps(v)
    return _num(v)


def reports_to_json(reports: Sequence[VerificationReport], stable: bool = False) -> str:
    """JSON array with floats at 17 significant digits; ``stable`` zeroes runtime_ms."""
    rows = []
    for r in reports:
        d = r.to_dict()
        if stable:
            d["runtime_ms"] = 0.0
        rows.append("  " + _json_value(d))
    return "[\n" + ",\n".join(rows) + "\n]\n"


def reports_to_csv(reports: Sequence[VerificationReport], stable: bool = False) -> str:
    """One row per report; ``plans`` is a JSON list in its column."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in reports:
        d = r.to_dict()
        w.writerow([d["id"], _json_value(d["plans"]), _num(d["rhs_value"]), _num(d["abs_dev"]),
                    _num(d["rel_dev"]), d["status"], d["terms_used"], _num(0.0 if stable else d["runtime_ms"])])
    return buf.getvalue()


# ---------------------------------------------------------- E-transform check

def _k_minus_half_pi(x, mc):
    """K(sqrt x) - pi/2 without cancellation at small x."""
    x = np.asarray(x, dtype=float)
    small = x < _SMALL
    s = math.pi / 2 * _series(np.concatenate([[0.0], _C[1:]]), np.where(small, x, 0.0))
    K, _ = ke_arrays(np.where(small, 0.5, x), np.where(small, 0.5, mc))
    return np.where(small, s, K - math.pi / 2)


def _w_kernel(u: float, du_right: float) -> float:
    """int_u^1 (K(sqrt x) - pi/2) x^(-3/2) dx."""
    if du_right <= 0:
        return 0.0

    def f(x, dl, dr):
        return _k_minus_half_pi(x, dr) * x ** -1.5
    return tanh_sinh_integrate(f, u, 1.0, "both", 1e-12, vectorized=True, with_distances=True).value


def _g3f2(u, du_right):
    """3F2[1/2,1/2,3/2; 1,5/2; u] = (6/pi) int_0^1 y^2 K(y sqrt u) dy."""
    out = np.empty_like(u)
    for i, (ui, di) in enumerate(zip(u, du_right)):
        def f(y, dl, dr, ui=ui, di=di):
            K, _ = ke_arrays(y * y * ui, di + ui * dr * (1 + y))
            return y * y * K
        out[i] = 6 / math.pi * tanh_sinh_integrate(f, 0.0, 1.0, "right", 1e-13, vectorized=True,
                                                   with_distances=True).value
    return out


def _g_one(x, dr):
    return np.ones_like(x)


def _g_sqrt(x, dr):
    return np.sqrt(x)


def _g_k(x, dr):
    return ke_arrays(x, dr)[0]


_E_TRANSFORM_G = {"one": _g_one, "sqrt": _g_sqrt, "K": _g_k, "g3f2": _g3f2}


def e_transform_ids() -> list[str]:
    return list(_E_TRANSFORM_G)


def e_transform_pieces(g_id: str) -> dict:
    """The three integrals of the E-transformation for weight g:

    direct      int E(sqrt x) g(x) dx
    elementary  int [pi/2 - (pi/2 - 1) sqrt x] g(x) dx
    double      (1/2) iint (K(sqrt x) - pi/2) sqrt(z) g(xz) dz dx
                = (1/2) int sqrt(u) g(u) int_u^1 (K(sqrt x) - pi/2) x^(-3/2) dx du
    """
    try:
        g = _E_TRANSFORM_G[g_id]
    except KeyError:
        raise UnknownFunction(f"unknown weight {g_id!r}; known: {', '.join(_E_TRANSFORM_G)}") from None
    q = dict(vectorized=True, with_distances=True)

    def direct(x, dl, dr):
        return ke_arrays(x, dr)[1] * g(x, dr)

    def elem(x, dl, dr):
        return (math.pi / 2 - (math.pi / 2 - 1) * np.sqrt(x)) * g(x, dr)

    def dbl(u, dl, dr):
        w = np.array([_w_kernel(ui, di) for ui, di in zip(u, dr)])
        return 0.5 * np.sqrt(u) * g(u, dr) * w

    return {
        "direct": tanh_sinh_integrate(direct, 0.0, 1.0, "right", 1e-12, **q),
        "elementary": tanh_sinh_integrate(elem, 0.0, 1.0, "right", 1e-12, **q),
        "double": tanh_sinh_integrate(dbl, 0.0, 1.0, "right", 1e-11, **q),
    }


_E_TRANSFORM_RHS = {
    "one": lambda: 4.0 / 3.0,
    "sqrt": lambda: None,
    "K": lambda: (2 + 7 * _c("zeta3")) / 4,
    "g3f2": lambda: None,
}


def e_transform_check(g_id: str, tol: float = 1e-9) -> VerificationReport:
    """Both sides of the E-transformation for a catalog weight g."""
    t0 = time.perf_counter()
    try:
        pieces = e_transform_pieces(g_id)
    except UnknownFunction:
        raise
    except FLKError as e:
        return VerificationReport(f"E_TRANSFORM[{g_id}]", [], None, None, None, "fail", 0,
                                  round((time.perf_counter() - t0) * 1e3, 3), tol, f"{type(e).__name__}: {e}")
    lhs = pieces["direct"]
    rhs_side = pieces["elementary"] + pieces["double"]
    rhs_side = ValueWithError(rhs_side.value, rhs_side.abs_error,
                              pieces["elementary"].terms + pieces["double"].terms)
    closed = _E_TRANSFORM_RHS[g_id]()
    ref = closed if closed is not None else lhs.value
    plans = []
    for name, v in (("direct", lhs), ("e-transform", rhs_side)):
        st = _judge(v, ref, tol)
        plans.append(PlanResult(name, v.value, v.abs_error, v.terms, st))
    reason = ""
    if abs(lhs.value - rhs_side.value) > lhs.abs_error + rhs_side.abs_error + tol * max(abs(ref), 1e-300):
        reason = "direct and transformed sides disagree"
        for p in plans:
            p.status = "fail"
    status = max((p.status for p in plans), key=_STATUS_RANK.get)
    dev = abs(rhs_side.value - ref)
    return VerificationReport(f"E_TRANSFORM[{g_id}]", plans, ref, dev, dev / abs(ref), status,
                              lhs.terms + rhs_side.terms, round((time.perf_counter() - t0) * 1e3, 3), tol, reason)
