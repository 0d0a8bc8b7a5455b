"""Harmonic-binomial ("twisted") series and the integral routes used to
cross-check them.

A twisted term is

    factor * kernel(n) * num(n)/den(n) * sum_i coef_i poly_i(n) (H^{(order_i)}_{scale_i n + shift_i})^{power_i}

with kernel(n) a ratio of Pochhammer symbols times kx^n, e.g.
C(2n,n)^2/16^n = (1/2)_n^2 / (1)_n^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _backend
from .errors import AccelerationBreakdown, Divergent, OutsideDomain, ToleranceNotReached, UnknownFunction
from .numerics import (EPS, TailEstimate, ValueWithError, compensated_sum, levin_u_accelerate,
                       prefix_sums, reconcile, sum_array_with_tail, tanh_sinh_integrate, term_cap)
from .specfun import harmonic

LN2 = math.log(2.0)


@dataclass(frozen=True)
class Kernel:
    """prod (up)_n / prod (low)_n * x^n."""

    up: tuple = ()
    low: tuple = ()
    x: float = 1.0

    @property
    def decay(self) -> float:
        """Power q with kernel(n) ~ C n^-q (for |x| = 1)."""
        return float(sum(self.low) - sum(self.up))

    def value(self, n: int) -> float:
        v = 1.0
        for k in range(n):
            r = self.x
            for a in self.up:
                r *= a + k
            for b in self.low:
                r /= b + k
            v *= r
        return v


KERNELS = {
    # C(2n,n)^2 / 16^n ~ 1/(pi n)
    "c2nn_sq": Kernel((0.5, 0.5), (1.0, 1.0)),
    # C(4n,2n) C(2n,n) / 64^n ~ 1/(pi sqrt(2) n)
    "c4n2n_c2nn": Kernel((0.25, 0.75), (1.0, 1.0)),
    # C(2n,n) / 4^n ~ 1/sqrt(pi n)
    "c2nn": Kernel((0.5,), (1.0,)),
    "one": Kernel(),
}


@dataclass(frozen=True)
class HarmonicPiece:
    """coef * poly(n) * (H^{(order)}_{scale n + shift})^power; power 0 drops H."""

    coef: float = 1.0
    shift: float = 0.0
    scale: int = 1
    order: int = 1
    power: int = 1
    poly: tuple = (1.0,)


def H(shift: float = 0.0, *, coef: float = 1.0, scale: int = 1, order: int = 1, power: int = 1,
      poly: Sequence[float] = (1.0,)) -> HarmonicPiece:
    return HarmonicPiece(float(coef), float(shift), int(scale), int(order), int(power),
                         tuple(float(c) for c in poly))


def const(c: float, poly: Sequence[float] = (1.0,)) -> HarmonicPiece:
    return HarmonicPiece(float(c), 0.0, 1, 1, 0, tuple(float(v) for v in poly))


@dataclass(frozen=True)
class TwistedTermSpec:
    """Definition of a twisted series sum_{n >= n0} term(n).

    num, den    ascending polynomial coefficients of the rational factor
    harmonics   HarmonicPiece tuple; empty means the factor is 1
    decay       optional (exponent, log_power) override for the term
                asymptotics when the harmonic combination cancels
    """

    kernel: str | Kernel = "c2nn_sq"
    num: tuple = (1.0,)
    den: tuple = (1.0,)
    harmonics: tuple = ()
    n0: int = 0
    factor: float = 1.0
    decay: tuple | None = None

    def kernel_obj(self) -> Kernel:
        if isinstance(self.kernel, Kernel):
            return self.kernel
        try:
            return KERNELS[self.kernel]
        except KeyError:
            raise UnknownFunction(f"unknown kernel {self.kernel!r}") from None

    def tail(self) -> TailEstimate:
        k = self.kernel_obj()
        ax = abs(k.x)
        if ax < 1:
            return TailEstimate("geometric", ratio=ax)
        if ax > 1:
            raise Divergent(f"kernel ratio {k.x} grows geometrically")
        if k.x < 0:
            return TailEstimate("alternating")
        if self.decay is not None:
            p, j = self.decay
        else:
            growth = max([_deg(h.poly) for h in self.harmonics], default=0)
            p = k.decay + _deg(self.den) - _deg(self.num) - growth
            j = max([h.power if h.order == 1 else 0 for h in self.harmonics], default=0)
        if not p > 1:
            raise Divergent(f"terms decay like n^-{p:g}; the series diverges")
        return TailEstimate("power-law", exponent=float(p), log_power=int(j))

    def terms(self, n_end: int) -> np.ndarray:
        """Terms for n = n0 .. n_end (inclusive), before ``factor``."""
        k = self.kernel_obj()
        accs: list[tuple] = []
        for h in self.harmonics:
            if h.power > 0 and (h.scale, h.shift, h.order) not in accs:
                accs.append((h.scale, h.shift, h.order))
        acc_init = np.array([harmonic(sc * self.n0 + sh, od).value for sc, sh, od in accs], dtype=float)
        deg = max([len(h.poly) for h in self.harmonics], default=1)
        poly = np.zeros((len(self.harmonics), deg))
        for i, h in enumerate(self.harmonics):
            poly[i, : len(h.poly)] = h.poly
        return _backend.twisted_terms(
            int(self.n0), int(n_end), k.value(self.n0),
            np.asarray(k.up, dtype=float), np.asarray(k.low, dtype=float), float(k.x),
            np.asarray(self.num, dtype=float), np.asarray(self.den, dtype=float),
            acc_init,
            np.array([a[0] for a in accs], dtype=np.int64),
            np.array([a[1] for a in accs], dtype=float),
            np.array([a[2] for a in accs], dtype=np.int64),
            np.array([h.coef for h in self.harmonics], dtype=float),
            np.array([accs.index((h.scale, h.shift, h.order)) if h.power > 0 else -1
                      for h in self.harmonics], dtype=np.int64),
            np.array([h.power for h in self.harmonics], dtype=np.int64),
            poly,
            np.array([len(h.poly) - 1 for h in self.harmonics], dtype=np.int64),
        )

    def term(self, n: int) -> float:
        """One term computed directly (no recurrences), for testing."""
        k = self.kernel_obj()
        r = _poly(self.num, n) / _poly(self.den, n)
        if self.harmonics:
            h = 0.0
            for p in self.harmonics:
                hv = harmonic(p.scale * n + p.shift, p.order).value ** p.power if p.power else 1.0
                h += p.coef * _poly(p.poly, n) * hv
        else:
            h = 1.0
        return self.factor * k.value(n) * r * h


def _deg(p: Sequence[float]) -> int:
    d = len(p) - 1
    while d > 0 and p[d] == 0:
        d -= 1
    return d


def _poly(c: Sequence[float], n: float) -> float:
    r = 0.0
    for a in reversed(c):
        r = r * n + a
    return r


DEFAULT_TERMS = 200_000


def evaluate_twisted(spec: TwistedTermSpec, tol: float = 1e-10, n_terms: int | None = None,
                     max_terms: int = 3_200_000) -> ValueWithError:
    """Sum a twisted series.

    Power-law families: compensated partial sums up to N (default 2e5)
    plus a power-log tail fit; the order-to-order change of the fit is the
    error.  A second fit on the first quarter of the terms is folded into
    the error when the two disagree; a Levin-u value from the first 80
    partial sums is attached for information only.  N grows by 4x while the error exceeds tol.
    Alternating kernels use Levin-u; |x| < 1 kernels a geometric bound.
    """
    tail = spec.tail()
    scale = abs(spec.factor)
    if tail.kind == "geometric":
        r = tail.ratio
        n = int(math.log(max(tol, 1e-17) * 1e-3) / math.log(r)) + 50
        t = spec.terms(spec.n0 + term_cap(n) - 1)
        res = sum_array_with_tail(t, spec.n0, tail)
        return _scaled(res, spec.factor)
    if tail.kind == "alternating":
        t = spec.terms(spec.n0 + 79)
        S, _ = prefix_sums(t, np.arange(1, t.shape[0] + 1))
        res = levin_u_accelerate(S)
        return _scaled(res, spec.factor)
    n = term_cap(n_terms or DEFAULT_TERMS)
    max_terms = term_cap(max_terms)
    best = None
    while True:
        t = spec.terms(spec.n0 + n - 1)
        fit = sum_array_with_tail(t, spec.n0, tail)
        if best is None or fit.abs_error < best.abs_error:
            best = fit
        if fit.abs_error * scale <= tol or n >= max_terms:
            break
        n = min(max_terms, n * 4)
    routes = {"tail-fit": _scaled(best, spec.factor)}
    err = best.abs_error
    # independent truncation point: the fit on the first quarter of the terms
    m = best.terms // 4
    if m >= 1000:
        quarter = sum_array_with_tail(t[:m], spec.n0, tail)
        routes["tail-fit-quarter"] = _scaled(quarter, spec.factor)
        diff = abs(quarter.value - best.value)
        if diff > quarter.abs_error + best.abs_error:
            err = max(err, diff)
    try:
        S, _ = prefix_sums(t[:80], np.arange(1, 81))
        routes["levin-u"] = _scaled(levin_u_accelerate(S), spec.factor)
    except AccelerationBreakdown:
        pass
    res = ValueWithError(spec.factor * best.value, scale * err, best.terms, routes)
    if res.abs_error > tol:
        raise ToleranceNotReached(
            f"twisted series error {res.abs_error:.3g} > tol {tol:.3g} after {best.terms} terms", res)
    return res


def _scaled(v: ValueWithError, c: float) -> ValueWithError:
    return ValueWithError(c * v.value, abs(c) * v.abs_error, v.terms)


# ---------------------------------------------------------------- W(m)

def w_rational(m: int) -> Fraction:
    m = int(m)
    if m < 0:
        raise OutsideDomain("m must be >= 0")
    a, b, c = 2 * m - 1, 2 * m + 1, 2 * m + 3
    return Fraction(1, a) + Fraction(2, b) + Fraction(1, c) + Fraction(1, a * a) - Fraction(1, c * c)


def evaluate_w_sequence(m: int) -> ValueWithError:
    """W(m) = 1/(2m-1) + 2/(2m+1) + 1/(2m+3) + 1/(2m-1)^2 - 1/(2m+3)^2."""
    v = float(w_rational(m))
    return ValueWithError(v, EPS * abs(v) / 2)


# ------------------------------------------------------ parameter derivative

def param_deriv_lhs_spec(j: int) -> TwistedTermSpec:
    """sum_i C(2i,i)^2 (2 H_{2i} - H_i) / (16^i (i + j + 1))."""
    return TwistedTermSpec("c2nn_sq", num=(1.0,), den=(j + 1.0, 1.0),
                           harmonics=(H(0, coef=2.0, scale=2), H(0, coef=-1.0)))


def param_deriv_rhs(j: int) -> ValueWithError:
    """(8 (j!)^2 / pi) sum_{i<=j} ((2i+1)(H_{i-1/2} + ln 2) + 1) / ((2i+1)^2 (j-i)! (i+j+1)!)."""
    terms = []
    for i in range(j + 1):
        h = harmonic(i - 0.5).value
        w = Fraction(math.factorial(j) ** 2, math.factorial(j - i) * math.factorial(i + j + 1))
        terms.append(float(w) * ((2 * i + 1) * (h + LN2) + 1) / (2 * i + 1) ** 2)
    s = compensated_sum(terms)
    v = 8.0 / math.pi * s.value
    return ValueWithError(v, 8.0 / math.pi * s.abs_error + 32 * EPS * abs(v) * (j + 1))


def param_deriv_series(j: int) -> ValueWithError:
    """Both sides of the parameter-derivative series identity, reconciled."""
    j = int(j)
    if not 0 <= j <= 20:
        raise OutsideDomain("j must be in 0..20")
    lhs = evaluate_twisted(param_deriv_lhs_spec(j), tol=1e-9)
    rhs = param_deriv_rhs(j)
    return reconcile({"series": lhs, "finite-sum": rhs}, 1e-9, f"param_deriv_series({j})")


# ------------------------------------------------------------ integral routes

def _k(x, dr):
    from .elliptic import ke_arrays
    return ke_arrays(x, dr)


def _ig_k_ln1mx(x, dl, dr):
    K, _ = _k(x, dr)
    return K * np.log(dr)


def _ig_1mE_over_1mx(x, dl, dr):
    _, E = _k(x, dr)
    return (1.0 - E) / dr


def _ig_k_ln2_1mx(x, dl, dr):
    K, _ = _k(x, dr)
    return K * np.log(dr) ** 2


def _ig_k_over_sqrtx(x, dl, dr):
    K, _ = _k(x, dr)
    return K / np.sqrt(dl)


def _ig_k_over_sqrt_x1mx(x, dl, dr):
    K, _ = _k(x, dr)
    return K / np.sqrt(dl * dr)


def _ig_xk_over_sqrt1mx(x, dl, dr):
    K, _ = _k(x, dr)
    return x * K / np.sqrt(dr)


def _ig_xn_ln1msqrtx(n):
    def f(x, dl, dr):
        s = np.sqrt(x)
        # 1 - sqrt x = (1 - x) / (1 + sqrt x) keeps precision near x = 1
        return x ** n * np.log(dr / (1.0 + s))
    return f


def _ig_catalan(n):
    def f(x, dl, dr):
        return x ** n * np.sqrt(dr / dl) / (2 * math.pi)
    return f


def _ig_y2n_over_1py(n):
    def f(x, dl, dr):
        return x ** (2 * n) / (1.0 + x)
    return f


def _c2nn_sq_table(n: int) -> np.ndarray:
    c = np.empty(n)
    c[0] = 1.0
    for k in range(1, n):
        c[k] = c[k - 1] * ((2 * k - 1) / (2 * k)) ** 2
    return c


_C = _c2nn_sq_table(120)
_SMALL = 0.25
_IDX = np.arange(_C.shape[0], dtype=float)


def _series(coefs, x):
    out = np.zeros_like(x)
    for c in coefs[::-1]:
        out = out * x + c
    return out


def _kernel_A(x, mc):
    """sum_n C(2n,n)^2 x^n / (16^n (n+1)) = (4/pi)(E - (1-x)K)/x (modulus sqrt x)."""
    x = np.asarray(x, dtype=float)
    small = x < _SMALL
    out = _series(_C / (_IDX + 1), np.where(small, x, 0.0))
    xl = np.where(small, 0.5, x)
    K, E = _k(xl, np.where(small, 0.5, mc))
    return np.where(small, out, 4.0 / math.pi * (E - np.where(small, 0.5, mc) * K) / xl)


def _kernel_B(x, mc):
    """sum_n C(2n,n)^2 n x^(n-1) / (16^n (n+1))."""
    x = np.asarray(x, dtype=float)
    small = x < _SMALL
    out = _series((_C * _IDX / (_IDX + 1))[1:], np.where(small, x, 0.0))
    xl = np.where(small, 0.5, x)
    mcl = np.where(small, 0.5, mc)
    K, _ = _k(xl, mcl)
    big = (2.0 / math.pi * K - _kernel_A(xl, mcl)) / xl
    return np.where(small, out, big)


def _quarter_kernel(y, dr):
    """sum_n C(4n,2n) C(2n,n) y^(2n) / 64^n through K at modulus^2 2y/(1+y)."""
    K, _ = _k(2 * y / (1 + y), dr / (1 + y))
    return 2.0 / (math.pi * np.sqrt(1 + y)) * K


def _ig_hn_minus_half(y, dl, dr):
    return 2.0 * _quarter_kernel(y, dr) / (1 + y)


def _ig_half_plus_nh(y, dl, dr):
    return _quarter_kernel(y, dr) / (1 + y) ** 2


def _ig_e_minus_1_over_1mk(k, dl, dr):
    _, E = _k(k * k, dr * (1 + k))
    return (E - 1.0) / dr


def _ig_hsq_h2_np1(x, dl, dr):
    return np.log(dr) ** 2 * _kernel_B(x, dr)


def _ig_h2_np1(x, dl, dr):
    return -np.log(dl) / dr * (4.0 / math.pi - _kernel_A(x, dr))


def _ig_h2n_np1(t, dl, dr):
    return (4.0 / math.pi - _kernel_A(t * t, dr * (1 + t))) / dr


def _ig_quarter_harm(x, dl, dr):
    K, _ = _k(x, dr)
    return 2.0 / math.pi * K * dl ** -0.25 / (1 + np.sqrt(x))


def _ig_hn_half_np1(y, dl, dr):
    return 2.0 * _kernel_A(y * y, dr * (1 + y)) / (1 + y)


def _ig_k_times(weight):
    def f(x, dl, dr):
        K, _ = _k(x, dr)
        return K * weight(x, dl, dr)
    return f


def _ig_e_ln1mx(x, dl, dr):
    _, E = _k(x, dr)
    return E * np.log(dr)


# id -> (integrand factory(params), a, b, flags, param names)
# 1 - E(sqrt x) loses a few digits to cancellation near x = 1
_ERROR_FLOOR = {"one_minus_E_over_1mx": 1e-11, "E_minus_1_over_1mk": 1e-11, "h2n_np1": 1e-11,
                "h2_np1": 5e-12}

_INTEGRALS = {
    "K_ln1mx": (lambda p: _ig_k_ln1mx, 0.0, 1.0, "right", ()),
    "one_minus_E_over_1mx": (lambda p: _ig_1mE_over_1mx, 0.0, 1.0, "right", ()),
    "K_ln2_1mx": (lambda p: _ig_k_ln2_1mx, 0.0, 1.0, "right", ()),
    "K_over_sqrtx": (lambda p: _ig_k_over_sqrtx, 0.0, 1.0, "both", ()),
    "K_over_sqrt_x1mx": (lambda p: _ig_k_over_sqrt_x1mx, 0.0, 1.0, "both", ()),
    "xn_ln1msqrtx": (lambda p: _ig_xn_ln1msqrtx(p["n"]), 0.0, 1.0, "right", ("n",)),
    "catalan_weight": (lambda p: _ig_catalan(p["n"]), 0.0, 4.0, "both", ("n",)),
    "y2n_over_1py": (lambda p: _ig_y2n_over_1py(p["n"]), 0.0, 1.0, "none", ("n",)),
    "xK_over_sqrt1mx": (lambda p: _ig_xk_over_sqrt1mx, 0.0, 1.0, "right", ()),
    # integral forms of harmonic-binomial series
    "hn_minus_half_kform": (lambda p: _ig_hn_minus_half, 0.0, 1.0, "right", ()),
    "half_plus_nh_kform": (lambda p: _ig_half_plus_nh, 0.0, 1.0, "right", ()),
    "E_minus_1_over_1mk": (lambda p: _ig_e_minus_1_over_1mk, 0.0, 1.0, "right", ()),
    "hsq_h2_np1": (lambda p: _ig_hsq_h2_np1, 0.0, 1.0, "right", ()),
    "h2_np1": (lambda p: _ig_h2_np1, 0.0, 1.0, "both", ()),
    "h2n_np1": (lambda p: _ig_h2n_np1, 0.0, 1.0, "right", ()),
    "quarter_harm_K": (lambda p: _ig_quarter_harm, 0.0, 1.0, "both", ()),
    "hn_half_np1": (lambda p: _ig_hn_half_np1, 0.0, 1.0, "right", ()),
    # K(sqrt x) against elementary weights
    "K": (lambda p: _ig_k_times(lambda x, dl, dr: 1.0), 0.0, 1.0, "right", ()),
    "sqrtx_K": (lambda p: _ig_k_times(lambda x, dl, dr: np.sqrt(x)), 0.0, 1.0, "right", ()),
    "K_over_sqrt_2mx": (lambda p: _ig_k_times(lambda x, dl, dr: (1 + dr) ** -0.5), 0.0, 1.0, "right", ()),
    "K_2mx_m32": (lambda p: _ig_k_times(lambda x, dl, dr: (1 + dr) ** -1.5), 0.0, 1.0, "right", ()),
    "K_sqrt_2mx": (lambda p: _ig_k_times(lambda x, dl, dr: np.sqrt(1 + dr)), 0.0, 1.0, "right", ()),
    "E_ln1mx": (lambda p: _ig_e_ln1mx, 0.0, 1.0, "right", ()),
}


def integral_ids() -> list[str]:
    return list(_INTEGRALS)


def integral_route(integrand_id: str, params: dict | None = None, tol: float = 1e-13) -> ValueWithError:
    """tanh-sinh value of a registered integral representation."""
    try:
        factory, a, b, flags, names = _INTEGRALS[integrand_id]
    except KeyError:
        raise UnknownFunction(f"unknown integral {integrand_id!r}") from None
    params = dict(params or {})
    missing = [k for k in names if k not in params]
    if missing:
        raise ValueError(f"integral {integrand_id!r} needs parameter(s) {missing}")
    if "n" in params and (int(params["n"]) != params["n"] or params["n"] < 0):
        raise OutsideDomain("n must be a non-negative integer")
    f = factory(params)
    floor = _ERROR_FLOOR.get(integrand_id, 0.0)
    tol = max(tol, floor / 10)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        r = tanh_sinh_integrate(f, a, b, flags, tol, vectorized=True, with_distances=True)
    if floor:
        r = ValueWithError(r.value, max(r.abs_error, floor), r.terms, r.routes)
    return r
