"""Summation, acceleration and quadrature kernels.

Everything is binary64.  Errors are tracked as first-order absolute bounds
in :class:`ValueWithError`; they are estimates, not proofs.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import _backend
from .errors import (AccelerationBreakdown, NonFiniteTerm, QuadratureStall,
                     ToleranceNotReached)

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ValueWithError:
    """A binary64 value with an absolute error estimate.

    ``terms`` records how many terms / nodes were used and ``routes`` holds
    the per-route values when an evaluator reconciles several routes.
    Neither takes part in equality.  Arithmetic adds term counts and drops
    routes.
    """

    value: float
    abs_error: float = 0.0
    terms: int = field(default=0, compare=False)
    routes: Mapping[str, "ValueWithError"] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        err = abs(float(self.abs_error))
        if math.isfinite(self.value) and not math.isfinite(err):
            raise ValueError("abs_error must be finite for a finite value")
        object.__setattr__(self, "abs_error", err)

    def __float__(self) -> float:
        return self.value

    @property
    def rel_error(self) -> float:
        return self.abs_error / abs(self.value) if self.value else math.inf

    def _coerce(self, other) -> "ValueWithError":
        if isinstance(other, ValueWithError):
            return other
        return ValueWithError(float(other), 0.0)

    def __add__(self, other):
        o = self._coerce(other)
        v = self.value + o.value
        return ValueWithError(v, self.abs_error + o.abs_error + EPS * abs(v) / 2, self.terms + o.terms)

    __radd__ = __add__

    def __neg__(self):
        return ValueWithError(-self.value, self.abs_error, self.terms, self.routes)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        v = self.value * o.value
        err = abs(self.value) * o.abs_error + abs(o.value) * self.abs_error
        return ValueWithError(v, err + EPS * abs(v) / 2, self.terms + o.terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        v = self.value / o.value
        err = (self.abs_error + abs(v) * o.abs_error) / abs(o.value)
        return ValueWithError(v, err + EPS * abs(v) / 2, self.terms + o.terms)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return abs(self.value - x) <= self.abs_error + slack

    def with_routes(self, routes: Mapping[str, "ValueWithError"]) -> "ValueWithError":
        return ValueWithError(self.value, self.abs_error, self.terms, dict(routes))


VWE = ValueWithError


@dataclass(frozen=True)
class TailEstimate:
    """Asymptotic model of a series' terms.

    kind        one of geometric, power-law, alternating, none
    exponent    power-law: terms decay like n^-exponent (ln n)^log_power
    ratio       geometric: |t_{n+1}/t_n| -> ratio
    coefficient optional leading coefficient (informational)
    """

    kind: str
    exponent: float | None = None
    ratio: float | None = None
    coefficient: float | None = None
    log_power: int = 0

    def __post_init__(self):
        if self.kind not in ("geometric", "power-law", "alternating", "none"):
            raise ValueError(f"unknown tail kind {self.kind!r}")
        if self.kind == "power-law":
            if self.exponent is None or not self.exponent > 1:
                raise ValueError("power-law tail needs exponent > 1 to converge")
        if self.kind == "geometric":
            if self.ratio is None or not 0 < self.ratio < 1:
                raise ValueError("geometric tail needs ratio in (0, 1)")
        if self.log_power < 0:
            raise ValueError("log_power must be >= 0")


def term_cap(n: int) -> int:
    """Clamp a requested term count by the FLK_MAX_TERMS override."""
    cap = os.environ.get("FLK_MAX_TERMS")
    if cap:
        try:
            return max(1, min(int(n), int(cap)))
        except ValueError:
            pass
    return int(n)


# ---------------------------------------------------------------- summation

def compensated_sum(terms: Iterable[float]) -> ValueWithError:
    """Neumaier-compensated sum with a rounding-error bound."""
    x = np.ascontiguousarray(np.fromiter(terms, dtype=np.float64)
                             if not isinstance(terms, np.ndarray) else terms, dtype=np.float64)
    n = x.shape[0]
    if n == 0:
        return ValueWithError(0.0, 0.0, 0)
    s, sabs, bad = _backend.neumaier_sum(x)
    if bad >= 0:
        raise NonFiniteTerm(f"term {bad} is not finite: {x[bad]!r}")
    err = EPS * abs(s) + n * EPS * EPS * sabs
    return ValueWithError(s, err, n)


def prefix_sums(terms: np.ndarray, counts: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Compensated sums of terms[:c] for each c in ascending counts."""
    idx = np.ascontiguousarray(counts, dtype=np.int64)
    return _backend.checkpoint_sums(np.ascontiguousarray(terms, dtype=np.float64), idx)


def power_log_fit(Ns: np.ndarray, S: np.ndarray, p: float, log_power: int,
                  max_order: int = 4) -> tuple[float, float, int]:
    """Fit S_N = S + sum_{k<K} sum_{j<=J} d_kj ln(N)^j / N^(p+k).

    Returns (S, residual, K) for the order K whose estimate moved least
    from order K-1; residual is that move.
    """
    Ns = np.asarray(Ns, dtype=float)
    S = np.asarray(S, dtype=float)
    lnN = np.log(Ns)
    # centre the sums to keep the constant column well scaled
    ref = S[-1]
    y = S - ref
    ests = []
    for K in range(1, max_order + 1):
        ncols = 1 + K * (log_power + 1)
        if ncols >= len(Ns) - 2:
            break
        cols = [np.ones_like(Ns)]
        for k in range(K):
            for j in range(log_power + 1):
                cols.append(lnN ** j * Ns ** (-(p + k)))
        A = np.stack(cols, axis=1)
        scale = np.abs(A).max(axis=0)
        coef = np.linalg.lstsq(A / scale, y, rcond=None)[0]
        ests.append(ref + coef[0] / scale[0])
    if len(ests) == 1:
        return ests[0], abs(ests[0] - S[-1]), 1
    diffs = [abs(ests[k] - ests[k - 1]) for k in range(1, len(ests))]
    k = int(np.argmin(diffs))
    return ests[k + 1], diffs[k], k + 2


def checkpoints(length: int, lo_frac: float = 0.02, count: int = 32, lo_min: int = 40) -> np.ndarray:
    lo = max(lo_min, int(length * lo_frac))
    if lo >= length:
        lo = max(1, length // 4)
    pts = np.unique(np.geomspace(lo, length, count).astype(np.int64))
    return pts


def sum_array_with_tail(terms: np.ndarray, n0: int, tail: TailEstimate,
                        tol: float = 0.0) -> ValueWithError:
    """Sum a precomputed term array t[n0], t[n0+1], ... with a tail model.

    power-law: compensated prefix sums at geometric checkpoints plus a
    power-log fit of the remainder.  alternating: Levin-u on the first
    partial sums.  geometric / none: plain compensated sum plus a bound
    from the last terms.
    """
    terms = np.ascontiguousarray(terms, dtype=np.float64)
    L = terms.shape[0]
    if not np.all(np.isfinite(terms)):
        bad = int(np.argmin(np.isfinite(terms)))
        raise NonFiniteTerm(f"term at n={n0 + bad} is not finite")
    if tail.kind == "power-law":
        pts = checkpoints(L)
        S, sabs = prefix_sums(terms, pts)
        Ns = (pts + n0 - 1).astype(float)  # index of last included term
        Ns = np.maximum(Ns, 1.0)
        value, resid, _ = power_log_fit(Ns, S, tail.exponent - 1.0, tail.log_power)
        err = 2.0 * resid + 16 * EPS * sabs[-1]
        return ValueWithError(value, err, L)
    if tail.kind == "alternating":
        m = min(L, 64)
        S, _ = prefix_sums(terms, np.arange(1, m + 1))
        acc = levin_u_accelerate(S)
        return ValueWithError(acc.value, acc.abs_error, m)
    total = compensated_sum(terms)
    last = abs(terms[-1]) if L else 0.0
    if tail.kind == "geometric":
        r = tail.ratio
        bound = last * r / (1 - r)
        value = total.value + (terms[-1] * r / (1 - r) if L else 0.0)
        return ValueWithError(value, total.abs_error + bound * 0.5, L)
    return ValueWithError(total.value, total.abs_error + last, L)


def sum_with_tail(term_fn: Callable[[int], float], tail: TailEstimate,
                  target_tol: float = 1e-12, max_terms: int = 10**6,
                  start: int = 0) -> ValueWithError:
    """Sum term_fn(n) for n >= start with an analytic/fitted tail.

    Raises ToleranceNotReached (with ``best``) when target_tol cannot be
    met inside max_terms.
    """
    max_terms = term_cap(max_terms)
    if tail.kind == "geometric":
        return _geometric_sum(term_fn, tail.ratio, target_tol, max_terms, start)
    if tail.kind == "none":
        return _plain_sum(term_fn, target_tol, max_terms, start)
    if tail.kind == "alternating":
        best = None
        m = 24
        terms: list[float] = []
        while True:
            m = min(m, max_terms)
            while len(terms) < m:
                terms.append(float(term_fn(start + len(terms))))
            S, _ = prefix_sums(np.asarray(terms), np.arange(1, m + 1))
            try:
                res = levin_u_accelerate(S)
            except AccelerationBreakdown:
                res = ValueWithError(S[-1], abs(terms[-1]), m)
            res = ValueWithError(res.value, res.abs_error, m)
            if best is None or res.abs_error < best.abs_error:
                best = res
            if res.abs_error <= target_tol:
                return res
            if m >= max_terms or m >= 96:
                raise ToleranceNotReached(
                    f"alternating sum stalled at abs_error {best.abs_error:.3g}", best)
            m *= 2
    # power-law
    n = min(max_terms, 4000)
    terms = np.empty(0)
    best = None
    while True:
        new = np.array([term_fn(k) for k in range(start + terms.shape[0], start + n)], dtype=float)
        terms = np.concatenate([terms, new])
        res = sum_array_with_tail(terms, start, tail)
        if best is None or res.abs_error < best.abs_error:
            best = res
        if res.abs_error <= target_tol:
            return res
        if n >= max_terms:
            raise ToleranceNotReached(
                f"power-law tail fit residual {best.abs_error:.3g} > {target_tol:.3g}", best)
        n = min(max_terms, n * 4)


def _geometric_sum(term_fn, ratio, tol, max_terms, start):
    terms = []
    k = start
    while True:
        t = float(term_fn(k))
        terms.append(t)
        k += 1
        bound = abs(t) * ratio / (1 - ratio)
        if bound <= tol * 1e-3 or t == 0.0:
            break
        if len(terms) >= max_terms:
            total = compensated_sum(terms)
            raise ToleranceNotReached("geometric sum ran out of terms",
                                      ValueWithError(total.value, total.abs_error + bound, len(terms)))
    total = compensated_sum(terms)
    t = terms[-1]
    corr = t * ratio / (1 - ratio)
    observed = abs(terms[-1] / terms[-2]) if len(terms) > 1 and terms[-2] != 0 else ratio
    model_err = abs(corr) * abs(observed - ratio) / (1 - ratio)
    return ValueWithError(total.value + corr, total.abs_error + model_err, len(terms))


def _plain_sum(term_fn, tol, max_terms, start):
    terms = []
    small = 0
    k = start
    while len(terms) < max_terms:
        t = float(term_fn(k))
        terms.append(t)
        k += 1
        small = small + 1 if abs(t) <= tol * 1e-3 else 0
        if small >= 3:
            total = compensated_sum(terms)
            return ValueWithError(total.value, total.abs_error + 3 * abs(t), len(terms))
    total = compensated_sum(terms)
    raise ToleranceNotReached("terms did not become negligible",
                              ValueWithError(total.value, total.abs_error + abs(terms[-1]), len(terms)))


# ------------------------------------------------------------- acceleration

def levin_u_accelerate(partial_sums: Sequence[float], beta: float = 1.0) -> ValueWithError:
    """Levin u-transform of a sequence of partial sums.

    The order k is chosen where consecutive transforms agree best; the
    larger of the two neighbouring differences is the error estimate.
    """
    s = np.asarray(partial_sums, dtype=float)
    M = s.shape[0]
    if M < 8:
        raise AccelerationBreakdown("Levin-u needs at least 8 partial sums")
    if not np.all(np.isfinite(s)):
        raise AccelerationBreakdown("non-finite partial sum")
    a = np.diff(s, prepend=0.0)
    if np.all(a[1:] == 0.0):
        return ValueWithError(s[-1], 0.0, M)
    zero = np.flatnonzero(a == 0.0)
    if zero.size:
        z = int(zero[0])
        if z >= 1 and np.all(a[z:] == 0.0):
            # the sequence has stagnated in binary64: it is converged
            return ValueWithError(s[-1], abs(a[z - 1]) + EPS * abs(s[-1]), M)
        if z >= 8:
            return levin_u_accelerate(s[:z], beta)
        raise AccelerationBreakdown("zero term makes the u-transform remainder degenerate")
    j = np.arange(M, dtype=float)
    omega = (j + beta) * a
    L = np.full(M, np.nan)
    for k in range(1, M):
        jj = j[: k + 1]
        binom = np.array([math.comb(k, int(i)) for i in range(k + 1)], dtype=float)
        sign = np.where(np.arange(k + 1) % 2 == 0, 1.0, -1.0)
        w = sign * binom * ((beta + jj) / (beta + k)) ** (k - 1)
        num = np.sum(w * s[: k + 1] / omega[: k + 1])
        den = np.sum(w / omega[: k + 1])
        if den == 0.0 or not np.isfinite(den):
            continue
        L[k] = num / den
    diffs = np.abs(np.diff(L))
    best_k, best_score = None, math.inf
    for k in range(2, M - 1):
        e1, e2 = diffs[k - 1], diffs[k]
        if not (np.isfinite(e1) and np.isfinite(e2)):
            continue
        score = max(e1, e2)
        if score < best_score:
            best_k, best_score = k, score
    if best_k is None:
        raise AccelerationBreakdown("all Levin-u orders degenerate")
    val = L[best_k]
    return ValueWithError(val, best_score + 4 * EPS * abs(val), M)


# ---------------------------------------------------------------- quadrature

_HALF_PI = math.pi / 2


def _flags(singularity_flags) -> tuple[bool, bool]:
    if singularity_flags is None:
        return False, False
    if isinstance(singularity_flags, str):
        singularity_flags = {singularity_flags}
    fl = set(singularity_flags)
    bad = fl - {"left", "right", "none", "both"}
    if bad:
        raise ValueError(f"unknown singularity flag(s) {sorted(bad)}")
    return ("left" in fl or "both" in fl), ("right" in fl or "both" in fl)


def _ts_nodes(level: int, tmax: float):
    """Abscissa parameters for one tanh-sinh level (t >= 0 only).

    Returns (t, d, w): d = 1 - tanh(pi/2 sinh t) computed without
    cancellation and w the transformed weight, both per unit half-width.
    """
    h = 2.0 ** (-level)
    kmax = int(math.ceil(tmax / h))
    if level == 0:
        k = np.arange(0, kmax + 1)
    else:
        k = np.arange(1, kmax + 1, 2)
    t = k * h
    s = _HALF_PI * np.sinh(t)
    e = np.exp(-2.0 * s)
    d = 2.0 * e / (1.0 + e)
    w = _HALF_PI * np.cosh(t) * 4.0 * e / (1.0 + e) ** 2
    return t, d, w


def tanh_sinh_integrate(f: Callable, a: float, b: float, singularity_flags="none",
                        tol: float = 1e-12, *, vectorized: bool = False,
                        with_distances: bool = False, max_level: int = 12,
                        min_level: int = 3) -> ValueWithError:
    """Double-exponential quadrature of f over (a, b).

    ``singularity_flags`` ('left', 'right', 'both', 'none') extends the
    node range towards the flagged endpoint(s) down to distances ~1e-300.
    With ``with_distances`` the integrand is called as f(x, x - a, b - x)
    with both distances computed without cancellation, which is what keeps
    1/sqrt(1-x) or K(sqrt x) accurate next to x = 1.  With ``vectorized``
    f receives numpy arrays.

    Converged when successive levels differ by <= tol * max(1, |I|); the
    difference is the reported abs_error.
    """
    a = float(a)
    b = float(b)
    if b == a:
        return ValueWithError(0.0, 0.0, 0)
    if b < a:
        r = tanh_sinh_integrate(f, b, a, _swap_flags(singularity_flags), tol,
                                vectorized=vectorized, with_distances=with_distances,
                                max_level=max_level, min_level=min_level)
        return ValueWithError(-r.value, r.abs_error, r.terms)
    left, right = _flags(singularity_flags)
    hw = 0.5 * (b - a)
    c = 0.5 * (a + b)
    t_sing, t_reg = 6.2, 3.3

    def evaluate(x, dl, dr):
        if vectorized:
            if with_distances:
                return np.asarray(f(x, dl, dr), dtype=float)
            return np.asarray(f(x), dtype=float)
        if with_distances:
            return np.array([f(xi, dli, dri) for xi, dli, dri in zip(x, dl, dr)], dtype=float)
        return np.array([f(xi) for xi in x], dtype=float)

    def level_sum(level):
        tmax = max(t_sing if left else t_reg, t_sing if right else t_reg)
        t, d, w = _ts_nodes(level, tmax)
        total = 0.0
        sabs = 0.0
        count = 0
        for side, flagged in (("right", right), ("left", left)):
            lim = t_sing if flagged else t_reg
            sel = t <= lim
            if side == "left":
                sel &= t > 0  # centre node counted once, with the right side
            dd = hw * d[sel]
            ww = hw * w[sel]
            if side == "right":
                x = b - dd
                dl, dr = (b - a) - dd, dd
            else:
                x = a + dd
                dl, dr = dd, (b - a) - dd
            if level == 0 and side == "right":
                # the t = 0 node sits at the centre
                z = t[sel] == 0
                x = np.where(z, c, x)
                dl = np.where(z, hw, dl)
                dr = np.where(z, hw, dr)
            if not with_distances:
                keep = (x > a) & (x < b)
                x, dl, dr, ww = x[keep], dl[keep], dr[keep], ww[keep]
            else:
                keep = (dl > 0) & (dr > 0)
                x, dl, dr, ww = x[keep], dl[keep], dr[keep], ww[keep]
            if x.size == 0:
                continue
            fx = evaluate(x, dl, dr)
            prod = ww * fx
            bad = ~np.isfinite(prod)
            if np.any(bad):
                # tolerate overflow only where the weight has already vanished
                if np.any(ww[bad] > 1e-280):
                    raise QuadratureStall(f"integrand not finite at x={x[bad][0]!r}")
                prod = np.where(bad, 0.0, prod)
            s, sa = _sum_pair(prod)
            total += s
            sabs += sa
            count += x.size
        return total, sabs, count

    I_prev = None
    acc = 0.0
    acc_abs = 0.0
    nodes = 0
    diffs = []
    for level in range(0, max_level + 1):
        h = 2.0 ** (-level)
        s, sa, cnt = level_sum(level)
        nodes += cnt
        if level == 0:
            acc, acc_abs = s, sa
        else:
            acc += s
            acc_abs += sa
        I = h * acc
        floor = 64 * EPS * h * acc_abs
        if I_prev is not None:
            diff = abs(I - I_prev)
            diffs.append(diff)
            if level >= min_level and (diff <= tol * max(1.0, abs(I)) or diff <= floor):
                return ValueWithError(I, max(diff, floor), nodes)
        I_prev = I
    best = ValueWithError(I_prev, max(diffs[-1], 64 * EPS * acc_abs * 2.0 ** (-max_level)), nodes)
    raise QuadratureStall(f"tanh-sinh did not converge: last difference {diffs[-1]:.3g}", best)


def _sum_pair(prod):
    s, sabs, _ = _backend.neumaier_sum(np.ascontiguousarray(prod, dtype=np.float64))
    return s, sabs


def _swap_flags(fl):
    left, right = _flags(fl)
    out = []
    if left:
        out.append("right")
    if right:
        out.append("left")
    return out or "none"


# -------------------------------------------------------------- double sums

@dataclass(frozen=True)
class SingleReduction:
    """Closed-form inner sum: outer(m_array) returns sum_n term(m, n).

    The outer series is then summed from ``start`` with ``tail``.
    """

    outer: Callable[[np.ndarray], np.ndarray]
    tail: TailEstimate
    start: int = 0
    n_terms: int = 200_000


def double_sum(term_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
               strategy: str = "diagonal-truncation-with-tail", tol: float = 1e-8,
               *, reduction: SingleReduction | None = None, n_diag: int = 4000,
               tail: TailEstimate | None = None) -> ValueWithError:
    """Sum an absolutely convergent double family over m, n >= 0.

    ``term_fn(m, n)`` must accept numpy integer arrays (m is passed as a
    scalar, n as an array).  The diagonal strategy sums m + n <= N in
    diagonal order and fits the remainder with a power-log model in N;
    reduce-to-single needs ``reduction`` (the inner sum in closed form).
    """
    if strategy == "reduce-to-single":
        if reduction is None:
            raise ValueError("reduce-to-single needs a SingleReduction")
        n = term_cap(reduction.n_terms)
        m = np.arange(reduction.start, reduction.start + n, dtype=np.int64)
        terms = np.asarray(reduction.outer(m), dtype=float)
        res = sum_array_with_tail(terms, reduction.start, reduction.tail)
    elif strategy == "diagonal-truncation-with-tail":
        N = term_cap(n_diag)
        D = np.zeros(N + 1)
        C = np.zeros(N + 1)
        for m in range(N + 1):
            n = np.arange(0, N - m + 1, dtype=np.int64)
            vals = np.asarray(term_fn(m, n), dtype=float)
            if not np.all(np.isfinite(vals)):
                raise NonFiniteTerm(f"non-finite term in row m={m}")
            seg = slice(m, N + 1)
            y = vals - C[seg]
            t = D[seg] + y
            C[seg] = (t - D[seg]) - y
            D[seg] = t
        D = D - C
        if tail is None:
            tail = _guess_diag_tail(D)
        res = sum_array_with_tail(D, 0, tail)
        res = ValueWithError(res.value, res.abs_error, (N + 1) * (N + 2) // 2)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    if res.abs_error > tol:
        raise ToleranceNotReached(
            f"double sum error {res.abs_error:.3g} exceeds tol {tol:.3g}", res)
    return res


def _guess_diag_tail(D: np.ndarray) -> TailEstimate:
    N = D.shape[0] - 1
    a, b = abs(D[N // 2]), abs(D[N])
    if b == 0.0 or a == 0.0:
        return TailEstimate("none")
    if b / a < 1e-8:
        return TailEstimate("none")
    slope = math.log(a / b) / math.log(N / (N // 2))
    q = max(2, int(round(slope)))
    return TailEstimate("power-law", exponent=float(q), log_power=2)


# ------------------------------------------------------------ reconciliation

def reconcile(routes: Mapping[str, ValueWithError], tol: float = 0.0,
              what: str = "routes") -> ValueWithError:
    """Check that independent evaluations agree and return the sharpest one.

    Two routes agree when |v1 - v2| <= e1 + e2 + tol * max(1, |v|).  The
    result is the route with the smallest abs_error, with every route
    attached under ``routes``.
    """
    from .errors import RouteDisagreement

    items = list(routes.items())
    if not items:
        raise ValueError("no routes to reconcile")
    name0, best = min(items, key=lambda kv: kv[1].abs_error)
    scale = max(1.0, abs(best.value))
    for name, r in items:
        if abs(r.value - best.value) > r.abs_error + best.abs_error + tol * scale:
            raise RouteDisagreement(
                f"{what}: {name}={r.value!r} (+-{r.abs_error:.2g}) vs "
                f"{name0}={best.value!r} (+-{best.abs_error:.2g})", dict(routes))
    terms = sum(r.terms for r in routes.values())
    return ValueWithError(best.value, best.abs_error, terms, dict(routes))
