import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flk.errors import Divergent, OutsideDomain, ToleranceNotReached, UnknownFunction
from flk.numerics import TailEstimate, sum_with_tail, tanh_sinh_integrate
from flk.series import (KERNELS, H, Kernel, TwistedTermSpec, const, evaluate_twisted, evaluate_w_sequence,
                        integral_ids, integral_route, param_deriv_rhs, param_deriv_series, w_rational)
from flk.specfun import dilog, harmonic

LN2 = math.log(2)
G = 0.91596559417721901505
GAMMA_QUARTER = 3.62560990822190831193
ALPHA = math.sqrt(2) - 1
K_SQRT_2MX = 2.39116151542271326830  # int K(sqrt x) sqrt(2-x) dx, mpmath


def test_kernel_values():
    c2 = KERNELS["c2nn_sq"]
    for n in range(8):
        assert c2.value(n) == pytest.approx(math.comb(2 * n, n) ** 2 / 16**n, rel=1e-15)
    c4 = KERNELS["c4n2n_c2nn"]
    for n in range(8):
        assert c4.value(n) == pytest.approx(math.comb(4 * n, 2 * n) * math.comb(2 * n, n) / 64**n, rel=1e-15)
    assert c2.decay == 1.0


def test_terms_large_n_no_overflow():
    spec = TwistedTermSpec("c2nn_sq", harmonics=(H(0),))
    t = spec.terms(10**6)
    assert np.all(np.isfinite(t))
    n = 10**6
    assert t[-1] == pytest.approx(harmonic(n).value / (math.pi * n), rel=1e-5)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=400),
       st.sampled_from([H(0), H(0.25), H(-0.5), H(0, scale=2), H(0, order=2), H(0, power=2), H(1, coef=-3)]))
def test_backend_terms_match_direct(n, piece):
    spec = TwistedTermSpec("c2nn_sq", num=(1.0, 2.0), den=(-1.0, 2.0, 3.0), harmonics=(piece, const(0.5)), n0=1)
    if n < 1:
        n = 1
    t = spec.terms(n)
    assert t[-1] == pytest.approx(spec.term(n), rel=1e-12, abs=1e-300)


def test_hn_over_2n_minus_1():
    spec = TwistedTermSpec("c2nn_sq", den=(-1.0, 2.0), harmonics=(H(0),), n0=1)
    r = evaluate_twisted(spec)
    assert r.value == pytest.approx((8 * LN2 - 4) / math.pi, abs=1e-10)
    assert abs(r.value - (8 * LN2 - 4) / math.pi) <= r.abs_error + 1e-12
    assert {"tail-fit", "levin-u"} <= set(r.routes)


def test_h2n_over_2n_minus_1():
    spec = TwistedTermSpec("c2nn_sq", den=(-1.0, 2.0), harmonics=(H(0, scale=2),), n0=1)
    assert evaluate_twisted(spec).value == pytest.approx((6 * LN2 - 2) / math.pi, abs=1e-10)


def test_no_harmonic_factor_gamma_quarter():
    spec = TwistedTermSpec("c2nn_sq", den=(1.0, 4.0))
    r = evaluate_twisted(spec, tol=1e-10)
    assert 2 * math.pi * r.value == pytest.approx(GAMMA_QUARTER**4 / (8 * math.pi), rel=1e-10)


def test_first_term_vanishes_with_H0():
    spec = TwistedTermSpec("c2nn_sq", den=(1.0, 1.0), harmonics=(H(0),))
    assert spec.term(0) == 0.0
    assert spec.terms(3)[0] == 0.0


def test_divergent_and_unknown_kernel():
    with pytest.raises(Divergent):
        TwistedTermSpec("c2nn_sq", harmonics=(H(0),)).tail()
    with pytest.raises(Divergent):
        TwistedTermSpec(Kernel(x=1.5)).tail()
    with pytest.raises(UnknownFunction):
        TwistedTermSpec("c9").tail()


def test_tolerance_not_reached_carries_best():
    spec = TwistedTermSpec("c2nn_sq", den=(-1.0, 2.0), harmonics=(H(0),), n0=1)
    with pytest.raises(ToleranceNotReached) as exc:
        evaluate_twisted(spec, tol=1e-18, n_terms=5000, max_terms=5000)
    assert exc.value.best.value == pytest.approx((8 * LN2 - 4) / math.pi, abs=1e-6)


@pytest.mark.parametrize("x", [0.3, 0.7, 0.95])
def test_log_square_generating_function(x):
    spec = TwistedTermSpec(Kernel(x=x), den=(1.0, 1.0), harmonics=(H(0),), factor=x)
    r = evaluate_twisted(spec, tol=1e-13)
    assert r.value == pytest.approx(0.5 * math.log1p(-x) ** 2, abs=1e-10)


@pytest.mark.parametrize("n", range(1, 9))
def test_log_square_moment(n):
    r = tanh_sinh_integrate(lambda x, dl, dr: n * x ** (n - 1) * np.log(dr) ** 2, 0.0, 1.0, "right", 1e-14,
                            vectorized=True, with_distances=True)
    assert r.value == pytest.approx(harmonic(n).value ** 2 + harmonic(n, 2).value, abs=1e-10)


def test_bisection_identity():
    spec = TwistedTermSpec(Kernel((0.5, 0.5), (1.5, 1.5), ALPHA**2), factor=ALPHA)
    r = evaluate_twisted(spec, tol=1e-15)
    assert r.value == pytest.approx(dilog(ALPHA).re - dilog(ALPHA**2).re / 4, abs=1e-12)


def test_alternating_kernel():
    # sum (-1)^n / (2n+1)^2 = G
    spec = TwistedTermSpec(Kernel((0.5, 0.5), (1.5, 1.5), -1.0))
    assert evaluate_twisted(spec).value == pytest.approx(G, abs=1e-12)


# --------------------------------------------------------------------- W(m)

def test_w_sequence():
    assert w_rational(0) == Fraction(20, 9)
    assert evaluate_w_sequence(0).value == pytest.approx(20 / 9, rel=1e-15)
    with pytest.raises(OutsideDomain):
        w_rational(-1)


def test_w_sequence_decay():
    for m in (10**3, 10**4, 10**5):
        assert evaluate_w_sequence(m).value * m == pytest.approx(2.0, rel=5 / m)


def test_w_weighted_sum():
    r = sum_with_tail(lambda m: evaluate_w_sequence(m).value / (2 * m + 1), TailEstimate("power-law", exponent=2.0),
                      1e-11, 10**6)
    assert r.value == pytest.approx(3 * math.pi**2 / 8, abs=1e-10)


# ------------------------------------------------------------ param deriv

@pytest.mark.parametrize("j,tol", [(0, 1e-9), (1, 1e-9), (5, 1e-8)])
def test_param_deriv(j, tol):
    r = param_deriv_series(j)
    a, b = r.routes["series"].value, r.routes["finite-sum"].value
    assert abs(a - b) <= tol


def test_param_deriv_rhs_j0():
    # j = 0: (8/pi)(H_{-1/2} + ln 2 + 1) = 8(1 - ln 2)/pi
    assert param_deriv_rhs(0).value == pytest.approx(8 * (1 - LN2) / math.pi, rel=1e-14)


def test_param_deriv_domain():
    with pytest.raises(OutsideDomain):
        param_deriv_series(21)


# ---------------------------------------------------------- integral routes

CLOSED = {
    "K_ln1mx": 8 * LN2 - 8,
    "one_minus_E_over_1mx": 2 - 4 * LN2,
    "K_ln2_1mx": 48 - 4 * math.pi**2 / 3 + 32 * (LN2 - 2) * LN2,
    "K_over_sqrtx": 4 * G,
    "K_over_sqrt_x1mx": GAMMA_QUARTER**4 / (8 * math.pi),
    "xK_over_sqrt1mx": 3 * math.pi**2 / 8,
    "K": 2.0,
    "sqrtx_K": (1 + 2 * G) / 2,
    "K_over_sqrt_2mx": math.pi**2 / 4 - math.log1p(math.sqrt(2)) ** 2,
    "K_2mx_m32": math.sqrt(2) * math.log1p(math.sqrt(2)),
    "K_sqrt_2mx": K_SQRT_2MX,
    "E_ln1mx": 4 / 9 * (12 * LN2 - 11),
}


@pytest.mark.parametrize("iid", sorted(CLOSED))
def test_integral_closed_forms(iid):
    r = integral_route(iid)
    assert r.value == pytest.approx(CLOSED[iid], abs=1e-11)
    assert abs(r.value - CLOSED[iid]) <= r.abs_error + 1e-12


@pytest.mark.parametrize("n", range(6))
def test_integral_families(n):
    assert integral_route("xn_ln1msqrtx", {"n": n}).value == pytest.approx(
        -harmonic(2 * n + 2).value / (n + 1), abs=1e-12)
    assert integral_route("catalan_weight", {"n": n}).value == pytest.approx(
        math.comb(2 * n, n) / (n + 1), rel=1e-11)
    assert integral_route("y2n_over_1py", {"n": n}).value == pytest.approx(
        (harmonic(n).value - harmonic(n - 0.5).value) / 2, abs=1e-13)


def test_integral_route_examples():
    assert integral_route("y2n_over_1py", {"n": 0}).value == pytest.approx(LN2, abs=1e-15)
    assert harmonic(-0.5).value == pytest.approx(-2 * LN2, abs=1e-15)


def test_integral_route_errors():
    with pytest.raises(UnknownFunction):
        integral_route("nope")
    with pytest.raises(ValueError):
        integral_route("xn_ln1msqrtx")
    with pytest.raises(OutsideDomain):
        integral_route("xn_ln1msqrtx", {"n": -1})
    assert set(CLOSED) <= set(integral_ids())
