import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import CATALOG_FUNCTIONS, ETA
from flk.errors import OutsideDomain, UnknownFunction
from flk.hyper import HypergeometricSpec, pFq
from flk.legendre import (catalog_ids, fl_catalog, fl_integrate_against_K, fl_numeric, legendre_P,
                          legendre_P_binomial, named_moment_ids, shifted_legendre_table, shifted_moment_named,
                          shifted_moment_power, shifted_moments_named, xPnPl_overlap)
from flk.numerics import TailEstimate, levin_u_accelerate, tanh_sinh_integrate
from flk.legendre import FLCoefficients

LN1S2 = math.log1p(math.sqrt(2))

# mpmath references
LN2_MOMENT_3 = 0.59722222222222222222
LNLN_MOMENT_2 = -0.05555555555555555556
ARCSINE_MOMENT_2 = 0.78539816339744828965
LNSQRT_MOMENT_5 = -0.03484848484848484848
BRAFMAN = {(0.2, 0.1): 1.00328046463552733680, (0.2, 0.3): 1.00678572894660630910,
           (0.6, 0.1): 1.01126338747351461231, (0.6, 0.3): 1.03324747037330272459}


# ------------------------------------------------------------ polynomials

def test_legendre_base_cases():
    assert legendre_P(0, 0.37).value == 1.0
    assert legendre_P(1, 0.37).value == 0.37
    assert legendre_P(4, 1.0).value == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("n", range(26))
def test_recurrence_matches_binomial_sum(n):
    for x in (-0.9, -0.2, 0.3, 0.75):
        assert legendre_P(n, x).value == pytest.approx(legendre_P_binomial(n, x), abs=1e-12)


def test_P6_dual_definition():
    assert legendre_P(6, 0.3).value == pytest.approx(legendre_P_binomial(6, 0.3), abs=1e-12)


def test_shifted_orthogonality():
    def f(x):
        T = shifted_legendre_table(20, x)
        return T[:, None, :] * T[None, :, :]
    # integrate the whole 21 x 21 Gram matrix at once on Gauss-Legendre nodes
    xs, ws = np.polynomial.legendre.leggauss(40)
    xs = (xs + 1) / 2
    gram = (f(xs) * ws).sum(axis=-1) / 2
    expect = np.diag(1.0 / (2 * np.arange(21) + 1))
    assert np.abs(gram - expect).max() < 1e-12


def test_shifted_orthogonality_tanh_sinh():
    for m, n in [(0, 0), (3, 3), (5, 7), (20, 20), (19, 20)]:
        r = tanh_sinh_integrate(lambda x: shifted_legendre_table(20, x)[m] * shifted_legendre_table(20, x)[n],
                                0.0, 1.0, "none", 1e-14, vectorized=True)
        assert r.value == pytest.approx((m == n) / (2 * n + 1), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=-0.95, max_value=0.95), st.floats(min_value=0.05, max_value=0.6))
def test_generating_function_property(x, z):
    s = sum(legendre_P(n, x).value * z**n for n in range(120))
    assert s == pytest.approx(1 / math.sqrt(1 - 2 * x * z + z * z), abs=1e-10)


@pytest.mark.parametrize("x", [0.3, 0.7])
@pytest.mark.parametrize("z", [0.2, 0.5])
def test_generating_function_points(x, z):
    s = sum(legendre_P(n, x).value * z**n for n in range(80))
    assert s == pytest.approx(1 / math.sqrt(1 - 2 * x * z + z * z), abs=1e-10)


def _brafman_lhs(s, x, z, N=200):
    c = 1.0
    parts = []
    for n in range(N):
        parts.append(c * legendre_P(n, x).value * z**n)
        c *= (s + n) * (1 - s + n) / (n + 1.0) ** 2
    sums = np.cumsum(parts)
    return levin_u_accelerate(sums[-40:]).value if abs(parts[-1]) > 1e-17 else sums[-1]


@pytest.mark.parametrize("x,z", sorted(BRAFMAN))
def test_brafman(x, z):
    s = 0.25
    a = math.sqrt(1 - 2 * x * z + z * z)
    rhs = (pFq(HypergeometricSpec([s, 1 - s], [1.0], (1 - a - z) / 2)).value
           * pFq(HypergeometricSpec([s, 1 - s], [1.0], (1 - a + z) / 2)).value)
    assert rhs == pytest.approx(BRAFMAN[(x, z)], abs=1e-13)
    assert _brafman_lhs(s, x, z) == pytest.approx(rhs, abs=1e-9)


# ----------------------------------------------------------------- moments

def test_shifted_moment_power_examples():
    assert shifted_moment_power(2, 1).value == pytest.approx(1 / 6, rel=1e-15)
    for i in (0, 3, 7):
        assert shifted_moment_power(i, 0).value == pytest.approx(1 / (i + 1), rel=1e-15)
    assert shifted_moment_power(1, 3).value == 0.0


@pytest.mark.parametrize("eta", [0.3, -0.5, 2.7])
def test_shifted_moment_power_real_vs_quadrature(eta):
    for n in (0, 1, 4, 9):
        r = tanh_sinh_integrate(lambda x: x**eta * shifted_legendre_table(n, x)[n], 0.0, 1.0, "left",
                                1e-14, vectorized=True)
        assert shifted_moment_power(eta, n).value == pytest.approx(r.value, abs=1e-12)


def test_shifted_moment_power_gamma_form():
    eta, n = 0.3, 4
    g = (-1) ** n * math.gamma(n - eta) * math.gamma(1 + eta) / (math.gamma(-eta) * math.gamma(n + 2 + eta))
    assert shifted_moment_power(eta, n).value == pytest.approx(g, rel=1e-13)


def test_shifted_moment_power_domain():
    with pytest.raises(OutsideDomain):
        shifted_moment_power(-1.5, 2)
    with pytest.raises(OutsideDomain):
        shifted_moment_power(2, -1)


def test_named_moments_examples():
    assert shifted_moment_named("ln(1-x)", 1).value == pytest.approx(-0.5, rel=1e-15)
    assert shifted_moment_named("ln(1-sqrt(x))", 2).value == pytest.approx(-3 / 20, rel=1e-14)
    assert shifted_moment_named("1/sqrt(x(1-x))", 1).value == 0.0
    assert shifted_moment_named("ln^2(1-x)", 3).value == pytest.approx(LN2_MOMENT_3, rel=1e-14)
    assert shifted_moment_named("ln(1-x)ln(x)", 2).value == pytest.approx(LNLN_MOMENT_2, rel=1e-14)
    assert shifted_moment_named("ln(1-x)ln(x)", 3).value == 0.0
    assert shifted_moment_named("1/sqrt(x(1-x))", 2).value == pytest.approx(ARCSINE_MOMENT_2, rel=1e-14)
    assert shifted_moment_named("ln(1-sqrt(x))", 5).value == pytest.approx(LNSQRT_MOMENT_5, rel=1e-14)


def test_named_moments_at_zero_by_quadrature():
    assert shifted_moment_named("ln(1-x)", 0).value == pytest.approx(-1.0, abs=1e-13)
    assert shifted_moment_named("ln^2(1-x)", 0).value == pytest.approx(2.0, abs=1e-13)
    assert shifted_moment_named("ln(1-sqrt(x))", 0).value == pytest.approx(-1.5, abs=1e-13)
    assert shifted_moment_named("ln(1-x)ln(x)", 0).value == pytest.approx(2 - math.pi**2 / 6, abs=1e-13)
    assert shifted_moment_named("1/sqrt(x(1-x))", 0).value == pytest.approx(math.pi, rel=1e-15)


_INTEGRANDS = {
    "ln(1-x)": lambda x, dl, dr: np.log(dr),
    "ln^2(1-x)": lambda x, dl, dr: np.log(dr) ** 2,
    "ln(1-sqrt(x))": lambda x, dl, dr: np.log(dr / (1 + np.sqrt(x))),
    "ln(1-x)ln(x)": lambda x, dl, dr: np.log(dr) * np.log(dl),
    "1/sqrt(x(1-x))": lambda x, dl, dr: 1 / np.sqrt(dl * dr),
}


@pytest.mark.parametrize("fn_id", sorted(_INTEGRANDS))
def test_named_moments_vs_quadrature(fn_id):
    f = _INTEGRANDS[fn_id]
    for n in range(1, 13):
        r = tanh_sinh_integrate(lambda x, dl, dr: f(x, dl, dr) * shifted_legendre_table(n, x)[n], 0.0, 1.0,
                                "both", 1e-14, vectorized=True, with_distances=True)
        assert shifted_moment_named(fn_id, n).value == pytest.approx(r.value, abs=1e-10)


@pytest.mark.parametrize("fn_id", ["ln(1-x)", "ln^2(1-x)", "ln(1-sqrt(x))", "1/sqrt(x(1-x))"])
def test_vectorized_named_moments_match_scalar(fn_id):
    v = shifted_moments_named(fn_id, 30)
    assert v == pytest.approx([shifted_moment_named(fn_id, j).value for j in range(30)], rel=1e-13, abs=1e-300)


def test_named_moment_errors():
    assert set(named_moment_ids()) == set(_INTEGRANDS)
    with pytest.raises(UnknownFunction):
        shifted_moment_named("sin(x)", 1)
    with pytest.raises(OutsideDomain):
        shifted_moment_named("ln(1-x)", -1)


# ------------------------------------------------------------------ catalog

def test_catalog_examples():
    assert fl_catalog("K(sqrt(x))")(0).value == 2.0
    assert fl_catalog("E(sqrt(x))")(0).value == pytest.approx(4 / 3, rel=1e-15)
    assert fl_catalog("frakJ(x)")(1).value == pytest.approx(-48 / 105, rel=1e-15)
    with pytest.raises(UnknownFunction):
        fl_catalog("tan(x)")
    with pytest.raises(OutsideDomain):
        fl_catalog("x^eta", -1.0)


@pytest.mark.parametrize("fn_id", sorted(CATALOG_FUNCTIONS))
def test_catalog_matches_numeric(fn_id):
    num = fl_numeric(CATALOG_FUNCTIONS[fn_id], 40, "both", vectorized=True, with_distances=True)
    cat = fl_catalog(fn_id, ETA if fn_id == "x^eta" else None)
    assert np.abs(num.values(41) - cat.values(41)).max() < 1e-10


def test_catalog_ids_complete():
    assert set(catalog_ids()) == set(CATALOG_FUNCTIONS)


def test_fl_numeric_projection():
    num = fl_numeric(lambda x: shifted_legendre_table(3, x)[3], 8, "none", vectorized=True)
    expect = np.zeros(9)
    expect[3] = 1
    assert np.abs(num.values(9) - expect).max() < 1e-12
    num = fl_numeric(lambda x: 5.0, 4, "none")
    assert num.values(5) == pytest.approx([5, 0, 0, 0, 0], abs=1e-12)
    with pytest.raises(OutsideDomain):
        num.values(7)


def test_fl_numeric_matches_catalog_geometric():
    num = fl_numeric(lambda x: 1 / math.sqrt(2 - x), 30)
    assert np.abs(num.values(31) - fl_catalog("1/sqrt(2-x)").values(31)).max() < 1e-11


@pytest.mark.parametrize("fn_id,f", [("1/sqrt(2-x)", lambda x: 1 / math.sqrt(2 - x)),
                                     ("sqrt(2-x)", lambda x: math.sqrt(2 - x))])
def test_truncated_series_reconstructs(fn_id, f):
    c = fl_catalog(fn_id)
    tail = 4 * abs(c(60).value) / (1 - (math.sqrt(2) - 1) ** 2)
    for x in np.linspace(0.1, 0.9, 9):
        assert abs(c.evaluate(x, 60) - f(x)) <= tail + 1e-14


def test_integrate_against_K():
    r = fl_integrate_against_K(fl_catalog("(2-x)^(-3/2)"))
    assert r.value == pytest.approx(math.sqrt(2) * LN1S2, rel=1e-13)
    r = fl_integrate_against_K(fl_catalog("1/sqrt(2-x)"))
    assert r.value == pytest.approx(math.pi**2 / 4 - LN1S2**2, rel=1e-13)
    delta = FLCoefficients("delta0", lambda n: (np.asarray(n) == 0).astype(float), TailEstimate("none"))
    assert fl_integrate_against_K(delta).value == 2.0


def test_integrate_against_K_power_law_and_alternating():
    # int K(sqrt x) K(sqrt x) dx = 7 zeta(3)/2 through the coefficients 2/(2n+1)
    r = fl_integrate_against_K(fl_catalog("K(sqrt(x))"))
    assert r.value == pytest.approx(3.5 * 1.2020569031595942854, rel=1e-11)
    r = fl_integrate_against_K(fl_catalog("x^eta", 0.5))
    assert r.value == pytest.approx((1 + 2 * 0.91596559417721901505) / 2, rel=1e-11)


# ------------------------------------------------------------------ overlaps

def test_overlap_table():
    assert xPnPl_overlap(0, 0).value == 0.5
    assert xPnPl_overlap(2, 0).value == 0.0
    assert xPnPl_overlap(1, 0).value == pytest.approx(1 / 6, rel=1e-15)


@pytest.mark.parametrize("N", range(6))
@pytest.mark.parametrize("L", range(6))
def test_overlap_vs_quadrature(N, L):
    xs, ws = np.polynomial.legendre.leggauss(20)
    xs = (xs + 1) / 2
    T = shifted_legendre_table(6, xs)
    q = float((xs * T[N] * T[L] * ws).sum() / 2)
    assert xPnPl_overlap(N, L).value == pytest.approx(q, abs=1e-14)
