"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` or directly with
``python3 tests/test_acceptance.py``.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from conftest import CATALOG_FUNCTIONS, ETA  # noqa: E402
from flk.elliptic import jm_half, ksq_weighted_integral, moment_Jm_routes  # noqa: E402
from flk.hyper import HypergeometricSpec, pFq, pochhammer  # noqa: E402
from flk.identities import lookup, verify, verify_all  # noqa: E402
from flk.legendre import fl_catalog, fl_numeric, legendre_P, shifted_legendre_table  # noqa: E402
from flk.numerics import tanh_sinh_integrate  # noqa: E402
from flk.series import integral_route  # noqa: E402
from flk.specfun import rogers_L  # noqa: E402
from fractions import Fraction  # noqa: E402

# mpmath references at 30 digits
G = 0.91596559417721901505
ZETA3 = 1.2020569031595942854
GAMMA_QUARTER = 3.62560990822190831193
K_HALF = 1.85407467730137191843
E_HALF = 1.35064388104767550252
BRAFMAN = {(0.2, 0.1): 1.00328046463552733680, (0.6, 0.3): 1.03324747037330272459}


def criterion_1():
    targets = {
        "K": 2.0,
        "sqrtx_K": (1 + 2 * G) / 2,
        "K_ln1mx": 8 * math.log(2) - 8,
        "K_over_sqrtx": 4 * G,
        "K_over_sqrt_x1mx": GAMMA_QUARTER**4 / (8 * math.pi),
    }
    t0 = time.perf_counter()
    worst = max(abs(integral_route(k).value - v) / abs(v) for k, v in targets.items())
    dt = time.perf_counter() - t0
    return worst <= 1e-10 and dt < 5, f"five K integrals, worst rel err {worst:.1e}, {dt:.2f} s"


def criterion_2():
    worst = 0.0
    for fn_id, f in CATALOG_FUNCTIONS.items():
        num = fl_numeric(f, 40, "both", vectorized=True, with_distances=True)
        cat = fl_catalog(fn_id, ETA if fn_id == "x^eta" else None)
        worst = max(worst, float(np.abs(num.values(41) - cat.values(41)).max()))
    return worst <= 1e-10, f"{len(CATALOG_FUNCTIONS)} catalog entries, n <= 40, worst diff {worst:.1e}"


def _grid_ok(rid, tol, expected_points):
    reps = verify_all(ids=[rid], tol=tol, workers=1)
    ok = len(reps) == expected_points and all(r.passed and r.rel_dev <= tol for r in reps)
    return ok, max(r.rel_dev for r in reps)


def criterion_3():
    a, da = _grid_ok("PI4_RATIO", 1e-10, 5)
    b, db = _grid_ok("RATIO_15PI32", 1e-10, 4)
    c, dc = _grid_ok("RATIO_PI_JM", 1e-9, 18)
    return a and b and c, f"pi/4 {da:.1e}, 15pi/32 {db:.1e}, general pi ratio {dc:.1e}"


HARMONIC_BINOMIAL = ("HN_MINUS_HALF", "HALF_PLUS_NH", "HN_2NM1", "HSQ_PLUS_H2_NP1", "H2_NP1", "HSQ_2NM1SQ",
                     "H2N_2NM1", "H2N_NP1", "QUARTER_HARM", "H2N_2NM1SQ", "HN_HALF_NP1")


def criterion_4():
    bad, slowest = [], 0.0
    for rid in HARMONIC_BINOMIAL:
        t0 = time.perf_counter()
        methods = [p.method for p in lookup(rid).plans]
        ok = verify(rid, method="series", tol=1e-8)
        ok = ok.passed and ok.rel_dev <= 1e-8
        if "integral" in methods:
            r = verify(rid, method="integral", tol=1e-10)
            ok = ok and r.passed and r.rel_dev <= 1e-10
        dt = time.perf_counter() - t0
        slowest = max(slowest, dt)
        if not ok or dt >= 2:
            bad.append(rid)
    return not bad, f"{len(HARMONIC_BINOMIAL)} records, slowest {slowest:.2f} s" + (f", failing {bad}" if bad else "")


def criterion_5():
    r = verify("QUARTER_HARM", method="series", tol=1e-8)
    rhs = GAMMA_QUARTER**4 / (8 * math.pi**2) - 4 * G / math.pi
    dev = abs(r.plans[0].value - rhs) / rhs
    return r.passed and dev <= 1e-8, f"QUARTER_HARM rel dev {dev:.1e}"


def criterion_6():
    z = verify("DOUBLE_ZETA3_G", method="reduce-to-single", tol=1e-8)
    zd = verify("DOUBLE_ZETA3_G", method="direct-truncation", tol=1e-4)
    hn = verify("DOUBLE_HN", method="reduce-to-single", tol=1e-8)
    fh = verify("DOUBLE_FACT_HN", method="reduce-to-single", tol=1e-8)
    exact = (7 * ZETA3 - 4 * G) / math.pi**2
    ok = all(r.passed for r in (z, zd, hn, fh)) and abs(z.plans[0].value - exact) <= 1e-8 * exact
    return ok, (f"zeta3/G reduced {z.rel_dev:.1e}, direct {zd.rel_dev:.1e}; "
                f"DOUBLE_HN {hn.rel_dev:.1e}; DOUBLE_FACT_HN {fh.rel_dev:.1e}")


def criterion_7():
    d = verify("DILOG_4F3", tol=1e-9)
    t = verify("LI3_SERIES", tol=1e-9)
    a = math.sqrt(2) - 1
    rog = abs(4 * rogers_L(a).value - rogers_L(a * a).value - math.pi**2 / 4)
    return d.passed and t.passed and rog <= 1e-12, (f"DILOG_4F3 {d.rel_dev:.1e}, LI3_SERIES {t.rel_dev:.1e}, "
                                                     f"Rogers {rog:.1e}")


def criterion_8():
    expect = {(1, 0): (Fraction(1, 2), Fraction(7, 4)), (2, 0): (Fraction(17, 32), Fraction(77, 64)),
              (2, 2): (Fraction(-126, 1 << 14), Fraction(1757, 1 << 14))}
    ok, worst = True, 0.0
    for ab, pq in expect.items():
        p, q, v = ksq_weighted_integral(*ab)
        res = abs(float(p) + float(q) * ZETA3 - v.value)
        worst = max(worst, res)
        ok = ok and (p, q) == pq and res < 1e-10
    return ok, f"three fits exact, worst residual {worst:.1e}"


def criterion_9():
    worst = 0.0
    for m in range(7):
        for eta in (0, 0.5, 2):
            vals = [r.value for r in moment_Jm_routes(m, eta).values()]
            worst = max(worst, (max(vals) - min(vals)) / abs(vals[0]))
    res = max(abs(float(e) * E_HALF + float(k) * K_HALF - v.value) for v, e, k in map(jm_half, range(9)))
    first = [jm_half(m)[1:] for m in range(3)]
    exact = first == [(0, 1), (1, 0), (1, Fraction(-1, 6))]
    return worst <= 1e-9 and res < 1e-11 and exact, (f"moment routes worst {worst:.1e}, "
                                                      f"J_m(1/2) residual {res:.1e}, first three exact: {exact}")


def _property_spot_checks():
    # orthogonality of shifted Legendre polynomials by Gauss-Legendre
    x, w = np.polynomial.legendre.leggauss(40)
    P = shifted_legendre_table(12, (x + 1) / 2)
    gram = (P * w / 2) @ P.T
    ortho = np.abs(gram - np.diag(1 / (2 * np.arange(13) + 1.0))).max() < 1e-13
    # Brafman at s = 1/4
    braf = True
    for (xv, z), ref in BRAFMAN.items():
        a = math.sqrt(1 - 2 * xv * z + z * z)
        rhs = (pFq(HypergeometricSpec([0.25, 0.75], [1.0], (1 - a - z) / 2)).value
               * pFq(HypergeometricSpec([0.25, 0.75], [1.0], (1 - a + z) / 2)).value)
        braf = braf and abs(rhs - ref) < 1e-13
    # generating function
    gen = all(abs(sum(legendre_P(n, xv).value * z**n for n in range(80)) - 1 / math.sqrt(1 - 2 * xv * z + z * z))
              < 1e-10 for xv in (0.3, 0.7) for z in (0.2, 0.5))
    # Wallis
    wallis = all(abs(2 / math.pi * tanh_sinh_integrate(lambda t: (2 * np.sin(t)) ** (2 * n), 0.0, math.pi / 2,
                                                         "none", 1e-15, vectorized=True).value
                     - math.comb(2 * n, n)) <= 1e-10 * math.comb(2 * n, n) for n in range(11))
    # term ratios against Pochhammer products
    spec = HypergeometricSpec([0.5, 1.25], [1.75], -0.6)
    t = spec.terms(20)
    ratio = all(abs(t[k] - pochhammer(0.5, k) * pochhammer(1.25, k) / pochhammer(1.75, k) * (-0.6) ** k
                    / math.factorial(k)) <= 1e-13 * abs(t[k]) for k in range(20))
    return {"orthogonality": ortho, "Brafman": braf, "generating function": gen, "Wallis": wallis,
            "term ratio": ratio}


def criterion_10():
    spots = _property_spot_checks()
    t0 = time.perf_counter()
    p = subprocess.run([sys.executable, "-m", "flk", "verify", "--all"], capture_output=True, text=True)
    dt = time.perf_counter() - t0
    summary = p.stdout.strip().splitlines()[-1] if p.stdout.strip() else "no output"
    failed = [k for k, v in spots.items() if not v]
    ok = not failed and p.returncode == 0 and dt < 60
    return ok, f"spot checks {'ok' if not failed else failed}; verify --all: {summary}, exit {p.returncode}, {dt:.1f} s"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10]


def _line(n, ok, detail):
    return f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"


@pytest.mark.parametrize("n", range(1, len(CRITERIA) + 1))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print("\n" + _line(n, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for i, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        results.append(ok)
        print(_line(i, ok, detail), flush=True)
    sys.exit(0 if all(results) else 1)
