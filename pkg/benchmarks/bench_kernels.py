"""Time the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Each row runs the same high-level call under both backends, checks that
the results agree and prints the best wall time of N runs.
"""

import argparse
import time

import numpy as np

from flk import _backend
from flk.elliptic import ke_arrays
from flk.hyper import HypergeometricSpec
from flk.numerics import compensated_sum, prefix_sums
from flk.series import TwistedTermSpec, H

rng = np.random.default_rng(7)
X = rng.standard_normal(200_000)
M = rng.random(20_000)
HN_SPEC = TwistedTermSpec("c2nn_sq", den=(-1.0, 2.0), harmonics=(H(0),), n0=1)
PFQ = HypergeometricSpec([0.5, 0.5, 1.5], [1.0, 2.5], 1.0)
COUNTS = np.linspace(1000, len(X), 32).astype(int)

CASES = {
    "neumaier_sum (2e5)": lambda: compensated_sum(X).value,
    "checkpoint_sums (2e5, 32 cuts)": lambda: prefix_sums(X, COUNTS)[0],
    "twisted_terms (2e5)": lambda: HN_SPEC.terms(200_000),
    "hyp_terms (2e5)": lambda: PFQ.terms(200_000),
    "agm_ke (2e4 nodes)": lambda: ke_arrays(M)[0],
    "k_moments (2e5)": lambda: _backend.k_moments(200_000),
}


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        from flk import _kernels  # noqa: F401
    except ImportError:
        print("compiled kernels not built; only the fallback is available")
        return
    print(f"{'kernel':34s} {'python':>10s} {'cython':>10s} {'speedup':>8s}  max|diff|")
    for name, fn in CASES.items():
        with _backend.use("python"):
            tp, vp = best_time(fn, args.repeat)
        with _backend.use("cython"):
            tc, vc = best_time(fn, args.repeat)
        diff = float(np.max(np.abs(np.asarray(vp) - np.asarray(vc))))
        print(f"{name:34s} {tp * 1e3:8.1f}ms {tc * 1e3:8.1f}ms {tp / tc:7.1f}x  {diff:.2g}")


if __name__ == "__main__":
    main()
