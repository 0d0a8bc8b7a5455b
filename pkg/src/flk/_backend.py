"""Select compiled kernels when available, else the pure-Python ones.

Set FLK_PURE_PYTHON=1 to force the fallback (used by the benchmark and by
the backend-equivalence tests).
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from . import _fallback

NAMES = ("neumaier_sum", "checkpoint_sums", "twisted_terms", "hyp_terms",
         "agm_ke", "k_moments")


def _load():
    if os.environ.get("FLK_PURE_PYTHON") == "1":
        return _fallback, "python"
    try:
        from . import _kernels
    except ImportError:
        return _fallback, "python"
    return _kernels, "cython"


kernels, BACKEND = _load()

neumaier_sum = kernels.neumaier_sum
checkpoint_sums = kernels.checkpoint_sums
twisted_terms = kernels.twisted_terms
hyp_terms = kernels.hyp_terms
agm_ke = kernels.agm_ke
k_moments = kernels.k_moments


@contextmanager
def use(name: str):
    """Temporarily route every kernel through ``"python"`` or ``"cython"``."""
    global BACKEND
    if name == "python":
        mod = _fallback
    elif name == "cython":
        from . import _kernels as mod
    else:
        raise ValueError(f"unknown backend {name!r}")
    g = globals()
    saved = {k: g[k] for k in NAMES}, BACKEND
    for k in NAMES:
        g[k] = getattr(mod, k)
    BACKEND = name
    try:
        yield
    finally:
        for k, v in saved[0].items():
            g[k] = v
        BACKEND = saved[1]
