"""Fourier-Legendre expansions, complete elliptic integrals and the
hypergeometric / harmonic series they produce, with numerical verification
of the resulting identities."""

from ._backend import BACKEND
from .numerics import TailEstimate, ValueWithError

__version__ = "0.1.0"

__all__ = ["BACKEND", "TailEstimate", "ValueWithError", "__version__"]
