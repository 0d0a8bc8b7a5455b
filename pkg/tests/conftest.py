"""Shared numeric definitions of the FL catalog functions.

Each entry is f(x, dl, dr) on numpy arrays, with dl = x and dr = 1 - x
supplied by the quadrature so K(sqrt x) stays accurate near x = 1.
"""

import math

import numpy as np

from flk.elliptic import ke_arrays

SQRT2 = math.sqrt(2.0)
ETA = 0.3


def _K(x, dr):
    return ke_arrays(x, dr)[0]


def _E(x, dr):
    return ke_arrays(x, dr)[1]


def _frakJ2(x, dl, dr):
    K, E = ke_arrays(x, dr)
    return -dr / 3 * K + (4 - 2 * x) / 3 * E


CATALOG_FUNCTIONS = {
    "K(sqrt(x))": lambda x, dl, dr: _K(x, dr),
    "E(sqrt(x))": lambda x, dl, dr: _E(x, dr),
    "1/sqrt(2-x)": lambda x, dl, dr: 1 / np.sqrt(2 - x),
    "(2-x)^(-3/2)": lambda x, dl, dr: (2 - x) ** -1.5,
    "sqrt(2-x)": lambda x, dl, dr: np.sqrt(2 - x),
    "arcsin(sqrt(x))/sqrt(x)": lambda x, dl, dr: np.where(x > 0, np.arcsin(np.sqrt(x)) / np.sqrt(np.maximum(x, 1e-300)), 1.0),
    "1/(1+sqrt(1-x/2))": lambda x, dl, dr: 1 / (1 + np.sqrt(1 - x / 2)),
    "frakJ(x)": _frakJ2,
    "x(1-x)K(sqrt(x))": lambda x, dl, dr: x * dr * _K(x, dr),
    "x^eta": lambda x, dl, dr: x ** ETA,
}
