"""Proximal-map policies.

A prox policy maps the scaled direction into the next iterate::

    prox(gamma, x, d) -> x_plus

For the identity policy this is the plain gradient-style update
``x - gamma*d``; regularized policies additionally apply their closed-form
proximal map to that query point.

Coordinate-separable policies expose ``prox_coord(gamma, xj, dj)`` operating
on scalars; the lock-free shared-memory executor requires separability and
uses the scalar form for its per-coordinate read-modify-write updates.  The
``shrinks_rest`` flag tells that executor whether coordinates with a zero
direction entry still move (true for soft-thresholding with a positive
weight).
"""

import numpy as np

from ..errors import DimensionMismatch


class IdentityProx:
    """No regularizer: ``x_plus = x - gamma*d``."""

    separable = True

    def __init__(self):
        self.shrinks_rest = False

    def initialize(self, d):
        self.d = d

    def prox(self, gamma, x, d):
        if len(d) != len(x):
            raise DimensionMismatch(f"direction has length {len(d)}, expected {len(x)}")
        return x - gamma * d

    def prox_coord(self, gamma, xj, dj):
        return xj - gamma * dj


class L1Prox:
    """Soft-thresholding: the proximal map of ``lambda1 * ||.||_1``.

    With query point ``v = x - gamma*d``, each coordinate becomes
    ``sign(v) * max(|v| - gamma*lambda1, 0)``.
    """

    separable = True

    def __init__(self, lambda1=0.0):
        if lambda1 < 0.0:
            raise ValueError("lambda1 must be nonnegative")
        self.lambda1 = float(lambda1)
        self.shrinks_rest = self.lambda1 > 0.0

    def initialize(self, d):
        self.d = d

    def prox(self, gamma, x, d):
        if len(d) != len(x):
            raise DimensionMismatch(f"direction has length {len(d)}, expected {len(x)}")
        v = x - gamma * d
        return np.sign(v) * np.maximum(np.abs(v) - gamma * self.lambda1, 0.0)

    def prox_coord(self, gamma, xj, dj):
        v = xj - gamma * dj
        shrunk = abs(v) - gamma * self.lambda1
        if shrunk <= 0.0:
            return 0.0
        return shrunk if v > 0.0 else -shrunk


def soft_threshold(v, threshold):
    """Elementwise ``sign(v) * max(|v| - threshold, 0)``."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - threshold, 0.0)


_REGISTRY = {
    "none": IdentityProx,
    "l1norm": L1Prox,
}


def make(kind, **params):
    """Instantiate a prox policy by name (``none`` or ``l1norm``)."""
    try:
        cls = _REGISTRY[kind]
    except KeyError:
        raise ValueError(f"unknown prox policy {kind!r}") from None
    return cls(**params)
