"""Search-direction policies.

A boosting policy turns the freshly evaluated gradient surrogate into the
search direction, optionally mixing in stored information from earlier
iterations (momentum velocity, per-origin gradient tables).  Every policy
implements::

    initialize(d, n_slots=1)
    boost(origin, k_local, k_global, g) -> ndarray

``origin`` identifies where ``g`` came from: the sampled component (or batch)
id in serial/shared-memory runs, the worker id on a parameter-server master,
and 0 for full-batch evaluation.  Only the table-based policies look at it.

Returned arrays are owned by the caller (no aliasing of internal state).
"""

import numpy as np

from ..errors import DimensionMismatch, UnknownOrigin


class NoBoost:
    """Pass the gradient surrogate through unchanged."""

    requires_origin = False

    def initialize(self, d, n_slots=1):
        self.d = d

    def boost(self, origin, k_local, k_global, g):
        return g


class Momentum:
    """Heavy-ball direction: ``v <- mu*v + eps*g``, direction is ``v``."""

    requires_origin = False

    def __init__(self, mu=0.9, eps=0.1):
        if not 0.0 <= mu < 1.0:
            raise ValueError("momentum decay mu must be in [0, 1)")
        if eps <= 0.0:
            raise ValueError("momentum scale eps must be positive")
        self.mu = float(mu)
        self.eps = float(eps)
        self.velocity = None

    def initialize(self, d, n_slots=1):
        self.d = d
        self.velocity = np.zeros(d)

    def boost(self, origin, k_local, k_global, g):
        if len(g) != self.d:
            raise DimensionMismatch(f"gradient has length {len(g)}, expected {self.d}")
        self.velocity = self.mu * self.velocity + self.eps * g
        return self.velocity.copy()


class Nesterov(Momentum):
    """Look-ahead momentum: after the velocity update, emit ``mu*v + eps*g``.

    The velocity recursion is the same as :class:`Momentum`; the emitted
    direction anticipates the next velocity instead of using the current one,
    which folds the gradient-at-extrapolated-point form into a pipeline that
    evaluates the gradient only once per iterate.
    """

    def boost(self, origin, k_local, k_global, g):
        if len(g) != self.d:
            raise DimensionMismatch(f"gradient has length {len(g)}, expected {self.d}")
        self.velocity = self.mu * self.velocity + self.eps * g
        return self.mu * self.velocity + self.eps * g


class Aggregated:
    """Sum of the latest gradient seen from each origin (IAG/PIAG direction).

    Keeps one stored gradient per origin plus their running sum.  On each
    call the origin's slot is replaced by the fresh gradient and the updated
    sum is returned.  Slots start at zero, so early directions are partial
    sums until every origin has reported once.
    """

    requires_origin = True

    def initialize(self, d, n_slots=1):
        self.d = d
        self.n_slots = n_slots
        self.grad_table = np.zeros((n_slots, d))
        self.aggregate = np.zeros(d)

    def boost(self, origin, k_local, k_global, g):
        if len(g) != self.d:
            raise DimensionMismatch(f"gradient has length {len(g)}, expected {self.d}")
        if not 0 <= origin < self.n_slots:
            raise UnknownOrigin(f"origin {origin} outside table of {self.n_slots} slots")
        self.aggregate = self.aggregate - self.grad_table[origin] + g
        self.grad_table[origin] = g
        return self.aggregate.copy()


class Saga:
    """Variance-reduced direction ``g_i - stored_i + mean(stored)``.

    The direction is formed from the *previous* table contents; the table and
    its running mean are updated afterwards.  With a fully populated table
    the direction is an unbiased estimate of the mean component gradient.
    """

    requires_origin = True

    def initialize(self, d, n_slots=1):
        self.d = d
        self.n_slots = n_slots
        self.grad_table = np.zeros((n_slots, d))
        self.table_mean = np.zeros(d)

    def boost(self, origin, k_local, k_global, g):
        if len(g) != self.d:
            raise DimensionMismatch(f"gradient has length {len(g)}, expected {self.d}")
        if not 0 <= origin < self.n_slots:
            raise UnknownOrigin(f"origin {origin} outside table of {self.n_slots} slots")
        direction = g - self.grad_table[origin] + self.table_mean
        self.table_mean = self.table_mean + (g - self.grad_table[origin]) / self.n_slots
        self.grad_table[origin] = g
        return direction


_REGISTRY = {
    "none": NoBoost,
    "momentum": Momentum,
    "nesterov": Nesterov,
    "aggregated": Aggregated,
    "saga": Saga,
}


def make(kind, **params):
    """Instantiate a boosting policy by name (``none``, ``momentum``, ...)."""
    try:
        cls = _REGISTRY[kind]
    except KeyError:
        raise ValueError(f"unknown boosting policy {kind!r}") from None
    return cls(**params)
