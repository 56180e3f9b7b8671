"""Direction scaling policies and streaming-average utilities.

A smoothing policy rescales the boosted direction elementwise, typically by
accumulated second-moment statistics.  Every policy implements::

    initialize(d)
    smooth(k_local, k_global, x, g) -> ndarray

``x`` is the current (pre-update) iterate.  It is part of the uniform policy
signature; none of the provided smoothers read it, but user-defined ones may.

The module also hosts :class:`EmaAverager` and :class:`CmaAverager`, small
streaming averagers with pinned reference semantics that double as test
vectors for the policy-composition machinery.
"""

import numpy as np

from ..errors import DimensionMismatch


class NoSmooth:
    """Identity scaling."""

    def initialize(self, d):
        self.d = d

    def smooth(self, k_local, k_global, x, g):
        return g


class AdaGrad:
    """Scale by accumulated squared gradients: ``g / (sqrt(sum g^2) + eps)``."""

    def __init__(self, epsilon=1e-6):
        if epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        self.epsilon = float(epsilon)
        self.nu = None

    def initialize(self, d):
        self.d = d
        self.nu = np.zeros(d)

    def smooth(self, k_local, k_global, x, g):
        if len(g) != self.d:
            raise DimensionMismatch(f"direction has length {len(g)}, expected {self.d}")
        self.nu = self.nu + g * g
        return g / (np.sqrt(self.nu) + self.epsilon)


class RmsProp:
    """Scale by an exponential moving average of squared gradients.

    ``nu <- beta*nu + (1-beta)*g*g``, output ``g / (sqrt(nu) + eps)``.
    """

    def __init__(self, beta=0.999, epsilon=1e-8):
        if not 0.0 <= beta < 1.0:
            raise ValueError("beta must be in [0, 1)")
        if epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        self.beta = float(beta)
        self.epsilon = float(epsilon)
        self.nu = None

    def initialize(self, d):
        self.d = d
        self.nu = np.zeros(d)

    def smooth(self, k_local, k_global, x, g):
        if len(g) != self.d:
            raise DimensionMismatch(f"direction has length {len(g)}, expected {self.d}")
        self.nu = self.beta * self.nu + (1.0 - self.beta) * g * g
        return g / (np.sqrt(self.nu) + self.epsilon)


class AmsGrad:
    """RmsProp with a monotone running max of the second-moment estimate.

    ``nu <- beta*nu + (1-beta)*g*g``; ``nu_hat <- max(nu_hat, nu)``
    elementwise; output ``g / (sqrt(nu_hat) + eps)``.  The retained max keeps
    the effective step from re-inflating after large gradients.
    """

    def __init__(self, beta=0.99, epsilon=1e-6):
        if not 0.0 <= beta < 1.0:
            raise ValueError("beta must be in [0, 1)")
        if epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        self.beta = float(beta)
        self.epsilon = float(epsilon)
        self.nu = None
        self.nu_hat = None

    def initialize(self, d):
        self.d = d
        self.nu = np.zeros(d)
        self.nu_hat = np.zeros(d)

    def smooth(self, k_local, k_global, x, g):
        if len(g) != self.d:
            raise DimensionMismatch(f"direction has length {len(g)}, expected {self.d}")
        self.nu = self.beta * self.nu + (1.0 - self.beta) * g * g
        self.nu_hat = np.maximum(self.nu_hat, self.nu)
        return g / (np.sqrt(self.nu_hat) + self.epsilon)


class AdaDelta:
    """Unit-corrected scaling using moving averages of g^2 and update^2.

    ``nu <- rho*nu + (1-rho)*g*g``;
    ``delta = sqrt(ex + eps) / sqrt(nu + eps) * g``;
    ``ex <- rho*ex + (1-rho)*delta*delta``; output ``delta``.

    Note the regularizer sits inside the square roots here, unlike the
    sqrt-then-add placement of the adagrad family.
    """

    def __init__(self, rho=0.9, epsilon=1e-6):
        if not 0.0 <= rho < 1.0:
            raise ValueError("rho must be in [0, 1)")
        if epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        self.rho = float(rho)
        self.epsilon = float(epsilon)
        self.nu = None
        self.ex = None

    def initialize(self, d):
        self.d = d
        self.nu = np.zeros(d)
        self.ex = np.zeros(d)

    def smooth(self, k_local, k_global, x, g):
        if len(g) != self.d:
            raise DimensionMismatch(f"direction has length {len(g)}, expected {self.d}")
        self.nu = self.rho * self.nu + (1.0 - self.rho) * g * g
        delta = np.sqrt(self.ex + self.epsilon) / np.sqrt(self.nu + self.epsilon) * g
        self.ex = self.rho * self.ex + (1.0 - self.rho) * delta * delta
        return delta


class EmaAverager:
    """Exponential moving average of a streaming vector sequence.

    ``average <- (1-alpha)*average + alpha*x``; push returns the updated
    average.  The average must be initialized before the first push.
    """

    def __init__(self, alpha):
        if not 0.0 < alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        self.alpha = float(alpha)
        self.average = None

    def initialize(self, x0):
        self.average = np.asarray(x0, dtype=float).copy()

    def push(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != self.average.shape:
            raise DimensionMismatch(f"push of shape {x.shape} into average of shape {self.average.shape}")
        self.average = (1.0 - self.alpha) * self.average + self.alpha * x
        return self.average.copy()


class CmaAverager:
    """Cumulative moving average: after n pushes, the exact arithmetic mean.

    ``average <- (n*average + x) / (n+1)``.
    """

    def __init__(self):
        self.count = 0
        self.average = None

    def initialize(self, x0):
        self.average = np.asarray(x0, dtype=float).copy()
        self.count = 0

    def push(self, x):
        x = np.asarray(x, dtype=float)
        if self.average is None:
            self.average = np.zeros_like(x)
        if x.shape != self.average.shape:
            raise DimensionMismatch(f"push of shape {x.shape} into average of shape {self.average.shape}")
        self.average = (self.count * self.average + x) / (self.count + 1)
        self.count += 1
        return self.average.copy()


def sum_squared(v):
    """Sum of squared elements."""
    v = np.asarray(v, dtype=float)
    return float(np.sum(v * v))


def max_abs(v):
    """Largest absolute element."""
    v = np.asarray(v, dtype=float)
    return float(np.max(np.abs(v)))


_REGISTRY = {
    "none": NoSmooth,
    "adagrad": AdaGrad,
    "rmsprop": RmsProp,
    "amsgrad": AmsGrad,
    "adadelta": AdaDelta,
}


def make(kind, **params):
    """Instantiate a smoothing policy by name (``none``, ``rmsprop``, ...)."""
    try:
        cls = _REGISTRY[kind]
    except KeyError:
        raise ValueError(f"unknown smoothing policy {kind!r}") from None
    return cls(**params)
