"""Step-size policies.

Every policy implements ``step(k_local, k_global, fval, x, g) -> float`` and
must emit a strictly positive value.  ``g`` is the boosted and smoothed
direction of the current iterate.
"""


class ConstantStep:
    """Fixed step size, independent of the iteration state."""

    def __init__(self, gamma=1.0):
        if gamma <= 0.0:
            raise ValueError("gamma must be positive")
        self.gamma = float(gamma)

    def initialize(self, d):
        pass

    def step(self, k_local, k_global, fval, x, g):
        return self.gamma


class DecreasingStep:
    """Polynomially decaying step ``gamma0 / (1 + k_global)**p``."""

    def __init__(self, gamma0=1.0, p=0.5):
        if gamma0 <= 0.0:
            raise ValueError("gamma0 must be positive")
        if p < 0.0:
            raise ValueError("decay exponent p must be nonnegative")
        self.gamma0 = float(gamma0)
        self.p = float(p)

    def initialize(self, d):
        pass

    def step(self, k_local, k_global, fval, x, g):
        return self.gamma0 / (1.0 + k_global) ** self.p


_REGISTRY = {
    "constant": ConstantStep,
    "decreasing": DecreasingStep,
}


def make(kind, **params):
    """Instantiate a step policy by name (``constant`` or ``decreasing``)."""
    try:
        cls = _REGISTRY[kind]
    except KeyError:
        raise ValueError(f"unknown step policy {kind!r}") from None
    return cls(**params)
