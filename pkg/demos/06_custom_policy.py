"""Plugging a user-defined policy into the solver shell.

Any object with the family's `initialize` and apply methods slots into the
assembly next to the built-ins; the executor neither knows nor cares.  Here,
a homemade smoother that clips coordinates by a running gradient-magnitude
estimate, raced against the stock rmsprop smoother on the same problem.
"""

import numpy as np

from proxkit import assemble_solver, maxiter
from proxkit.problems import generate_qp


class ClippedSmoother:
    """Scale each coordinate by a running mean of |g|, then clip to [-1, 1]."""

    def __init__(self, beta=0.9, epsilon=1e-8):
        self.beta = beta
        self.epsilon = epsilon

    def initialize(self, d):
        self.mag = np.zeros(d)

    def smooth(self, k_local, k_global, x, g):
        self.mag = self.beta * self.mag + (1.0 - self.beta) * np.abs(g)
        return np.clip(g / (self.mag + self.epsilon), -1.0, 1.0)


problem = generate_qp(50, 0.1, 10.0, seed=3)
rng = np.random.Generator(np.random.PCG64(5))
x0 = rng.normal(5.0, 3.0, size=50)

for name, smoother in (("rmsprop", "rmsprop"), ("clipped", ClippedSmoother())):
    solver = assemble_solver(
        boosting="momentum",
        boosting_params={"mu": 0.9, "eps": 0.1},
        smoothing=smoother,
        smoothing_params={"beta": 0.999, "epsilon": 1e-8} if name == "rmsprop" else None,
        step_params={"gamma": 0.2},
    )
    solver.initialize(x0)
    res = solver.solve(problem, maxiter(300))
    print(f"{name:8s} gap after 300 iterations: {res.fval - problem.f_star:.3e}")
