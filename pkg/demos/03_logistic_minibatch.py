"""Mini-batch size vs per-iteration convergence on L1 logistic regression.

Runs the momentum+amsgrad+l1 assembly with several batch sizes at a common
step, recomputes the full composite objective along each trajectory, and
shows that bigger batches (lower gradient variance) reach a fixed loss level
in fewer iterations.
"""

import numpy as np

from proxkit import MemoryLogger, UniformSampler, assemble_solver, maxiter
from proxkit.problems import LogisticLoss, generate_logistic_dataset

N, D, LAM = 1000, 200, 1e-4

dataset = generate_logistic_dataset(N, D, density=0.05, seed=2024, noise=1.0)
loss = LogisticLoss(dataset)

# long full-batch proximal-gradient run as the reference optimum
baseline = assemble_solver(
    step_params={"gamma": 1.0 / (0.25 * N)}, prox="l1norm", prox_params={"lambda1": LAM}
)
baseline.initialize(np.zeros(D))
f_opt = loss.objective(baseline.solve(loss, maxiter(20000)).x, LAM)
f0 = loss.objective(np.zeros(D), LAM)
threshold = f_opt + 0.1 * (f0 - f_opt)
print(f"f(0) = {f0:.2f}, reference optimum = {f_opt:.2f}, threshold = {threshold:.2f}")

for M in (25, 50, 200):
    solver = assemble_solver(
        boosting="momentum",
        boosting_params={"mu": 0.9, "eps": 0.1},
        smoothing="amsgrad",
        smoothing_params={"beta": 0.999, "epsilon": 1e-8},
        step_params={"gamma": 0.02},
        prox="l1norm",
        prox_params={"lambda1": LAM},
    )
    solver.initialize(np.zeros(D))
    logger = MemoryLogger(keep_x=True)
    solver.solve(loss, maxiter(2000), sampler=UniformSampler(N, M, seed=5), logger=logger)
    reached = next(
        (r.k for r in logger.records if loss.objective(r.x, LAM) <= threshold), None
    )
    print(f"M={M:4d}: threshold reached at iteration {reached}")
