"""proxkit: policy-composable proximal gradient optimizers.

Algorithms are assembled from five orthogonal choices: a boosting policy
(search direction), a smoothing policy (elementwise scaling), a step-size
policy, a prox policy, and an executor (serial, lock-based shared memory,
lock-free shared memory, or a distributed parameter server).
"""

from . import errors, policies, problems
from .core import (
    CyclicSampler,
    DecisionVector,
    FullBatchSampler,
    FunctionLoss,
    IterationRecord,
    MemoryLogger,
    PolicyStack,
    Solver,
    UniformSampler,
    assemble_solver,
    maxiter,
)

__version__ = "0.1.0"

__all__ = [
    "assemble_solver",
    "Solver",
    "PolicyStack",
    "DecisionVector",
    "IterationRecord",
    "MemoryLogger",
    "FunctionLoss",
    "UniformSampler",
    "CyclicSampler",
    "FullBatchSampler",
    "maxiter",
    "errors",
    "policies",
    "problems",
]
