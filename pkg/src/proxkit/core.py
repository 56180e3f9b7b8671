"""Solver shell: decision state, samplers, terminators, loggers, assembly.

The solver is a thin shell that owns one policy of each family (boosting,
smoothing, step, prox) plus an executor choice, and delegates the actual
iteration loop to the executor.  One iterate always applies, in order::

    fval = loss(x, g_out)                  # full or sampled components
    direction = boost(origin, k, k, g)
    direction = smooth(k, k, x, direction)
    gamma     = step(k, k, fval, x, direction)
    x         = prox(gamma, x, direction)

Seeded samplers use numpy's PCG64 generator; the algorithm is pinned so that
equal seeds reproduce identical index streams across runs and versions.
"""

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    IncompatiblePolicies,
    InvalidBatch,
)
from .policies import boosting as _boosting
from .policies import prox as _prox
from .policies import smoothing as _smoothing
from .policies import step as _step


@dataclass
class DecisionVector:
    """Iterate ``x``, gradient-surrogate buffer ``g``, counter and last loss."""

    x: np.ndarray
    g: np.ndarray
    k: int = 0
    fval: float = 0.0

    def __post_init__(self):
        if len(self.x) != len(self.g) or len(self.x) == 0:
            raise DimensionMismatch("x and g must have equal positive length")

    @property
    def d(self):
        return len(self.x)


@dataclass
class IterationRecord:
    """One logged iterate: index, elapsed wall-clock (ns), loss, optional x."""

    k: int
    t_ns: int
    fval: float
    x: Optional[np.ndarray] = None


class MemoryLogger:
    """Collects :class:`IterationRecord` objects in a list.

    With ``keep_x=True`` each record carries a copy of the iterate, which the
    convergence tests use to recompute exact objective trajectories.
    """

    def __init__(self, keep_x=False):
        self.keep_x = keep_x
        self.records = []

    def __call__(self, record):
        self.records.append(record)

    @property
    def fvals(self):
        return [r.fval for r in self.records]


class FunctionLoss:
    """Adapter turning a plain callable ``f(x, g_out) -> fval`` into a loss.

    The callable must write the gradient into ``g_out`` and return the loss
    value.  The resulting oracle has a single component, so it only supports
    full-batch sampling.
    """

    def __init__(self, fn, d):
        self.fn = fn
        self.d = d
        self.n_components = 1

    def full_eval(self, x, g_out):
        return self.fn(x, g_out)

    def partial_eval(self, x, g_out, indices):
        return self.fn(x, g_out)


class MaxIter:
    """Continue while ``k < K``: exactly K gradient evaluations happen."""

    def __init__(self, K):
        if K < 0:
            raise ValueError("iteration budget K must be nonnegative")
        self.K = int(K)

    def __call__(self, k, fval, x, g):
        return k < self.K


def maxiter(K):
    """Terminator stopping after ``K`` completed iterations."""
    return MaxIter(K)


def _generator(seed):
    # PCG64 is the pinned stream; do not swap the bit generator.
    return np.random.Generator(np.random.PCG64(seed))


class UniformSampler:
    """Uniform component sampling over ``[0, n)``.

    With replacement (the default) every batch is i.i.d. uniform.  Without
    replacement each batch is a uniform draw of ``batch_size`` distinct
    components.  Batches of size one carry the sampled component as their
    origin id; larger uniform batches have no stable identity and therefore
    report ``origin=None``.
    """

    kind = "uniform"

    def __init__(self, n, batch_size=1, seed=0, replace=True):
        if batch_size < 1:
            raise InvalidBatch("batch size must be at least 1")
        if not replace and batch_size > n:
            raise InvalidBatch(f"cannot draw {batch_size} distinct components out of {n}")
        self.n_components = int(n)
        self.batch_size = int(batch_size)
        self.replace = replace
        self.seed = seed
        self._rng = _generator(seed)

    @property
    def n_origins(self):
        return self.n_components if self.batch_size == 1 else None

    def next_batch(self):
        if self.replace:
            indices = self._rng.integers(0, self.n_components, size=self.batch_size)
        else:
            indices = self._rng.choice(self.n_components, size=self.batch_size, replace=False)
        origin = int(indices[0]) if self.batch_size == 1 else None
        return indices, origin


class CyclicSampler:
    """Deterministic sweep over a fixed partition into contiguous batches.

    Component range ``[0, n)`` is split into ``ceil(n / batch_size)`` batches;
    batch ``b`` is the origin id, so table-based boosting can be used with
    mini-batches.
    """

    kind = "cyclic"

    def __init__(self, n, batch_size=1):
        if batch_size < 1:
            raise InvalidBatch("batch size must be at least 1")
        if batch_size > n:
            raise InvalidBatch(f"batch size {batch_size} exceeds component count {n}")
        self.n_components = int(n)
        self.batch_size = int(batch_size)
        self.n_batches = -(-self.n_components // self.batch_size)
        self._next = 0

    @property
    def n_origins(self):
        return self.n_batches

    def next_batch(self):
        b = self._next
        lo = b * self.batch_size
        hi = min(lo + self.batch_size, self.n_components)
        self._next = (b + 1) % self.n_batches
        return np.arange(lo, hi), b


class FullBatchSampler:
    """Every batch is the full component range; origin is always 0."""

    kind = "full"

    def __init__(self, n):
        self.n_components = int(n)
        self.batch_size = int(n)

    @property
    def n_origins(self):
        return 1

    def next_batch(self):
        return np.arange(self.n_components), 0


@dataclass
class PolicyStack:
    """One chosen policy per family, each with its own persistent state."""

    boosting: object
    smoothing: object
    step: object
    prox: object

    def initialize(self, d, n_slots=1):
        self.boosting.initialize(d, n_slots)
        self.smoothing.initialize(d)
        self.step.initialize(d)
        self.prox.initialize(d)


def _resolve(policy, module, params):
    if isinstance(policy, str):
        return module.make(policy, **params)
    if policy is None:
        return module.make("none")
    return policy


_EXECUTORS = ("serial", "consistent", "inconsistent", "paramserver")


class Solver:
    """A policy stack bound to an executor.

    Use :func:`assemble_solver` to build one.  Call :meth:`initialize` with a
    starting point, then :meth:`solve`.
    """

    def __init__(self, stack, executor="serial", workers=1, check_divergence=True):
        self.stack = stack
        self.executor = executor
        self.workers = int(workers)
        self.check_divergence = check_divergence
        self.x0 = None
        self._validate_assembly()

    def _validate_assembly(self):
        if self.executor not in _EXECUTORS:
            raise ValueError(f"unknown executor {self.executor!r}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.executor == "inconsistent":
            if not getattr(self.stack.prox, "separable", False):
                raise IncompatiblePolicies(
                    "the lock-free executor requires a coordinate-separable prox"
                )
            lockfree_ok = isinstance(
                self.stack.boosting, (_boosting.NoBoost, _boosting.Saga)
            ) or getattr(self.stack.boosting, "lockfree_safe", False)
            if not lockfree_ok:
                raise IncompatiblePolicies(
                    "the lock-free executor supports only 'none' or 'saga' boosting"
                )

    def initialize(self, x0):
        self.x0 = np.array(x0, dtype=float).copy()
        if self.x0.ndim != 1 or len(self.x0) == 0:
            raise DimensionMismatch("x0 must be a nonempty 1-d vector")
        return self

    def solve(self, loss, terminator, sampler=None, logger=None):
        """Run the executor until the terminator stops the iteration.

        Parameters
        ----------
        loss : object
            Oracle with ``full_eval(x, g_out)``, ``partial_eval(x, g_out,
            indices)`` and ``n_components``; a plain callable ``f(x, g_out)``
            is wrapped automatically.
        terminator : callable
            ``terminator(k, fval, x, g) -> bool``; True continues.  It is
            consulted before each gradient evaluation.
        sampler : object, optional
            Component sampler; defaults to full-batch over the loss.
        logger : callable, optional
            Receives one :class:`IterationRecord` per completed iterate.

        Returns
        -------
        DecisionVector
            Final iterate, last gradient-surrogate buffer, count, last loss.
        """
        if self.x0 is None:
            raise ValueError("call initialize(x0) before solve()")
        if callable(loss) and not hasattr(loss, "full_eval"):
            loss = FunctionLoss(loss, len(self.x0))
        if sampler is None:
            sampler = FullBatchSampler(loss.n_components)
        if getattr(self.stack.boosting, "requires_origin", False) and sampler.n_origins is None:
            raise IncompatiblePolicies(
                "table-based boosting needs a sampler with a stable origin id "
                "(full-batch, cyclic, or uniform with batch size 1)"
            )
        d = len(self.x0)
        self.stack.initialize(d, n_slots=sampler.n_origins or 1)

        from .executors import shared  # local import; executors import core types

        if self.executor == "serial":
            return shared.run_serial(self, loss, sampler, terminator, logger)
        if self.executor == "consistent":
            return shared.run_consistent(self, loss, sampler, terminator, logger, self.workers)
        if self.executor == "inconsistent":
            return shared.run_inconsistent(self, loss, sampler, terminator, logger, self.workers)
        raise IncompatiblePolicies(
            "paramserver runs are launched per role (see proxkit.executors.paramserver)"
        )


def assemble_stack(
    boosting="none",
    smoothing="none",
    step="constant",
    prox="none",
    *,
    boosting_params=None,
    smoothing_params=None,
    step_params=None,
    prox_params=None,
):
    """Build a bare :class:`PolicyStack` from names or policy instances."""
    return PolicyStack(
        boosting=_resolve(boosting, _boosting, boosting_params or {}),
        smoothing=_resolve(smoothing, _smoothing, smoothing_params or {}),
        step=_resolve(step, _step, step_params or {}),
        prox=_resolve(prox, _prox, prox_params or {}),
    )


def assemble_solver(
    boosting="none",
    smoothing="none",
    step="constant",
    prox="none",
    executor="serial",
    *,
    boosting_params=None,
    smoothing_params=None,
    step_params=None,
    prox_params=None,
    workers=1,
    check_divergence=True,
):
    """Build a solver from policy choices.

    Each policy argument accepts either a name (``"momentum"``) with its
    parameter dict, or a ready policy instance (which may be user-defined, as
    long as it implements the family's ``initialize`` and apply methods;
    custom boosting policies take ``initialize(d, n_slots)``).  Unspecified
    policies default to plain gradient descent running serially.

    Raises
    ------
    IncompatiblePolicies
        If the combination cannot run on the chosen executor.
    """
    stack = assemble_stack(
        boosting,
        smoothing,
        step,
        prox,
        boosting_params=boosting_params,
        smoothing_params=smoothing_params,
        step_params=step_params,
        prox_params=prox_params,
    )
    return Solver(stack, executor=executor, workers=workers, check_divergence=check_divergence)


def monotonic_ns():
    """Monotonic wall clock in integer nanoseconds."""
    return time.monotonic_ns()
