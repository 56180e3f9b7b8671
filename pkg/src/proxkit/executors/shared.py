"""Single-address-space executors: serial, lock-based, lock-free.

``run_serial`` is the reference loop.  ``run_consistent`` shares the decision
vector among worker threads behind one exclusive lock; gradients are computed
outside the lock on a snapshot taken under it, so every vector any worker
observes existed at a single instant.  ``run_inconsistent`` drops the vector
lock entirely: snapshots are plain element loads (a vector view may mix
epochs), and write-backs go through per-coordinate indivisible
read-modify-write updates realized as striped fine-grained locks.

In the concurrent modes, iterate reservation (the shared counter bump) and
record emission happen atomically, so the logged stream has nondecreasing k
and t.  Records flow through a bounded queue (2**16 entries, blocking when
full) drained by a dedicated thread that feeds the user logger.
"""

import queue
import threading

import numpy as np

from ..core import DecisionVector, IterationRecord, monotonic_ns
from ..errors import DivergenceDetected, WorkerPanic
from ..policies.boosting import NoBoost
from ..policies.smoothing import NoSmooth

_LOG_QUEUE_BOUND = 2**16


def _evaluate(loss, x, g, indices, full_batch):
    if full_batch:
        return loss.full_eval(x, g)
    return loss.partial_eval(x, g, indices)


def _apply_pipeline(stack, origin, k_local, k_global, fval, x, g):
    """One boost -> smooth -> step -> prox sweep; returns (x_new, direction)."""
    direction = stack.boosting.boost(origin, k_local, k_global, g)
    direction = stack.smoothing.smooth(k_local, k_global, x, direction)
    gamma = stack.step.step(k_local, k_global, fval, x, direction)
    return stack.prox.prox(gamma, x, direction), direction, gamma


def _check_finite(k, fval, x):
    if not np.isfinite(fval) or not np.all(np.isfinite(x)):
        raise DivergenceDetected(f"non-finite loss or iterate at k={k}")


def _make_record(logger, k, t_ns, fval, x):
    keep_x = getattr(logger, "keep_x", False)
    return IterationRecord(k, t_ns, fval, x.copy() if keep_x and x is not None else None)


def run_serial(solver, loss, sampler, terminator, logger):
    """Sequential loop: terminate? -> eval -> pipeline -> log -> k+1."""
    stack = solver.stack
    x = solver.x0.copy()
    g = np.zeros_like(x)
    direction = np.zeros_like(x)
    full_batch = getattr(sampler, "kind", None) == "full"
    k = 0
    fval = 0.0
    t0 = monotonic_ns()
    while terminator(k, fval, x, direction):
        indices, origin = sampler.next_batch()
        fval = _evaluate(loss, x, g, indices, full_batch)
        x, direction, _ = _apply_pipeline(stack, origin, k, k, fval, x, g)
        if solver.check_divergence:
            _check_finite(k, fval, x)
        if logger is not None:
            logger(_make_record(logger, k, monotonic_ns() - t0, fval, x))
        k += 1
    return DecisionVector(x=x, g=direction, k=k, fval=fval)


class _LogPump:
    """Drains the bounded record queue into the user logger, in k order.

    With ``reorder=True`` records may arrive out of order; a reorder buffer
    holds them until every smaller k has been delivered (stragglers from
    aborted workers are flushed sorted on close).
    """

    def __init__(self, logger, reorder=False):
        self.logger = logger
        self.reorder = reorder
        self.q = queue.Queue(maxsize=_LOG_QUEUE_BOUND)
        self._buffer = {}
        self._next_k = 0
        self._thread = threading.Thread(target=self._drain, daemon=True)
        self._thread.start()

    def _deliver(self, record):
        if self.logger is not None:
            self.logger(record)

    def _drain(self):
        while True:
            item = self.q.get()
            if item is None:
                for k in sorted(self._buffer):
                    self._deliver(self._buffer[k])
                self._buffer.clear()
                return
            if not self.reorder:
                self._deliver(item)
                continue
            self._buffer[item.k] = item
            while self._next_k in self._buffer:
                self._deliver(self._buffer.pop(self._next_k))
                self._next_k += 1

    def put(self, record):
        self.q.put(record)

    def close(self):
        self.q.put(None)
        self._thread.join()


def _join_workers(threads, errors):
    for t in threads:
        t.join()
    if errors:
        first = errors[0]
        if isinstance(first, DivergenceDetected):
            raise first
        raise WorkerPanic("worker thread failed") from first


def run_consistent(solver, loss, sampler, terminator, logger, workers):
    """Lock-based executor: snapshot under the lock, gradient outside it.

    Each cycle: snapshot x under the exclusive lock, release, evaluate the
    sampled components at the snapshot, reacquire, re-check the terminator
    (so a maxiter budget yields exactly K applied updates regardless of the
    worker count), run the pipeline against the live vector, log, bump k.
    """
    stack = solver.stack
    shared = {
        "x": solver.x0.copy(),
        "k": 0,
        "fval": 0.0,
        "direction": np.zeros_like(solver.x0),
    }
    full_batch = getattr(sampler, "kind", None) == "full"
    lock = threading.Lock()
    sampler_lock = threading.Lock()
    stop = threading.Event()
    errors = []
    pump = _LogPump(logger)
    t0 = monotonic_ns()

    def work():
        g = np.zeros_like(shared["x"])
        k_local = 0
        try:
            while not stop.is_set():
                with lock:
                    if not terminator(shared["k"], shared["fval"], shared["x"], shared["direction"]):
                        stop.set()
                        return
                    snapshot = shared["x"].copy()
                with sampler_lock:
                    indices, origin = sampler.next_batch()
                fval = _evaluate(loss, snapshot, g, indices, full_batch)
                with lock:
                    if not terminator(shared["k"], shared["fval"], shared["x"], shared["direction"]):
                        stop.set()
                        return
                    k = shared["k"]
                    x_new, direction, _ = _apply_pipeline(
                        stack, origin, k_local, k, fval, shared["x"], g
                    )
                    if solver.check_divergence:
                        _check_finite(k, fval, x_new)
                    shared["x"] = x_new
                    shared["fval"] = fval
                    shared["direction"] = direction
                    pump.put(_make_record(logger, k, monotonic_ns() - t0, fval, x_new))
                    shared["k"] = k + 1
                k_local += 1
        except BaseException as exc:  # surfaces as run failure
            errors.append(exc)
            stop.set()

    threads = [threading.Thread(target=work) for _ in range(workers)]
    for t in threads:
        t.start()
    try:
        _join_workers(threads, errors)
    finally:
        pump.close()
    return DecisionVector(
        x=shared["x"], g=shared["direction"], k=shared["k"], fval=shared["fval"]
    )


def run_inconsistent(solver, loss, sampler, terminator, logger, workers, stripes=64):
    """Lock-free executor: per-coordinate indivisible updates, no vector lock.

    Each cycle first reserves its global update slot k under the counter
    lock (the reservation is the update's linearization point, so a maxiter
    budget consumes exactly K sampler draws and applies exactly K updates),
    then samples, reads a snapshot with plain element loads (a vector view
    may be torn across coordinates by contract), evaluates, and writes back
    through per-coordinate indivisible read-modify-write updates realized as
    striped fine-grained locks.  Coordinates with a zero direction entry are
    skipped unless the prox moves them anyway (soft-thresholding with a
    positive weight).  Stateful policy tables (saga) sit behind one policy
    lock, which is stronger than the per-slot indivisibility they need.
    """
    stack = solver.stack
    x = solver.x0.copy()
    d = len(x)
    full_batch = getattr(sampler, "kind", None) == "full"
    n_stripes = min(d, stripes)
    coord_locks = [threading.Lock() for _ in range(n_stripes)]
    counter_lock = threading.Lock()
    sampler_lock = threading.Lock()
    policy_lock = threading.Lock()
    boost_stateless = isinstance(stack.boosting, NoBoost)
    smooth_stateless = isinstance(stack.smoothing, NoSmooth)
    shared = {"k": 0, "fval": 0.0}
    stop = threading.Event()
    errors = []
    pump = _LogPump(logger, reorder=workers > 1)
    prox = stack.prox
    write_all = getattr(prox, "shrinks_rest", True)
    t0 = monotonic_ns()

    def work():
        g = np.zeros_like(x)
        k_local = 0
        try:
            while not stop.is_set():
                with counter_lock:
                    if not terminator(shared["k"], shared["fval"], x, g):
                        stop.set()
                        return
                    k = shared["k"]
                    shared["k"] = k + 1
                    t_ns = monotonic_ns() - t0
                with sampler_lock:
                    indices, origin = sampler.next_batch()
                snapshot = x.copy()  # element loads; vector view may be torn
                fval = _evaluate(loss, snapshot, g, indices, full_batch)
                shared["fval"] = fval
                if boost_stateless:
                    direction = stack.boosting.boost(origin, k_local, k, g)
                else:
                    with policy_lock:
                        direction = stack.boosting.boost(origin, k_local, k, g)
                if smooth_stateless:
                    direction = stack.smoothing.smooth(k_local, k, snapshot, direction)
                else:
                    with policy_lock:
                        direction = stack.smoothing.smooth(k_local, k, snapshot, direction)
                gamma = stack.step.step(k_local, k, fval, snapshot, direction)
                if write_all:
                    touched = range(d)
                else:
                    touched = np.nonzero(direction)[0]
                for j in touched:
                    with coord_locks[j % n_stripes]:
                        x[j] = prox.prox_coord(gamma, x[j], direction[j])
                if solver.check_divergence:
                    _check_finite(k, fval, x)
                pump.put(_make_record(logger, k, t_ns, fval, None))
                k_local += 1
        except BaseException as exc:
            errors.append(exc)
            stop.set()

    threads = [threading.Thread(target=work) for _ in range(workers)]
    for t in threads:
        t.start()
    try:
        _join_workers(threads, errors)
    finally:
        pump.close()
    return DecisionVector(x=x, g=np.zeros_like(x), k=shared["k"], fval=shared["fval"])
