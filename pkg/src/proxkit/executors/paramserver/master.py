"""Master role: owns one contiguous shard of the decision vector.

A master serves PULL with its current segment and, per PUSH, runs the policy
pipeline (boost indexed by the pushing worker's id, then smooth, step, prox)
restricted to its shard, advances its local iterate counter, and records one
IterationRecord carrying the loss value the worker reported.  Message
handling is serialized: one update pipeline at a time per shard.

:class:`MasterNode` is the pure state machine; :func:`master_run` wraps it in
a listening socket, registers with the scheduler, reports progress every 64
updates, and drains cleanly after TERMINATE.
"""

import threading
import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ...core import IterationRecord, monotonic_ns
from ...errors import (
    DivergenceDetected,
    DuplicateMasterId,
    RangeViolation,
    StaleProtocol,
)
from ..shared import _apply_pipeline, _check_finite
from .protocol import (
    Ack,
    AssignRange,
    Hello,
    Pull,
    Push,
    RegisterMaster,
    Start,
    Terminate,
    XSegment,
)
from .transport import Peer, Server, recv_message, send_message

PROGRESS_WINDOW = 64
DEFAULT_MASTER_PORT = 50000


@dataclass
class MasterConfig:
    master_id: int
    scheduler_host: str
    scheduler_ports: Tuple[int, int, int]
    host: str = "127.0.0.1"
    port: int = DEFAULT_MASTER_PORT
    n_worker_slots: int = 1
    check_divergence: bool = True
    linger: float = 1.5
    x0: Optional[np.ndarray] = None  # full-dimension start; shard is sliced


class MasterNode:
    """Shard state plus per-message protocol handling."""

    def __init__(self, master_id, stack, n_worker_slots=1, check_divergence=True):
        self.master_id = master_id
        self.stack = stack
        self.n_worker_slots = n_worker_slots
        self.check_divergence = check_divergence
        self.lo = None
        self.hi = None
        self.dim = None
        self.x_seg = None
        self.k = 0
        self.records = []
        self.delay_pairs = []  # (k_read, k_applied) per accepted push
        self.stopped = False
        self.error = None
        self._t0 = monotonic_ns()
        self._lock = threading.Lock()

    def set_range(self, lo, hi, dim, x0_full=None):
        self.lo, self.hi, self.dim = lo, hi, dim
        width = hi - lo
        self.x_seg = (
            np.zeros(width) if x0_full is None else np.asarray(x0_full, dtype=float)[lo:hi].copy()
        )
        self.stack.initialize(width, n_slots=self.n_worker_slots)

    def stop(self):
        self.stopped = True

    def handle(self, msg):
        with self._lock:
            if isinstance(msg, Terminate):
                self.stopped = True
                return Terminate()
            if self.stopped:
                return Terminate()
            if isinstance(msg, Pull):
                return self._pull(msg)
            if isinstance(msg, Push):
                return self._push(msg)
            if isinstance(msg, (Hello, Start)):
                return Ack()
            raise StaleProtocol(f"master cannot handle {type(msg).__name__}")

    def _pull(self, msg):
        if not (self.lo <= msg.lo <= msg.hi <= self.hi):
            raise RangeViolation(
                f"pull [{msg.lo}, {msg.hi}) outside shard [{self.lo}, {self.hi})"
            )
        values = tuple(self.x_seg[msg.lo - self.lo : msg.hi - self.lo])
        return XSegment(self.k, msg.lo, msg.hi, values)

    def _push(self, msg):
        width = self.hi - self.lo
        g = np.zeros(width)
        for idx, val in zip(msg.indices, msg.values):
            if not self.lo <= idx < self.hi:
                raise RangeViolation(f"pushed index {idx} outside shard [{self.lo}, {self.hi})")
            g[idx - self.lo] = val
        x_new, _, _ = _apply_pipeline(
            self.stack, msg.worker_id, self.k, self.k, msg.fval, self.x_seg, g
        )
        if self.check_divergence:
            _check_finite(self.k, msg.fval, x_new)
        self.x_seg = x_new
        self.records.append(IterationRecord(self.k, monotonic_ns() - self._t0, msg.fval))
        self.delay_pairs.append((msg.k_read, self.k))
        self.k += 1
        return Ack()


def master_run(config, stack, timeout=120.0):
    """Serve one master until the scheduler terminates the run.

    Returns the node (records, delay pairs, final segment) after draining.
    Raises :class:`DuplicateMasterId` if the scheduler refuses registration.
    """
    node = MasterNode(
        config.master_id,
        stack,
        n_worker_slots=config.n_worker_slots,
        check_divergence=config.check_divergence,
    )
    done = threading.Event()
    control = Peer(
        config.scheduler_host, config.scheduler_ports[0], attempts=50, retry_delay=0.1
    )
    control_lock = threading.Lock()

    def conn_handler(conn, addr):
        while True:
            msg = recv_message(conn)
            if msg is None:
                return
            try:
                reply = node.handle(msg)
            except (RangeViolation, StaleProtocol):
                send_message(conn, Terminate())
                raise
            except DivergenceDetected as exc:
                node.error = exc
                node.stop()
                done.set()
                send_message(conn, Terminate())
                raise
            send_message(conn, reply)
            if isinstance(msg, Push) and not node.stopped and node.k % PROGRESS_WINDOW == 0:
                with control_lock:
                    progress = control.request(Ack(config.master_id, node.k))
                if isinstance(progress, Terminate):
                    node.stop()
                    done.set()

    server = Server(config.host, config.port, conn_handler, name=f"master-{config.master_id}")
    try:
        reply = control.request(RegisterMaster(config.master_id, config.host, server.port))
        if isinstance(reply, Terminate):
            raise DuplicateMasterId(f"scheduler refused master id {config.master_id}")
        assert isinstance(reply, AssignRange)
        node.set_range(reply.lo, reply.hi, reply.dim, x0_full=config.x0)

        sub = Peer(config.scheduler_host, config.scheduler_ports[1], attempts=50, retry_delay=0.1)
        sub.send(Hello(config.master_id))

        def subscribe():
            while True:
                try:
                    msg = recv_message(sub.sock)
                except Exception:
                    return
                if msg is None:
                    return
                if isinstance(msg, Terminate):
                    node.stop()
                    done.set()
                    return

        threading.Thread(target=subscribe, daemon=True).start()
        if not done.wait(timeout):
            raise TimeoutError(f"master {config.master_id} saw no TERMINATE in {timeout}s")
        if node.error is not None:
            raise node.error
        time.sleep(config.linger)  # drain in-flight worker requests
        return node
    finally:
        server.close()
        control.close()
