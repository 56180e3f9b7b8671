"""Scheduler role: the only static node in the topology.

Keeps the master directory, assigns balanced coordinate ranges at
registration, answers worker lookups, broadcasts run control (START once all
masters registered, TERMINATE once the update budget is reached), and evicts
workers that have been silent beyond the configured timeout.  Eviction is
directory bookkeeping only; it never aborts the run.

Message handling is separated from socket plumbing: :class:`SchedulerNode`
is a pure state machine (with an injectable clock, so timeout behavior is
testable without wall-clock sleeps) and :class:`SchedulerServer` wraps it in
the three listening sockets (control, publish, directory).
"""

import threading
import time
from dataclasses import dataclass
from typing import Tuple

from ...errors import StaleProtocol
from .partition import balanced_ranges, owners_of
from .protocol import (
    ANY_ID,
    Ack,
    AssignRange,
    Hello,
    MasterInfo,
    MasterList,
    RegisterMaster,
    RequestMasters,
    Start,
    Terminate,
)
from .transport import Server, recv_message, send_message

DEFAULT_WORKER_TIMEOUT_S = 10.0
DEFAULT_PORTS = (40000, 40001, 40002)  # control, publish, directory


@dataclass
class SchedulerConfig:
    n_masters: int
    dim: int
    k_budget: int
    host: str = "127.0.0.1"
    ports: Tuple[int, int, int] = DEFAULT_PORTS
    worker_timeout: float = DEFAULT_WORKER_TIMEOUT_S
    linger: float = 2.0


@dataclass
class _WorkerSeen:
    last_seen: float


class SchedulerNode:
    """Protocol state machine for the scheduler role."""

    def __init__(self, n_masters, dim, k_budget, worker_timeout=DEFAULT_WORKER_TIMEOUT_S, clock=time.monotonic):
        self.n_masters = n_masters
        self.dim = dim
        self.k_budget = k_budget
        self.worker_timeout = worker_timeout
        self.clock = clock
        self.ranges = balanced_ranges(dim, n_masters)
        self.masters = {}
        self.counts = {}
        self.workers = {}
        self.evicted = []
        self.started = False
        self.terminated = False
        self._next_worker_id = 0
        self._lock = threading.Lock()

    # -- control-port traffic (masters) ------------------------------------

    def handle_control(self, msg, peer_host):
        with self._lock:
            if isinstance(msg, RegisterMaster):
                return self._register_master(msg, peer_host)
            if isinstance(msg, Ack) and msg.is_progress_report():
                self.counts[msg.master_id] = msg.update_count
                if max(self.counts.values()) >= self.k_budget:
                    self.terminated = True
                return Terminate() if self.terminated else Ack()
            raise StaleProtocol(f"unexpected {type(msg).__name__} on the control port")

    def _register_master(self, msg, peer_host):
        if msg.master_id in self.masters or not 0 <= msg.master_id < self.n_masters:
            # duplicate or out-of-range id: refuse with TERMINATE
            return Terminate()
        host = msg.host if msg.host != "0.0.0.0" else peer_host
        lo, hi = self.ranges[msg.master_id]
        self.masters[msg.master_id] = MasterInfo(msg.master_id, host, msg.port, lo, hi)
        if len(self.masters) == self.n_masters:
            self.started = True
        return AssignRange(msg.master_id, lo, hi, self.dim)

    # -- directory-port traffic (workers) -----------------------------------

    def handle_directory(self, msg, worker_id=None):
        """Returns (reply, worker_id) so the connection can track identity."""
        with self._lock:
            if isinstance(msg, Hello):
                wid = msg.node_id
                if wid == ANY_ID:
                    wid = self._next_worker_id
                    self._next_worker_id += 1
                self.workers[wid] = _WorkerSeen(self.clock())
                return Hello(wid), wid
            if isinstance(msg, RequestMasters):
                if worker_id is not None and worker_id in self.workers:
                    self.workers[worker_id].last_seen = self.clock()
                if self.terminated:
                    return Terminate(), worker_id
                if len(self.masters) < self.n_masters:
                    return MasterList(()), worker_id
                entries = [self.masters[i] for i in sorted(self.masters)]
                if msg.coords:
                    owners = owners_of(msg.coords, self.ranges)
                    entries = [self.masters[i] for i in owners]
                return MasterList(tuple(entries)), worker_id
            raise StaleProtocol(f"unexpected {type(msg).__name__} on the directory port")

    # -- periodic bookkeeping ------------------------------------------------

    def evict_silent_workers(self):
        """Drop workers silent beyond the timeout; returns newly evicted ids."""
        with self._lock:
            now = self.clock()
            gone = [
                wid
                for wid, seen in self.workers.items()
                if now - seen.last_seen > self.worker_timeout
            ]
            for wid in gone:
                del self.workers[wid]
            self.evicted.extend(gone)
            return gone


class SchedulerServer:
    """Socket wrapper running a :class:`SchedulerNode`.

    Binds the (control, publish, directory) ports, fans broadcasts out over
    the publish connections, and keeps answering directory lookups with
    TERMINATE for a linger period after the budget is reached.
    """

    def __init__(self, config, clock=time.monotonic):
        self.config = config
        self.node = SchedulerNode(
            config.n_masters,
            config.dim,
            config.k_budget,
            worker_timeout=config.worker_timeout,
            clock=clock,
        )
        self._subscribers = []
        self._sub_lock = threading.Lock()
        self._start_sent = False
        self._terminate_sent = False
        self.finished = threading.Event()
        host = config.host
        self._control = Server(host, config.ports[0], self._control_conn, "scheduler-control")
        self._publish = Server(host, config.ports[1], self._publish_conn, "scheduler-publish")
        self._directory = Server(host, config.ports[2], self._directory_conn, "scheduler-directory")
        self._tick_thread = threading.Thread(target=self._tick, daemon=True)
        self._tick_thread.start()

    @property
    def ports(self):
        return (self._control.port, self._publish.port, self._directory.port)

    def _control_conn(self, conn, addr):
        while True:
            msg = recv_message(conn)
            if msg is None:
                return
            reply = self.node.handle_control(msg, addr[0])
            send_message(conn, reply)

    def _publish_conn(self, conn, addr):
        with self._sub_lock:
            self._subscribers.append(conn)
            if self._start_sent:
                send_message(conn, Start())
            if self._terminate_sent:
                send_message(conn, Terminate())
        while True:
            msg = recv_message(conn)  # subscribers may Hello; otherwise idle
            if msg is None:
                with self._sub_lock:
                    if conn in self._subscribers:
                        self._subscribers.remove(conn)
                return

    def _directory_conn(self, conn, addr):
        worker_id = None
        while True:
            msg = recv_message(conn)
            if msg is None:
                return
            reply, worker_id = self.node.handle_directory(msg, worker_id)
            send_message(conn, reply)

    def _broadcast(self, msg):
        with self._sub_lock:
            for conn in list(self._subscribers):
                try:
                    send_message(conn, msg)
                except OSError:
                    self._subscribers.remove(conn)

    def _tick(self):
        terminate_at = None
        while True:
            time.sleep(0.05)
            self.node.evict_silent_workers()
            if self.node.started and not self._start_sent:
                self._start_sent = True
                self._broadcast(Start())
            if self.node.terminated and not self._terminate_sent:
                self._terminate_sent = True
                self._broadcast(Terminate())
                terminate_at = time.monotonic()
            if terminate_at is not None and time.monotonic() - terminate_at >= self.config.linger:
                self.close()
                return

    def wait(self, timeout=None):
        """Block until the run terminated and the linger elapsed."""
        return self.finished.wait(timeout)

    def close(self):
        for server in (self._control, self._publish, self._directory):
            server.close()
        self.finished.set()


def scheduler_run(config, clock=time.monotonic, timeout=None):
    """Run a scheduler until its budget is reached; returns the node state."""
    server = SchedulerServer(config, clock=clock)
    try:
        finished = server.wait(timeout)
    finally:
        server.close()
    if not finished:
        raise TimeoutError("scheduler did not reach its update budget in time")
    return server.node
