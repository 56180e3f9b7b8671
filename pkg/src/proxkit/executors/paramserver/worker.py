"""Worker role: holds a data shard, pulls segments, pushes gradients.

A worker round: sample local components, pull the owning masters' segments
(fresh read before every push), assemble the decision vector, evaluate the
partial loss and gradient, split the gradient's support per owner, and push
each piece tagged with the iterate stamp the segment was pulled at (the
delay bookkeeping masters record).  Rounds repeat until TERMINATE arrives on
the subscription channel or inline in a reply.
"""

import threading
import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ...errors import MasterTimeout, SchedulerUnreachable, TransportError
from .protocol import (
    ANY_ID,
    Ack,
    Hello,
    MasterList,
    Pull,
    Push,
    RequestMasters,
    Terminate,
    XSegment,
)
from .transport import Peer, recv_message


@dataclass
class WorkerConfig:
    scheduler_host: str
    scheduler_ports: Tuple[int, int, int]
    worker_id: Optional[int] = None
    connect_attempts: int = 50
    retry_delay: float = 0.1
    request_timeout: float = 10.0
    directory_poll: float = 0.05
    max_rounds: Optional[int] = None


@dataclass
class WorkerReport:
    worker_id: int
    rounds: int
    last_fval: float


class _Subscription:
    """Publish-channel listener; remembers whether TERMINATE arrived."""

    def __init__(self, host, port, node_id, attempts, retry_delay):
        self.peer = Peer(host, port, attempts=attempts, retry_delay=retry_delay)
        self.peer.send(Hello(node_id))
        self.terminated = threading.Event()
        threading.Thread(target=self._listen, daemon=True).start()

    def _listen(self):
        while True:
            try:
                msg = recv_message(self.peer.sock)
            except Exception:
                return
            if msg is None:
                return
            if isinstance(msg, Terminate):
                self.terminated.set()
                return


def worker_run(loss, sampler, config):
    """Join the topology and push sampled-gradient updates until TERMINATE.

    ``loss`` evaluates the worker's local data shard; ``sampler`` draws over
    its local component range.  Returns a :class:`WorkerReport`.

    Raises
    ------
    SchedulerUnreachable
        When the scheduler never answers within the retry budget.
    MasterTimeout
        When an owning master stops answering pulls/pushes.
    """
    try:
        directory = Peer(
            config.scheduler_host,
            config.scheduler_ports[2],
            timeout=config.request_timeout,
            attempts=config.connect_attempts,
            retry_delay=config.retry_delay,
        )
    except TransportError as exc:
        raise SchedulerUnreachable(str(exc)) from exc

    hello = directory.request(Hello(ANY_ID if config.worker_id is None else config.worker_id))
    worker_id = hello.node_id

    sub = _Subscription(
        config.scheduler_host,
        config.scheduler_ports[1],
        worker_id,
        config.connect_attempts,
        config.retry_delay,
    )

    # wait for the full master list (coverage of [0, dim) implied by count)
    masters = None
    while masters is None:
        if sub.terminated.is_set():
            return WorkerReport(worker_id, 0, float("nan"))
        reply = directory.request(RequestMasters())
        if isinstance(reply, Terminate):
            return WorkerReport(worker_id, 0, float("nan"))
        assert isinstance(reply, MasterList)
        if reply.masters:
            masters = sorted(reply.masters, key=lambda m: m.lo)
        else:
            time.sleep(config.directory_poll)

    dim = masters[-1].hi
    x = np.zeros(dim)
    g = np.zeros(dim)
    peers = {}  # dynamic connections, opened on first use

    def peer_of(m):
        if m.master_id not in peers:
            peers[m.master_id] = Peer(
                m.host,
                m.port,
                timeout=config.request_timeout,
                attempts=config.connect_attempts,
                retry_delay=config.retry_delay,
            )
        return peers[m.master_id]

    rounds = 0
    fval = float("nan")
    try:
        while not sub.terminated.is_set():
            if config.max_rounds is not None and rounds >= config.max_rounds:
                break
            indices, _ = sampler.next_batch()
            k_read = {}
            terminated = False
            for m in masters:
                try:
                    reply = peer_of(m).request(Pull(m.lo, m.hi))
                except (TransportError, OSError) as exc:
                    raise MasterTimeout(f"pull from master {m.master_id} failed") from exc
                if isinstance(reply, Terminate):
                    terminated = True  # exit cleanly, no further push
                    break
                assert isinstance(reply, XSegment)
                x[reply.lo : reply.hi] = reply.values
                k_read[m.master_id] = reply.k
            if terminated:
                break
            fval = loss.partial_eval(x, g, indices)
            support = np.nonzero(g)[0]
            for m in masters:
                in_shard = support[(support >= m.lo) & (support < m.hi)]
                push = Push(
                    worker_id,
                    k_read[m.master_id],
                    fval,
                    tuple(int(j) for j in in_shard),
                    tuple(float(g[j]) for j in in_shard),
                )
                try:
                    reply = peer_of(m).request(push)
                except (TransportError, OSError) as exc:
                    raise MasterTimeout(f"push to master {m.master_id} failed") from exc
                if isinstance(reply, Terminate):
                    terminated = True
                    break
                assert isinstance(reply, Ack)
            if terminated:
                break
            rounds += 1
    finally:
        for peer in peers.values():
            peer.close()
        directory.close()
        sub.peer.close()
    return WorkerReport(worker_id, rounds, fval)
