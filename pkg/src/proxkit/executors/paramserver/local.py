"""Loopback cluster harness: one OS process per role.

Spawns a scheduler, ``n_masters`` masters and ``n_workers`` workers on
127.0.0.1 with ephemeral ports, shards the dataset rows across workers in
balanced contiguous blocks, and collects the masters' final segments and
iteration records when the update budget terminates the run.
"""

import multiprocessing
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ...core import assemble_stack
from ...problems.libsvm import read_libsvm
from ...problems.logistic import LogisticLoss
from .master import MasterConfig, master_run
from .partition import balanced_ranges
from .scheduler import SchedulerConfig, SchedulerServer
from .worker import WorkerConfig, worker_run

_CTX = multiprocessing.get_context("fork")


@dataclass
class ClusterSpec:
    dataset_path: str
    dim: int
    n_masters: int
    n_workers: int
    k_budget: int
    policy: dict = field(default_factory=dict)  # assemble_stack kwargs
    batch_size: Optional[int] = None  # None: full batch over the worker shard
    sampler_seed: int = 0
    worker_timeout: float = 10.0
    linger: float = 1.0
    deadline: float = 120.0


@dataclass
class ClusterResult:
    x: np.ndarray
    records: dict  # master_id -> list of (k, t_ns, fval)
    delay_pairs: dict  # master_id -> list of (k_read, k_applied)
    worker_rounds: dict  # worker_id -> rounds


def _scheduler_proc(spec_ports_q, spec):
    config = SchedulerConfig(
        n_masters=spec.n_masters,
        dim=spec.dim,
        k_budget=spec.k_budget,
        ports=(0, 0, 0),
        worker_timeout=spec.worker_timeout,
        linger=spec.linger + 1.0,
    )
    server = SchedulerServer(config)
    spec_ports_q.put(server.ports)
    server.wait(timeout=spec.deadline)
    server.close()


def _master_proc(spec, master_id, scheduler_ports, out_q):
    stack = assemble_stack(**spec.policy)
    config = MasterConfig(
        master_id=master_id,
        scheduler_host="127.0.0.1",
        scheduler_ports=scheduler_ports,
        port=0,
        n_worker_slots=spec.n_workers,
        linger=spec.linger,
    )
    node = master_run(config, stack, timeout=spec.deadline)
    out_q.put(
        (
            master_id,
            node.lo,
            node.hi,
            list(node.x_seg),
            [(r.k, r.t_ns, r.fval) for r in node.records],
            list(node.delay_pairs),
        )
    )


def _worker_proc(spec, shard_index, scheduler_ports, out_q):
    from ...core import FullBatchSampler, UniformSampler

    dataset = read_libsvm(spec.dataset_path, n_features=spec.dim)
    lo, hi = balanced_ranges(dataset.n_samples, spec.n_workers)[shard_index]
    shard = dataset.select(np.arange(lo, hi))
    loss = LogisticLoss(shard)
    if spec.batch_size is None:
        sampler = FullBatchSampler(shard.n_samples)
    else:
        sampler = UniformSampler(
            shard.n_samples, spec.batch_size, seed=spec.sampler_seed + shard_index
        )
    config = WorkerConfig(scheduler_host="127.0.0.1", scheduler_ports=scheduler_ports)
    report = worker_run(loss, sampler, config)
    out_q.put((report.worker_id, report.rounds))


def run_local_cluster(spec):
    """Run the cluster to completion and assemble the final decision vector."""
    ports_q = _CTX.Queue()
    master_q = _CTX.Queue()
    worker_q = _CTX.Queue()

    scheduler = _CTX.Process(target=_scheduler_proc, args=(ports_q, spec), daemon=True)
    scheduler.start()
    procs = [scheduler]
    try:
        scheduler_ports = ports_q.get(timeout=10.0)
        masters = [
            _CTX.Process(
                target=_master_proc, args=(spec, mid, scheduler_ports, master_q), daemon=True
            )
            for mid in range(spec.n_masters)
        ]
        workers = [
            _CTX.Process(
                target=_worker_proc, args=(spec, w, scheduler_ports, worker_q), daemon=True
            )
            for w in range(spec.n_workers)
        ]
        procs += masters + workers
        for p in masters + workers:
            p.start()

        master_outputs = [master_q.get(timeout=spec.deadline) for _ in masters]
        worker_outputs = [worker_q.get(timeout=spec.deadline) for _ in workers]
        for p in procs:
            p.join(timeout=spec.deadline)
    finally:
        for p in procs:
            if p.is_alive():
                p.terminate()
                p.join(timeout=5.0)

    x = np.zeros(spec.dim)
    records = {}
    delays = {}
    for master_id, lo, hi, seg, recs, pairs in master_outputs:
        x[lo:hi] = seg
        records[master_id] = recs
        delays[master_id] = pairs
    rounds = {wid: r for wid, r in worker_outputs}
    return ClusterResult(x=x, records=records, delay_pairs=delays, worker_rounds=rounds)
