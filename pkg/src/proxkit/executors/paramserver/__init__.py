"""Distributed parameter-server executor: scheduler, master, worker roles."""

from .local import ClusterResult, ClusterSpec, run_local_cluster
from .master import MasterConfig, MasterNode, master_run
from .partition import balanced_ranges, owners_of
from .protocol import decode_message, encode_message
from .scheduler import SchedulerConfig, SchedulerNode, SchedulerServer, scheduler_run
from .worker import WorkerConfig, WorkerReport, worker_run

__all__ = [
    "encode_message",
    "decode_message",
    "balanced_ranges",
    "owners_of",
    "SchedulerConfig",
    "SchedulerNode",
    "SchedulerServer",
    "scheduler_run",
    "MasterConfig",
    "MasterNode",
    "master_run",
    "WorkerConfig",
    "WorkerReport",
    "worker_run",
    "ClusterSpec",
    "ClusterResult",
    "run_local_cluster",
]
