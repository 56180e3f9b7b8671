"""Distributed run: scheduler + masters + workers as separate processes.

Launches the three roles through the command line on loopback (the same
binary serves every role, selected by --role), waits for the update budget
to terminate the run, and reassembles the final decision vector from the
master shard files.  Mirrors a real deployment where each role runs on its
own machine; only the addresses change.
"""

import socket
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from proxkit.problems import LogisticLoss, generate_logistic_dataset, write_libsvm

N, D, K, LAM = 300, 40, 2000, 1e-4
N_MASTERS, N_WORKERS = 2, 2


def free_ports(count):
    socks = [socket.socket() for _ in range(count)]
    for s in socks:
        s.bind(("127.0.0.1", 0))
    ports = [s.getsockname()[1] for s in socks]
    for s in socks:
        s.close()
    return ports


workdir = Path(tempfile.mkdtemp(prefix="proxkit-ps-"))
dataset = generate_logistic_dataset(N, D, density=0.2, seed=33, noise=1.0)
loss = LogisticLoss(dataset)

# each worker gets a contiguous block of rows as its local file
splits = np.array_split(np.arange(N), N_WORKERS)
shard_paths = []
for w, rows in enumerate(splits):
    path = workdir / f"shard{w}.svm"
    write_libsvm(dataset.select(rows), path)
    shard_paths.append(path)

c, p, d, *mports = free_ports(3 + N_MASTERS)
common = ["--scheduler-host", "127.0.0.1", "--scheduler-ports", f"{c},{p},{d}"]
gamma = 1.0 / (0.25 * N)

procs = []


def launch(args):
    cmd = [sys.executable, "-m", "proxkit.cli", "run"] + args + common
    procs.append(subprocess.Popen(cmd))


launch(["--role", "scheduler", "--d", str(D), "--n-masters", str(N_MASTERS), "--K", str(K)])
for mid in range(N_MASTERS):
    launch(
        [
            "--role", "master", "--master-id", str(mid),
            "--master-port", str(mports[mid]), "--n-workers", str(N_WORKERS),
            "--algo", "piag", "--gamma", str(gamma), "--lambda1", str(LAM),
            "--out", str(workdir / f"master{mid}.csv"),
        ]
    )
for w in range(N_WORKERS):
    launch(["--role", "worker", "--problem", "logistic", "--data", str(shard_paths[w])])

for proc in procs:
    if proc.wait(timeout=120) != 0:
        raise SystemExit(f"role exited with {proc.returncode}")

x = np.zeros(D)
for mid in range(N_MASTERS):
    seg = np.load(workdir / f"master{mid}.csv.seg.npz")
    x[int(seg["lo"]) : int(seg["hi"])] = seg["x"]

print(f"run artifacts in {workdir}")
print(f"objective at x0:      {loss.objective(np.zeros(D), LAM):.4f}")
print(f"objective after run:  {loss.objective(x, LAM):.4f}")
print(f"nonzeros in solution: {int(np.count_nonzero(x))} / {D}")
