"""Benchmark command line: assemble any policy combination, run, emit CSV.

Subcommands::

    proxkit run ...               one optimization run (or one ps role)
    proxkit generate-dataset ...  seeded synthetic LIBSVM file

``run`` writes one CSV row per logged iterate with header ``k,t_ns,fval``
plus a ``gap`` column (``fval - f*``) when the problem has a known optimum
(the generated QP).  Values come from a monotonic clock in integer
nanoseconds, so repeated seeded runs produce identical ``fval`` columns.

Exit codes: 0 success, 2 usage error, 3 divergence, 4 transport failure.

Option precedence is flags > config file (``--config``, JSON with keys equal
to flag destinations) > built-in defaults.  Defaults mirror the library's
policy defaults and the conventional ports (scheduler 40000/40001/40002,
master 50000).
"""

import argparse
import json
import sys

import numpy as np

from .core import (
    FullBatchSampler,
    UniformSampler,
    assemble_solver,
    assemble_stack,
    maxiter,
)
from .errors import (
    DivergenceDetected,
    IncompatiblePolicies,
    ProxkitError,
    TransportError,
    UsageError,
)
from .executors.paramserver.master import DEFAULT_MASTER_PORT, MasterConfig, master_run
from .executors.paramserver.scheduler import (
    DEFAULT_PORTS,
    DEFAULT_WORKER_TIMEOUT_S,
    SchedulerConfig,
    scheduler_run,
)
from .executors.paramserver.worker import WorkerConfig, worker_run
from .problems import (
    LogisticLoss,
    generate_logistic_dataset,
    generate_qp,
    load_qp,
    read_libsvm,
    save_qp,
    write_libsvm,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIVERGENCE = 3
EXIT_TRANSPORT = 4

ALGORITHMS = {
    "gd": ("none", "none", "constant", "none", None),
    "sgd": ("none", "none", "constant", "none", None),
    "iag": ("aggregated", "none", "constant", "none", None),
    "piag": ("aggregated", "none", "constant", "l1norm", None),
    "saga": ("saga", "none", "constant", "l1norm", None),
    "momentum": ("momentum", "none", "constant", "none", None),
    "heavyball": ("momentum", "none", "constant", "none", None),
    "nesterov": ("nesterov", "none", "constant", "none", None),
    "adagrad": ("none", "adagrad", "constant", "none", None),
    "adadelta": ("none", "adadelta", "constant", "none", None),
    "adam": ("momentum", "rmsprop", "constant", "none", None),
    "nadam": ("nesterov", "rmsprop", "constant", "none", None),
    "amsgrad": ("momentum", "amsgrad", "constant", "none", None),
    "hogwild": ("none", "none", "constant", "none", "inconsistent"),
    "asaga": ("saga", "none", "constant", "none", "inconsistent"),
    "proxasaga": ("saga", "none", "constant", "l1norm", "inconsistent"),
}

_DEFAULTS = {
    "problem": "qp",
    "d": 100,
    "mu": 0.05,
    "L": 20.0,
    "qp_seed": 0,
    "boosting": "none",
    "smoothing": "none",
    "step": "constant",
    "prox": "none",
    "gamma": "1.0",
    "gamma0": 1.0,
    "decay_p": 0.5,
    "boost_mu": 0.9,
    "boost_eps": 0.1,
    "beta": 0.999,
    "epsilon": 1e-8,
    "lambda1": 0.0,
    "executor": "serial",
    "workers": 1,
    "K": 100,
    "M": None,
    "seed": 0,
    "role": "standalone",
    "scheduler_host": "127.0.0.1",
    "scheduler_ports": "{},{},{}".format(*DEFAULT_PORTS),
    "master_host": "127.0.0.1",
    "master_port": DEFAULT_MASTER_PORT,
    "master_id": 0,
    "n_masters": 1,
    "n_workers": 1,
    "worker_timeout": DEFAULT_WORKER_TIMEOUT_S,
    "out": "-",
}


def _build_parser():
    parser = argparse.ArgumentParser(prog="proxkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one benchmark (or one parameter-server role)")
    run.add_argument("--config", help="JSON file supplying defaults for any flag")
    run.add_argument("--problem", choices=("qp", "logistic"))
    run.add_argument("--data", help="LIBSVM file (logistic)")
    run.add_argument("--d", type=int, help="QP dimension")
    run.add_argument("--mu", type=float, help="QP smallest eigenvalue")
    run.add_argument("--L", type=float, help="QP largest eigenvalue")
    run.add_argument("--qp-seed", type=int, dest="qp_seed")
    run.add_argument("--qp-file", dest="qp_file", help="load/store the QP instance here")
    run.add_argument("--algo", choices=sorted(ALGORITHMS))
    run.add_argument("--boosting", choices=("none", "momentum", "nesterov", "aggregated", "saga"))
    run.add_argument(
        "--smoothing", choices=("none", "adagrad", "rmsprop", "amsgrad", "adadelta")
    )
    run.add_argument("--step", choices=("constant", "decreasing"))
    run.add_argument("--prox", choices=("none", "l1norm"))
    run.add_argument("--gamma", help="constant step size, or 'auto'")
    run.add_argument("--gamma0", type=float, help="decreasing-step base")
    run.add_argument("--decay-p", type=float, dest="decay_p", help="decreasing-step exponent")
    run.add_argument("--boost-mu", type=float, dest="boost_mu")
    run.add_argument("--boost-eps", type=float, dest="boost_eps")
    run.add_argument("--beta", type=float, help="smoothing decay (rho for adadelta)")
    run.add_argument("--epsilon", type=float, help="smoothing regularizer")
    run.add_argument("--lambda1", type=float, help="L1 weight")
    run.add_argument(
        "--executor", choices=("serial", "consistent", "inconsistent", "paramserver")
    )
    run.add_argument("--workers", type=int)
    run.add_argument("--K", type=int, help="iteration budget")
    run.add_argument("--M", type=int, help="mini-batch size (component sampling)")
    run.add_argument("--seed", type=int)
    run.add_argument("--role", choices=("standalone", "scheduler", "master", "worker"))
    run.add_argument("--scheduler-host", dest="scheduler_host")
    run.add_argument(
        "--scheduler-ports",
        dest="scheduler_ports",
        help="control,publish,directory (default 40000,40001,40002)",
    )
    run.add_argument("--master-host", dest="master_host")
    run.add_argument("--master-port", type=int, dest="master_port")
    run.add_argument("--master-id", type=int, dest="master_id")
    run.add_argument("--n-masters", type=int, dest="n_masters")
    run.add_argument("--n-workers", type=int, dest="n_workers")
    run.add_argument("--worker-timeout", type=float, dest="worker_timeout", help="seconds")
    run.add_argument("--out", help="CSV path ('-' for stdout)")

    gen = sub.add_parser("generate-dataset", help="write a seeded synthetic LIBSVM file")
    gen.add_argument("--N", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--density", type=float, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--noise", type=float, default=0.1)
    gen.add_argument("--out", required=True)
    return parser


def _merge(args):
    """Apply precedence: explicit flags > config file > defaults."""
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            file_values = json.load(fh)
        unknown = set(file_values) - set(_DEFAULTS) - {"data", "qp_file", "algo"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_values)
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is not None:
            merged[key] = value
    merged.setdefault("data", None)
    merged.setdefault("qp_file", None)
    merged.setdefault("algo", None)
    return merged


def _resolve_policies(cfg):
    if cfg["algo"]:
        boosting, smoothing, step, prox, executor = ALGORITHMS[cfg["algo"]]
        cfg["boosting"], cfg["smoothing"], cfg["step"], cfg["prox"] = (
            boosting,
            smoothing,
            step,
            prox,
        )
        if executor and cfg["executor"] == _DEFAULTS["executor"]:
            cfg["executor"] = executor
    return cfg


def _resolve_gamma(cfg, n_samples=None):
    gamma = cfg["gamma"]
    if isinstance(gamma, str) and gamma == "auto":
        if cfg["problem"] == "qp":
            return 2.0 / (cfg["mu"] + cfg["L"])
        if n_samples is None:
            raise UsageError("--gamma auto needs a dataset to size the step")
        if cfg["M"]:
            return 1.0 / (n_samples / cfg["M"])  # 1/B with B = N/M
        return 1.0 / (0.25 * n_samples)
    try:
        return float(gamma)
    except (TypeError, ValueError):
        raise UsageError(f"--gamma must be a number or 'auto', got {gamma!r}") from None


def _policy_kwargs(cfg, gamma):
    step_params = (
        {"gamma": gamma}
        if cfg["step"] == "constant"
        else {"gamma0": cfg["gamma0"], "p": cfg["decay_p"]}
    )
    smoothing_params = {}
    if cfg["smoothing"] in ("rmsprop", "amsgrad"):
        smoothing_params = {"beta": cfg["beta"], "epsilon": cfg["epsilon"]}
    elif cfg["smoothing"] == "adadelta":
        smoothing_params = {"rho": cfg["beta"], "epsilon": cfg["epsilon"]}
    elif cfg["smoothing"] == "adagrad":
        smoothing_params = {"epsilon": cfg["epsilon"]}
    boosting_params = {}
    if cfg["boosting"] in ("momentum", "nesterov"):
        boosting_params = {"mu": cfg["boost_mu"], "eps": cfg["boost_eps"]}
    prox_params = {"lambda1": cfg["lambda1"]} if cfg["prox"] == "l1norm" else {}
    return dict(
        boosting=cfg["boosting"],
        smoothing=cfg["smoothing"],
        step=cfg["step"],
        prox=cfg["prox"],
        boosting_params=boosting_params,
        smoothing_params=smoothing_params,
        step_params=step_params,
        prox_params=prox_params,
    )


def parse_config(argv):
    """Parse argv into a validated run configuration dict.

    Policy-combination legality is checked here, so an illegal executor
    pairing is refused before anything runs.
    """
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "generate-dataset":
        return {"command": "generate-dataset", **vars(args)}
    cfg = _resolve_policies(_merge(args))
    cfg["command"] = "run"
    if cfg["problem"] == "logistic" and cfg["role"] == "standalone" and not cfg["data"]:
        raise UsageError("--problem logistic needs --data")
    if cfg["role"] == "worker" and not cfg["data"]:
        raise UsageError("--role worker needs --data (its local shard)")
    if cfg["role"] != "standalone" and cfg["executor"] != "paramserver":
        cfg["executor"] = "paramserver"
    if cfg["executor"] == "paramserver" and cfg["role"] == "standalone":
        raise UsageError("--executor paramserver needs --role scheduler|master|worker")
    # parse-validate the policy pairing (raises IncompatiblePolicies)
    if cfg["role"] == "standalone":
        gamma = _resolve_gamma(cfg) if cfg["gamma"] != "auto" or cfg["problem"] == "qp" else 1.0
        assemble_solver(
            executor=cfg["executor"], workers=cfg["workers"], **_policy_kwargs(cfg, gamma)
        )
    ports = cfg["scheduler_ports"]
    if isinstance(ports, str):
        parts = ports.split(",")
        if len(parts) != 3:
            raise UsageError("--scheduler-ports wants control,publish,directory")
        cfg["scheduler_ports"] = tuple(int(p) for p in parts)
    return cfg


class CsvLogger:
    """Writes ``k,t_ns,fval[,gap]`` rows as records arrive."""

    def __init__(self, stream, f_star=None):
        self.stream = stream
        self.f_star = f_star
        header = "k,t_ns,fval" + (",gap" if f_star is not None else "")
        self.stream.write(header + "\n")

    def __call__(self, record):
        row = f"{record.k},{record.t_ns},{record.fval!r}"
        if self.f_star is not None:
            row += f",{record.fval - self.f_star!r}"
        self.stream.write(row + "\n")


def _open_out(path):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _run_standalone(cfg):
    if cfg["problem"] == "qp":
        if cfg["qp_file"]:
            try:
                problem = load_qp(cfg["qp_file"])
            except FileNotFoundError:
                problem = generate_qp(cfg["d"], cfg["mu"], cfg["L"], cfg["qp_seed"])
                save_qp(problem, cfg["qp_file"])
        else:
            problem = generate_qp(cfg["d"], cfg["mu"], cfg["L"], cfg["qp_seed"])
        loss = problem
        f_star = problem.f_star
        rng = np.random.Generator(np.random.PCG64(cfg["seed"]))
        x0 = rng.normal(5.0, 3.0, size=problem.d)
        sampler = FullBatchSampler(1)
        n_samples = None
    else:
        dataset = read_libsvm(cfg["data"])
        loss = LogisticLoss(dataset)
        f_star = None
        x0 = np.zeros(dataset.n_features)
        n_samples = dataset.n_samples
        if cfg["M"]:
            sampler = UniformSampler(n_samples, cfg["M"], seed=cfg["seed"])
        else:
            sampler = FullBatchSampler(n_samples)

    gamma = _resolve_gamma(cfg, n_samples)
    solver = assemble_solver(
        executor=cfg["executor"], workers=cfg["workers"], **_policy_kwargs(cfg, gamma)
    )
    solver.initialize(x0)
    stream, owned = _open_out(cfg["out"])
    try:
        logger = CsvLogger(stream, f_star=f_star)
        solver.solve(loss, maxiter(cfg["K"]), sampler=sampler, logger=logger)
    finally:
        if owned:
            stream.close()
    return EXIT_OK


def _run_scheduler(cfg):
    config = SchedulerConfig(
        n_masters=cfg["n_masters"],
        dim=cfg["d"],
        k_budget=cfg["K"],
        host=cfg["scheduler_host"],
        ports=cfg["scheduler_ports"],
        worker_timeout=cfg["worker_timeout"],
    )
    scheduler_run(config)
    return EXIT_OK


def _run_master(cfg):
    if cfg["gamma"] == "auto" and cfg["problem"] != "qp":
        raise UsageError("--gamma auto needs the dataset; masters must get an explicit step")
    gamma = _resolve_gamma(cfg)
    stack = assemble_stack(**_policy_kwargs(cfg, gamma))
    x0 = None
    if cfg["problem"] == "qp" and cfg["qp_file"]:
        problem = load_qp(cfg["qp_file"])
        rng = np.random.Generator(np.random.PCG64(cfg["seed"]))
        x0 = rng.normal(5.0, 3.0, size=problem.d)
    config = MasterConfig(
        master_id=cfg["master_id"],
        scheduler_host=cfg["scheduler_host"],
        scheduler_ports=cfg["scheduler_ports"],
        host=cfg["master_host"],
        port=cfg["master_port"],
        n_worker_slots=cfg["n_workers"],
        x0=x0,
    )
    node = master_run(config, stack)
    if cfg["out"] != "-":
        with open(cfg["out"], "w", encoding="utf-8") as fh:
            logger = CsvLogger(fh)
            for record in node.records:
                logger(record)
        np.savez(cfg["out"] + ".seg.npz", lo=node.lo, hi=node.hi, x=node.x_seg)
    return EXIT_OK


def _run_worker(cfg):
    dataset = read_libsvm(cfg["data"])
    loss = LogisticLoss(dataset)
    if cfg["M"]:
        sampler = UniformSampler(dataset.n_samples, cfg["M"], seed=cfg["seed"])
    else:
        sampler = FullBatchSampler(dataset.n_samples)
    config = WorkerConfig(
        scheduler_host=cfg["scheduler_host"], scheduler_ports=cfg["scheduler_ports"]
    )
    worker_run(loss, sampler, config)
    return EXIT_OK


def run_benchmark(cfg):
    """Execute a parsed configuration; returns the process exit code."""
    role = cfg["role"]
    if role == "standalone":
        return _run_standalone(cfg)
    if role == "scheduler":
        return _run_scheduler(cfg)
    if role == "master":
        return _run_master(cfg)
    return _run_worker(cfg)


def generate_dataset(cfg):
    ds = generate_logistic_dataset(
        cfg["N"], cfg["d"], cfg["density"], seed=cfg["seed"], noise=cfg["noise"]
    )
    write_libsvm(ds, cfg["out"])
    return EXIT_OK


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except (UsageError, IncompatiblePolicies) as exc:
        print(f"proxkit: {exc}", file=sys.stderr)
        return EXIT_USAGE
    role = cfg.get("role", "standalone")
    try:
        if cfg["command"] == "generate-dataset":
            return generate_dataset(cfg)
        return run_benchmark(cfg)
    except DivergenceDetected as exc:
        print(f"proxkit {role}: diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except TransportError as exc:
        print(f"proxkit {role}: transport failure: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except ProxkitError as exc:
        print(f"proxkit {role}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"proxkit {role}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
