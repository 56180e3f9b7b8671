import json
import subprocess
import sys

import numpy as np
import pytest

from proxkit import cli
from proxkit.errors import IncompatiblePolicies, UsageError
from proxkit.problems import read_libsvm


def parse(argv):
    return cli.parse_config(argv)


def test_gamma_auto_resolves_for_qp():
    cfg = parse(
        "run --problem qp --d 100 --mu 0.05 --L 20 --algo gd --gamma auto".split()
    )
    assert cli._resolve_gamma(cfg) == pytest.approx(2.0 / (0.05 + 20.0))


def test_algo_adam_expands_to_policies():
    cfg = parse(["run", "--algo", "adam"])
    assert (cfg["boosting"], cfg["smoothing"], cfg["step"], cfg["prox"]) == (
        "momentum",
        "rmsprop",
        "constant",
        "none",
    )


def test_algo_presets_set_lockfree_executor():
    cfg = parse(["run", "--algo", "hogwild"])
    assert cfg["executor"] == "inconsistent"


def test_illegal_pairing_refused_at_parse():
    argv = "run --executor inconsistent --prox none --boosting momentum".split()
    with pytest.raises(IncompatiblePolicies):
        parse(argv)
    assert cli.main(argv) == cli.EXIT_USAGE


def test_logistic_requires_data():
    with pytest.raises(UsageError):
        parse(["run", "--problem", "logistic"])


def test_config_file_precedence(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"gamma": "0.25", "K": 7}))
    cfg = parse(["run", "--config", str(config)])
    assert cfg["K"] == 7 and cfg["gamma"] == "0.25"
    cfg = parse(["run", "--config", str(config), "--K", "9"])
    assert cfg["K"] == 9  # flags beat the file


def test_config_file_unknown_key(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"velocity": 1}))
    with pytest.raises(UsageError):
        parse(["run", "--config", str(config)])


def _read_csv(path):
    lines = path.read_text().strip().splitlines()
    return lines[0], [line.split(",") for line in lines[1:]]


def test_qp_gd_run_writes_monotone_gap(tmp_path):
    out = tmp_path / "run.csv"
    rc = cli.main(
        f"run --problem qp --d 100 --mu 0.05 --L 20 --algo gd --gamma auto "
        f"--K 2500 --seed 3 --out {out}".split()
    )
    assert rc == cli.EXIT_OK
    header, rows = _read_csv(out)
    assert header == "k,t_ns,fval,gap"
    assert len(rows) == 2500
    ks = [int(r[0]) for r in rows]
    assert ks == list(range(2500))
    gaps = [float(r[3]) for r in rows]
    assert all(g2 <= g1 + 1e-12 for g1, g2 in zip(gaps, gaps[1:]))
    assert all(g >= -1e-9 for g in gaps)


def test_k_zero_writes_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    rc = cli.main(f"run --problem qp --d 10 --K 0 --out {out}".split())
    assert rc == cli.EXIT_OK
    header, rows = _read_csv(out)
    assert header == "k,t_ns,fval,gap"
    assert rows == []


def test_divergence_exit_code(tmp_path):
    out = tmp_path / "div.csv"
    rc = cli.main(
        f"run --problem qp --d 10 --mu 0.05 --L 20 --gamma 1.0 --K 2000 --out {out}".split()
    )
    assert rc == cli.EXIT_DIVERGENCE


def test_deterministic_fval_column(tmp_path):
    ds_path = tmp_path / "train.svm"
    assert (
        cli.main(
            f"generate-dataset --N 80 --d 10 --density 0.4 --seed 2 --out {ds_path}".split()
        )
        == cli.EXIT_OK
    )

    def run(out):
        rc = cli.main(
            f"run --problem logistic --data {ds_path} --algo amsgrad --gamma 0.1 "
            f"--M 8 --K 50 --seed 11 --lambda1 0.0001 --out {out}".split()
        )
        assert rc == cli.EXIT_OK
        _, rows = _read_csv(out)
        return [r[2] for r in rows]

    assert run(tmp_path / "a.csv") == run(tmp_path / "b.csv")


def test_generate_dataset_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.svm", tmp_path / "b.svm"
    for path in (a, b):
        rc = cli.main(
            f"generate-dataset --N 40 --d 12 --density 0.3 --seed 9 --out {path}".split()
        )
        assert rc == cli.EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    ds = read_libsvm(a)
    assert ds.n_samples == 40


def test_qp_file_shared_instance(tmp_path):
    qp_file = tmp_path / "inst.qp"
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    base = (
        f"run --problem qp --d 30 --mu 0.1 --L 5 --qp-seed 4 --qp-file {qp_file} "
        f"--gamma auto --K 20 --seed 1"
    )
    assert cli.main((base + f" --out {out1}").split()) == cli.EXIT_OK
    assert qp_file.exists()
    assert cli.main((base + f" --out {out2}").split()) == cli.EXIT_OK
    # fval columns identical even via the instance file
    _, rows1 = _read_csv(out1)
    _, rows2 = _read_csv(out2)
    assert [r[2] for r in rows1] == [r[2] for r in rows2]


def test_console_entry_point(tmp_path):
    out = tmp_path / "cli.csv"
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "proxkit.cli",
            "run",
            "--problem",
            "qp",
            "--d",
            "10",
            "--K",
            "5",
            "--gamma",
            "0.05",
            "--out",
            str(out),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith("k,t_ns,fval,gap")


def _free_ports(n):
    import socket

    socks = [socket.socket() for _ in range(n)]
    for s in socks:
        s.bind(("127.0.0.1", 0))
    ports = [s.getsockname()[1] for s in socks]
    for s in socks:
        s.close()
    return ports


def test_paramserver_roles_via_cli(tmp_path):
    ds_path = tmp_path / "ps.svm"
    assert (
        cli.main(
            f"generate-dataset --N 60 --d 8 --density 0.5 --seed 4 --noise 1.0 --out {ds_path}".split()
        )
        == cli.EXIT_OK
    )
    c, p, d, mport = _free_ports(4)
    ports = f"{c},{p},{d}"
    out = tmp_path / "master.csv"
    common = f"--scheduler-host 127.0.0.1 --scheduler-ports {ports}"
    cmds = {
        "scheduler": f"run --role scheduler --d 8 --n-masters 1 --K 50 {common}",
        "master": (
            f"run --role master --master-id 0 --master-port {mport} --n-workers 1 "
            f"--algo piag --gamma 0.0666 --lambda1 0.0001 {common} --out {out}"
        ),
        "worker": f"run --role worker --problem logistic --data {ds_path} {common}",
    }
    procs = {}
    for role, cmd in cmds.items():
        procs[role] = subprocess.Popen(
            [sys.executable, "-m", "proxkit.cli"] + cmd.split(),
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
    try:
        for role, proc in procs.items():
            stdout, stderr = proc.communicate(timeout=60)
            assert proc.returncode == 0, f"{role}: {stderr}"
    finally:
        for proc in procs.values():
            if proc.poll() is None:
                proc.kill()
    header, rows = _read_csv(out)
    assert header == "k,t_ns,fval"
    assert len(rows) >= 50
    seg = np.load(str(out) + ".seg.npz")
    assert int(seg["lo"]) == 0 and int(seg["hi"]) == 8
    assert np.all(np.isfinite(seg["x"]))


def test_usage_error_exit_code():
    assert cli.main(["run", "--problem", "logistic"]) == cli.EXIT_USAGE


def test_worker_role_requires_data():
    with pytest.raises(UsageError):
        parse(["run", "--role", "worker"])


def test_master_refuses_auto_gamma_without_problem():
    cfg = parse(
        "run --role master --problem logistic --gamma auto --master-id 0".split()
    )
    with pytest.raises(UsageError):
        cli._run_master(cfg)


def test_stdout_csv(capsys):
    rc = cli.main("run --problem qp --d 10 --K 3 --gamma 0.01".split())
    assert rc == cli.EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "k,t_ns,fval,gap"
    assert len(lines) == 4
