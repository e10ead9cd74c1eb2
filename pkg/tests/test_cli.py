"""Command-line interface: subcommands, exit codes, manifests, determinism."""

import csv
import json

import pytest

from logdiff.cli import main

BASE_CONFIG = """\
[grid]
dim = 2
edge = 1.0
cells = 16

[initial]
fixture = lump2d
c = 1.0
T = 1.0

[solver]
equation = log-diffusion
dt = 0.0625
horizon = 0.25
boundary = dirichlet-from-oracle

[verify]
slab = solve/slab.slab
count = 5
sigma = 0.5
"""


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    """One solve shared by the verify tests."""
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "run.ini"
    cfg.write_text(BASE_CONFIG)
    code = main(["solve", "--config", str(cfg), "--out", str(root / "solve")])
    assert code == 0
    return root


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_solve_outputs_and_manifest(run_dir):
    slab_file = run_dir / "solve" / "slab.slab"
    manifest = json.loads((run_dir / "solve" / "manifest.json").read_text())
    assert slab_file.is_file()
    assert manifest["command"] == "solve"
    assert "slab.slab" in manifest["files"]
    assert "manifest.json" in manifest["files"]
    assert manifest["config"]["solver"]["dt"] == 0.0625
    assert len(manifest["run_id"]) == 12


def test_verify_l1_rows(run_dir):
    out = run_dir / "l1"
    code = main([
        "verify", "l1", "--config", str(run_dir / "run.ini"),
        "--out", str(out), "--seed", "7",
    ])
    assert code == 0
    rows = read_rows(out / "report.csv")
    assert len(rows) == 5
    assert all(r["error"] == "" for r in rows)
    assert all(float(r["gamma_star"]) > 0 for r in rows)
    assert [r["probe"] for r in rows] == [str(i) for i in range(5)]


def test_verify_deterministic_across_runs_and_threads(run_dir):
    cfg = str(run_dir / "run.ini")
    outs = []
    for name, threads in (("det1", "1"), ("det2", "4"), ("det3", "4")):
        out = run_dir / name
        code = main([
            "verify", "energy", "--config", cfg, "--out", str(out),
            "--seed", "3", "--threads", threads,
        ])
        assert code == 0
        outs.append((out / "report.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_verify_explicit_probe(run_dir, tmp_path):
    cfg = tmp_path / "one.ini"
    cfg.write_text(BASE_CONFIG.replace("count = 5", "count = 1") + "rho = 0.25\nwindow = 0.125 0.25\n")
    # config-relative slab path
    (tmp_path / "solve").mkdir()
    (tmp_path / "solve" / "slab.slab").write_bytes(
        (run_dir / "solve" / "slab.slab").read_bytes()
    )
    out = tmp_path / "explicit"
    code = main(["verify", "l1", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    rows = read_rows(out / "report.csv")
    assert len(rows) == 1
    assert rows[0]["rho"] == "0.25"


def test_verify_distributional(run_dir, tmp_path):
    cfg = tmp_path / "dist.ini"
    cfg.write_text(
        BASE_CONFIG.replace("count = 5", "count = 1")
        + "rho = 0.25\ncenter = 0.0 0.0\n"
    )
    (tmp_path / "solve").mkdir()
    (tmp_path / "solve" / "slab.slab").write_bytes(
        (run_dir / "solve" / "slab.slab").read_bytes()
    )
    out = tmp_path / "dist"
    code = main(["verify", "distributional", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    rows = read_rows(out / "report.csv")
    assert len(rows) == 1
    assert rows[0]["error"] == ""
    assert float(rows[0]["shift_defect_at_one"]) == 0.0


def test_verify_pointwise_records_probe_errors(run_dir):
    # sampled probes on this tiny slab cannot satisfy the intrinsic geometry;
    # failures land in the error column, not the exit code
    out = run_dir / "pw"
    code = main([
        "verify", "pointwise", "--config", str(run_dir / "run.ini"),
        "--out", str(out), "--seed", "1",
    ])
    assert code == 0
    rows = read_rows(out / "report.csv")
    assert len(rows) == 5
    assert all(set(r) == set(rows[0]) for r in rows)


def test_msweep_cli(tmp_path):
    cfg = tmp_path / "ms.ini"
    cfg.write_text(
        BASE_CONFIG.split("[verify]")[0]
        + "[msweep]\nm_values = 0.4 0.2\n"
    )
    out = tmp_path / "ms"
    code = main(["msweep", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    summary = read_rows(out / "msweep" / "summary.csv")
    assert [r["m"] for r in summary] == ["0.4", "0.2"]
    assert (out / "msweep" / "logdiff.slab").is_file()
    assert (out / "msweep" / "pme_0.slab").is_file()
    manifest = json.loads((out / "manifest.json").read_text())
    assert any(f.startswith("msweep/") for f in manifest["files"])


def test_oracle_check_cli(tmp_path):
    out = tmp_path / "oc"
    code = main(["oracle-check", "lump2d", "--out", str(out), "--meshes", "8", "16", "32"])
    assert code == 0
    rows = read_rows(out / "oracle.csv")
    assert len(rows) == 3
    order = float(rows[0]["order"])
    assert 1.7 <= order <= 2.3


def test_oracle_check_exp_exact(tmp_path):
    out = tmp_path / "oce"
    code = main(["oracle-check", "exp_steady", "--out", str(out), "--meshes", "16", "32"])
    assert code == 0
    rows = read_rows(out / "oracle.csv")
    assert all(float(r["residual"]) <= 1e-10 for r in rows)


def test_exit_codes(tmp_path):
    # unknown fixture -> config error
    assert main(["oracle-check", "nope", "--out", str(tmp_path / "a")]) == 2
    # missing config file
    assert main(["solve", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path / "b")]) == 2
    # config without required --config flag
    assert main(["solve", "--out", str(tmp_path / "c")]) == 2
    # unreadable slab -> verification io error
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[verify]\nslab = missing.slab\n")
    assert main(["verify", "l1", "--config", str(cfg), "--out", str(tmp_path / "d")]) == 4
    junk = tmp_path / "junk.slab"
    junk.write_bytes(b"not a slab")
    cfg2 = tmp_path / "bad2.ini"
    cfg2.write_text(f"[verify]\nslab = {junk}\n")
    assert main(["verify", "l1", "--config", str(cfg2), "--out", str(tmp_path / "e")]) == 4


def test_solver_failure_exit_code(tmp_path):
    cfg = tmp_path / "hard.ini"
    cfg.write_text(
        BASE_CONFIG.replace(
            "dt = 0.0625",
            "dt = 0.125\nnewton_tol = 1e-14\nnewton_max_iter = 1\nmax_damping = 0",
        )
    )
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 3


def test_bad_equation_is_config_error(tmp_path):
    cfg = tmp_path / "eq.ini"
    cfg.write_text(BASE_CONFIG.replace("equation = log-diffusion", "equation = heat"))
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "y")]) == 2
