"""Experiment runner: solve, verify, msweep, and oracle-check subcommands.

Configuration is a single INI file; every recognized key, including applied
defaults, is echoed into the run manifest so a run is self-describing.  CSV
outputs are byte-identical across reruns with the same config and thread
count: probe placement is seeded, workers return results in submission
order, and floats are serialized with ``repr``.  Column sets are documented
in ``schema/columns.md`` shipped inside the package.

Exit codes: 0 success, 2 config error, 3 solver failure, 4 verification I/O
error.
"""

from __future__ import annotations

import argparse
import configparser
import datetime
import hashlib
import struct
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields as dc_fields
from pathlib import Path

import numpy as np

from .errors import GeometryError, ParameterError, SolverError
from .grid import Cube, Cutoff, Field, Grid, read_slab, write_slab
from .oracles import build_fixture, fit_order, residual_check
from .solvers import (
    QuasilinearFlux,
    SolverConfig,
    solve_log_diffusion,
    solve_porous_medium,
    solve_quasilinear,
)
from .harnack import (
    DistributionalCheck,
    EnergyReport,
    FluxReport,
    HarnackReport,
    PointwiseHarnackReport,
    check_energy_lemma,
    check_energy_lemma_pme,
    check_flux_corollary,
    check_l1_harnack,
    check_l1_harnack_pme,
    check_pointwise_harnack,
    distributional_identity_check,
    sample_cylinders,
)
from .limit_m import run_m_sweep
from .reporting import write_csv, write_json

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

VERIFY_KINDS = (
    "l1",
    "l1-pme",
    "pointwise",
    "energy",
    "energy-pme",
    "flux",
    "distributional",
)


class ConfigProblem(Exception):
    """Anything wrong with the config file or its values."""


def _parse_floats(raw: str) -> tuple:
    parts = raw.replace(",", " ").split()
    if not parts:
        raise ValueError("empty list")
    return tuple(float(p) for p in parts)


def _parse_ints(raw: str) -> tuple:
    return tuple(int(p) for p in raw.replace(",", " ").split())


class Cfg:
    """Config accessor that records every effective value for the manifest."""

    def __init__(self, cp: configparser.ConfigParser, base_dir: Path):
        self.cp = cp
        self.base_dir = base_dir
        self.echo: dict = {}

    def _record(self, section: str, key: str, value):
        out = value
        if isinstance(out, tuple):
            out = list(out)
        self.echo.setdefault(section, {})[key] = out

    def get(self, section: str, key: str, default=None, cast=str, required=False):
        if self.cp.has_option(section, key):
            raw = self.cp.get(section, key)
            try:
                value = cast(raw)
            except ValueError as exc:
                raise ConfigProblem(f"bad value for [{section}] {key}: {exc}")
        elif required:
            raise ConfigProblem(f"missing required config key [{section}] {key}")
        else:
            value = default
        self._record(section, key, value)
        return value

    def path(self, section: str, key: str, required=False):
        """A path value resolved against the config file's directory."""
        raw = self.get(section, key, default=None, cast=str, required=required)
        if raw is None:
            return None
        p = Path(raw)
        return p if p.is_absolute() else self.base_dir / p


def load_config(path) -> Cfg:
    p = Path(path)
    if not p.is_file():
        raise ConfigProblem(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(p.read_text())
    except configparser.Error as exc:
        raise ConfigProblem(f"config parse error: {exc}")
    return Cfg(cp, p.parent.resolve())


def _config_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:12]


def _build_grid(cfg: Cfg) -> Grid:
    dim = cfg.get("grid", "dim", 2, int)
    edge = cfg.get("grid", "edge", 1.0, float)
    cells = cfg.get("grid", "cells", 64, int)
    if cells < 2:
        raise ConfigProblem("[grid] cells must be >= 2")
    center = cfg.get("grid", "center", tuple(0.0 for _ in range(dim)), _parse_floats)
    return Grid.regular(dim, edge, edge / cells, center)


_FIXTURE_PARAMS = {
    "lump2d": {"c": float, "T": float},
    "exp_steady": {"a": _parse_floats, "scale": float},
    "barenblatt_fd": {"m": float, "T": float, "C": float},
}


def _build_initial(cfg: Cfg, grid: Grid):
    """Returns (field, fixture-or-None) for the configured initial data."""
    name = cfg.get("initial", "fixture", "lump2d", str)
    t0 = cfg.get("initial", "t0", 0.0, float)
    if name == "constant":
        value = cfg.get("initial", "value", 1.0, float)
        if value <= 0:
            raise ConfigProblem("[initial] value must be positive")
        return Field(grid, np.full(grid.shape, value), time=t0), None
    params = {}
    for key, cast in _FIXTURE_PARAMS.get(name, {}).items():
        if cfg.cp.has_option("initial", key):
            params[key] = cfg.get("initial", key, cast=cast)
    sol = build_fixture(name, **params)
    return sol.sample(grid, t0), sol


def _build_solver_config(cfg: Cfg, fixture) -> SolverConfig:
    boundary = cfg.get("solver", "boundary", "dirichlet-from-oracle", str)
    boundary_values = None
    if boundary == "dirichlet-from-oracle":
        if fixture is not None:
            boundary_values = fixture
        else:
            value = cfg.echo.get("initial", {}).get("value", 1.0)
            boundary_values = lambda pts, t: np.full(len(pts), float(value))
    return SolverConfig(
        dt=cfg.get("solver", "dt", required=True, cast=float),
        newton_tol=cfg.get("solver", "newton_tol", 1e-10, float),
        newton_max_iter=cfg.get("solver", "newton_max_iter", 25, int),
        max_damping=cfg.get("solver", "max_damping", 30, int),
        positivity_floor=cfg.get("solver", "positivity_floor", None, float),
        floor_warn_fraction=cfg.get("solver", "floor_warn_fraction", 0.01, float),
        boundary=boundary,
        boundary_values=boundary_values,
    )


def _build_flux(cfg: Cfg, grid: Grid) -> QuasilinearFlux:
    kind = cfg.get("solver", "kind", "log-diffusion", str)
    m = cfg.get("solver", "m", 0.0, float)
    a = cfg.get("solver", "a", tuple(1.0 for _ in range(grid.dim)), _parse_floats)
    c_o = cfg.get("solver", "c_o", min(a) if a else 1.0, float)
    c_1 = cfg.get("solver", "c_1", max(a) if a else 1.0, float)
    return QuasilinearFlux(kind=kind, m=m, a=a, c_o=c_o, c_1=c_1)


def _manifest(out_dir: Path, command: str, run_id: str, cfg_echo: dict, threads: int, seed: int):
    files = sorted(
        str(p.relative_to(out_dir)) for p in out_dir.rglob("*") if p.is_file()
    )
    files.append("manifest.json")
    payload = {
        "run_id": run_id,
        "command": command,
        "config": cfg_echo,
        "threads": threads,
        "seed": seed,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(
            timespec="seconds"
        ),
        "files": sorted(set(files)),
    }
    write_json(out_dir / "manifest.json", payload)


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    grid = _build_grid(cfg)
    initial, fixture = _build_initial(cfg, grid)
    solver_cfg = _build_solver_config(cfg, fixture)
    equation = cfg.get("solver", "equation", "log-diffusion", str)
    horizon = cfg.get("solver", "horizon", required=True, cast=float)
    if equation == "log-diffusion":
        slab = solve_log_diffusion(initial, solver_cfg, horizon)
    elif equation == "pme":
        m = cfg.get("solver", "m", required=True, cast=float)
        slab = solve_porous_medium(initial, m, solver_cfg, horizon)
    elif equation == "quasilinear":
        flux = _build_flux(cfg, grid)
        slab = solve_quasilinear(initial, flux, solver_cfg, horizon)
    else:
        raise ConfigProblem(f"unknown [solver] equation {equation!r}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_slab(slab, out / "slab.slab")
    meta_echo = {
        k: v for k, v in slab.meta.items() if isinstance(v, (int, float, str, bool, list))
    }
    cfg.echo["result"] = {"meta": meta_echo, "nlevels": slab.nlevels}
    _manifest(out, "solve", _config_hash(args.config), cfg.echo, args.threads, args.seed)
    print(f"solve: wrote {out / 'slab.slab'} ({slab.nlevels} levels)")
    return EXIT_OK


def _report_columns(cls) -> list:
    return [f.name for f in dc_fields(cls) if f.name not in ("functional_set", "table")]


_KIND_COLUMNS = {
    "l1": _report_columns(HarnackReport),
    "l1-pme": _report_columns(HarnackReport),
    "pointwise": _report_columns(PointwiseHarnackReport),
    "energy": _report_columns(EnergyReport),
    "energy-pme": _report_columns(EnergyReport),
    "flux": _report_columns(FluxReport),
    "distributional": _report_columns(DistributionalCheck),
}


def _verify_probes(cfg: Cfg, slab, kind: str, seed: int):
    """Probe cylinders for a verify run: explicit single or seeded batch.

    Sampled radii are shrunk for kinds that need room around the probe (the
    pointwise check needs the 8x cube, the energy check the 4x cube), keeping
    every cube mesh-aligned.
    """
    grid = slab.grid
    count = cfg.get("verify", "count", 1, int)
    if count <= 1:
        center = cfg.get("verify", "center", grid.center, _parse_floats)
        rho = cfg.get("verify", "rho", grid.edge / 4.0, float)
        window = cfg.get(
            "verify", "window", (float(slab.times[0]), float(slab.times[-1])), _parse_floats
        )
        return [(tuple(center), rho, float(window[0]), float(window[1]))]
    rng = np.random.default_rng(seed)
    probes = sample_cylinders(grid, slab.times, rng, count)
    if kind == "pointwise":
        probes = [(c, r / 4.0, a, b) for c, r, a, b in probes]
    elif kind in ("energy", "energy-pme"):
        probes = [(c, r / 2.0, a, b) for c, r, a, b in probes]
    return probes


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    kind = args.kind
    slab_path = cfg.path("verify", "slab", required=True)
    try:
        slab = read_slab(slab_path)
    except (OSError, ValueError, ParameterError, struct.error) as exc:
        print(f"verify: cannot read slab {slab_path}: {exc}", file=sys.stderr)
        return EXIT_IO
    sigma = cfg.get("verify", "sigma", 0.5, float)
    m = cfg.get("verify", "m", cfg.get("solver", "m", 0.2, float), float)
    q = cfg.get("verify", "q", 2.0, float)
    p = cfg.get("verify", "p", 5.0, float)
    r = cfg.get("verify", "r", 2.0, float)
    eps = cfg.get("verify", "eps", 0.1, float)
    flux = _build_flux(cfg, slab.grid) if kind == "flux" else None
    probes = _verify_probes(cfg, slab, kind, args.seed)

    def run_probe(item):
        index, (center, rho, t0, t1) = item
        try:
            if kind == "l1":
                rep = check_l1_harnack(slab, center, rho, (t0, t1))
            elif kind == "l1-pme":
                rep = check_l1_harnack_pme(slab, m, center, rho, (t0, t1))
            elif kind == "pointwise":
                rep = check_pointwise_harnack(slab, center, t1, rho, q=q, eps=eps, p=p, r=r)
            elif kind == "energy":
                rep = check_energy_lemma(slab, center, rho, sigma, (t0, t1))
            elif kind == "energy-pme":
                rep = check_energy_lemma_pme(slab, m, center, rho, sigma, (t0, t1))
            elif kind == "flux":
                rep = check_flux_corollary(slab, flux, rho, sigma, (t0, t1), center=center)
            else:
                cutoff = Cutoff(center, rho, sigma)
                rep = distributional_identity_check(
                    cutoff, slab.grid, v_field=slab.level(slab.nlevels - 1)
                )
            return index, rep.to_row(), ""
        except (GeometryError, ParameterError) as exc:
            return index, {}, str(exc)

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        results = list(pool.map(run_probe, enumerate(probes)))
    columns = list(_KIND_COLUMNS[kind]) + ["probe", "error"]
    rows = []
    for index, row, err in results:
        base = {c: None for c in columns}
        for k, v in row.items():
            if k in base:
                base[k] = v
        base["probe"] = index
        base["error"] = err
        rows.append(base)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "report.csv", rows, columns=columns)
    cfg.echo["verify_effective"] = {"kind": kind, "probes": len(probes)}
    _manifest(out, f"verify-{kind}", _config_hash(args.config), cfg.echo, args.threads, args.seed)
    n_err = sum(1 for _, _, e in results if e)
    print(f"verify {kind}: {len(rows)} rows ({n_err} probe errors) -> {out / 'report.csv'}")
    return EXIT_OK


def cmd_msweep(args) -> int:
    cfg = load_config(args.config)
    grid = _build_grid(cfg)
    initial, fixture = _build_initial(cfg, grid)
    solver_cfg = _build_solver_config(cfg, fixture)
    horizon = cfg.get("solver", "horizon", required=True, cast=float)
    m_values = cfg.get("msweep", "m_values", (0.4, 0.2, 0.1, 0.05, 0.025), _parse_floats)
    rho = cfg.get("msweep", "rho", grid.edge / 4.0, float)
    window = cfg.get("msweep", "window", (horizon / 2.0, horizon), _parse_floats)
    e_o_edge = cfg.get("msweep", "e_o_edge", grid.edge / 4.0, float)
    q = cfg.get("msweep", "q", 2.0, float)
    p = cfg.get("msweep", "p", 5.0, float)
    r = cfg.get("msweep", "r", 2.0, float)
    eps = cfg.get("msweep", "eps", 0.1, float)
    sigma = cfg.get("msweep", "sigma", 0.5, float)
    try:
        result = run_m_sweep(
            initial,
            m_values,
            solver_cfg,
            horizon,
            rho=rho,
            window=tuple(window),
            e_o=Cube(grid.center, e_o_edge),
            q=q,
            p=p,
            r=r,
            eps=eps,
            sigma=sigma,
        )
    except ParameterError as exc:
        raise ConfigProblem(str(exc))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result.save(out / "msweep")
    _manifest(out, "msweep", _config_hash(args.config), cfg.echo, args.threads, args.seed)
    failures = [e.m for e in result.entries if not e.ok]
    status = f", failed at m = {failures}" if failures else ""
    print(f"msweep: {len(result.entries)} entries{status} -> {out / 'msweep'}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    params = {}
    cfg_echo: dict = {}
    if args.config is not None:
        cfg = load_config(args.config)
        for key, cast in _FIXTURE_PARAMS.get(args.fixture, {}).items():
            if cfg.cp.has_option("initial", key):
                params[key] = cfg.get("initial", key, cast=cast)
        cfg_echo = cfg.echo
    sol = build_fixture(args.fixture, **params)
    meshes = args.meshes or (32, 64, 128)
    edge = 1.0
    t0 = 0.0
    dim = 2
    if args.fixture == "exp_steady":
        dim = len(params.get("a", (1.0, 0.0)))
    rows = []
    spacings, residuals = [], []
    for cells in meshes:
        grid = Grid.regular(dim, edge, edge / cells)
        res = residual_check(sol, grid, t0)
        rows.append({"cells": cells, "spacing": grid.spacing, "residual": res})
        spacings.append(grid.spacing)
        residuals.append(res)
    try:
        order = fit_order(spacings, residuals)
    except ParameterError:
        order = float("nan")
    for row in rows:
        row["order"] = order
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "oracle.csv", rows, columns=["cells", "spacing", "residual", "order"])
    run_id = _config_hash(args.config) if args.config else "no-config"
    cfg_echo.setdefault("oracle", {})["fixture"] = args.fixture
    cfg_echo["oracle"]["meshes"] = list(meshes)
    _manifest(out, "oracle-check", run_id, cfg_echo, args.threads, args.seed)
    print(f"oracle-check {args.fixture}: order = {order:.4f} -> {out / 'oracle.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="path to the INI config file")
    common.add_argument("--out", default="runs", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--seed", type=int, default=0, help="seed for probe placement")
    parser = argparse.ArgumentParser(
        prog="logdiff",
        description="Numerical laboratory for logarithmic and power diffusion",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="run a solver per config")
    pv = sub.add_parser("verify", parents=[common], help="evaluate inequality checkers")
    pv.add_argument("kind", choices=VERIFY_KINDS)
    sub.add_parser("msweep", parents=[common], help="sweep the power exponent toward 0")
    po = sub.add_parser("oracle-check", parents=[common], help="residual order study")
    po.add_argument("fixture", help="fixture name (lump2d, exp_steady, barenblatt_fd)")
    po.add_argument("--meshes", type=int, nargs="+", default=None, help="cells per edge")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "solve": cmd_solve,
        "verify": cmd_verify,
        "msweep": cmd_msweep,
        "oracle-check": cmd_oracle_check,
    }
    needs_config = args.command in ("solve", "verify", "msweep")
    if needs_config and args.config is None:
        print(f"{args.command}: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return handlers[args.command](args)
    except ConfigProblem as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except GeometryError as exc:
        print(f"config error (geometry): {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
