"""Small-exponent program: sweeps of the power solver toward the log solver.

``u_t = Lap((u^m - 1)/m)`` tends formally to ``u_t = Lap(ln u)`` as m -> 0.
This module quantifies the convergence on concrete data: per-m space-time L1
distances, the functional and mass-inequality reports, the uniform-norm
conditions (sup-in-time L^r of u and L^p of the nonlinearity w = (u^m-1)/m),
and the mass lower bound at the final time.  Reference curves carry a nominal
1/m factor, since the classical constant degenerates at that rate while the
measured constants are expected to stay put.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError, SolverError
from .grid import (
    Cube,
    Field,
    SpaceTimeSlab,
    integrate,
    read_slab,
    write_slab,
)
from .functionals import FunctionalSet, functional_set
from .harnack import (
    check_energy_lemma,
    check_energy_lemma_pme,
    check_l1_harnack,
    check_l1_harnack_pme,
)
from .solvers import SolverConfig, solve_log_diffusion, solve_porous_medium
from .reporting import write_csv, write_json, read_json


def log_approx_error(
    field_or_values, M: float, m: float, p: float, cube: Cube | None = None, grid=None
) -> tuple[float, float]:
    """Sup and p-mean distance between ``(1-(u/M)^m)/m`` and ``ln(M/u)``.

    Accepts a Field (cube defaults to its full grid) or a raw array with an
    explicit grid.  First order in m on fixed data: halving m halves both.
    """
    if not 0 < m < 1:
        raise ParameterError("m must be in (0, 1)")
    if M <= 0:
        raise ParameterError("M must be positive")
    if isinstance(field_or_values, Field):
        grid = field_or_values.grid
        values = field_or_values.values
    else:
        values = np.asarray(field_or_values, dtype=float)
        if grid is None:
            raise ParameterError("raw values need an explicit grid")
    if np.any(values <= 0):
        raise ParameterError("field must be positive")
    if cube is None:
        cube = Cube(grid.center, grid.edge)
    ratio = values / M
    err = np.abs((1.0 - ratio**m) / m - np.log(1.0 / ratio))
    sl = grid.cube_slices(cube)
    sup_err = float(err[sl].max())
    pmean = float(
        (integrate(err**p, grid, cube) / integrate(np.ones_like(err), grid, cube))
        ** (1.0 / p)
    )
    return sup_err, pmean


def taylor_gap_bound(M: float, m: float, values: np.ndarray) -> np.ndarray:
    """Second-order remainder bound ``m ln(M/u)^2 / 2`` (elementwise)."""
    L = np.log(M / np.asarray(values, dtype=float))
    return m * L**2 / 2.0


@dataclass
class MSweepEntry:
    """Per-exponent record of one sweep member."""

    m: float
    ok: bool
    failure: str
    l1_distance: float
    gamma_star: float
    gamma_ref: float
    energy_ratio: float
    u_norm: float
    w_norm: float
    mass_floor: float
    functional_set: FunctionalSet | None = field(default=None, repr=False)

    def to_row(self) -> dict:
        row = {
            k: v for k, v in self.__dict__.items() if k != "functional_set"
        }
        if self.functional_set is not None:
            for k, v in self.functional_set.to_row().items():
                row[f"fs_{k}"] = v
        return row


@dataclass
class MSweepResult:
    """A full sweep: shared probe geometry, per-m entries, and both solves.

    ``entries`` is ordered by strictly decreasing m.  Failed solves keep
    their slot with ``ok = False`` and NaN metrics so that column sets stay
    fixed.
    """

    m_values: tuple
    center: tuple
    rho: float
    window: tuple
    e_o_center: tuple
    e_o_edge: float
    q: float
    p: float
    r: float
    eps: float
    sigma: float
    horizon: float
    log_gamma_star: float
    log_energy_ratio: float
    entries: list = field(default_factory=list)
    log_slab: SpaceTimeSlab | None = field(default=None, repr=False)
    pme_slabs: dict = field(default_factory=dict, repr=False)

    def entry(self, m: float) -> MSweepEntry:
        for e in self.entries:
            if e.m == m:
                return e
        raise ParameterError(f"no sweep entry for m = {m}")

    def rows(self) -> list:
        return [e.to_row() for e in self.entries]

    def save(self, directory) -> None:
        """Persist as a directory: slab per m, summary CSV, manifest."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        files = {}
        if self.log_slab is not None:
            write_slab(self.log_slab, directory / "logdiff.slab")
            files["logdiff"] = "logdiff.slab"
        for i, m in enumerate(self.m_values):
            if m in self.pme_slabs:
                name = f"pme_{i}.slab"
                write_slab(self.pme_slabs[m], directory / name)
                files[f"pme_{i}"] = name
        write_csv(directory / "summary.csv", self.rows())
        manifest = {
            "m_values": list(self.m_values),
            "center": list(self.center),
            "rho": self.rho,
            "window": list(self.window),
            "e_o_center": list(self.e_o_center),
            "e_o_edge": self.e_o_edge,
            "q": self.q,
            "p": self.p,
            "r": self.r,
            "eps": self.eps,
            "sigma": self.sigma,
            "horizon": self.horizon,
            "log_gamma_star": self.log_gamma_star,
            "log_energy_ratio": self.log_energy_ratio,
            "files": files,
            "entries": [
                {
                    k: (None if isinstance(v, float) and math.isnan(v) else v)
                    for k, v in e.to_row().items()
                }
                for e in self.entries
            ],
        }
        write_json(directory / "manifest.json", manifest)

    @staticmethod
    def load(directory) -> "MSweepResult":
        directory = Path(directory)
        man = read_json(directory / "manifest.json")
        result = MSweepResult(
            m_values=tuple(man["m_values"]),
            center=tuple(man["center"]),
            rho=man["rho"],
            window=tuple(man["window"]),
            e_o_center=tuple(man["e_o_center"]),
            e_o_edge=man["e_o_edge"],
            q=man["q"],
            p=man["p"],
            r=man["r"],
            eps=man["eps"],
            sigma=man["sigma"],
            horizon=man["horizon"],
            log_gamma_star=man["log_gamma_star"],
            log_energy_ratio=man["log_energy_ratio"],
        )
        nanf = float("nan")
        for rec in man["entries"]:
            result.entries.append(
                MSweepEntry(
                    m=rec["m"],
                    ok=bool(rec["ok"]),
                    failure=rec["failure"] or "",
                    l1_distance=nanf if rec["l1_distance"] is None else rec["l1_distance"],
                    gamma_star=nanf if rec["gamma_star"] is None else rec["gamma_star"],
                    gamma_ref=nanf if rec["gamma_ref"] is None else rec["gamma_ref"],
                    energy_ratio=nanf if rec["energy_ratio"] is None else rec["energy_ratio"],
                    u_norm=nanf if rec["u_norm"] is None else rec["u_norm"],
                    w_norm=nanf if rec["w_norm"] is None else rec["w_norm"],
                    mass_floor=nanf if rec["mass_floor"] is None else rec["mass_floor"],
                )
            )
        files = man["files"]
        if "logdiff" in files:
            result.log_slab = read_slab(directory / files["logdiff"])
        for i, m in enumerate(result.m_values):
            key = f"pme_{i}"
            if key in files:
                result.pme_slabs[m] = read_slab(directory / files[key])
        return result


def _l1_distance(a: SpaceTimeSlab, b: SpaceTimeSlab, cube: Cube, window) -> float:
    """Space-time L1 distance over ``cube x window`` (shared levels)."""
    idx_a = a.window_indices(window[0], window[1])
    idx_b = b.window_indices(window[0], window[1])
    if idx_a.size != idx_b.size or not np.allclose(
        a.times[idx_a], b.times[idx_b], atol=1e-12
    ):
        raise ParameterError("slabs do not share time levels on the window")
    ts = a.times[idx_a]
    w = np.full(ts.size, ts[1] - ts[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    total = 0.0
    for wt, ka, kb in zip(w, idx_a, idx_b):
        total += wt * integrate(np.abs(a.values[ka] - b.values[kb]), a.grid, cube)
    return float(total)


def _sup_norm_in_time(slab: SpaceTimeSlab, cube: Cube, power: float, transform=None):
    best = 0.0
    for k in range(slab.nlevels):
        vals = slab.values[k]
        if transform is not None:
            vals = transform(vals)
        best = max(best, integrate(np.abs(vals) ** power, slab.grid, cube) ** (1.0 / power))
    return best


def run_m_sweep(
    initial: Field,
    m_values,
    config: SolverConfig,
    horizon: float,
    *,
    center=None,
    rho: float | None = None,
    window=None,
    e_o: Cube | None = None,
    q: float = 2.0,
    p: float = 5.0,
    r: float = 2.0,
    eps: float = 0.1,
    sigma: float = 0.5,
) -> MSweepResult:
    """Solve the log equation once and the power equation per m; compare.

    Probe geometry defaults: the comparison cube is the doubled cube of a
    quarter-edge radius at the grid center, the window is the second half of
    the horizon, and the mass cube is the quarter-edge cube.  A solver
    failure records the entry with ``ok = False`` and continues the sweep.
    """
    m_values = tuple(float(m) for m in m_values)
    if any(not 0 < m < 1 for m in m_values):
        raise ParameterError("every m must lie in (0, 1)")
    if any(b >= a for a, b in zip(m_values, m_values[1:])):
        raise ParameterError("m_values must be strictly decreasing")
    grid = initial.grid
    if center is None:
        center = grid.center
    center = tuple(float(c) for c in center)
    if rho is None:
        rho = grid.edge / 4.0
    if window is None:
        window = (horizon / 2.0, horizon)
    window = (float(window[0]), float(window[1]))
    if e_o is None:
        e_o = Cube(center, grid.edge / 4.0)
    rho_energy = rho / 2.0
    log_slab = solve_log_diffusion(initial, config, horizon)
    log_harnack = check_l1_harnack(log_slab, center, rho, window)
    log_energy = check_energy_lemma(log_slab, center, rho_energy, sigma, window)
    comparison = Cube(center, 2.0 * rho)
    result = MSweepResult(
        m_values=m_values,
        center=center,
        rho=rho,
        window=window,
        e_o_center=e_o.center,
        e_o_edge=e_o.edge,
        q=q,
        p=p,
        r=r,
        eps=eps,
        sigma=sigma,
        horizon=float(horizon),
        log_gamma_star=log_harnack.gamma_star,
        log_energy_ratio=log_energy.ratio,
        log_slab=log_slab,
    )
    nanf = float("nan")
    for m in m_values:
        try:
            slab = solve_porous_medium(initial, m, config, horizon)
        except SolverError as exc:
            result.entries.append(
                MSweepEntry(
                    m=m, ok=False, failure=str(exc),
                    l1_distance=nanf, gamma_star=nanf, gamma_ref=1.0 / m,
                    energy_ratio=nanf, u_norm=nanf, w_norm=nanf, mass_floor=nanf,
                )
            )
            continue
        result.pme_slabs[m] = slab
        harnack = check_l1_harnack_pme(slab, m, center, rho, window)
        try:
            energy_ratio = check_energy_lemma_pme(
                slab, m, center, rho_energy, sigma, window
            ).ratio
        except ParameterError:
            energy_ratio = nanf
        fs = functional_set(
            slab, center, rho, window, q=q, p=p, r=r, eps=eps, sigma=sigma, m=m
        )
        u_norm = _sup_norm_in_time(slab, comparison, r)
        w_norm = _sup_norm_in_time(
            slab, comparison, p, transform=lambda u, mm=m: (u**mm - 1.0) / mm
        )
        mass = integrate(slab.values[-1], grid, e_o)
        result.entries.append(
            MSweepEntry(
                m=m,
                ok=True,
                failure="",
                l1_distance=_l1_distance(slab, log_slab, comparison, window),
                gamma_star=harnack.gamma_star,
                gamma_ref=1.0 / m,
                energy_ratio=energy_ratio,
                u_norm=u_norm,
                w_norm=w_norm,
                mass_floor=mass,
                functional_set=fs,
            )
        )
    return result


@dataclass
class UniformVerdict:
    """Boundedness verdict for the sup-in-time norm families."""

    r: float
    p: float
    verdict: str
    u_max: float
    u_median: float
    w_max: float
    w_median: float
    warning: str

    def to_row(self) -> dict:
        return dict(self.__dict__)


def check_uniform_conditions(
    result: MSweepResult, r: float | None = None, p: float | None = None
) -> UniformVerdict:
    """Bounded iff each norm family's max is <= 1.5x its median over m.

    Recomputes the norms from stored slabs when ``r``/``p`` differ from the
    sweep's; warns when the integrability exponents sit at or below the
    hypotheses' thresholds (``r > max(1, N/2)``, ``p > N+2``).
    """
    if result.log_slab is None and not result.pme_slabs:
        raise ParameterError("sweep result carries no slabs to measure")
    grid = (result.log_slab or next(iter(result.pme_slabs.values()))).grid
    N = grid.dim
    r = result.r if r is None else float(r)
    p = result.p if p is None else float(p)
    comparison = Cube(result.center, 2.0 * result.rho)
    u_norms, w_norms = [], []
    for m in result.m_values:
        if m not in result.pme_slabs:
            continue
        slab = result.pme_slabs[m]
        u_norms.append(_sup_norm_in_time(slab, comparison, r))
        w_norms.append(
            _sup_norm_in_time(
                slab, comparison, p, transform=lambda u, mm=m: (u**mm - 1.0) / mm
            )
        )
    if not u_norms:
        raise ParameterError("no successful sweep entries to check")
    u_max, u_med = max(u_norms), float(np.median(u_norms))
    w_max, w_med = max(w_norms), float(np.median(w_norms))
    bounded = u_max <= 1.5 * u_med and w_max <= 1.5 * w_med
    warning = ""
    if r <= max(1.0, N / 2.0):
        warning = f"r = {r} does not exceed max(1, N/2) = {max(1.0, N / 2.0)}"
    elif p <= N + 2:
        warning = f"p = {p} does not exceed N + 2 = {N + 2}"
    return UniformVerdict(
        r=r,
        p=p,
        verdict="bounded" if bounded else "unbounded",
        u_max=u_max,
        u_median=u_med,
        w_max=w_max,
        w_median=w_med,
        warning=warning,
    )


@dataclass
class MassBoundVerdict:
    """Minimum final-time mass over the sweep versus a required floor."""

    e_o_center: tuple
    e_o_edge: float
    sigma_floor: float
    min_mass: float
    passed: bool

    def to_row(self) -> dict:
        row = dict(self.__dict__)
        row["e_o_center"] = ";".join(repr(c) for c in self.e_o_center)
        return row


def check_mass_lower_bound(
    result: MSweepResult, e_o: Cube, sigma_floor: float
) -> MassBoundVerdict:
    """Compare ``min over m`` of the final-level mass on ``e_o`` to the floor."""
    masses = []
    for m in result.m_values:
        if m in result.pme_slabs:
            slab = result.pme_slabs[m]
            masses.append(integrate(slab.values[-1], slab.grid, e_o))
    if not masses:
        raise ParameterError("no successful sweep entries to check")
    min_mass = min(masses)
    return MassBoundVerdict(
        e_o_center=e_o.center,
        e_o_edge=e_o.edge,
        sigma_floor=float(sigma_floor),
        min_mass=min_mass,
        passed=bool(min_mass >= sigma_floor),
    )
