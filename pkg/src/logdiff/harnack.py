"""Empirical checkers for the mass, energy, flux, and pointwise inequalities.

Each checker evaluates both sides of one inequality on concrete data and
reports the smallest constant that would make it hold, instead of asserting
any particular constant.  The interesting question is always stability: the
ratio should stay bounded under mesh refinement, under shrinking of the
diffusion exponent m, and across probe locations.

Report objects are flat dataclasses with ``to_row()`` so batches serialize
to deterministic CSV rows.  Unused entries (for instance power-law fields on
a logarithmic check) are NaN rather than omitted, keeping column sets fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict, field

import numpy as np

from .errors import GeometryError, ParameterError
from .grid import (
    Cube,
    Cutoff,
    Cylinder,
    Grid,
    SpaceTimeSlab,
    integrate,
    laplacian,
)
from .functionals import (
    FunctionalSet,
    ess_sup,
    flux_l1,
    functional_set,
    inf_mass,
    intrinsic_scale,
    log_gradient_energy,
    log_oscillation,
    degeneracy_ratio,
    power_gradient_energy,
    power_oscillation,
    sup_mass,
    time_scaling_exponent,
    time_scaling_exponent_pme,
)


def _flatten(value, prefix: str, row: dict) -> None:
    if isinstance(value, tuple):
        row[prefix] = ";".join(repr(v) for v in value)
    elif isinstance(value, dict):
        for k, v in value.items():
            _flatten(v, f"{prefix}_{k}", row)
    else:
        row[prefix] = value


def _as_row(obj) -> dict:
    row: dict = {}
    for k, v in asdict(obj).items():
        _flatten(v, k, row)
    return row


def _check_window(slab: SpaceTimeSlab, window) -> tuple[float, float]:
    t0, t1 = float(window[0]), float(window[1])
    tol = 1e-9 * max(1.0, abs(float(slab.times[-1])))
    if t0 < slab.times[0] - tol or t1 > slab.times[-1] + tol:
        raise GeometryError(
            f"window ({t0}, {t1}] leaves the slab range "
            f"[{slab.times[0]}, {slab.times[-1]}]"
        )
    if not t0 < t1:
        raise ParameterError("window must satisfy t_start < t_end")
    return t0, t1


@dataclass
class HarnackReport:
    """Both sides of a local-mass inequality and the minimal constant.

    ``lhs <= gamma_star * (rhs_mass + rhs_time)`` holds with equality by
    construction.  ``kind`` is ``l1-log`` or ``l1-pme``; the time term carries
    the exponent ``1/(1-m)`` in the power case.
    """

    kind: str
    center: tuple
    rho: float
    t_start: float
    t_end: float
    m: float
    lhs: float
    rhs_mass: float
    rhs_time: float
    gamma_star: float
    sup_u: float
    lambda_1: float
    lambda_2: float
    functional_set: FunctionalSet | None = field(default=None, repr=False)

    def to_row(self) -> dict:
        row = {k: v for k, v in _as_row(self).items() if not k.startswith("functional_set")}
        if self.functional_set is not None:
            for k, v in self.functional_set.to_row().items():
                row[f"fs_{k}"] = v
        return row


def _mass_harnack(
    slab: SpaceTimeSlab,
    center,
    rho: float,
    window,
    rhs_time: float,
    kind: str,
    m: float,
    M,
    lambda1,
    lambda2,
    with_functionals: bool,
) -> HarnackReport:
    t0, t1 = _check_window(slab, window)
    lhs = sup_mass(slab, center, rho, 0.0, (t0, t1))
    rhs_mass = inf_mass(slab, center, 2.0 * rho, (t0, t1))
    denom = rhs_mass + rhs_time
    gamma_star = lhs / denom if denom > 0 else math.inf
    fs = None
    if with_functionals:
        fs = functional_set(
            slab, center, rho, (t0, t1), m=m if kind == "l1-pme" else None
        )
    if M is None or lambda1 is None or lambda2 is None:
        cyl2 = Cylinder(tuple(center), 2.0 * rho, t0, t1)
        M_val = ess_sup(slab, cyl2) if M is None else float(M)
        l1 = log_oscillation(slab, cyl2, M_val, 1.0) if lambda1 is None else float(lambda1)
        l2 = log_oscillation(slab, cyl2, M_val, 2.0) if lambda2 is None else float(lambda2)
    else:
        M_val, l1, l2 = float(M), float(lambda1), float(lambda2)
    return HarnackReport(
        kind=kind,
        center=tuple(center),
        rho=rho,
        t_start=t0,
        t_end=t1,
        m=m,
        lhs=lhs,
        rhs_mass=rhs_mass,
        rhs_time=rhs_time,
        gamma_star=gamma_star,
        sup_u=M_val,
        lambda_1=l1,
        lambda_2=l2,
        functional_set=fs,
    )


def check_l1_harnack(
    slab: SpaceTimeSlab,
    center,
    rho: float,
    window,
    M: float | None = None,
    lambda1: float | None = None,
    lambda2: float | None = None,
    with_functionals: bool = False,
) -> HarnackReport:
    """Local-mass inequality: sup of the K_rho mass vs inf of the K_2rho mass.

    ``lhs = sup_tau int_{K_rho} u``, ``rhs_mass = inf_tau int_{K_2rho} u``,
    ``rhs_time = (t - s) / rho^(2-N)``; ``gamma_star = lhs / (rhs_mass +
    rhs_time)`` is the minimal admissible constant.  ``M``, ``lambda1``,
    ``lambda2`` are recorded if given, computed over ``K_2rho x window``
    otherwise; they parameterize the constant, not the inequality itself.
    """
    t0, t1 = _check_window(slab, window)
    lam = time_scaling_exponent(slab.grid.dim)
    rhs_time = (t1 - t0) / rho**lam
    return _mass_harnack(
        slab, center, rho, window, rhs_time, "l1-log", float("nan"),
        M, lambda1, lambda2, with_functionals,
    )


def check_l1_harnack_pme(
    slab: SpaceTimeSlab,
    m: float,
    center,
    rho: float,
    window,
    M: float | None = None,
    lambda1: float | None = None,
    lambda2: float | None = None,
    with_functionals: bool = False,
) -> HarnackReport:
    """Power-diffusion variant: time term ``((t-s)/rho^lam)^(1/(1-m))``.

    ``lam = N(m-1)+2`` must be positive; components converge to the
    logarithmic report's as m -> 0 on matched data.
    """
    if not 0 < m < 1:
        raise ParameterError("m must be in (0, 1)")
    t0, t1 = _check_window(slab, window)
    lam = time_scaling_exponent_pme(slab.grid.dim, m)
    if lam <= 0:
        raise ParameterError(f"need N(m-1)+2 > 0, got {lam}")
    rhs_time = ((t1 - t0) / rho**lam) ** (1.0 / (1.0 - m))
    return _mass_harnack(
        slab, center, rho, window, rhs_time, "l1-pme", m,
        M, lambda1, lambda2, with_functionals,
    )


@dataclass
class EnergyReport:
    """Gradient energy vs its mass + oscillation bound; ratio is the
    empirical constant surrogate."""

    kind: str
    center: tuple
    rho: float
    sigma: float
    t_start: float
    t_end: float
    m: float
    lhs: float
    rhs_mass_term: float
    rhs_time_term: float
    ratio: float
    sup_u: float
    lambda_1: float
    lambda_2: float
    s_sigma: float

    def to_row(self) -> dict:
        return _as_row(self)


def _energy_geometry(slab: SpaceTimeSlab, center, rho: float, sigma: float, window):
    if not 0.0 < sigma < 1.0:
        raise ParameterError("sigma must lie in (0, 1) for the energy bound")
    t0, t1 = _check_window(slab, window)
    slab.grid.cube_slices(Cube(tuple(center), 4.0 * rho))
    return t0, t1


def check_energy_lemma(
    slab: SpaceTimeSlab, center, rho: float, sigma: float, window
) -> EnergyReport:
    """Logarithmic gradient energy against ``(1+L1)S + (L1^2+L2^2)(t-s)/(sigma^2 rho^lam)``.

    The left side integrates ``zeta^2 |Du|^2/u^2`` with the standard cutoff
    of width ``sigma rho``; the oscillation means are over ``K_2rho x window``
    with the sup of u taken there too.  ``ratio`` is lhs over the structural
    right side with unit constants.
    """
    t0, t1 = _energy_geometry(slab, center, rho, sigma, window)
    grid = slab.grid
    cutoff = Cutoff(tuple(center), rho, sigma)
    lhs = log_gradient_energy(slab, cutoff, (t0, t1))
    cyl2 = Cylinder(tuple(center), 2.0 * rho, t0, t1)
    M = ess_sup(slab, cyl2)
    l1 = log_oscillation(slab, cyl2, M, 1.0)
    l2 = log_oscillation(slab, cyl2, M, 2.0)
    s_sig = sup_mass(slab, center, rho, sigma, (t0, t1))
    lam = time_scaling_exponent(grid.dim)
    mass_term = (1.0 + l1) * s_sig
    time_term = (l1**2 + l2**2) * (t1 - t0) / (sigma**2 * rho**lam)
    rhs = mass_term + time_term
    return EnergyReport(
        kind="energy-log",
        center=tuple(center),
        rho=rho,
        sigma=sigma,
        t_start=t0,
        t_end=t1,
        m=float("nan"),
        lhs=lhs,
        rhs_mass_term=mass_term,
        rhs_time_term=time_term,
        ratio=lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf),
        sup_u=M,
        lambda_1=l1,
        lambda_2=l2,
        s_sigma=s_sig,
    )


def check_energy_lemma_pme(
    slab: SpaceTimeSlab, m: float, center, rho: float, sigma: float, window
) -> EnergyReport:
    """Power-diffusion energy bound; valid for ``0 < m < 2/3``.

    lhs integrates ``zeta^2 |Du|^2 / u^(2-m/2)``; the right side uses the
    half-exponent oscillation integrals (plain integrals, not means):

    ``(1 + L_{m/2,1}) rho^(Nm/2) S^(1-m/2)
      + (L_{m/2,1}^2 + L_{m/2,2}^2) S^(m/2) (t-s) rho^(N(1-m/2)) / (sigma rho)^2``.
    """
    if not 0 < m < 2.0 / 3.0:
        raise ParameterError("power energy bound needs 0 < m < 2/3")
    t0, t1 = _energy_geometry(slab, center, rho, sigma, window)
    grid = slab.grid
    N = grid.dim
    cutoff = Cutoff(tuple(center), rho, sigma)
    lhs = power_gradient_energy(slab, cutoff, (t0, t1), m)
    cyl2 = Cylinder(tuple(center), 2.0 * rho, t0, t1)
    M = ess_sup(slab, cyl2)
    l1 = power_oscillation(slab, cyl2, M, m / 2.0, 1.0)
    l2 = power_oscillation(slab, cyl2, M, m / 2.0, 2.0)
    s_sig = sup_mass(slab, center, rho, sigma, (t0, t1))
    mass_term = (1.0 + l1) * rho ** (N * m / 2.0) * s_sig ** (1.0 - m / 2.0)
    time_term = (
        (l1**2 + l2**2)
        * s_sig ** (m / 2.0)
        * (t1 - t0)
        * rho ** (N * (1.0 - m / 2.0))
        / (sigma**2 * rho**2)
    )
    rhs = mass_term + time_term
    return EnergyReport(
        kind="energy-pme",
        center=tuple(center),
        rho=rho,
        sigma=sigma,
        t_start=t0,
        t_end=t1,
        m=m,
        lhs=lhs,
        rhs_mass_term=mass_term,
        rhs_time_term=time_term,
        ratio=lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf),
        sup_u=M,
        lambda_1=l1,
        lambda_2=l2,
        s_sigma=s_sig,
    )


@dataclass
class FluxReport:
    """Space-time L1 of the flux against its oscillation/mass/time bound."""

    kind: str
    center: tuple
    rho: float
    sigma: float
    t_start: float
    t_end: float
    m: float
    lhs: float
    rhs: float
    ratio: float
    sup_u: float
    lambda_1: float
    lambda_2: float
    s_sigma: float
    time_ratio: float

    def to_row(self) -> dict:
        return _as_row(self)


def check_flux_corollary(
    slab: SpaceTimeSlab, flux, rho: float, sigma: float, window, center=None
) -> FluxReport:
    """``(1/rho) iint_{K_rho} |A|`` against the corollary bound for the flux kind.

    Logarithmic-type fluxes (``m == 0``) use

    ``max{(1+L1)^(1/2), (L1^2+L2^2)^(1/2)} [S + sigma^-2 T]^(1/2) T^(1/2)``

    with ``T = (t-s)/rho^(2-N)``; power-type fluxes use

    ``sigma^-1 (L_{m/2,1}^2 + L_{m/2,2}^2)^(1/2) T S^m
      + (1 + L_{m/2,1})^(1/2) T^(1/2) S^((m+1)/2)``

    with ``T = (t-s)/rho^(N(m-1)+2)`` and plain-integral oscillations.
    """
    if not 0.0 < sigma < 1.0:
        raise ParameterError("sigma must lie in (0, 1) for the flux bound")
    grid = slab.grid
    if center is None:
        center = grid.center
    t0, t1 = _check_window(slab, window)
    grid.cube_slices(Cube(tuple(center), 2.0 * rho))
    m = float(flux.m)
    lhs = flux_l1(slab, flux, center, rho, (t0, t1))
    cyl2 = Cylinder(tuple(center), 2.0 * rho, t0, t1)
    M = ess_sup(slab, cyl2)
    s_sig = sup_mass(slab, center, rho, sigma, (t0, t1))
    if m == 0.0:
        lam = time_scaling_exponent(grid.dim)
        T = (t1 - t0) / rho**lam
        l1 = log_oscillation(slab, cyl2, M, 1.0)
        l2 = log_oscillation(slab, cyl2, M, 2.0)
        osc = max(math.sqrt(1.0 + l1), math.sqrt(l1**2 + l2**2))
        rhs = osc * math.sqrt(s_sig + T / sigma**2) * math.sqrt(T)
        kind = "flux-log" if flux.kind == "log-diffusion" else "flux-quasilinear"
    else:
        lam = time_scaling_exponent_pme(grid.dim, m)
        if lam <= 0:
            raise ParameterError(f"need N(m-1)+2 > 0, got {lam}")
        T = (t1 - t0) / rho**lam
        l1 = power_oscillation(slab, cyl2, M, m / 2.0, 1.0)
        l2 = power_oscillation(slab, cyl2, M, m / 2.0, 2.0)
        rhs = (
            math.sqrt(l1**2 + l2**2) * T * s_sig**m / sigma
            + math.sqrt(1.0 + l1) * math.sqrt(T) * s_sig ** ((m + 1.0) / 2.0)
        )
        kind = "flux-pme" if flux.kind == "pme" else "flux-quasilinear"
    return FluxReport(
        kind=kind,
        center=tuple(center),
        rho=rho,
        sigma=sigma,
        t_start=t0,
        t_end=t1,
        m=m if m != 0.0 else float("nan"),
        lhs=lhs,
        rhs=rhs,
        ratio=lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf),
        sup_u=M,
        lambda_1=l1,
        lambda_2=l2,
        s_sigma=s_sig,
        time_ratio=T,
    )


@dataclass
class JensenCheck:
    """Convexity bound tying the sup, the mass, and the L1 log-oscillation.

    ``ln(M / (S_sigma / rho^N)) <= 2^N Lambda_1`` holds for every admissible
    cylinder; ``margin = rhs - lhs`` should never be negative beyond roundoff.
    """

    center: tuple
    rho: float
    sigma: float
    t_start: float
    t_end: float
    sup_u: float
    s_sigma: float
    normalized_mass: float
    lambda_1: float
    lhs: float
    rhs: float
    margin: float
    satisfied: bool

    def to_row(self) -> dict:
        return _as_row(self)


def jensen_check(
    slab: SpaceTimeSlab, center, rho: float, sigma: float, window
) -> JensenCheck:
    t0, t1 = _check_window(slab, window)
    N = slab.grid.dim
    cyl2 = Cylinder(tuple(center), 2.0 * rho, t0, t1)
    M = ess_sup(slab, cyl2)
    l1 = log_oscillation(slab, cyl2, M, 1.0)
    s_sig = sup_mass(slab, center, rho, sigma, (t0, t1))
    norm_mass = s_sig / rho**N
    lhs = math.log(M / norm_mass)
    rhs = 2.0**N * l1
    margin = rhs - lhs
    tol = 1e-9 * max(1.0, abs(rhs))
    return JensenCheck(
        center=tuple(center),
        rho=rho,
        sigma=sigma,
        t_start=t0,
        t_end=t1,
        sup_u=M,
        s_sigma=s_sig,
        normalized_mass=norm_mass,
        lambda_1=l1,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        satisfied=bool(lhs <= rhs + tol),
    )


def sample_cylinders(grid: Grid, times, rng, count: int, sigma: float = 0.5):
    """Mesh-aligned random probe cylinders ``(center, rho, t0, t1)``.

    Radii are multiples of four cells so that the base cube, its doubling,
    and the ``(1+sigma)`` dilation with sigma = 0.5 all land exactly on
    nodes; windows are pairs of stored level times.  Deterministic for a
    seeded generator.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise ParameterError("need at least two time levels to sample windows")
    cells = grid.npts - 1
    j_max = cells // 8
    if j_max < 1:
        raise GeometryError("grid too coarse to fit a doubled probe cube")
    out = []
    for _ in range(int(count)):
        j = int(rng.integers(1, j_max + 1))
        rho = 4 * j * grid.spacing
        margin = 4 * j
        idx = [int(rng.integers(margin, cells - margin + 1)) for _ in range(grid.dim)]
        center = tuple(float(grid.axis(d)[idx[d]]) for d in range(grid.dim))
        k0 = int(rng.integers(0, times.size - 1))
        k1 = int(rng.integers(k0 + 1, times.size))
        out.append((center, rho, float(times[k0]), float(times[k1])))
    return out


@dataclass
class PointwiseHarnackReport:
    """Infimum-vs-supremum comparison on intrinsically scaled cylinders.

    ``f_star = inf_val / sup_val`` lies in (0, 1] for positive data; the inf
    runs over the 4x cube at probe times in the top sixteenth of the
    intrinsic window, the sup over the 2x cube over the full quarter-depth
    window.  ``fitted_c1``/``fitted_c2`` stay NaN until a family fit fills
    them in.
    """

    x_o: tuple
    t_o: float
    rho: float
    q: float
    eps: float
    p: float
    r: float
    theta: float
    sup_u: float
    eta: float
    lambda_p: float
    inf_val: float
    sup_val: float
    f_star: float
    n_probes: int
    degenerate: bool = False
    fitted_c1: float = float("nan")
    fitted_c2: float = float("nan")

    def to_row(self) -> dict:
        return _as_row(self)


def check_pointwise_harnack(
    slab: SpaceTimeSlab,
    x_o,
    t_o: float,
    rho: float,
    q: float = 2.0,
    eps: float = 0.1,
    p: float = 5.0,
    r: float = 2.0,
    probes: int = 8,
) -> PointwiseHarnackReport:
    """Evaluate the pointwise inf/sup comparison at one vertex.

    The intrinsic height ``theta`` comes from the q-mean of u over ``K_rho``
    at the vertex time; the backward cylinder ``K_8rho x (t_o - 64 theta
    rho^2, t_o]`` must fit inside the slab.  Requires ``p > N + 2``.
    """
    grid = slab.grid
    if p <= grid.dim + 2:
        raise ParameterError(f"need p > N + 2 = {grid.dim + 2}, got {p}")
    x_o = tuple(float(c) for c in x_o)
    k_o = slab.level_index(t_o)
    t_o = float(slab.times[k_o])
    vertex_field = slab.level(k_o)
    theta = intrinsic_scale(vertex_field, x_o, rho, q, eps)
    if theta <= 0.0:
        return PointwiseHarnackReport(
            x_o=x_o, t_o=t_o, rho=rho, q=q, eps=eps, p=p, r=r,
            theta=0.0, sup_u=float("nan"), eta=float("nan"),
            lambda_p=float("nan"), inf_val=float("nan"),
            sup_val=float("nan"), f_star=float("nan"),
            n_probes=0, degenerate=True,
        )
    depth = theta * (8.0 * rho) ** 2
    t_lo = t_o - depth
    tol = 1e-9 * max(1.0, abs(float(slab.times[-1])))
    if t_lo < slab.times[0] - tol:
        raise GeometryError(
            f"intrinsic window depth {depth} reaches below the slab start"
        )
    big = Cylinder(x_o, 8.0 * rho, t_lo, t_o)
    M = ess_sup(slab, big)
    lam_p = log_oscillation(slab, big, M, p)
    eta = degeneracy_ratio(vertex_field, x_o, rho, q, M, r)
    sup_val = ess_sup(slab, Cylinder(x_o, 2.0 * rho, t_o - theta * rho**2, t_o))
    probe_lo = t_o - theta * rho**2 / 16.0
    strict = np.nonzero(
        (slab.times > probe_lo + tol) & (slab.times <= t_o + tol)
    )[0]
    if strict.size == 0:
        strict = np.array([k_o])
    if strict.size > probes:
        pick = np.unique(
            np.round(np.linspace(0, strict.size - 1, probes)).astype(int)
        )
        strict = strict[pick]
    inf_slices = grid.cube_slices(Cube(x_o, 4.0 * rho))
    inf_val = min(float(slab.values[k][inf_slices].min()) for k in strict)
    return PointwiseHarnackReport(
        x_o=x_o,
        t_o=t_o,
        rho=rho,
        q=q,
        eps=eps,
        p=p,
        r=r,
        theta=theta,
        sup_u=M,
        eta=eta,
        lambda_p=lam_p,
        inf_val=inf_val,
        sup_val=sup_val,
        f_star=inf_val / sup_val,
        n_probes=int(strict.size),
    )


@dataclass
class PointwiseFit:
    """Exponent pair for the lower-bound profile ``exp(-L^c1 / eta^c2)``."""

    c1: float
    c2: float
    violation: float
    mean_bound: float

    def to_row(self) -> dict:
        return _as_row(self)


def fit_pointwise_constants(
    reports, grid_n: int = 41, bounds: tuple[float, float] = (0.1, 10.0)
) -> PointwiseFit:
    """Grid-search exponents so ``exp(-lambda_p^c1 / eta^c2) <= f_star``.

    Hinge loss sums the overshoot across reports; among zero-violation pairs
    the one with the largest mean bound (the least vacuous) wins.  Degenerate
    reports are skipped; at least one usable report is required.
    """
    usable = [rep for rep in reports if not rep.degenerate]
    if not usable:
        raise ParameterError("no nondegenerate reports to fit")
    lam = np.array([rep.lambda_p for rep in usable])
    eta = np.array([rep.eta for rep in usable])
    f_star = np.array([rep.f_star for rep in usable])
    if np.any(eta <= 0):
        raise ParameterError("fit requires strictly positive eta")
    cs = np.geomspace(bounds[0], bounds[1], grid_n)
    best = None
    for c1 in cs:
        with np.errstate(over="ignore"):
            lam_pow = lam**c1
        for c2 in cs:
            with np.errstate(over="ignore"):
                bound = np.exp(-lam_pow / eta**c2)
            violation = float(np.maximum(bound - f_star, 0.0).sum())
            mean_bound = float(bound.mean())
            key = (violation, -mean_bound)
            if best is None or key < best[0]:
                best = (key, float(c1), float(c2), violation, mean_bound)
    _, c1, c2, violation, mean_bound = best
    return PointwiseFit(c1=c1, c2=c2, violation=violation, mean_bound=mean_bound)


@dataclass
class DistributionalCheck:
    """Discrete divergence-theorem defect of a cutoff Laplacian.

    ``laplacian_defect = |int Delta_h zeta|`` over the support cube; it
    vanishes at O(h) under refinement.  ``shift_defect`` is the worst
    constant-shift mismatch ``|int Delta_h zeta (ln v - ln(v/M))|`` over the
    probe constants, exactly zero at M = 1.
    """

    spacing: float
    laplacian_defect: float
    shift_defect: float
    shift_defect_at_one: float

    def to_row(self) -> dict:
        return _as_row(self)


def distributional_identity_check(
    cutoff: Cutoff, grid: Grid, v_field=None, consts=(0.5, 2.0, 10.0)
) -> DistributionalCheck:
    """Check that the cutoff Laplacian integrates to ~0 over its support.

    The support must sit strictly inside the grid so that the interior
    stencil applies on the whole integration cube.
    """
    support = cutoff.support_cube()
    slices = grid.cube_slices(support)
    for d, sl in enumerate(slices):
        if sl.start < 1 or sl.stop > grid.npts - 1:
            raise GeometryError(
                f"cutoff support touches the grid boundary on axis {d}"
            )
    zeta = cutoff.sample(grid).values
    lap = laplacian(zeta, grid)
    base = integrate(lap, grid, support)
    if v_field is not None:
        v = np.asarray(v_field.values if hasattr(v_field, "values") else v_field)
        if v.shape != grid.shape or np.any(v <= 0):
            raise ParameterError("v must be positive and match the grid shape")
    else:
        v = np.exp(grid.meshgrid()[0])
    worst = 0.0
    for M in consts:
        diff = np.log(v) - np.log(v / float(M))
        worst = max(worst, abs(integrate(lap * diff, grid, support)))
    one = abs(integrate(lap * (np.log(v) - np.log(v / 1.0)), grid, support))
    return DistributionalCheck(
        spacing=grid.spacing,
        laplacian_defect=abs(base),
        shift_defect=worst,
        shift_defect_at_one=one,
    )
