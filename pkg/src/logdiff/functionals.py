"""Scalar quantities measured on slabs: sups, oscillation means, mass bounds.

Conventions shared by every function here:

* cubes are edge-specified (``Cube(y, e)`` spans ``e``, not ``2e``);
* spatial means are trapezoid averages over the snapped cube;
* time windows select stored levels (closed window, roundoff tolerant);
* the discrete essential sup/inf over a region is the max/min of its samples.

Two families of oscillation functionals appear.  The logarithmic one is the
sup over time levels of the p-mean of ``|ln(u/M)|`` over a cube.  The power
variant replaces the logarithm with ``(1 - (u/M)^m)/m``, which increases to
``ln(M/u)`` as ``m`` decreases to zero; it is offered both as a plain
space integral (the default, matching how the energy and flux bounds consume
it) and as a normalized mean (used by the small-m comparison studies).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import ParameterError
from .grid import (
    Cube,
    Cutoff,
    Cylinder,
    Field,
    SpaceTimeSlab,
    average,
    cube_volume,
    gradient,
    integrate,
)


def _window_levels(slab: SpaceTimeSlab, cyl_or_window) -> np.ndarray:
    if isinstance(cyl_or_window, Cylinder):
        return slab.window_indices(cyl_or_window.t_start, cyl_or_window.t_end)
    t0, t1 = cyl_or_window
    return slab.window_indices(float(t0), float(t1))


def ess_sup(slab: SpaceTimeSlab, cyl: Cylinder) -> float:
    """Max of the samples over the cylinder (discrete essential sup)."""
    sl = slab.grid.cube_slices(cyl.cube)
    idx = _window_levels(slab, cyl)
    return float(slab.values[idx][(slice(None),) + sl].max())


def ess_inf(slab: SpaceTimeSlab, cyl: Cylinder) -> float:
    sl = slab.grid.cube_slices(cyl.cube)
    idx = _window_levels(slab, cyl)
    return float(slab.values[idx][(slice(None),) + sl].min())


def log_oscillation(slab: SpaceTimeSlab, cyl: Cylinder, M: float, p: float) -> float:
    """Sup over levels of the p-mean of ``|ln(u/M)|`` over the cube."""
    if M <= 0:
        raise ParameterError("M must be positive")
    if p < 1:
        raise ParameterError("p must be >= 1")
    grid = slab.grid
    idx = _window_levels(slab, cyl)
    best = 0.0
    for k in idx:
        integrand = np.abs(np.log(slab.values[k] / M)) ** p
        best = max(best, average(integrand, grid, cyl.cube) ** (1.0 / p))
    return best


def power_oscillation(
    slab: SpaceTimeSlab,
    cyl: Cylinder,
    M: float,
    m: float,
    p: float,
    normalized: bool = False,
) -> float:
    """Sup over levels of the p-root of ``int ((1-(u/M)^m)/m)^p`` over the cube.

    ``normalized=True`` replaces the plain integral with the cube mean, the
    form used when comparing against :func:`log_oscillation` as ``m -> 0``.
    """
    if M <= 0:
        raise ParameterError("M must be positive")
    if not 0 < m < 1:
        raise ParameterError("m must be in (0, 1)")
    if p < 1:
        raise ParameterError("p must be >= 1")
    grid = slab.grid
    idx = _window_levels(slab, cyl)
    best = 0.0
    for k in idx:
        integrand = ((1.0 - (slab.values[k] / M) ** m) / m) ** p
        val = (
            average(integrand, grid, cyl.cube)
            if normalized
            else integrate(integrand, grid, cyl.cube)
        )
        best = max(best, val ** (1.0 / p))
    return best


def intrinsic_scale(field: Field, center, edge: float, q: float, eps: float) -> float:
    """``eps * (mean over the cube of u^q)^(1/q)``: the time-scaling factor."""
    if q <= 0 or eps <= 0:
        raise ParameterError("q and eps must be positive")
    cube = Cube(tuple(center), edge)
    return eps * average(field.values**q, field.grid, cube) ** (1.0 / q)


def intrinsic_scale_pme(
    field: Field, center, edge: float, q: float, eps: float, m: float
) -> float:
    """Power-flux variant: the mean is raised to ``(1 - m)/q``."""
    if not 0 < m < 1:
        raise ParameterError("m must be in (0, 1)")
    if q <= 0 or eps <= 0:
        raise ParameterError("q and eps must be positive")
    cube = Cube(tuple(center), edge)
    return eps * average(field.values**q, field.grid, cube) ** ((1.0 - m) / q)


def degeneracy_ratio(
    field: Field, center, edge: float, q: float, M: float, r: float
) -> float:
    """Normalized mass indicator in (0, 1]; equals 1 iff ``u == M`` on the cube.

    ``(mean (u/M)^q)^((1/q) * 2/(2r - N))`` with ``2r - N > 0``.
    """
    grid = field.grid
    if M <= 0 or q <= 0:
        raise ParameterError("M and q must be positive")
    expo_den = 2.0 * r - grid.dim
    if expo_den <= 0:
        raise ParameterError(f"need 2r - N > 0, got {expo_den}")
    cube = Cube(tuple(center), edge)
    mean = average((field.values / M) ** q, grid, cube)
    return mean ** ((1.0 / q) * (2.0 / expo_den))


def degeneracy_ratio_pme(
    field: Field, center, edge: float, q: float, M: float, m: float, r: float
) -> float:
    """Power-flux variant with exponent ``2 / (N(m-1) + 2r)``."""
    grid = field.grid
    if M <= 0 or q <= 0:
        raise ParameterError("M and q must be positive")
    lam_r = moment_scaling_exponent(grid.dim, m, r)
    cube = Cube(tuple(center), edge)
    mean = average((field.values / M) ** q, grid, cube)
    return mean ** ((1.0 / q) * (2.0 / lam_r))


def time_scaling_exponent(N: int) -> float:
    """Exponent of ``rho`` scaling the time term in the log-flux bounds: ``2 - N``."""
    return 2.0 - N


def time_scaling_exponent_pme(N: int, m: float) -> float:
    """Power-flux counterpart ``N(m - 1) + 2``; tends to ``2 - N`` as m -> 0."""
    return N * (m - 1.0) + 2.0


def moment_scaling_exponent(N: int, m: float, r: float) -> float:
    """``N(m - 1) + 2r``; must be positive for the ratio exponents to make sense."""
    val = N * (m - 1.0) + 2.0 * r
    if val <= 0:
        raise ParameterError(f"need N(m-1) + 2r > 0, got {val}")
    return val


def sup_mass(
    slab: SpaceTimeSlab, center, rho: float, sigma: float, window
) -> float:
    """Sup over window levels of ``int_{K_(1+sigma)rho} u dx``."""
    if not 0.0 <= sigma < 1.0:
        raise ParameterError("sigma must lie in [0, 1)")
    cube = Cube(tuple(center), (1.0 + sigma) * rho)
    idx = _window_levels(slab, window)
    return max(integrate(slab.values[k], slab.grid, cube) for k in idx)


def inf_mass(slab: SpaceTimeSlab, center, edge: float, window) -> float:
    """Inf over window levels of ``int_{K_edge} u dx``."""
    cube = Cube(tuple(center), edge)
    idx = _window_levels(slab, window)
    return min(integrate(slab.values[k], slab.grid, cube) for k in idx)


def _time_weights(ts: np.ndarray) -> np.ndarray:
    w = np.full(ts.size, ts[1] - ts[0] if ts.size > 1 else 0.0)
    if ts.size > 1:
        w[0] *= 0.5
        w[-1] *= 0.5
    return w


def log_gradient_energy(slab: SpaceTimeSlab, cutoff: Cutoff, window) -> float:
    """Space-time integral of ``zeta^2 |Du|^2 / u^2`` over the cutoff support.

    Trapezoid in time over the window levels, discrete central gradient in
    space.  The weight vanishes outside the support cube, so integrating over
    that cube captures the whole quantity.
    """
    grid = slab.grid
    idx = _window_levels(slab, window)
    if idx.size < 2:
        raise ParameterError("energy window needs at least two levels")
    zeta_sq = cutoff.sample(grid).values ** 2
    cube = cutoff.support_cube()
    ts = slab.times[idx]
    wt = _time_weights(ts)
    total = 0.0
    for w, k in zip(wt, idx):
        u = slab.values[k]
        gsq = sum(g**2 for g in gradient(u, grid))
        total += w * integrate(zeta_sq * gsq / u**2, grid, cube)
    return float(total)


def power_gradient_energy(
    slab: SpaceTimeSlab, cutoff: Cutoff, window, m: float
) -> float:
    """Space-time integral of ``zeta^2 |Du|^2 / u^(2 - m/2)``."""
    if not 0 < m < 1:
        raise ParameterError("m must be in (0, 1)")
    grid = slab.grid
    idx = _window_levels(slab, window)
    if idx.size < 2:
        raise ParameterError("energy window needs at least two levels")
    zeta_sq = cutoff.sample(grid).values ** 2
    cube = cutoff.support_cube()
    ts = slab.times[idx]
    wt = _time_weights(ts)
    total = 0.0
    for w, k in zip(wt, idx):
        u = slab.values[k]
        gsq = sum(g**2 for g in gradient(u, grid))
        total += w * integrate(zeta_sq * gsq / u ** (2.0 - m / 2.0), grid, cube)
    return float(total)


def flux_l1(slab: SpaceTimeSlab, flux, center, rho: float, window) -> float:
    """``(1/rho) * int int_{K_rho} |A| dx dtau`` for the given flux structure."""
    grid = slab.grid
    cube = Cube(tuple(center), rho)
    idx = _window_levels(slab, window)
    if idx.size < 2:
        raise ParameterError("flux window needs at least two levels")
    ts = slab.times[idx]
    wt = _time_weights(ts)
    total = 0.0
    for w, k in zip(wt, idx):
        u = slab.values[k]
        grads = gradient(u, grid)
        if flux.kind == "log-diffusion":
            mag = np.sqrt(sum(g**2 for g in grads)) / u
        elif flux.kind == "pme":
            mag = u ** (flux.m - 1.0) * np.sqrt(sum(g**2 for g in grads))
        else:
            coef = u ** (flux.m - 1.0) if flux.m != 0.0 else 1.0 / u
            pts = grid.points()
            comps = []
            for d, (a_d, g) in enumerate(zip(flux.a, grads)):
                a_val = (
                    a_d(pts.reshape(-1, grid.dim), float(slab.times[k])).reshape(
                        grid.shape
                    )
                    if callable(a_d)
                    else float(a_d)
                )
                comps.append((a_val * coef * g) ** 2)
            mag = np.sqrt(sum(comps))
        total += w * integrate(mag, grid, cube)
    return float(total / rho)


@dataclass
class FunctionalSet:
    """One probe's worth of functionals with full parameter provenance.

    ``sup_u`` is the sup over the doubled cube and window; oscillation values
    are taken there too.  ``time_scale``/``mass_ratio`` families are evaluated
    on the window's final level over the base cube.  Power-flux entries are
    NaN when no ``m`` was supplied.
    """

    center: tuple
    rho: float
    t_start: float
    t_end: float
    q: float
    p: float
    r: float
    eps: float
    sigma: float
    m: float
    sup_u: float
    osc_p1: float
    osc_p2: float
    osc_p: float
    osc_pow_p1: float
    osc_pow_p2: float
    osc_pow_p: float
    time_scale: float
    time_scale_pow: float
    mass_ratio: float
    mass_ratio_pow: float
    sup_mass_sigma: float
    inf_mass_2rho: float

    def to_row(self) -> dict:
        row = asdict(self)
        row["center"] = ";".join(repr(c) for c in self.center)
        return row


def functional_set(
    slab: SpaceTimeSlab,
    center,
    rho: float,
    window,
    *,
    q: float = 2.0,
    p: float = 5.0,
    r: float = 2.0,
    eps: float = 0.1,
    sigma: float = 0.5,
    m: float | None = None,
) -> FunctionalSet:
    """Evaluate the full probe family on one cylinder."""
    t0, t1 = float(window[0]), float(window[1])
    cyl2 = Cylinder(tuple(center), 2.0 * rho, t0, t1)
    M = ess_sup(slab, cyl2)
    last = slab.level(int(_window_levels(slab, (t0, t1))[-1]))
    nan = float("nan")
    have_m = m is not None
    return FunctionalSet(
        center=tuple(center),
        rho=rho,
        t_start=t0,
        t_end=t1,
        q=q,
        p=p,
        r=r,
        eps=eps,
        sigma=sigma,
        m=m if have_m else nan,
        sup_u=M,
        osc_p1=log_oscillation(slab, cyl2, M, 1.0),
        osc_p2=log_oscillation(slab, cyl2, M, 2.0),
        osc_p=log_oscillation(slab, cyl2, M, p),
        osc_pow_p1=power_oscillation(slab, cyl2, M, m, 1.0) if have_m else nan,
        osc_pow_p2=power_oscillation(slab, cyl2, M, m, 2.0) if have_m else nan,
        osc_pow_p=power_oscillation(slab, cyl2, M, m, p) if have_m else nan,
        time_scale=intrinsic_scale(last, center, rho, q, eps),
        time_scale_pow=intrinsic_scale_pme(last, center, rho, q, eps, m)
        if have_m
        else nan,
        mass_ratio=degeneracy_ratio(last, center, rho, q, M, r),
        mass_ratio_pow=degeneracy_ratio_pme(last, center, rho, q, M, m, r)
        if have_m
        else nan,
        sup_mass_sigma=sup_mass(slab, center, rho, sigma, (t0, t1)),
        inf_mass_2rho=inf_mass(slab, center, 2.0 * rho, (t0, t1)),
    )
