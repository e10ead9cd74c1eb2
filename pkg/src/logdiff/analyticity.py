"""Derivative tables, growth-constant fits, and intrinsic rescaling.

The analyticity signature of a positive solution is that the factorial- and
radius-normalized derivative ratios

    (|D^a u(x_o,t_o)| rho^|a| / (|a|! u(x_o,t_o)))^(1/|a|)

stay bounded as the order grows, with time derivatives obeying the parabolic
counterpart (order 2k in rho, factorial (2k)!, and a u^(1-k) scaling).  This
module computes the tables by composed central differences, fits the minimal
growth pair (C, H), and performs the intrinsic change of variables

    x -> (x - x_o)/rho,  tau = (t - t_o)/(u(x_o,t_o) rho^2),  v = u/u(x_o,t_o)

under which the equation becomes v_tau - (1/v) Lap v = -|Dv|^2/v^2 on a unit
cube of edge 2.  Rescaling reuses grid nodes exactly (rho must be a whole
number of cells), so no spatial interpolation error enters; time levels are
reused as stored, only relabeled.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, ParameterError
from .grid import (
    Cube,
    Grid,
    SpaceTimeSlab,
    gradient,
    interior_slices,
    laplacian,
)
from .functionals import intrinsic_scale


def _central_weights(order: int, spacing: float) -> np.ndarray:
    """Weights of the symmetric stencil for one 1D derivative, order-2 accurate.

    Half-width is ceil(order/2); the weights solve the small Vandermonde
    moment system exactly.
    """
    if order < 1:
        raise ParameterError("derivative order must be >= 1")
    w = (order + 1) // 2
    n = 2 * w + 1
    z = np.arange(-w, w + 1, dtype=float)
    V = np.vander(z, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs) / spacing**order


def _tensor_derivative(values: np.ndarray, idx, alpha, spacing: float) -> float:
    """Apply composed 1D central stencils for the multi-index ``alpha``."""
    out = values
    for axis in reversed(range(len(alpha))):
        d = alpha[axis]
        i = idx[axis]
        if d == 0:
            out = np.take(out, i, axis=axis)
        else:
            w = (d + 1) // 2
            sl = np.take(out, range(i - w, i + w + 1), axis=axis)
            out = np.tensordot(sl, _central_weights(d, spacing), axes=([axis], [0]))
    return float(out)


@dataclass
class DerivativeTable:
    """Point values of spatial and time derivatives at one vertex.

    ``spatial`` maps multi-indices (tuples) with 1 <= |alpha| <= a_max to
    D^alpha u(x_o, t_o); ``time`` maps k to the k-th time derivative.
    Entries whose centered stencil does not fit in the slab are omitted and
    ``capped`` is set instead of raising.
    """

    x_o: tuple
    t_o: float
    u_center: float
    spacing: float
    dt: float
    a_max: int
    k_max: int
    spatial: dict = field(default_factory=dict)
    time: dict = field(default_factory=dict)
    capped: bool = False

    def order_entries(self, total: int) -> dict:
        return {a: v for a, v in self.spatial.items() if sum(a) == total}


def derivative_table(
    slab: SpaceTimeSlab, x_o, t_o: float, a_max: int = 6, k_max: int = 3
) -> DerivativeTable:
    """Centered-difference derivative table at a grid vertex.

    Spatial entries use tensor products of symmetric 1D stencils on the
    level nearest ``t_o``; time entries use symmetric stencils across stored
    levels.  Every entry is order-2 accurate in its own spacing.
    """
    grid = slab.grid
    if a_max < 1 or k_max < 0:
        raise ParameterError("a_max >= 1 and k_max >= 0 required")
    idx = grid.index_of(x_o)
    k_o = slab.level_index(t_o)
    level = slab.values[k_o]
    table = DerivativeTable(
        x_o=tuple(float(c) for c in x_o),
        t_o=float(slab.times[k_o]),
        u_center=float(level[idx]),
        spacing=grid.spacing,
        dt=slab.dt,
        a_max=a_max,
        k_max=k_max,
    )
    for alpha in itertools.product(range(a_max + 1), repeat=grid.dim):
        total = sum(alpha)
        if total == 0 or total > a_max:
            continue
        fits = all(
            d == 0 or (i - (d + 1) // 2 >= 0 and i + (d + 1) // 2 <= grid.npts - 1)
            for d, i in zip(alpha, idx)
        )
        if not fits:
            table.capped = True
            continue
        table.spatial[alpha] = _tensor_derivative(level, idx, alpha, grid.spacing)
    series = slab.values[(slice(None),) + idx]
    for k in range(1, k_max + 1):
        w = (k + 1) // 2
        if k_o - w < 0 or k_o + w > slab.nlevels - 1:
            table.capped = True
            continue
        weights = _central_weights(k, slab.dt)
        table.time[k] = float(weights @ series[k_o - w : k_o + w + 1])
    return table


@dataclass
class GrowthFit:
    """Minimal pair (C, H) bounding the factorial-normalized derivatives.

    H is the largest spatial root ``ratio^(1/|alpha|)`` (falling back to the
    time roots when every spatial entry vanishes), so it is the smallest
    geometric growth rate admissible; C >= 1 is then the smallest prefactor
    covering both families at that H.
    """

    fitted_c: float
    fitted_h: float
    rho: float
    u_center: float
    n_spatial: int
    n_time: int

    def to_row(self) -> dict:
        return dict(self.__dict__)


def normalized_spatial_roots(table: DerivativeTable, rho: float) -> dict:
    """``(|D^alpha u| rho^|alpha| / (|alpha|! u_c))^(1/|alpha|)`` per entry."""
    if table.u_center <= 0:
        raise ParameterError("u at the vertex must be positive")
    out = {}
    for alpha, val in table.spatial.items():
        s = sum(alpha)
        ratio = abs(val) * rho**s / (math.factorial(s) * table.u_center)
        out[alpha] = ratio ** (1.0 / s)
    return out


def _time_ratio(table: DerivativeTable, rho: float, k: int) -> float:
    return (
        abs(table.time[k])
        * rho ** (2 * k)
        / (math.factorial(2 * k) * table.u_center ** (1 - k))
    )


def fit_derivative_growth(table: DerivativeTable, rho: float) -> GrowthFit:
    """Fit the growth bound ``|D^alpha u| <= C H^|alpha| |alpha|! u_c / rho^|alpha|``.

    The time family is covered through ``|d^k u/dt^k| <= C H^(2k) (2k)!
    u_c^(1-k) / rho^(2k)``.  An all-zero table yields (C, H) = (1, 0).
    """
    if not table.spatial and not table.time:
        raise ParameterError("empty derivative table")
    roots = normalized_spatial_roots(table, rho)
    H = max(roots.values(), default=0.0)
    time_ratios = {k: _time_ratio(table, rho, k) for k in table.time}
    if H == 0.0 and any(r > 0 for r in time_ratios.values()):
        H = max(r ** (1.0 / (2 * k)) for k, r in time_ratios.items() if r > 0)
    C = 1.0
    if H > 0:
        for alpha, root in roots.items():
            C = max(C, root ** sum(alpha) / H ** sum(alpha))
        for k, r in time_ratios.items():
            C = max(C, r / H ** (2 * k))
    return GrowthFit(
        fitted_c=C,
        fitted_h=H,
        rho=rho,
        u_center=table.u_center,
        n_spatial=len(table.spatial),
        n_time=len(table.time),
    )


def intrinsic_rescale(
    slab: SpaceTimeSlab,
    x_o,
    t_o: float,
    rho: float,
    eps: float = 0.1,
    q: float = 2.0,
    min_levels: int = 3,
    f_star: float | None = None,
) -> SpaceTimeSlab:
    """Change variables to the unit solution v on the edge-2 cube.

    The returned slab holds ``v = u/u_c`` on a grid of edge 2 and spacing
    ``h/rho`` (exact node reuse; rho must be a whole number of cells), with
    times ``(t - t_o)/(u_c rho^2)`` for the stored levels inside the
    intrinsic window ``(t_o - theta rho^2/16, t_o]``.  When the window holds
    fewer than ``min_levels`` levels, earlier levels pad it (count recorded
    as meta ``n_padded``); the equation holds on the padded range too, only
    the sandwich bound is specific to the window.

    Meta records ``u_center``, ``theta``, ``tau_scale``, ``v_min``/``v_max``,
    the backward-difference equation residual, and (when ``f_star`` is given)
    whether the sandwich ``f_star <= v <= 1/f_star`` held.
    """
    grid = slab.grid
    cells = rho / grid.spacing
    if abs(cells - round(cells)) > 1e-9 or round(cells) < 1:
        raise GeometryError("rho must be a whole number of cells for node reuse")
    idx = grid.index_of(x_o)
    k_hi = slab.level_index(t_o)
    t_o = float(slab.times[k_hi])
    u_c = float(slab.values[k_hi][idx])
    if u_c <= 0:
        raise ParameterError("u at the vertex must be positive")
    theta = intrinsic_scale(slab.level(k_hi), x_o, rho, q, eps)
    slices = grid.cube_slices(Cube(tuple(float(c) for c in x_o), 2.0 * rho))
    t_lo = t_o - theta * rho**2 / 16.0
    tol = 1e-9 * max(1.0, abs(float(slab.times[-1])))
    inside = [k for k in range(k_hi + 1) if slab.times[k] > t_lo + tol]
    n_padded = max(0, min_levels - len(inside)) if min_levels > 1 else 0
    k_lo = (inside[0] if inside else k_hi) - n_padded
    if k_lo < 0:
        raise GeometryError("slab holds too few levels below the vertex time")
    levels = list(range(k_lo, k_hi + 1))
    if len(levels) < 2:
        raise GeometryError("intrinsic window needs at least two levels")
    tau_scale = u_c * rho**2
    times = (slab.times[levels] - t_o) / tau_scale
    vals = slab.values[np.ix_(levels, *[range(s.start, s.stop) for s in slices])]
    vals = vals / u_c
    vgrid = Grid.regular(grid.dim, 2.0, grid.spacing / rho)
    meta = {
        "u_center": u_c,
        "theta": theta,
        "tau_scale": tau_scale,
        "vertex": tuple(float(c) for c in x_o),
        "t_o": t_o,
        "rho": rho,
        "n_padded": n_padded,
        "v_min": float(vals.min()),
        "v_max": float(vals.max()),
    }
    if f_star is not None:
        meta["f_star"] = float(f_star)
        meta["sandwich_ok"] = bool(
            vals.min() >= f_star - 1e-12 and vals.max() <= 1.0 / f_star + 1e-12
        )
    out = SpaceTimeSlab(vgrid, times, vals, meta=meta)
    out.meta["residual"] = rescale_residual(out)
    return out


def rescale_residual(v_slab: SpaceTimeSlab) -> float:
    """Max interior defect of ``v_tau - (1/v) Lap v + |Dv|^2/v^2``.

    The time derivative is the backward difference, matching how implicit
    slabs were produced, so for solved data the residual isolates the
    spatial chain-rule mismatch (O(h^2)).
    """
    g = v_slab.grid
    interior = interior_slices(g)
    dt = v_slab.dt
    worst = 0.0
    for k in range(1, v_slab.nlevels):
        v = v_slab.values[k]
        vt = (v - v_slab.values[k - 1]) / dt
        lap = laplacian(v, g)
        gsq = sum(gr**2 for gr in gradient(v, g))
        res = vt - lap / v + gsq / v**2
        worst = max(worst, float(np.abs(res[interior]).max()))
    return worst


@dataclass
class SupBoundsReport:
    """Discrete sup norms of Dv and v_t over a shrunken sub-cylinder.

    ``coef_low = 1/v_max`` and ``coef_high = 1/v_min`` bound the equation
    coefficient 1/v from below and above on the sub-cylinder.
    """

    sigma: float
    depth: float
    n_levels: int
    sup_dv: float
    sup_vt: float
    v_min: float
    v_max: float
    coef_low: float
    coef_high: float

    def to_row(self) -> dict:
        return dict(self.__dict__)


def rescaled_sup_bounds(
    v_slab: SpaceTimeSlab, sigma: float, depth: float | None = None
) -> SupBoundsReport:
    """Sup norms over ``K_(2 sigma) x (-sigma * depth, 0]`` of a rescaled slab.

    ``depth`` defaults to the slab's full backward reach.  Time derivatives
    use second-order differences along stored levels.
    """
    if not 0.0 < sigma <= 1.0:
        raise ParameterError("sigma must lie in (0, 1]")
    g = v_slab.grid
    full_depth = float(-v_slab.times[0]) if depth is None else float(depth)
    if full_depth <= 0:
        raise ParameterError("depth must be positive")
    t_lo = -sigma * full_depth
    tol = 1e-9 * max(1.0, full_depth)
    levels = np.nonzero((v_slab.times > t_lo - tol) & (v_slab.times <= tol))[0]
    if levels.size == 0:
        raise GeometryError("sub-cylinder contains no stored levels")
    sl = g.cube_slices(Cube(g.center, 2.0 * sigma)) if sigma < 1.0 else tuple(
        slice(0, g.npts) for _ in range(g.dim)
    )
    vt_all = np.gradient(
        v_slab.values, v_slab.dt, axis=0, edge_order=2 if v_slab.nlevels >= 3 else 1
    )
    sup_dv = 0.0
    sup_vt = 0.0
    v_min = math.inf
    v_max = -math.inf
    for k in levels:
        v = v_slab.values[k]
        dv = np.sqrt(sum(gr**2 for gr in gradient(v, g)))
        sup_dv = max(sup_dv, float(dv[sl].max()))
        sup_vt = max(sup_vt, float(np.abs(vt_all[k][sl]).max()))
        v_min = min(v_min, float(v[sl].min()))
        v_max = max(v_max, float(v[sl].max()))
    return SupBoundsReport(
        sigma=sigma,
        depth=full_depth,
        n_levels=int(levels.size),
        sup_dv=sup_dv,
        sup_vt=sup_vt,
        v_min=v_min,
        v_max=v_max,
        coef_low=1.0 / v_max,
        coef_high=1.0 / v_min,
    )


@dataclass
class SupExponentFit:
    """Report-only exponents of the sup-bound shape.

    Fits ``ln sup_vt ~ ln(gamma) + mu1 ln(coef_high/coef_low) +
    mu2 ln(1/(theta (1 - sigma)))`` by least squares; the additive constant
    inside the bound's ``(1 + theta^-mu2)`` factor is dropped (dominant-term
    regression), so the exponents are descriptive, not certified.
    """

    mu1: float
    mu2: float
    prefactor: float
    max_log_residual: float
    n_samples: int

    def to_row(self) -> dict:
        return dict(self.__dict__)


def fit_sup_bound_exponents(samples) -> SupExponentFit:
    """Log-linear regression over ``(sup_vt, coef_ratio, theta, sigma)`` rows."""
    rows = [
        (float(s[0]), float(s[1]), float(s[2]), float(s[3]))
        for s in samples
        if float(s[0]) > 0
    ]
    if len(rows) < 3:
        raise ParameterError("need at least three positive samples to fit")
    b = np.log([r[0] for r in rows])
    A = np.column_stack(
        [
            np.ones(len(rows)),
            np.log([r[1] for r in rows]),
            np.log([1.0 / (r[2] * (1.0 - r[3])) for r in rows]),
        ]
    )
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = A @ coef - b
    return SupExponentFit(
        mu1=float(coef[1]),
        mu2=float(coef[2]),
        prefactor=float(math.exp(coef[0])),
        max_log_residual=float(np.abs(resid).max()),
        n_samples=len(rows),
    )


@dataclass
class AnalyticityReport:
    """One vertex's analyticity evidence: table fit plus rescaled sups."""

    x_o: tuple
    t_o: float
    rho: float
    u_center: float
    fitted_c: float
    fitted_h: float
    sup_dv: float
    sup_vt: float
    rescale_residual: float
    capped: bool
    fitted_mu1: float = float("nan")
    fitted_mu2: float = float("nan")
    table: DerivativeTable | None = field(default=None, repr=False)

    def to_row(self) -> dict:
        row = {
            k: v
            for k, v in self.__dict__.items()
            if k != "table" and not isinstance(v, tuple)
        }
        row["x_o"] = ";".join(repr(c) for c in self.x_o)
        if self.table is not None:
            for alpha, val in sorted(self.table.spatial.items()):
                row["d_" + "_".join(str(a) for a in alpha)] = val
            for k, val in sorted(self.table.time.items()):
                row[f"t_{k}"] = val
        return row


def analyticity_report(
    slab: SpaceTimeSlab,
    x_o,
    t_o: float,
    rho: float,
    a_max: int = 6,
    k_max: int = 3,
    eps: float = 0.1,
    q: float = 2.0,
    sigma: float = 0.5,
    f_star: float | None = None,
) -> AnalyticityReport:
    """Full single-vertex workflow: table, growth fit, rescale, sup bounds."""
    table = derivative_table(slab, x_o, t_o, a_max=a_max, k_max=k_max)
    fit = fit_derivative_growth(table, rho)
    v_slab = intrinsic_rescale(slab, x_o, t_o, rho, eps=eps, q=q, f_star=f_star)
    sups = rescaled_sup_bounds(v_slab, sigma)
    return AnalyticityReport(
        x_o=table.x_o,
        t_o=table.t_o,
        rho=rho,
        u_center=table.u_center,
        fitted_c=fit.fitted_c,
        fitted_h=fit.fitted_h,
        sup_dv=sups.sup_dv,
        sup_vt=sups.sup_vt,
        rescale_residual=float(v_slab.meta["residual"]),
        capped=table.capped,
        table=table,
    )
