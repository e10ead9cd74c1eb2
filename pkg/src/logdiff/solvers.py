"""Implicit solvers for singular diffusion equations.

All solvers march backward Euler: each step solves the nonlinear system

    u_new - dt * Op(u_new) = u_old

with a damped Newton iteration (exact Jacobian of the discrete operator,
step halving up to ``max_damping`` times).  ``Op`` is:

* ``solve_log_diffusion``: ``Lap_h(ln u)`` on the standard stencil,
* ``solve_porous_medium``:  ``Lap_h((u^m - 1)/m)``, ``0 < m < 1``,
* ``solve_quasilinear`` with a ``diagonal-perturbed`` flux: the flux-form
  divergence ``div_h(a_d(x,t) * D_face * du)`` with face diffusivities from
  the harmonic mean of ``u^(1-m)`` (equivalently, the arithmetic mean of
  ``u^(m-1)``; ``m = 0`` gives the logarithmic coefficient ``1/u``).

``solve_quasilinear`` with kind ``log-diffusion`` or ``pme`` delegates to the
model solvers, so the reduction at ``a == 1`` is exact by construction
(bitwise-identical trajectories, same discrete operator and Newton path).

Positivity is maintained by a floor (default ``1e-10 * max(initial)``); every
clipped entry is counted, and a step whose clipped fraction exceeds
``floor_warn_fraction`` appends a warning to the slab metadata rather than
failing, since approach to zero is the phenomenon under study.

Boundary conditions: ``dirichlet-from-oracle`` fixes boundary nodes to values
supplied by an exact solution (or any callable ``(points, t) -> values``);
``neumann-zero-flux`` reflects the stencil, which conserves the trapezoid
mass exactly per step (the discrete flux form telescopes against trapezoid
weights).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .errors import ParameterError, SolverError
from .grid import Field, Grid, SpaceTimeSlab, interior_slices, laplacian

_BOUNDARY_KINDS = ("dirichlet-from-oracle", "neumann-zero-flux")
_FLUX_KINDS = ("log-diffusion", "pme", "diagonal-perturbed")


@dataclass(frozen=True)
class SolverConfig:
    """Time step and Newton controls shared by all solvers."""

    dt: float
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    max_damping: int = 30
    positivity_floor: float | None = None
    floor_warn_fraction: float = 0.01
    boundary: str = "dirichlet-from-oracle"
    boundary_values: object = None  # ExactSolution or callable (points, t) -> values

    def __post_init__(self):
        if self.dt <= 0:
            raise ParameterError("dt must be positive")
        if self.boundary not in _BOUNDARY_KINDS:
            raise ParameterError(
                f"boundary must be one of {_BOUNDARY_KINDS}, got {self.boundary!r}"
            )
        if self.boundary == "dirichlet-from-oracle" and self.boundary_values is None:
            raise ParameterError("dirichlet-from-oracle requires boundary_values")


@dataclass(frozen=True)
class QuasilinearFlux:
    """Flux description ``A`` for quasilinear runs and residual checks.

    ``diagonal-perturbed`` means ``A_d = a_d(x, t) * u^(m-1) * du/dx_d`` with
    ``c_o <= a_d <= c_1``; ``a`` holds one constant or callable per axis and
    ``m = 0`` selects the logarithmic coefficient ``1/u``.
    """

    kind: str
    m: float = 0.0
    a: tuple = ()
    c_o: float = 1.0
    c_1: float = 1.0

    def __post_init__(self):
        if self.kind not in _FLUX_KINDS:
            raise ParameterError(f"flux kind must be one of {_FLUX_KINDS}")
        if self.kind == "pme" and not 0.0 < self.m < 1.0:
            raise ParameterError("pme flux needs m in (0, 1)")
        if self.kind == "diagonal-perturbed":
            if not 0.0 <= self.m < 1.0:
                raise ParameterError("diagonal-perturbed flux needs m in [0, 1)")
            if not self.a:
                raise ParameterError("diagonal-perturbed flux needs per-axis a")
            if not 0 < self.c_o <= self.c_1:
                raise ParameterError("structure bounds need 0 < c_o <= c_1")


def _check_horizon(horizon: float, dt: float) -> int:
    nsteps = horizon / dt
    n = int(round(nsteps))
    if n < 1 or abs(nsteps - n) > 1e-8 * max(1.0, nsteps):
        raise ParameterError(f"horizon {horizon} is not an integer multiple of dt {dt}")
    return n


def _boundary_mask(grid: Grid) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    for d in range(grid.dim):
        lo = [slice(None)] * grid.dim
        hi = [slice(None)] * grid.dim
        lo[d] = 0
        hi[d] = -1
        mask[tuple(lo)] = True
        mask[tuple(hi)] = True
    return mask.ravel()


def _laplacian_matrix(grid: Grid, neumann: bool) -> sp.csr_matrix:
    n = grid.npts
    h2 = grid.spacing**2
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    d1 = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    if neumann:
        d1[0, 1] = 2.0
        d1[n - 1, n - 2] = 2.0
    else:
        d1[0, :] = 0.0
        d1[n - 1, :] = 0.0
    d1 = sp.csr_matrix(d1) / h2
    eye = sp.identity(n, format="csr")
    total = None
    for d in range(grid.dim):
        term = None
        for k in range(grid.dim):
            blk = d1 if k == d else eye
            term = blk if term is None else sp.kron(term, blk, format="csr")
        total = term if total is None else total + term
    return sp.csr_matrix(total)


def _eval_boundary(config: SolverConfig, pts_bnd: np.ndarray, t: float) -> np.ndarray:
    src = config.boundary_values
    if hasattr(src, "eval"):
        return np.asarray(src.eval(pts_bnd, t), dtype=float)
    return np.asarray(src(pts_bnd, t), dtype=float)


class _NewtonStats:
    __slots__ = ("iters", "floor_hits", "max_floor_fraction", "warnings")

    def __init__(self):
        self.iters = 0
        self.floor_hits = 0
        self.max_floor_fraction = 0.0
        self.warnings = []


def _damped_newton(x0, residual_fn, jacobian_fn, floor, config, t, stats):
    """Solve residual(x) = 0; returns x with all entries >= floor."""
    x = np.maximum(x0, floor)
    r = residual_fn(x)
    rnorm = float(np.abs(r).max())
    for _ in range(config.newton_max_iter):
        if rnorm <= config.newton_tol:
            return x
        J = jacobian_fn(x)
        delta = spsolve(J.tocsc(), -r)
        step = 1.0
        accepted = False
        for _ in range(config.max_damping + 1):
            x_try = x + step * delta
            clipped = x_try < floor
            if clipped.any():
                x_try = np.maximum(x_try, floor)
            r_try = residual_fn(x_try)
            rn_try = float(np.abs(r_try).max())
            if rn_try < rnorm:
                nclip = int(clipped.sum())
                stats.floor_hits += nclip
                stats.max_floor_fraction = max(
                    stats.max_floor_fraction, nclip / x.size
                )
                x, r, rnorm = x_try, r_try, rn_try
                accepted = True
                break
            step *= 0.5
        stats.iters += 1
        if not accepted:
            raise SolverError(
                f"Newton stalled at t={t}: residual {rnorm:.3e}",
                residual=rnorm,
                time=t,
            )
    if rnorm <= config.newton_tol:
        return x
    raise SolverError(
        f"Newton did not reach tol at t={t}: residual {rnorm:.3e}",
        residual=rnorm,
        time=t,
    )


def _solve_beta_form(
    initial: Field,
    config: SolverConfig,
    horizon: float,
    beta,
    beta_prime,
    label: str,
    m: float | None,
) -> SpaceTimeSlab:
    grid = initial.grid
    if initial.min() <= 0:
        raise ParameterError("initial data must be strictly positive")
    nsteps = _check_horizon(horizon, config.dt)
    floor = config.positivity_floor
    if floor is None:
        floor = 1e-10 * initial.max()

    neumann = config.boundary == "neumann-zero-flux"
    L = _laplacian_matrix(grid, neumann)
    bnd = _boundary_mask(grid)
    interior = ~bnd
    pts = grid.points().reshape(-1, grid.dim)
    nodes = grid.shape

    times = np.linspace(initial.time, initial.time + horizon, nsteps + 1)
    levels = np.empty((nsteps + 1,) + nodes)
    levels[0] = initial.values
    stats = _NewtonStats()

    eye_int = sp.identity(int(interior.sum()), format="csr")
    eye_all = sp.identity(grid.npts**grid.dim, format="csr")
    if not neumann:
        L_int = L[interior]
        L_ii = sp.csr_matrix(L_int[:, interior])
        L_ib = sp.csr_matrix(L_int[:, bnd])
        pts_bnd = pts[bnd]

    u_flat = levels[0].ravel().copy()
    for k in range(nsteps):
        t_next = float(times[k + 1])
        dt = config.dt
        if neumann:
            prev = u_flat

            def residual_fn(x):
                return x - dt * (L @ beta(x)) - prev

            def jacobian_fn(x):
                return eye_all - dt * (L @ sp.diags(beta_prime(x)))

            u_flat = _damped_newton(
                u_flat, residual_fn, jacobian_fn, floor, config, t_next, stats
            )
        else:
            g = np.maximum(_eval_boundary(config, pts_bnd, t_next), floor)
            beta_g = beta(g)
            prev_int = u_flat[interior]

            def residual_fn(x):
                return x - dt * (L_ii @ beta(x) + L_ib @ beta_g) - prev_int

            def jacobian_fn(x):
                return eye_int - dt * (L_ii @ sp.diags(beta_prime(x)))

            x = _damped_newton(
                u_flat[interior], residual_fn, jacobian_fn, floor, config, t_next, stats
            )
            u_flat = u_flat.copy()
            u_flat[interior] = x
            u_flat[bnd] = g
        levels[k + 1] = u_flat.reshape(nodes)

    if stats.max_floor_fraction > config.floor_warn_fraction:
        stats.warnings.append(
            f"positivity floor clipped up to {stats.max_floor_fraction:.2%} "
            f"of nodes in a Newton step"
        )
    meta = {
        "equation": label,
        "m": m,
        "dt": config.dt,
        "horizon": horizon,
        "newton_tol": config.newton_tol,
        "boundary": config.boundary,
        "positivity_floor": floor,
        "floor_triggers": stats.floor_hits,
        "max_floor_fraction": stats.max_floor_fraction,
        "newton_iters": stats.iters,
        "warnings": stats.warnings,
    }
    return SpaceTimeSlab(grid, times, levels, meta=meta)


def solve_log_diffusion(
    initial: Field, config: SolverConfig, horizon: float
) -> SpaceTimeSlab:
    """March ``u_t = Lap_h(ln u)`` from ``initial`` over ``horizon``."""
    return _solve_beta_form(
        initial, config, horizon, np.log, lambda u: 1.0 / u, "log-diffusion", None
    )


def solve_porous_medium(
    initial: Field, m: float, config: SolverConfig, horizon: float
) -> SpaceTimeSlab:
    """March ``u_t = Lap_h((u^m - 1)/m)`` for ``0 < m < 1``."""
    if not 0.0 < m < 1.0:
        raise ParameterError(f"porous-medium exponent must be in (0, 1), got {m}")
    return _solve_beta_form(
        initial,
        config,
        horizon,
        lambda u: (u**m - 1.0) / m,
        lambda u: u ** (m - 1.0),
        "pme",
        m,
    )


# ---------------------------------------------------------------------------
# flux-form engine for diagonal-perturbed structures
# ---------------------------------------------------------------------------


def _face_arrays(grid: Grid, axis: int):
    """Flat (left, right) node indices for all faces along ``axis``."""
    idx = np.arange(grid.npts**grid.dim).reshape(grid.shape)
    lo = [slice(None)] * grid.dim
    hi = [slice(None)] * grid.dim
    lo[axis] = slice(0, -1)
    hi[axis] = slice(1, None)
    return idx[tuple(lo)].ravel(), idx[tuple(hi)].ravel()


def _face_coefficient(flux: QuasilinearFlux, grid: Grid, axis: int, t: float):
    """a_d at face midpoints; validates the structure sandwich."""
    pts = grid.points().reshape(-1, grid.dim)
    left, right = _face_arrays(grid, axis)
    mid = 0.5 * (pts[left] + pts[right])
    a_d = flux.a[axis]
    vals = a_d(mid, t) if callable(a_d) else np.full(left.shape, float(a_d))
    vals = np.asarray(vals, dtype=float)
    tol = 1e-9 * max(1.0, flux.c_1)
    if vals.min() < flux.c_o - tol or vals.max() > flux.c_1 + tol:
        raise ParameterError(
            f"a_{axis} leaves the structure interval [{flux.c_o}, {flux.c_1}]"
        )
    return vals


def _diffusivity(u: np.ndarray, m: float) -> np.ndarray:
    # u^(m-1); m = 0 -> 1/u
    return u ** (m - 1.0) if m != 0.0 else 1.0 / u


def flux_divergence(
    grid: Grid, values: np.ndarray, flux: QuasilinearFlux, t: float
) -> np.ndarray:
    """Discrete ``div A`` in flux form (interior rows; boundary rows half-cell).

    Face diffusivity is the harmonic mean of ``u^(1-m)`` of the two adjacent
    nodes, i.e. the arithmetic mean of ``u^(m-1)``.
    """
    u = values.ravel()
    h2 = grid.spacing**2
    div = np.zeros_like(u)
    d_node = _diffusivity(u, flux.m)
    for axis in range(grid.dim):
        left, right = _face_arrays(grid, axis)
        a_face = _face_coefficient(flux, grid, axis, t)
        d_face = 0.5 * (d_node[left] + d_node[right])
        phi = a_face * d_face * (u[right] - u[left]) / h2
        np.add.at(div, left, phi)
        np.add.at(div, right, -phi)
    return div.reshape(grid.shape)


def _flux_jacobian(
    grid: Grid, u: np.ndarray, flux: QuasilinearFlux, a_faces: list
) -> sp.csr_matrix:
    h2 = grid.spacing**2
    m = flux.m
    d_node = _diffusivity(u, m)
    dprime = (m - 1.0) * u ** (m - 2.0)
    rows, cols, vals = [], [], []
    for axis in range(grid.dim):
        left, right = _face_arrays(grid, axis)
        a_face = a_faces[axis]
        d_face = 0.5 * (d_node[left] + d_node[right])
        du = u[right] - u[left]
        dphi_dl = a_face * (-d_face + 0.5 * dprime[left] * du) / h2
        dphi_dr = a_face * (d_face + 0.5 * dprime[right] * du) / h2
        rows.extend([left, left, right, right])
        cols.extend([left, right, left, right])
        vals.extend([dphi_dl, dphi_dr, -dphi_dl, -dphi_dr])
    n = u.size
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )


def solve_quasilinear(
    initial: Field, flux: QuasilinearFlux, config: SolverConfig, horizon: float
) -> SpaceTimeSlab:
    """Backward Euler for the quasilinear flux ``u_t = div A(x, t, u, Du)``.

    Model kinds delegate to :func:`solve_log_diffusion` /
    :func:`solve_porous_medium` (identical operator and Newton path); the
    ``diagonal-perturbed`` kind runs the flux-form discretization.
    """
    if flux.kind == "log-diffusion":
        return solve_log_diffusion(initial, config, horizon)
    if flux.kind == "pme":
        return solve_porous_medium(initial, flux.m, config, horizon)

    grid = initial.grid
    if len(flux.a) != grid.dim:
        raise ParameterError("flux needs one coefficient per axis")
    if initial.min() <= 0:
        raise ParameterError("initial data must be strictly positive")
    nsteps = _check_horizon(horizon, config.dt)
    floor = config.positivity_floor
    if floor is None:
        floor = 1e-10 * initial.max()

    neumann = config.boundary == "neumann-zero-flux"
    bnd = _boundary_mask(grid)
    interior = ~bnd
    pts = grid.points().reshape(-1, grid.dim)
    # half-cell divergence scaling on boundary nodes (zero-flux case)
    cell_scale = np.ones(pts.shape[0])
    if neumann:
        cell_scale[bnd] = 2.0

    times = np.linspace(initial.time, initial.time + horizon, nsteps + 1)
    levels = np.empty((nsteps + 1,) + grid.shape)
    levels[0] = initial.values
    stats = _NewtonStats()
    eye = sp.identity(pts.shape[0], format="csr")
    dt = config.dt

    u_flat = levels[0].ravel().copy()
    for k in range(nsteps):
        t_next = float(times[k + 1])
        a_faces = [
            _face_coefficient(flux, grid, axis, t_next) for axis in range(grid.dim)
        ]
        if neumann:
            prev = u_flat

            def residual_fn(x):
                div = flux_divergence(grid, x.reshape(grid.shape), flux, t_next)
                return x - dt * cell_scale * div.ravel() - prev

            def jacobian_fn(x):
                J = _flux_jacobian(grid, x, flux, a_faces)
                return eye - dt * sp.diags(cell_scale) @ J

            u_flat = _damped_newton(
                u_flat, residual_fn, jacobian_fn, floor, config, t_next, stats
            )
        else:
            g = np.maximum(_eval_boundary(config, pts[bnd], t_next), floor)
            prev_int = u_flat[interior]

            def residual_fn(x):
                full = np.empty(pts.shape[0])
                full[interior] = x
                full[bnd] = g
                div = flux_divergence(grid, full.reshape(grid.shape), flux, t_next)
                return x - dt * div.ravel()[interior] - prev_int

            def jacobian_fn(x):
                full = np.empty(pts.shape[0])
                full[interior] = x
                full[bnd] = g
                J = _flux_jacobian(grid, full, flux, a_faces)
                Ji = J[interior][:, interior]
                return sp.identity(x.size, format="csr") - dt * sp.csr_matrix(Ji)

            x = _damped_newton(
                u_flat[interior], residual_fn, jacobian_fn, floor, config, t_next, stats
            )
            u_flat = u_flat.copy()
            u_flat[interior] = x
            u_flat[bnd] = g
        levels[k + 1] = u_flat.reshape(grid.shape)

    if stats.max_floor_fraction > config.floor_warn_fraction:
        stats.warnings.append(
            f"positivity floor clipped up to {stats.max_floor_fraction:.2%} "
            f"of nodes in a Newton step"
        )
    meta = {
        "equation": f"quasilinear:{flux.kind}",
        "m": flux.m,
        "dt": config.dt,
        "horizon": horizon,
        "newton_tol": config.newton_tol,
        "boundary": config.boundary,
        "positivity_floor": floor,
        "floor_triggers": stats.floor_hits,
        "max_floor_fraction": stats.max_floor_fraction,
        "newton_iters": stats.iters,
        "warnings": stats.warnings,
    }
    return SpaceTimeSlab(grid, times, levels, meta=meta)


def residual_norm(slab: SpaceTimeSlab, flux: QuasilinearFlux) -> float:
    """Max over steps and interior nodes of ``|(u_k - u_{k-1})/dt - Op(u_k)|``.

    The operator matches the flux kind and is evaluated at the newer level
    (backward-Euler convention), so solver-produced slabs score at the Newton
    tolerance divided by ``dt`` plus stencil-consistency terms.
    """
    grid = slab.grid
    inner = interior_slices(grid)
    dt = slab.dt
    worst = 0.0
    for k in range(1, slab.nlevels):
        u = slab.values[k]
        if flux.kind == "log-diffusion":
            op = laplacian(np.log(u), grid)
        elif flux.kind == "pme":
            op = laplacian((u**flux.m - 1.0) / flux.m, grid)
        else:
            op = flux_divergence(grid, u, flux, float(slab.times[k]))
        defect = (u - slab.values[k - 1]) / dt - op
        worst = max(worst, float(np.abs(defect[inner]).max()))
    return worst
