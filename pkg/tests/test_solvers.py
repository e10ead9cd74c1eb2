"""Implicit solver behavior: fixed points, positivity, convergence, delegation."""

import numpy as np
import pytest

from logdiff import (
    BarenblattFD,
    ExpSteady,
    Field,
    Grid,
    Lump2D,
    ParameterError,
    QuasilinearFlux,
    SolverConfig,
    SolverError,
    fit_order,
    residual_norm,
    solve_log_diffusion,
    solve_porous_medium,
    solve_quasilinear,
)

from conftest import lump_grid


def test_exp_steady_is_a_fixed_point():
    # ln u affine => the discrete operator is exactly zero, so backward Euler
    # reproduces the initial data at every step to the Newton tolerance
    sol = ExpSteady(a=(1.0, 0.5), scale=1.0)
    g = Grid.regular(2, 1.0, 1.0 / 16)
    config = SolverConfig(dt=0.05, boundary="dirichlet-from-oracle", boundary_values=sol)
    slab = solve_log_diffusion(sol.sample(g, 0.0), config, 0.25)
    drift = np.abs(slab.values - slab.values[0]).max()
    assert drift <= 1e-9


def test_constant_data_stays_constant():
    g = lump_grid(16)
    config = SolverConfig(
        dt=0.05,
        boundary="dirichlet-from-oracle",
        boundary_values=lambda pts, t: np.full(len(pts), 2.0),
    )
    initial = Field(g, np.full(g.shape, 2.0))
    slab = solve_log_diffusion(initial, config, 0.25)
    assert np.abs(slab.values - 2.0).max() <= 1e-10


def test_constant_data_neumann():
    g = lump_grid(16)
    config = SolverConfig(dt=0.05, boundary="neumann-zero-flux")
    initial = Field(g, np.full(g.shape, 2.0))
    slab = solve_porous_medium(initial, 0.5, config, 0.25)
    assert np.abs(slab.values - 2.0).max() <= 1e-10


def test_positivity_preserved_on_lump():
    sol = Lump2D(c=1.0, T=1.0)
    g = lump_grid(16)
    config = SolverConfig(dt=1.0 / 64, boundary="dirichlet-from-oracle", boundary_values=sol)
    slab = solve_log_diffusion(sol.sample(g, 0.0), config, 0.5)
    assert slab.values.min() > 0.0
    assert slab.nlevels == 33


def test_lump_convergence_coarse_pair():
    sol = Lump2D(c=1.0, T=1.0)
    errs, hs = [], []
    for cells in (8, 16, 32):
        g = lump_grid(cells)
        h = g.spacing
        config = SolverConfig(
            dt=16 * h * h, boundary="dirichlet-from-oracle", boundary_values=sol
        )
        slab = solve_log_diffusion(sol.sample(g, 0.0), config, 0.25)
        exact = sol.sample(g, 0.25).values
        inner = (slice(1, -1),) * 2
        errs.append(np.abs(slab.values[-1] - exact)[inner].max() / exact.max())
        hs.append(h)
    order = fit_order(hs, errs)
    assert 1.5 <= order <= 2.5


def test_barenblatt_pme_accuracy():
    sol = BarenblattFD(m=0.5, T=1.0, C=1.0)
    g = lump_grid(32)
    config = SolverConfig(
        dt=1.0 / 256, boundary="dirichlet-from-oracle", boundary_values=sol
    )
    slab = solve_porous_medium(sol.sample(g, 0.0), 0.5, config, 0.125)
    exact = sol.sample(g, 0.125).values
    rel = np.abs(slab.values[-1] - exact).max() / exact.max()
    assert rel <= 5e-3


def test_quasilinear_model_kinds_delegate_exactly():
    sol = Lump2D(c=1.0, T=1.0)
    g = lump_grid(8)
    config = SolverConfig(dt=0.05, boundary="dirichlet-from-oracle", boundary_values=sol)
    initial = sol.sample(g, 0.0)
    direct = solve_log_diffusion(initial, config, 0.2)
    via_flux = solve_quasilinear(
        initial, QuasilinearFlux(kind="log-diffusion", a=(1.0, 1.0)), config, 0.2
    )
    assert np.array_equal(direct.values, via_flux.values)
    direct_pme = solve_porous_medium(initial, 0.4, config, 0.2)
    via_flux_pme = solve_quasilinear(
        initial, QuasilinearFlux(kind="pme", m=0.4, a=(1.0, 1.0)), config, 0.2
    )
    assert np.array_equal(direct_pme.values, via_flux_pme.values)


def test_quasilinear_diagonal_close_to_model():
    # unit diagonal coefficients: flux-form stencil differs from the beta
    # form only by the face averaging, so the two stay within O(h^2)
    sol = Lump2D(c=1.0, T=1.0)
    g = lump_grid(16)
    config = SolverConfig(dt=1.0 / 64, boundary="dirichlet-from-oracle", boundary_values=sol)
    initial = sol.sample(g, 0.0)
    model = solve_log_diffusion(initial, config, 0.125)
    flux = QuasilinearFlux(kind="diagonal-perturbed", m=0.0, a=(1.0, 1.0))
    pert = solve_quasilinear(initial, flux, config, 0.125)
    rel = np.abs(model.values[-1] - pert.values[-1]).max() / model.values[-1].max()
    assert rel <= 0.02


def test_quasilinear_rejects_bad_inputs():
    g = lump_grid(8)
    initial = Field(g, np.full(g.shape, 1.0))
    config = SolverConfig(dt=0.05, boundary="neumann-zero-flux")
    with pytest.raises(ParameterError):
        solve_quasilinear(
            initial, QuasilinearFlux(kind="diagonal-perturbed", a=(1.0,)), config, 0.1
        )
    bad = Field(g, np.full(g.shape, -1.0))
    with pytest.raises(ParameterError):
        solve_log_diffusion(bad, config, 0.1)


def test_pme_exponent_validated():
    g = lump_grid(8)
    initial = Field(g, np.full(g.shape, 1.0))
    config = SolverConfig(dt=0.05, boundary="neumann-zero-flux")
    for bad_m in (0.0, 1.0, 1.5, -0.2):
        with pytest.raises(ParameterError):
            solve_porous_medium(initial, bad_m, config, 0.1)


def test_newton_budget_failure_raises():
    sol = Lump2D(c=1.0, T=1.0)
    g = lump_grid(16)
    config = SolverConfig(
        dt=0.2,
        newton_tol=1e-14,
        newton_max_iter=1,
        max_damping=0,
        boundary="dirichlet-from-oracle",
        boundary_values=sol,
    )
    with pytest.raises(SolverError) as err:
        solve_log_diffusion(sol.sample(g, 0.0), config, 0.4)
    assert err.value.residual is None or err.value.residual > 0


def test_residual_norm_small_on_solved_slab(lump_slab_32):
    flux = QuasilinearFlux(kind="log-diffusion", a=(1.0, 1.0))
    res = residual_norm(lump_slab_32, flux)
    # backward-Euler defect at interior rows is the Newton tolerance / dt
    assert res <= 1e-6


def test_slab_meta_records_run(lump_slab_32):
    meta = lump_slab_32.meta
    assert meta["equation"] == "log-diffusion"
    assert meta["boundary"] == "dirichlet-from-oracle"
    assert lump_slab_32.dt == pytest.approx(16.0 / 32**2)
