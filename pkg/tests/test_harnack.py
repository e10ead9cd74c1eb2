"""Inequality checkers: L1 Harnack, energy, flux, Jensen, pointwise, cutoff."""

import numpy as np
import pytest

from logdiff import (
    Cube,
    Cutoff,
    GeometryError,
    Grid,
    Lump2D,
    ParameterError,
    QuasilinearFlux,
    check_energy_lemma,
    check_energy_lemma_pme,
    check_flux_corollary,
    check_l1_harnack,
    check_l1_harnack_pme,
    check_pointwise_harnack,
    distributional_identity_check,
    fit_pointwise_constants,
    jensen_check,
    sample_cylinders,
)

# independently computed divergence defects of the smoothstep cutoff
# (rho = 1, sigma = 0.5, edge-2 grid), decaying at first order
DIST_DEFECTS = {
    32: 7.1875,
    64: 4.0390625,
    128: 2.1337890625,
    256: 1.0958251953125,
}


def test_l1_harnack_constant_slab(constant_slab):
    from conftest import CONST_VALUE

    rep = check_l1_harnack(constant_slab, (0.0, 0.0), 0.25, (0.0, 0.25))
    # lhs = c rho^N, mass term c (2 rho)^N: the constant is at most 2^-N
    assert rep.gamma_star <= 0.25 + 1e-12
    assert rep.lhs == pytest.approx(CONST_VALUE * 0.25**2, rel=1e-12)
    assert rep.rhs_mass == pytest.approx(CONST_VALUE * 0.5**2, rel=1e-12)
    assert rep.kind == "l1-log"
    assert np.isnan(rep.m)


def test_l1_harnack_lump(lump_slab_32):
    rep = check_l1_harnack(lump_slab_32, (0.0, 0.0), 0.25, (0.25, 0.5))
    assert np.isfinite(rep.gamma_star) and rep.gamma_star > 0
    assert rep.rhs_time == pytest.approx(0.25)  # lambda = 0 at N = 2
    assert rep.sup_u > 0
    assert rep.lambda_1 > 0 and rep.lambda_2 > 0


def test_l1_harnack_row_and_functionals(lump_slab_32):
    rep = check_l1_harnack(
        lump_slab_32, (0.0, 0.0), 0.25, (0.25, 0.5), with_functionals=True
    )
    row = rep.to_row()
    assert "fs_osc_p" in row
    assert row["center"] == "0.0;0.0"


def test_l1_harnack_pme_window_power(lump_slab_32):
    m = 0.5
    rep = check_l1_harnack_pme(lump_slab_32, m, (0.0, 0.0), 0.25, (0.25, 0.5))
    lam_m = 2 * (m - 1) + 2
    expect = (0.25 / 0.25**lam_m) ** (1.0 / (1.0 - m))
    assert rep.rhs_time == pytest.approx(expect, rel=1e-12)
    assert rep.kind == "l1-pme"
    with pytest.raises(ParameterError):
        check_l1_harnack_pme(lump_slab_32, 1.2, (0.0, 0.0), 0.25, (0.25, 0.5))


def test_window_validation(lump_slab_32):
    with pytest.raises(GeometryError):
        check_l1_harnack(lump_slab_32, (0.0, 0.0), 0.25, (0.4, 0.9))
    with pytest.raises(ParameterError):
        check_l1_harnack(lump_slab_32, (0.0, 0.0), 0.25, (0.4, 0.3))


def test_energy_lemma_lump(lump_slab_32):
    rep = check_energy_lemma(lump_slab_32, (0.0, 0.0), 0.25, 0.5, (0.25, 0.5))
    assert np.isfinite(rep.ratio) and rep.ratio > 0
    assert rep.lhs > 0
    assert rep.s_sigma > 0
    assert rep.kind == "energy-log"


def test_energy_lemma_geometry_guards(lump_slab_32):
    with pytest.raises(ParameterError):
        check_energy_lemma(lump_slab_32, (0.0, 0.0), 0.25, 1.0, (0.25, 0.5))
    with pytest.raises(GeometryError):
        # 4x cube of rho = 0.3 exceeds the unit grid
        check_energy_lemma(lump_slab_32, (0.0, 0.0), 0.3, 0.5, (0.25, 0.5))


def test_energy_lemma_pme_exponent_range(lump_slab_32):
    rep = check_energy_lemma_pme(lump_slab_32, 0.4, (0.0, 0.0), 0.25, 0.5, (0.25, 0.5))
    assert np.isfinite(rep.ratio) and rep.ratio > 0
    assert rep.m == 0.4
    with pytest.raises(ParameterError):
        check_energy_lemma_pme(lump_slab_32, 0.7, (0.0, 0.0), 0.25, 0.5, (0.25, 0.5))


def test_flux_corollary_kinds(lump_slab_32):
    log_flux = QuasilinearFlux(kind="log-diffusion", a=(1.0, 1.0))
    rep = check_flux_corollary(lump_slab_32, log_flux, 0.25, 0.5, (0.25, 0.5))
    assert rep.kind == "flux-log"
    assert np.isfinite(rep.ratio) and rep.ratio > 0
    pme_flux = QuasilinearFlux(kind="pme", m=0.4, a=(1.0, 1.0))
    rep2 = check_flux_corollary(lump_slab_32, pme_flux, 0.25, 0.5, (0.25, 0.5))
    assert rep2.kind == "flux-pme"
    assert np.isfinite(rep2.ratio) and rep2.ratio > 0
    diag = QuasilinearFlux(kind="diagonal-perturbed", m=0.0, a=(1.0, 1.0))
    rep3 = check_flux_corollary(lump_slab_32, diag, 0.25, 0.5, (0.25, 0.5))
    assert rep3.kind == "flux-quasilinear"


def test_jensen_on_solved_slab(lump_slab_32):
    rng = np.random.default_rng(11)
    probes = sample_cylinders(lump_slab_32.grid, lump_slab_32.times, rng, 12)
    for center, rho, t0, t1 in probes:
        chk = jensen_check(lump_slab_32, center, rho, 0.5, (t0, t1))
        assert chk.satisfied, f"violation at {center}, rho={rho}"
        assert chk.lhs <= chk.rhs + 1e-9


def test_sample_cylinders_alignment(lump_slab_32):
    grid = lump_slab_32.grid
    rng = np.random.default_rng(3)
    probes = sample_cylinders(grid, lump_slab_32.times, rng, 40)
    assert len(probes) == 40
    h = grid.spacing
    times = [float(t) for t in lump_slab_32.times]
    for center, rho, t0, t1 in probes:
        j = rho / (4.0 * h)
        assert j == pytest.approx(round(j))  # rho is a whole multiple of 4h
        for c in center:
            k = (c - grid.axis(0)[0]) / h
            assert k == pytest.approx(round(k))  # centers on nodes
        assert t0 < t1
        assert any(abs(t0 - t) < 1e-12 for t in times)
        assert any(abs(t1 - t) < 1e-12 for t in times)
        # doubled cube stays on the grid
        grid.cube_slices(Cube(center, 2 * rho))


def test_sample_cylinders_needs_cells():
    g = Grid.regular(2, 1.0, 0.25)
    with pytest.raises(GeometryError):
        sample_cylinders(g, np.array([0.0, 0.1]), np.random.default_rng(0), 3)


def test_pointwise_harnack_lump(lump_slab_64):
    rep = check_pointwise_harnack(lump_slab_64, (0.0, 0.0), 0.5, 1.0 / 16)
    assert 0.0 < rep.f_star <= 1.0
    assert rep.theta > 0
    assert 0.0 < rep.eta <= 1.0
    assert rep.lambda_p > 0
    assert not rep.degenerate


def test_pointwise_harnack_constant(constant_slab):
    rep = check_pointwise_harnack(constant_slab, (0.0, 0.0), 0.25, 1.0 / 8)
    assert rep.f_star == pytest.approx(1.0, abs=1e-10)
    assert rep.eta == pytest.approx(1.0, abs=1e-10)


def test_pointwise_harnack_guards(lump_slab_32):
    with pytest.raises(ParameterError):
        check_pointwise_harnack(lump_slab_32, (0.0, 0.0), 0.5, 1.0 / 16, p=3.0)
    with pytest.raises(GeometryError):
        # the 8x cube cannot fit
        check_pointwise_harnack(lump_slab_32, (0.0, 0.0), 0.5, 0.25)


def test_fit_pointwise_constants(lump_slab_64):
    reports = [
        check_pointwise_harnack(lump_slab_64, (0.0, 0.0), 0.5, 1.0 / 16),
        check_pointwise_harnack(lump_slab_64, (0.125, 0.0), 0.45, 1.0 / 16),
        check_pointwise_harnack(lump_slab_64, (0.0, -0.125), 0.4, 1.0 / 16),
    ]
    fit = fit_pointwise_constants(reports)
    assert np.isfinite(fit.c1) and np.isfinite(fit.c2)
    for rep in reports:
        bound = np.exp(-(rep.lambda_p**fit.c1) / rep.eta**fit.c2)
        assert bound <= rep.f_star + 1e-9
    with pytest.raises(ParameterError):
        fit_pointwise_constants([])


def test_distributional_defects_match_reference():
    for cells, expect in DIST_DEFECTS.items():
        g = Grid.regular(2, 2.0, 2.0 / cells)
        chk = distributional_identity_check(Cutoff((0.0, 0.0), 1.0, 0.5), g)
        assert chk.laplacian_defect == pytest.approx(expect, rel=1e-12)
        assert chk.shift_defect_at_one == 0.0


def test_distributional_shift_invariance(lump_slab_32):
    g = Grid.regular(2, 2.0, 2.0 / 64)
    v = Lump2D(c=1.0, T=1.0).sample(g, 0.0)
    chk = distributional_identity_check(Cutoff((0.0, 0.0), 1.0, 0.5), g, v_field=v)
    # ln v - ln(v/M) = ln M is constant: defect reduces to |ln M| * base
    assert chk.shift_defect == pytest.approx(
        chk.laplacian_defect * abs(np.log(10.0)), rel=1e-9
    )
    assert chk.shift_defect_at_one == 0.0


def test_distributional_support_must_be_interior():
    g = Grid.regular(2, 2.0, 2.0 / 32)
    with pytest.raises(GeometryError):
        distributional_identity_check(Cutoff((0.0, 0.0), 2.0, 0.0), g)
