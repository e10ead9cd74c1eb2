"""Power-to-log limit machinery: sweeps, norms, verdicts, persistence."""

import numpy as np
import pytest

from logdiff import (
    Cube,
    Field,
    Grid,
    Lump2D,
    MSweepResult,
    ParameterError,
    SolverConfig,
    check_mass_lower_bound,
    check_uniform_conditions,
    log_approx_error,
    run_m_sweep,
    taylor_gap_bound,
)

from conftest import lump_grid

LUMP = Lump2D(c=1.0, T=1.0)


def small_sweep(m_values=(0.4, 0.2, 0.1)):
    g = lump_grid(16)
    config = SolverConfig(
        dt=1.0 / 64, boundary="dirichlet-from-oracle", boundary_values=LUMP
    )
    return run_m_sweep(LUMP.sample(g, 0.0), m_values, config, 0.25)


@pytest.fixture(scope="module")
def sweep():
    return small_sweep()


def test_log_approx_error_decreases_in_m():
    g = Grid.regular(2, 1.0, 1.0 / 32)
    f = LUMP.sample(g, 0.0)
    prev = np.inf
    for m in (0.4, 0.2, 0.1, 0.05):
        sup_err, mean_err = log_approx_error(f, 8.0, m, 2.0)
        assert 0 < mean_err <= sup_err < prev
        prev = sup_err


def test_taylor_gap_bound_dominates():
    g = Grid.regular(2, 1.0, 1.0 / 32)
    f = LUMP.sample(g, 0.0)
    for m in (0.4, 0.1):
        sup_err, _ = log_approx_error(f, 8.0, m, 1.0)
        bound = taylor_gap_bound(8.0, m, f.values)
        # elementwise remainder bound: its max dominates the sup error
        assert sup_err <= bound.max() + 1e-12
        gap = np.abs((1.0 - (f.values / 8.0) ** m) / m - np.log(8.0 / f.values))
        assert np.all(gap <= bound + 1e-12)


def test_sweep_validates_m_values():
    g = lump_grid(16)
    config = SolverConfig(dt=1.0 / 64, boundary="neumann-zero-flux")
    initial = Field(g, np.full(g.shape, 1.0))
    with pytest.raises(ParameterError):
        run_m_sweep(initial, (0.2, 0.4), config, 0.25)
    with pytest.raises(ParameterError):
        run_m_sweep(initial, (0.4, 0.4), config, 0.25)
    with pytest.raises(ParameterError):
        run_m_sweep(initial, (1.2, 0.4), config, 0.25)


def test_sweep_entries_and_distances(sweep):
    assert [e.m for e in sweep.entries] == [0.4, 0.2, 0.1]
    assert all(e.ok for e in sweep.entries)
    dists = [e.l1_distance for e in sweep.entries]
    assert all(np.isfinite(d) and d > 0 for d in dists)
    # power solutions approach the log solution as m decreases
    assert dists[1] < dists[0]
    assert dists[2] < dists[1]
    assert all(np.isfinite(e.gamma_star) and e.gamma_star > 0 for e in sweep.entries)
    assert all(np.isfinite(e.energy_ratio) for e in sweep.entries)
    assert all(e.mass_floor > 0 for e in sweep.entries)


def test_sweep_rows_fixed_columns(sweep):
    rows = sweep.rows()
    cols = set(rows[0])
    assert all(set(r) == cols for r in rows)
    assert "fs_osc_p" in cols


def test_uniform_conditions_verdict(sweep):
    verdict = check_uniform_conditions(sweep, r=2.0, p=5.0)
    assert verdict.verdict in ("bounded", "unbounded")
    assert np.isfinite(verdict.u_max)
    assert verdict.warning == ""
    low_r = check_uniform_conditions(sweep, r=1.0, p=5.0)
    assert low_r.warning != ""


def test_mass_lower_bound(sweep):
    e_o = Cube(sweep.e_o_center, sweep.e_o_edge)
    verdict = check_mass_lower_bound(sweep, e_o, sigma_floor=1e-6)
    assert verdict.passed
    strict = check_mass_lower_bound(sweep, e_o, sigma_floor=1e6)
    assert not strict.passed


def test_sweep_save_load_roundtrip(tmp_path, sweep):
    out = tmp_path / "sweepdir"
    sweep.save(out)
    back = MSweepResult.load(out)
    assert back.m_values == sweep.m_values
    assert back.rho == pytest.approx(sweep.rho)
    for a, b in zip(back.entries, sweep.entries):
        assert a.m == b.m
        assert a.l1_distance == pytest.approx(b.l1_distance, rel=1e-12)
    assert np.array_equal(back.log_slab.values, sweep.log_slab.values)
    for m in sweep.m_values:
        assert np.array_equal(back.pme_slabs[m].values, sweep.pme_slabs[m].values)


def test_sweep_failure_slot_is_kept():
    # an impossible Newton budget forces ok=False rows without aborting
    g = lump_grid(16)
    config = SolverConfig(
        dt=1.0 / 64,
        newton_tol=1e-14,
        newton_max_iter=1,
        max_damping=0,
        boundary="dirichlet-from-oracle",
        boundary_values=LUMP,
    )
    try:
        result = run_m_sweep(LUMP.sample(g, 0.0), (0.4, 0.2), config, 0.125)
    except Exception as exc:  # the log reference itself may fail first
        from logdiff import SolverError

        assert isinstance(exc, SolverError)
        return
    assert any(not e.ok for e in result.entries)
    bad = [e for e in result.entries if not e.ok][0]
    assert np.isnan(bad.l1_distance)
    assert bad.failure != ""
