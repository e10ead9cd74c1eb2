"""Grid, cube, cutoff, calculus helper, and serialization behavior."""

import numpy as np
import pytest

from logdiff import (
    Cube,
    Cutoff,
    Cylinder,
    Field,
    GeometryError,
    Grid,
    ParameterError,
    average,
    cube_volume,
    gradient,
    integrate,
    interior_slices,
    laplacian,
    read_field,
    read_slab,
    write_field,
    write_slab,
)
from logdiff.grid import SpaceTimeSlab


def test_regular_grid_basics():
    g = Grid.regular(2, 1.0, 1.0 / 8)
    assert g.shape == (9, 9)
    assert g.spacing == pytest.approx(0.125)
    ax = g.axis(0)
    assert ax[0] == pytest.approx(-0.5)
    assert ax[-1] == pytest.approx(0.5)
    # points() keeps the grid shape, one coordinate vector per node
    pts = g.points()
    assert pts.shape == (9, 9, 2)
    assert np.allclose(pts[4, 4], (0.0, 0.0))
    node = g.node((4, 4))
    assert node == pytest.approx((0.0, 0.0))
    assert g.index_of((0.0, 0.0)) == (4, 4)


def test_regular_grid_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        Grid.regular(4, 1.0, 0.1)
    with pytest.raises(ParameterError):
        Grid.regular(2, 1.0, 0.3)  # not an integer cell count
    with pytest.raises(ParameterError):
        Grid.regular(2, 1.0, -0.1)


def test_cube_slices_snap_and_reject():
    g = Grid.regular(2, 1.0, 1.0 / 8)
    sl = g.cube_slices(Cube((0.0, 0.0), 0.5))
    assert all(s.stop - s.start == 5 for s in sl)
    with pytest.raises(GeometryError):
        g.cube_slices(Cube((0.0, 0.0), 3.0))
    with pytest.raises(GeometryError):
        g.cube_slices(Cube((10.0, 0.0), 0.25))


def test_integrate_exact_on_constants_and_linears():
    g = Grid.regular(2, 1.0, 1.0 / 16)
    ones = np.ones(g.shape)
    for edge in (0.25, 0.5, 1.0):
        cube = Cube((0.0, 0.0), edge)
        assert integrate(ones, g, cube) == pytest.approx(edge**2, rel=1e-14)
        assert cube_volume(g, cube) == pytest.approx(edge**2, rel=1e-14)
        assert average(ones, g, cube) == pytest.approx(1.0, rel=1e-14)
    # trapezoid weights integrate affine functions exactly
    X, Y = g.meshgrid()
    lin = 2.0 * X + 3.0 * Y + 1.0
    assert integrate(lin, g, Cube((0.0, 0.0), 1.0)) == pytest.approx(1.0, rel=1e-12)


def test_gradient_exact_on_affine():
    g = Grid.regular(2, 1.0, 1.0 / 8)
    X, Y = g.meshgrid()
    gx, gy = gradient(2.0 * X - 0.5 * Y, g)
    assert np.allclose(gx, 2.0, atol=1e-12)
    assert np.allclose(gy, -0.5, atol=1e-12)


def test_laplacian_exact_on_quadratic_interior():
    g = Grid.regular(2, 1.0, 1.0 / 8)
    X, Y = g.meshgrid()
    lap = laplacian(X**2 + Y**2, g)
    inner = lap[interior_slices(g)]
    assert np.allclose(inner, 4.0, atol=1e-9)


def test_cutoff_profile_and_gradient_bound():
    cut = Cutoff((0.0, 0.0), 1.0, 0.5)
    g = Grid.regular(2, 2.0, 1.0 / 32)
    z = cut.sample(g).values
    sl_in = g.cube_slices(cut.inner_cube())
    sl_sup = g.cube_slices(cut.support_cube())
    assert np.all(z[sl_in] == 1.0)
    outside = z.copy()
    outside[sl_sup] = 0.0
    assert np.all(outside == 0.0)
    assert z.min() >= 0.0 and z.max() <= 1.0
    assert cut.gradient_bound() == pytest.approx(3.0 / (0.5 * 1.0))
    # the discrete gradient approaches the bound from below
    gx, gy = gradient(z, g)
    gmax = float(np.sqrt(gx**2 + gy**2).max())
    assert gmax <= cut.gradient_bound() * (1.0 + 2.0 * g.spacing)


def test_cutoff_sigma_zero_is_indicator():
    cut = Cutoff((0.0, 0.0), 1.0, 0.0)
    g = Grid.regular(2, 2.0, 1.0 / 16)
    z = cut.sample(g).values
    sl = g.cube_slices(cut.inner_cube())
    assert np.all(z[sl] == 1.0)
    total = z.sum()
    assert total == pytest.approx(z[sl].sum())


def test_field_immutability_and_slab_indexing():
    g = Grid.regular(2, 1.0, 0.25)
    f = Field(g, np.ones(g.shape), time=0.5)
    with pytest.raises((ValueError, RuntimeError)):
        f.values[0, 0] = 2.0
    times = np.array([0.0, 0.1, 0.2])
    vals = np.stack([np.full(g.shape, 1.0 + k) for k in range(3)])
    slab = SpaceTimeSlab(g, times, vals, meta={})
    assert slab.nlevels == 3
    assert slab.dt == pytest.approx(0.1)
    assert slab.level(1).time == pytest.approx(0.1)
    assert slab.level_index(0.2) == 2
    assert list(slab.window_indices(0.05, 0.2)) == [1, 2]
    with pytest.raises(GeometryError):
        slab.level_index(0.35)
    with pytest.raises(GeometryError):
        slab.window_indices(0.31, 0.32)


def test_field_io_roundtrip(tmp_path):
    g = Grid.regular(2, 1.0, 1.0 / 8)
    rng = np.random.default_rng(0)
    f = Field(g, rng.uniform(0.5, 2.0, g.shape), time=0.75)
    path = tmp_path / "f.field"
    write_field(f, path)
    back = read_field(path)
    assert back.time == f.time
    assert np.array_equal(back.values, f.values)
    assert back.grid.shape == g.shape
    assert back.grid.spacing == g.spacing


def test_slab_io_roundtrip(tmp_path):
    g = Grid.regular(2, 0.5, 1.0 / 16)
    rng = np.random.default_rng(1)
    times = np.linspace(0.0, 0.3, 4)
    vals = rng.uniform(0.5, 2.0, (4,) + g.shape)
    slab = SpaceTimeSlab(g, times, vals, meta={"source": "test", "k": 3})
    path = tmp_path / "s.slab"
    write_slab(slab, path)
    back = read_slab(path)
    assert np.array_equal(back.times, slab.times)
    assert np.array_equal(back.values, slab.values)
    assert back.meta["source"] == "test"
    assert back.meta["k"] == 3


def test_read_rejects_wrong_magic(tmp_path):
    p = tmp_path / "junk.slab"
    p.write_bytes(b"XXXX garbage")
    with pytest.raises(ParameterError):
        read_slab(p)
    with pytest.raises(ParameterError):
        read_field(p)


def test_cylinder_accessors():
    cyl = Cylinder((0.0, 0.0), 0.5, 0.1, 0.4)
    assert cyl.cube.edge == pytest.approx(0.5)
    assert cyl.length == pytest.approx(0.3)
