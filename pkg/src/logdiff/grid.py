"""Uniform tensor grids, fields, space-time slabs, and discrete calculus.

Geometry conventions
--------------------
All cubes are axis-aligned and specified by their *edge length*: ``Cube(y, e)``
is the closed cube centered at ``y`` with side ``e`` (so it spans
``y_i - e/2 .. y_i + e/2`` along every axis).  Internally the half-edge is
stored, but every public constructor and function takes the edge.

Quadrature is composite trapezoid with nodes on the grid points, which is
exact for affine integrands up to roundoff.  Cube bounds snap to the nearest
grid nodes; a cube whose requested bounds exceed the grid raises
:class:`~logdiff.errors.GeometryError`.

Discrete operators are second order in the interior: central differences for
the gradient and the standard ``2*dim + 1`` point stencil for the Laplacian.
Boundary entries are filled with one-sided formulas so arrays keep the grid
shape, but they are placeholders: norms and verification quantities must be
taken over interior nodes (see :func:`interior_slices`).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, ParameterError

_SNAP_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Uniform grid on a cube of edge ``edge`` centered at ``center``.

    ``npts`` nodes per axis with spacing ``spacing``, so
    ``spacing * (npts - 1) == edge``.  Halving the spacing produces a grid
    whose nodes are a superset of the original nodes (mesh nesting).
    """

    dim: int
    edge: float
    spacing: float
    center: tuple[float, ...]
    npts: int

    @staticmethod
    def regular(dim: int, edge: float, spacing: float, center=None) -> "Grid":
        if dim not in (1, 2, 3):
            raise ParameterError(f"dim must be 1, 2, or 3, got {dim}")
        if edge <= 0 or spacing <= 0:
            raise ParameterError("edge and spacing must be positive")
        ncells = edge / spacing
        n = int(round(ncells))
        if n < 2 or abs(ncells - n) > _SNAP_TOL * max(1.0, ncells):
            raise ParameterError(
                f"edge {edge} is not an integer multiple (>=2) of spacing {spacing}"
            )
        if center is None:
            center = (0.0,) * dim
        center = tuple(float(c) for c in center)
        if len(center) != dim:
            raise ParameterError("center length does not match dim")
        return Grid(dim, float(edge), float(spacing), center, n + 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.npts,) * self.dim

    def axis(self, d: int) -> np.ndarray:
        lo = self.center[d] - self.edge / 2
        return lo + self.spacing * np.arange(self.npts)

    def axes(self) -> list[np.ndarray]:
        return [self.axis(d) for d in range(self.dim)]

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def points(self) -> np.ndarray:
        """All nodes as an array of shape ``(*shape, dim)``."""
        return np.stack(self.meshgrid(), axis=-1)

    def index_of(self, point) -> tuple[int, ...]:
        """Nearest-node multi-index of ``point`` (must lie on the grid)."""
        point = np.asarray(point, dtype=float)
        idx = []
        for d in range(self.dim):
            lo = self.center[d] - self.edge / 2
            j = (point[d] - lo) / self.spacing
            jr = int(round(j))
            if jr < 0 or jr >= self.npts or abs(j - jr) > 1e-6:
                raise GeometryError(f"point {point} is not a grid node")
            idx.append(jr)
        return tuple(idx)

    def node(self, idx) -> np.ndarray:
        return np.array([self.axis(d)[idx[d]] for d in range(self.dim)])

    def sup_distance(self, center) -> np.ndarray:
        """Sup-norm distance of every node from ``center``."""
        mesh = self.meshgrid()
        d = np.abs(mesh[0] - center[0])
        for k in range(1, self.dim):
            d = np.maximum(d, np.abs(mesh[k] - center[k]))
        return d

    def cube_slices(self, cube: "Cube") -> tuple[slice, ...]:
        """Index slices of the snapped cube; raises if the cube leaves the grid."""
        out = []
        tol = _SNAP_TOL * max(1.0, self.edge)
        for d in range(self.dim):
            lo = cube.center[d] - cube.edge / 2
            hi = cube.center[d] + cube.edge / 2
            a0 = self.center[d] - self.edge / 2
            a1 = self.center[d] + self.edge / 2
            if lo < a0 - tol or hi > a1 + tol:
                raise GeometryError(
                    f"cube edge {cube.edge} at {cube.center} exceeds grid bounds on axis {d}"
                )
            i0 = int(round((lo - a0) / self.spacing))
            i1 = int(round((hi - a0) / self.spacing))
            i0 = max(i0, 0)
            i1 = min(i1, self.npts - 1)
            if i1 <= i0:
                raise GeometryError("cube is smaller than one mesh cell")
            out.append(slice(i0, i1 + 1))
        return tuple(out)


@dataclass(frozen=True)
class Cube:
    """Axis-aligned cube given by center and edge length."""

    center: tuple[float, ...]
    edge: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.edge <= 0:
            raise ParameterError("cube edge must be positive")

    @property
    def half_edge(self) -> float:
        return self.edge / 2

    def scaled(self, factor: float) -> "Cube":
        return Cube(self.center, self.edge * factor)


@dataclass(frozen=True)
class Cylinder:
    """Space-time cylinder: cube of edge ``edge`` at ``center`` times ``(t_start, t_end]``.

    Discrete window selection is closed: stored levels with
    ``t_start - tol <= tau <= t_end + tol`` participate, which is equivalent
    on samples and avoids losing endpoint levels to roundoff.
    """

    center: tuple[float, ...]
    edge: float
    t_start: float
    t_end: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.t_start < self.t_end:
            raise ParameterError("cylinder window must have t_start < t_end")
        if self.edge <= 0:
            raise ParameterError("cylinder edge must be positive")

    @property
    def cube(self) -> Cube:
        return Cube(self.center, self.edge)

    @property
    def length(self) -> float:
        return self.t_end - self.t_start


class Field:
    """Scalar samples on a grid at a fixed time.  Values are immutable."""

    __slots__ = ("grid", "values", "time")

    def __init__(self, grid: Grid, values, time: float = 0.0):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ParameterError(
                f"field shape {values.shape} does not match grid shape {grid.shape}"
            )
        values = values.copy()
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.time = float(time)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


class SpaceTimeSlab:
    """Fields on a shared grid at uniformly spaced time levels.

    ``values`` has shape ``(len(times), *grid.shape)`` and is immutable.
    ``meta`` carries solver provenance: config echo, positivity-floor trigger
    counts, and warnings.
    """

    __slots__ = ("grid", "times", "values", "meta")

    def __init__(self, grid: Grid, times, values, meta: dict | None = None):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ParameterError("slab needs at least two time levels")
        steps = np.diff(times)
        if steps.min() <= 0:
            raise ParameterError("slab times must increase")
        if (steps.max() - steps.min()) > 1e-9 * max(1.0, steps.max()):
            raise ParameterError("slab time levels must be uniformly spaced")
        if values.shape != (times.size,) + grid.shape:
            raise ParameterError("slab values shape does not match times x grid")
        times = times.copy()
        values = values.copy()
        times.setflags(write=False)
        values.setflags(write=False)
        self.grid = grid
        self.times = times
        self.values = values
        self.meta = dict(meta or {})

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def nlevels(self) -> int:
        return int(self.times.size)

    def level(self, k: int) -> Field:
        return Field(self.grid, self.values[k], time=float(self.times[k]))

    def level_index(self, t: float) -> int:
        """Index of the stored level nearest to ``t`` (must be within dt/2)."""
        k = int(round((t - self.times[0]) / self.dt))
        if k < 0 or k >= self.nlevels:
            raise GeometryError(f"time {t} outside slab range")
        if abs(self.times[k] - t) > 0.51 * self.dt:
            raise GeometryError(f"time {t} does not match a stored level")
        return k

    def window_indices(self, t_start: float, t_end: float) -> np.ndarray:
        tol = 1e-9 * max(1.0, abs(self.times[-1]))
        idx = np.nonzero((self.times >= t_start - tol) & (self.times <= t_end + tol))[0]
        if idx.size == 0:
            raise GeometryError(
                f"window ({t_start}, {t_end}] contains no stored levels"
            )
        return idx


class Cutoff:
    """C1 cutoff: 1 on the cube of edge ``rho``, 0 outside edge ``(1+sigma)*rho``.

    The profile is a cubic smoothstep in the sup-norm radial coordinate over
    the gap of width ``sigma*rho/2``; it is C1 with vanishing slope at both
    ends of the ramp, which keeps discrete Laplacians of the cutoff bounded
    and makes the divergence diagnostic decay at first order in ``h``.  The
    sharp slope bound for this profile is ``3/(sigma*rho)``; the discrete
    gradient satisfies ``max|D zeta| <= 3/(sigma*rho) * (1 + c*h)``.

    ``sigma = 0`` is accepted as the degenerate sharp-indicator limit (used by
    identity checks where the ramp must carry zero mass); its gradient bound
    is infinite.
    """

    __slots__ = ("center", "rho", "sigma")

    def __init__(self, center, rho: float, sigma: float):
        if rho <= 0:
            raise ParameterError("cutoff rho must be positive")
        if not 0.0 <= sigma < 1.0:
            raise ParameterError("cutoff sigma must lie in [0, 1)")
        self.center = tuple(float(c) for c in center)
        self.rho = float(rho)
        self.sigma = float(sigma)

    @property
    def support_edge(self) -> float:
        return (1.0 + self.sigma) * self.rho

    def support_cube(self) -> Cube:
        return Cube(self.center, self.support_edge)

    def inner_cube(self) -> Cube:
        return Cube(self.center, self.rho)

    def gradient_bound(self) -> float:
        if self.sigma == 0.0:
            return np.inf
        return 3.0 / (self.sigma * self.rho)

    def eval(self, sup_dist: np.ndarray) -> np.ndarray:
        """Profile value given sup-norm distance from the center."""
        lo = self.rho / 2
        hi = self.support_edge / 2
        if self.sigma == 0.0:
            return np.where(sup_dist <= lo * (1 + 1e-12), 1.0, 0.0)
        tau = np.clip((sup_dist - lo) / (hi - lo), 0.0, 1.0)
        return 1.0 - tau * tau * (3.0 - 2.0 * tau)

    def sample(self, grid: Grid) -> Field:
        return Field(grid, self.eval(grid.sup_distance(self.center)))


def cutoff_eval(cutoff: Cutoff, grid: Grid) -> Field:
    """Cutoff profile sampled on the grid nodes."""
    return cutoff.sample(grid)


def _trapezoid_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = 0.5
    w[-1] = 0.5
    return w


def integrate(f: Field | np.ndarray, grid_or_cube, cube: Cube | None = None) -> float:
    """Composite-trapezoid integral of ``f`` over ``cube`` (snapped to nodes).

    Accepts ``integrate(field, cube)`` or ``integrate(values, grid, cube)``.
    Exact for affine integrands up to roundoff.
    """
    if isinstance(f, Field):
        grid, values = f.grid, f.values
        cube = grid_or_cube
    else:
        grid = grid_or_cube
        values = np.asarray(f, dtype=float)
    sl = grid.cube_slices(cube)
    block = values[sl]
    for d in range(grid.dim):
        w = _trapezoid_weights(block.shape[d])
        shape = [1] * grid.dim
        shape[d] = block.shape[d]
        block = block * w.reshape(shape)
    return float(block.sum() * grid.spacing**grid.dim)


def cube_volume(grid: Grid, cube: Cube) -> float:
    """Volume of the snapped cube (consistent with :func:`integrate`)."""
    sl = grid.cube_slices(cube)
    vol = 1.0
    for s in sl:
        vol *= (s.stop - 1 - s.start) * grid.spacing
    return vol


def average(f: Field | np.ndarray, grid_or_cube, cube: Cube | None = None) -> float:
    """Mean value of ``f`` over the snapped cube."""
    if isinstance(f, Field):
        grid, cube_ = f.grid, grid_or_cube
        return integrate(f, cube_) / cube_volume(grid, cube_)
    grid = grid_or_cube
    return integrate(f, grid, cube) / cube_volume(grid, cube)


def gradient(f: Field | np.ndarray, grid: Grid | None = None) -> tuple[np.ndarray, ...]:
    """Central-difference gradient (second order interior, one-sided boundary)."""
    if isinstance(f, Field):
        grid, values = f.grid, f.values
    else:
        values = np.asarray(f, dtype=float)
    out = np.gradient(values, grid.spacing, edge_order=2)
    if grid.dim == 1:
        return (out,)
    return tuple(out)


def laplacian(f: Field | np.ndarray, grid: Grid | None = None) -> np.ndarray:
    """Standard ``2*dim + 1`` point Laplacian.

    Interior nodes get the centered stencil; boundary nodes get a shifted
    (one-sided) second difference purely as a placeholder.  Callers must
    restrict norms to interior nodes.
    """
    if isinstance(f, Field):
        grid, values = f.grid, f.values
    else:
        values = np.asarray(f, dtype=float)
    h2 = grid.spacing**2
    out = np.zeros_like(values)
    for d in range(grid.dim):
        mid = [slice(None)] * grid.dim
        lo = [slice(None)] * grid.dim
        hi = [slice(None)] * grid.dim
        mid[d] = slice(1, -1)
        lo[d] = slice(0, -2)
        hi[d] = slice(2, None)
        d2 = np.empty_like(values)
        d2[tuple(mid)] = values[tuple(hi)] - 2 * values[tuple(mid)] + values[tuple(lo)]
        # one-sided placeholders at the two boundary faces of axis d
        f0 = [slice(None)] * grid.dim
        f1 = [slice(None)] * grid.dim
        f2 = [slice(None)] * grid.dim
        f0[d], f1[d], f2[d] = 0, 1, 2
        d2[tuple(f0)] = values[tuple(f0)] - 2 * values[tuple(f1)] + values[tuple(f2)]
        f0[d], f1[d], f2[d] = -1, -2, -3
        d2[tuple(f0)] = values[tuple(f0)] - 2 * values[tuple(f1)] + values[tuple(f2)]
        out += d2
    return out / h2


def interior_slices(grid: Grid, margin: int = 1) -> tuple[slice, ...]:
    """Slices selecting nodes at least ``margin`` nodes away from the boundary."""
    if 2 * margin >= grid.npts:
        raise GeometryError("interior margin swallows the whole grid")
    return (slice(margin, grid.npts - margin),) * grid.dim


# ---------------------------------------------------------------------------
# serialization: flat binary layout, bit-exact round trip
# ---------------------------------------------------------------------------

_FIELD_MAGIC = b"LGF1"
_SLAB_MAGIC = b"LGS1"


def _pack_grid(grid: Grid) -> bytes:
    parts = [struct.pack("<Bi", grid.dim, grid.npts), struct.pack("<d", grid.spacing)]
    parts.append(struct.pack(f"<{grid.dim}d", *grid.center))
    parts.append(struct.pack("<d", grid.edge))
    return b"".join(parts)


def _unpack_grid(buf, off):
    dim, npts = struct.unpack_from("<Bi", buf, off)
    off += struct.calcsize("<Bi")
    (spacing,) = struct.unpack_from("<d", buf, off)
    off += 8
    center = struct.unpack_from(f"<{dim}d", buf, off)
    off += 8 * dim
    (edge,) = struct.unpack_from("<d", buf, off)
    off += 8
    return Grid(dim, edge, spacing, tuple(center), npts), off


def write_field(f: Field, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_FIELD_MAGIC)
        fh.write(_pack_grid(f.grid))
        fh.write(struct.pack("<d", f.time))
        fh.write(np.ascontiguousarray(f.values).tobytes())


def read_field(path) -> Field:
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != _FIELD_MAGIC:
        raise ParameterError(f"{path} is not a field file")
    grid, off = _unpack_grid(buf, 4)
    (time,) = struct.unpack_from("<d", buf, off)
    off += 8
    values = np.frombuffer(buf, dtype="<f8", offset=off).reshape(grid.shape)
    return Field(grid, values, time=time)


def write_slab(slab: SpaceTimeSlab, path) -> None:
    meta_blob = json.dumps(slab.meta, sort_keys=True, default=str).encode()
    with open(path, "wb") as fh:
        fh.write(_SLAB_MAGIC)
        fh.write(_pack_grid(slab.grid))
        fh.write(struct.pack("<i", slab.nlevels))
        fh.write(np.ascontiguousarray(slab.times).tobytes())
        fh.write(struct.pack("<i", len(meta_blob)))
        fh.write(meta_blob)
        fh.write(np.ascontiguousarray(slab.values).tobytes())


def read_slab(path) -> SpaceTimeSlab:
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != _SLAB_MAGIC:
        raise ParameterError(f"{path} is not a slab file")
    grid, off = _unpack_grid(buf, 4)
    (nlevels,) = struct.unpack_from("<i", buf, off)
    off += 4
    times = np.frombuffer(buf, dtype="<f8", offset=off, count=nlevels)
    off += 8 * nlevels
    (mlen,) = struct.unpack_from("<i", buf, off)
    off += 4
    meta = json.loads(buf[off : off + mlen].decode())
    off += mlen
    values = np.frombuffer(buf, dtype="<f8", offset=off).reshape(
        (nlevels,) + grid.shape
    )
    return SpaceTimeSlab(grid, times, values, meta=meta)
