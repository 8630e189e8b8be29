"""Dyadic grids and piecewise-constant functions on symmetric boxes.

Conventions used throughout the package:

- The ambient domain is the box ``[-2**box_level, 2**box_level]**dim``.
- Cells are half-open, ``[a, a + h)`` per axis with side ``h = 2**cell_exp``,
  so every point of the domain belongs to exactly one cell and cube borders
  are never ambiguous.
- A function is one real value per cell and is identically 0 outside the box.
- Whether a cell belongs to a ball or box region is decided by its center.
  A cell counts as *outside* radius ``r`` when its center is not in the open
  region, i.e. the discrete complement realises ``{|x| >= r}``.
- All dyadic lengths are carried as integer exponents, so cells, cubes and
  truncation boxes align exactly, with no floating-point drift.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ModelError

__all__ = [
    "Grid",
    "GridFunction",
    "DyadicPartition",
    "make_grid",
    "translate",
    "restrict_outside",
    "restrict_inside",
    "inside_mask",
    "outside_mask",
    "dyadic_partition",
    "cube_average",
    "all_cube_averages",
    "ball_average_field",
    "shift_stencil",
]


@dataclass(frozen=True)
class Grid:
    """Uniform grid of half-open cells tiling ``[-2**box_level, 2**box_level]**dim``."""

    dim: int
    box_level: int
    cell_exp: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ModelError(f"dim must be 1 or 2, got {self.dim}")
        if self.cell_exp > self.box_level:
            raise ModelError(
                f"cell_exp={self.cell_exp} must not exceed box_level={self.box_level}"
            )

    @property
    def cell_side(self) -> float:
        return 2.0 ** self.cell_exp

    @property
    def cells_per_axis(self) -> int:
        return 2 ** (self.box_level - self.cell_exp + 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells_per_axis,) * self.dim

    @property
    def n_cells(self) -> int:
        return self.cells_per_axis ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.cell_side ** self.dim

    def axis_centers(self) -> np.ndarray:
        """Cell centers along one axis; they sit at odd multiples of h/2."""
        half = self.cells_per_axis // 2
        return (np.arange(self.cells_per_axis) - half + 0.5) * self.cell_side

    def center_mesh(self) -> list[np.ndarray]:
        """Per-axis center coordinates broadcast to the full cell shape."""
        axes = [self.axis_centers() for _ in range(self.dim)]
        return list(np.meshgrid(*axes, indexing="ij"))

    def center_radii(self) -> np.ndarray:
        """Euclidean norm of every cell center."""
        mesh = self.center_mesh()
        return np.sqrt(sum(c * c for c in mesh))

    def center_maxnorm(self) -> np.ndarray:
        """Sup-norm of every cell center."""
        mesh = self.center_mesh()
        return np.maximum.reduce([np.abs(c) for c in mesh])


def make_grid(dim: int, box_level: int, cell_exp: int) -> Grid:
    """Build a grid, validating the exponent ordering."""
    return Grid(dim=dim, box_level=box_level, cell_exp=cell_exp)


@dataclass(frozen=True)
class GridFunction:
    """A finite value per cell of a fixed grid; zero outside the ambient box.

    Values are stored as a read-only float64 array of shape ``grid.shape``.
    Functions on different grids never combine; there is no interpolation.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != self.grid.shape:
            raise ModelError(
                f"values shape {arr.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ModelError("grid function values must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape))

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, values)

    def _require_same_grid(self, other: "GridFunction") -> None:
        if self.grid != other.grid:
            raise ModelError("grid functions live on different grids")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._require_same_grid(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._require_same_grid(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)

    def __abs__(self) -> "GridFunction":
        return GridFunction(self.grid, np.abs(self.values))


def _as_offsets(grid: Grid, shift: float | tuple | list | np.ndarray) -> tuple[int, ...]:
    """Convert a translation vector to integer cell offsets, exactly."""
    vec = np.atleast_1d(np.asarray(shift, dtype=np.float64))
    if vec.shape != (grid.dim,):
        raise ModelError(f"shift must have {grid.dim} coordinates, got shape {vec.shape}")
    offsets = []
    for y in vec:
        k = round(y / grid.cell_side)
        # dyadic cell sides make k*h exact, so exact equality is the right test
        if k * grid.cell_side != y:
            raise ModelError(
                f"shift coordinate {y!r} is not an exact multiple of the cell side "
                f"{grid.cell_side!r}"
            )
        offsets.append(int(k))
    return tuple(offsets)


def _shift_axis(values: np.ndarray, k: int, axis: int) -> np.ndarray:
    """Shift by k cells along one axis, filling with zeros (no wraparound)."""
    if k == 0:
        return values
    out = np.zeros_like(values)
    n = values.shape[axis]
    if abs(k) >= n:
        return out
    src = [slice(None)] * values.ndim
    dst = [slice(None)] * values.ndim
    if k > 0:
        dst[axis] = slice(k, None)
        src[axis] = slice(None, n - k)
    else:
        dst[axis] = slice(None, n + k)
        src[axis] = slice(-k, None)
    out[tuple(dst)] = values[tuple(src)]
    return out


def _shift_cells(values: np.ndarray, offsets: tuple[int, ...]) -> np.ndarray:
    out = values
    for axis, k in enumerate(offsets):
        out = _shift_axis(out, k, axis)
    return out


def translate(f: GridFunction, shift) -> GridFunction:
    """Translate ``f`` by a grid-aligned vector: (tau_y f)(x) = f(x - y).

    Mass shifted past the box boundary is discarded and zeros are shifted in,
    which is exactly the ambient convention of functions vanishing outside the
    box.  Off-grid shifts are rejected rather than rounded.
    """
    offsets = _as_offsets(f.grid, shift)
    return GridFunction(f.grid, _shift_cells(f.values, offsets))


def inside_mask(grid: Grid, radius: float, region: str = "ball") -> np.ndarray:
    """Cells whose center lies in the open ball or box of the given radius."""
    if radius <= 0:
        raise ModelError(f"region radius must be positive, got {radius}")
    if region == "ball":
        return grid.center_radii() < radius
    if region == "box":
        return grid.center_maxnorm() < radius
    raise ModelError(f"unknown region kind {region!r}")


def outside_mask(grid: Grid, radius: float, region: str = "ball") -> np.ndarray:
    return ~inside_mask(grid, radius, region)


def restrict_outside(f: GridFunction, radius: float, region: str = "ball") -> GridFunction:
    """Zero out every cell whose center lies in the open region of given radius."""
    mask = outside_mask(f.grid, radius, region)
    return GridFunction(f.grid, np.where(mask, f.values, 0.0))


def restrict_inside(f: GridFunction, radius: float, region: str = "ball") -> GridFunction:
    """Complementary restriction; restrict_inside + restrict_outside == f exactly."""
    mask = inside_mask(f.grid, radius, region)
    return GridFunction(f.grid, np.where(mask, f.values, 0.0))


@dataclass(frozen=True)
class DyadicPartition:
    """Partition of the box ``[-2**box_level, 2**box_level]**dim`` into cubes
    of side ``2**cube_exp``.

    Cubes are half-open, aligned to the cell lattice, and enumerated row-major
    by their lower corner, so a flat cube index is meaningful across runs.
    """

    grid: Grid
    box_level: int
    cube_exp: int

    def __post_init__(self):
        if not (self.grid.cell_exp <= self.cube_exp <= self.box_level <= self.grid.box_level):
            raise ModelError(
                "need cell_exp <= cube_exp <= box_level <= grid.box_level, got "
                f"cell_exp={self.grid.cell_exp}, cube_exp={self.cube_exp}, "
                f"box_level={self.box_level}, grid.box_level={self.grid.box_level}"
            )

    @property
    def cubes_per_axis(self) -> int:
        return 2 ** (self.box_level - self.cube_exp + 1)

    @property
    def cells_per_cube_axis(self) -> int:
        return 2 ** (self.cube_exp - self.grid.cell_exp)

    @property
    def n_cubes(self) -> int:
        return self.cubes_per_axis ** self.grid.dim

    @property
    def cell_start(self) -> int:
        """Cell index of the partition's lower corner along each axis."""
        return self.grid.cells_per_axis // 2 - 2 ** (self.box_level - self.grid.cell_exp)

    @property
    def cells_per_axis_inside(self) -> int:
        return self.cubes_per_axis * self.cells_per_cube_axis

    def inside_slices(self) -> tuple[slice, ...]:
        lo = self.cell_start
        hi = lo + self.cells_per_axis_inside
        return tuple(slice(lo, hi) for _ in range(self.grid.dim))

    def cube_multi_index(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(flat, (self.cubes_per_axis,) * self.grid.dim))

    def cube_slices(self, flat: int) -> tuple[slice, ...]:
        """Cell slices (into the full grid array) covered by one cube."""
        multi = self.cube_multi_index(flat)
        c = self.cells_per_cube_axis
        lo = self.cell_start
        return tuple(slice(lo + i * c, lo + (i + 1) * c) for i in multi)

    def cube_corner(self, flat: int) -> tuple[float, ...]:
        """Coordinates of the cube's lower corner."""
        multi = self.cube_multi_index(flat)
        side = 2.0 ** self.cube_exp
        origin = -(2.0 ** self.box_level)
        return tuple(origin + i * side for i in multi)


def dyadic_partition(grid: Grid, box_level: int, cube_exp: int) -> DyadicPartition:
    return DyadicPartition(grid=grid, box_level=box_level, cube_exp=cube_exp)


def _block_view(arr: np.ndarray, part: DyadicPartition) -> np.ndarray:
    """Reshape the partition's interior so cube averages reduce over cell axes."""
    inner = arr[part.inside_slices()]
    b, c = part.cubes_per_axis, part.cells_per_cube_axis
    if part.grid.dim == 1:
        return inner.reshape(b, c)
    return inner.reshape(b, c, b, c)


def all_cube_averages(f: GridFunction, part: DyadicPartition) -> np.ndarray:
    """Exact mean of f over every cube, flat row-major by cube corner.

    Cells within a cube have equal measure and their count is a power of two,
    so the mean is an exact finite sum with no quadrature error.
    """
    blocks = _block_view(f.values, part)
    if f.grid.dim == 1:
        return blocks.mean(axis=1)
    return blocks.mean(axis=(1, 3)).reshape(-1)


def cube_average(f: GridFunction, part: DyadicPartition, cube_index: int) -> float:
    """Mean of f over a single cube of the partition."""
    if not 0 <= cube_index < part.n_cubes:
        raise ModelError(f"cube index {cube_index} out of range 0..{part.n_cubes - 1}")
    if f.grid != part.grid:
        raise ModelError("function and partition live on different grids")
    return float(f.values[part.cube_slices(cube_index)].mean())


def shift_stencil(
    grid: Grid, radius: float, kind: str = "ball", include_zero: bool = False
) -> list[tuple[int, ...]]:
    """Grid-aligned shift vectors (in cells) with |k*h| <= radius, closed.

    ``kind="ball"`` measures the Euclidean norm, ``kind="box"`` the sup norm;
    with the closed inequality the box stencil at radius 2**i realises the
    whole dyadic box of level i.  Deterministic lexicographic order.
    """
    if kind not in ("ball", "box"):
        raise ModelError(f"unknown stencil kind {kind!r}")
    h = grid.cell_side
    kmax = int(np.floor(radius / h + 1e-12))
    offsets = []
    for k in itertools.product(range(-kmax, kmax + 1), repeat=grid.dim):
        if not include_zero and all(c == 0 for c in k):
            continue
        if kind == "ball":
            if sum((c * h) ** 2 for c in k) > radius * radius:
                continue
        else:
            if max(abs(c) for c in k) * h > radius:
                continue
        offsets.append(k)
    return offsets


def ball_average_field(f: GridFunction, radius: float) -> GridFunction:
    """Average of f over the closed ball of given radius around each cell center.

    The average runs over cells whose centers lie within ``radius`` of the
    target center, which is the same as averaging the translates of f over the
    symmetric stencil; beyond the box the ambient zeros participate.  Radii
    below half a cell side leave no admissible stencil and are rejected.
    """
    h = f.grid.cell_side
    if radius < h / 2:
        raise ModelError(f"averaging radius {radius} is below half a cell side {h / 2}")
    stencil = shift_stencil(f.grid, radius, kind="ball", include_zero=True)
    acc = np.zeros_like(f.values)
    for k in stencil:
        acc += _shift_cells(f.values, k)
    return GridFunction(f.grid, acc / len(stencil))
