"""Analytic primitives sampled onto grids at cell centers.

A profile evaluates pointwise on arrays of coordinates; ``sample`` turns it
into a GridFunction by evaluating at every cell center.  The table profile
bypasses evaluation and supplies raw per-cell values directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError
from .grid import Grid, GridFunction

__all__ = [
    "Constant",
    "Gaussian",
    "Bump",
    "Indicator",
    "PowerLaw",
    "Table",
    "sample",
]


def _center_vector(value, dim: int) -> np.ndarray:
    vec = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if vec.shape == (1,) and dim == 2:
        vec = np.repeat(vec, 2)
    if vec.shape != (dim,):
        raise ModelError(f"center must have {dim} coordinates")
    return vec


def _radial_distance(mesh: list[np.ndarray], center: np.ndarray) -> np.ndarray:
    return np.sqrt(sum((c - x0) ** 2 for c, x0 in zip(mesh, center)))


@dataclass(frozen=True)
class Constant:
    value: float

    def evaluate(self, mesh: list[np.ndarray]) -> np.ndarray:
        return np.full_like(mesh[0], float(self.value))


@dataclass(frozen=True)
class Gaussian:
    """amplitude * exp(-|x - center|^2 / (2 sigma^2))."""

    center: float | tuple = 0.0
    sigma: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ModelError("gaussian sigma must be positive")

    def evaluate(self, mesh: list[np.ndarray]) -> np.ndarray:
        c = _center_vector(self.center, len(mesh))
        r2 = sum((x - x0) ** 2 for x, x0 in zip(mesh, c))
        return self.amplitude * np.exp(-r2 / (2.0 * self.sigma ** 2))


@dataclass(frozen=True)
class Bump:
    """Smooth bump supported on the open ball of the given radius, peak = amplitude."""

    center: float | tuple = 0.0
    radius: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ModelError("bump radius must be positive")

    def evaluate(self, mesh: list[np.ndarray]) -> np.ndarray:
        c = _center_vector(self.center, len(mesh))
        t2 = (_radial_distance(mesh, c) / self.radius) ** 2
        out = np.zeros_like(mesh[0])
        inside = t2 < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - t2[inside]))
        return out


@dataclass(frozen=True)
class Indicator:
    """Indicator of the open ball of the given radius."""

    center: float | tuple = 0.0
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ModelError("indicator radius must be positive")

    def evaluate(self, mesh: list[np.ndarray]) -> np.ndarray:
        c = _center_vector(self.center, len(mesh))
        return np.where(_radial_distance(mesh, c) < self.radius, 1.0, 0.0)


@dataclass(frozen=True)
class PowerLaw:
    """|x|**exponent, optionally cut to the box of half-width ``support``.

    Cell centers never sit at the origin, so negative exponents stay finite.
    """

    exponent: float
    support: float | None = None

    def evaluate(self, mesh: list[np.ndarray]) -> np.ndarray:
        r = np.sqrt(sum(c * c for c in mesh))
        out = r ** self.exponent
        if self.support is not None:
            if self.support <= 0:
                raise ModelError("power-law support must be positive")
            maxnorm = np.maximum.reduce([np.abs(c) for c in mesh])
            out = np.where(maxnorm < self.support, out, 0.0)
        return out


@dataclass(frozen=True)
class Table:
    """Raw per-cell values; the shape must match the target grid exactly."""

    values: tuple = field(default=())

    def evaluate(self, mesh: list[np.ndarray]) -> np.ndarray:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != mesh[0].shape:
            raise ModelError(
                f"table shape {arr.shape} does not match grid shape {mesh[0].shape}"
            )
        return arr


def sample(profile, grid: Grid) -> GridFunction:
    """Evaluate a profile at every cell center of the grid."""
    mesh = grid.center_mesh()
    values = profile.evaluate(mesh)
    if not np.all(np.isfinite(values)):
        raise ModelError(f"profile {profile!r} produced non-finite samples")
    return GridFunction(grid, values)
