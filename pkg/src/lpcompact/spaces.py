"""Weighted Lp norms on grids, lattice axiom checks and Muckenhoupt constants.

The weight is an arbitrary nonnegative grid function; zeros are allowed and
every operation states how it treats cells of zero weighted measure.  For
p < 1 the same formula defines a quasi-norm and the checks that rely on the
triangle inequality refuse to run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .grid import (
    DyadicPartition,
    Grid,
    GridFunction,
    _block_view,
    dyadic_partition,
    inside_mask,
)

__all__ = [
    "WeightedSpace",
    "AxiomCheck",
    "AxiomReport",
    "Witness",
    "weighted_norm",
    "weighted_distance",
    "power_norm",
    "indicator_norm",
    "check_lattice_axioms",
    "check_indicator_membership",
    "finiteness_witness",
    "l1_embedding_constant",
    "l1_embedding_sweep",
    "dyadic_cube_family",
    "ap_constant",
    "a1_constant",
]


@dataclass(frozen=True)
class WeightedSpace:
    """Lp space over a grid with a nonnegative cellwise weight."""

    p: float
    weight: GridFunction

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ModelError(f"exponent p must be positive and finite, got {self.p}")
        if np.any(self.weight.values < 0):
            raise ModelError("weight must be nonnegative")

    @property
    def grid(self) -> Grid:
        return self.weight.grid

    @property
    def strict(self) -> bool:
        """True when the weight is positive on every cell."""
        return bool(np.all(self.weight.values > 0))

    @property
    def conjugate(self) -> float:
        if self.p <= 1:
            raise ModelError("conjugate exponent needs p > 1")
        return self.p / (self.p - 1.0)


def weighted_norm(f: GridFunction, space: WeightedSpace) -> float:
    """(sum |f|^p * weight * cell_volume) ** (1/p); a quasi-norm for p < 1."""
    if f.grid != space.grid:
        raise ModelError("function and space live on different grids")
    p = space.p
    total = np.sum(np.abs(f.values) ** p * space.weight.values) * space.grid.cell_volume
    return float(total ** (1.0 / p))


def weighted_distance(f: GridFunction, g: GridFunction, space: WeightedSpace) -> float:
    return weighted_norm(f - g, space)


def power_norm(f: GridFunction, space: WeightedSpace, n_power: int) -> float:
    """Norm of |f|**n_power in the space, taken to the 1/n_power.

    Equals the norm of f in the companion space with exponent p * n_power and
    the same weight; the root-transfer construction relies on this identity.
    """
    if n_power < 1:
        raise ModelError("power must be a positive integer")
    powered = GridFunction(f.grid, np.abs(f.values) ** n_power)
    return weighted_norm(powered, space) ** (1.0 / n_power)


def indicator_norm(space: WeightedSpace, mask: np.ndarray) -> float:
    """Norm of the indicator of a union of cells."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != space.grid.shape:
        raise ModelError("mask shape does not match the grid")
    total = np.sum(space.weight.values[mask]) * space.grid.cell_volume
    return float(total ** (1.0 / space.p))


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class AxiomReport:
    checks: tuple[AxiomCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> AxiomCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _null_cells(space: WeightedSpace) -> np.ndarray:
    return space.weight.values == 0


def check_lattice_axioms(space, probes, chains=()) -> AxiomReport:
    """Verify the norm-lattice axioms on finite probe material.

    * definiteness: norm vanishes iff the probe vanishes off the null cells
      (zero weighted measure); probes that are nonzero only on null cells pass
      and the detail records the fact.
    * absolute value: the norm of |f| equals the norm of f.
    * monotonicity: for every probe pair with 0 <= g <= f pointwise the norms
      are ordered; pairs are discovered by scanning the probe list.
    * monotone limits: each chain must rise pointwise and its norms must rise
      to the norm of the pointwise supremum.
    """
    null = _null_cells(space)
    checks = []

    failed = None
    noted = ""
    for idx, f in enumerate(probes):
        nrm = weighted_norm(f, space)
        ae_zero = bool(np.all(f.values[~null] == 0))
        if (nrm == 0.0) != ae_zero:
            failed = f"probe {idx}: norm {nrm!r} vs a.e.-zero {ae_zero}"
            break
        if nrm == 0.0 and np.any(f.values != 0):
            noted = f"probe {idx} is nonzero only on weight-null cells"
    checks.append(AxiomCheck("definiteness", failed is None, failed or noted))

    failed = None
    for idx, f in enumerate(probes):
        if weighted_norm(abs(f), space) != weighted_norm(f, space):
            failed = f"probe {idx}: norm changed under absolute value"
            break
    checks.append(AxiomCheck("absolute_value", failed is None, failed or ""))

    failed = None
    n_pairs = 0
    for i, g in enumerate(probes):
        if np.any(g.values < 0):
            continue
        for j, f in enumerate(probes):
            if i == j or not np.all(g.values <= f.values):
                continue
            n_pairs += 1
            if weighted_norm(g, space) > weighted_norm(f, space):
                failed = f"probes {i} <= {j} but norms are not ordered"
                break
        if failed:
            break
    checks.append(
        AxiomCheck("monotonicity", failed is None, failed or f"{n_pairs} ordered pairs checked")
    )

    failed = None
    for c_idx, chain in enumerate(chains):
        seq = list(chain)
        if not seq:
            continue
        prev_vals = None
        prev_norm = 0.0
        for s_idx, f in enumerate(seq):
            if prev_vals is not None and np.any(f.values < prev_vals):
                failed = f"chain {c_idx} is not pointwise nondecreasing at step {s_idx}"
                break
            nrm = weighted_norm(f, space)
            if nrm < prev_norm * (1 - 1e-12):
                failed = f"chain {c_idx}: norms decreased at step {s_idx}"
                break
            prev_vals, prev_norm = f.values, nrm
        if failed:
            break
        # on a finite grid the supremum of a monotone chain is its last element;
        # recompute it as a pointwise max so a wrong chain cannot slip through
        sup = np.maximum.reduce([f.values for f in seq])
        limit_norm = weighted_norm(GridFunction(space.grid, sup), space)
        if not math.isclose(prev_norm, limit_norm, rel_tol=1e-12, abs_tol=1e-300):
            failed = f"chain {c_idx}: norms rise to {prev_norm!r} but the supremum has norm {limit_norm!r}"
            break
    checks.append(AxiomCheck("monotone_limits", failed is None, failed or ""))

    return AxiomReport(tuple(checks))


def check_indicator_membership(space: WeightedSpace, mask: np.ndarray) -> AxiomCheck:
    """Indicators of finite cell unions must have finite norm."""
    nrm = indicator_norm(space, mask)
    return AxiomCheck("indicator_membership", math.isfinite(nrm), f"norm {nrm!r}")


@dataclass(frozen=True)
class Witness:
    cell: tuple[int, ...]
    center: tuple[float, ...]


def finiteness_witness(space: WeightedSpace, f: GridFunction, mask: np.ndarray) -> Witness:
    """A cell of positive weight in the set where f is finite.

    Grid functions are finite everywhere by construction, so the witness is
    the first positive-weight cell of the set in row-major order; it realises
    the principle that a finite weighted norm forces finiteness somewhere on
    every set of nonzero indicator norm.  Sets of zero indicator norm admit no
    witness and are rejected.
    """
    mask = np.asarray(mask, dtype=bool)
    if f.grid != space.grid or mask.shape != space.grid.shape:
        raise ModelError("witness arguments live on different grids")
    if indicator_norm(space, mask) == 0.0:
        raise ModelError("the set has zero weighted measure; no witness exists")
    eligible = mask & (space.weight.values > 0)
    flat = int(np.flatnonzero(eligible.reshape(-1))[0])
    cell = tuple(int(i) for i in np.unravel_index(flat, space.grid.shape))
    axis = space.grid.axis_centers()
    return Witness(cell=cell, center=tuple(float(axis[i]) for i in cell))


def l1_embedding_constant(space: WeightedSpace, mask: np.ndarray) -> float:
    """Discrete dual mass controlling integral-versus-norm comparison on a set.

    For p > 1 this is sum_A weight**(1 - p') * cell_volume (a proxy for the
    p'-th power of the best constant in int_A |f| <= C(A) ||f||); for p = 1 it
    is the essential sup of 1/weight on the set.  Weight zeros inside the set
    produce +inf, the honest report of failure.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != space.grid.shape:
        raise ModelError("mask shape does not match the grid")
    w = space.weight.values[mask]
    if w.size == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        if space.p == 1.0:
            return float(np.max(np.where(w > 0, 1.0 / w, np.inf)))
        dual = w ** (1.0 - space.conjugate)
    return float(np.sum(dual) * space.grid.cell_volume)


def l1_embedding_sweep(
    weight_profile,
    p: float,
    dim: int,
    box_level: int,
    cell_exps,
    region_radius: float,
    region: str = "ball",
) -> list[float]:
    """Dual mass of a fixed region under grid refinement.

    Boundedness along the sweep indicates the embedding constant is finite;
    steady geometric growth is the discrete signature of divergence.
    """
    from .profiles import sample

    out = []
    for ce in cell_exps:
        grid = Grid(dim=dim, box_level=box_level, cell_exp=ce)
        space = WeightedSpace(p, sample(weight_profile, grid))
        out.append(l1_embedding_constant(space, inside_mask(grid, region_radius, region)))
    return out


def dyadic_cube_family(grid: Grid) -> list[DyadicPartition]:
    """All grid-aligned dyadic cube scales up to the box, one partition each."""
    return [
        dyadic_partition(grid, grid.box_level, i)
        for i in range(grid.cell_exp, grid.box_level + 1)
    ]


def _block_means(values: np.ndarray, part: DyadicPartition) -> np.ndarray:
    blocks = _block_view(values, part)
    if part.grid.dim == 1:
        return blocks.mean(axis=1)
    return blocks.mean(axis=(1, 3))


def _block_mins(values: np.ndarray, part: DyadicPartition) -> np.ndarray:
    blocks = _block_view(values, part)
    if part.grid.dim == 1:
        return blocks.min(axis=1)
    return blocks.min(axis=(1, 3))


def ap_constant(weight: GridFunction, p: float, cube_family=None) -> float:
    """Max over dyadic cubes of (avg w)^(1/p) (avg w^(1-p'))^(1/p').

    Each cube is evaluated in normalized form, mean((w / avg w)^(1-p'))^(1/p'),
    which is algebraically identical and makes constant weights give exactly
    1.0: the normalization is cellwise x/x = 1.0, so the dual mean is a sum of
    exact ones.  Cubes where the weight vanishes identically report +inf, as
    does a dual average that diverges because of isolated zeros.
    """
    if p <= 1:
        raise ModelError("ap_constant needs p > 1")
    pc = p / (p - 1.0)
    dual_exp = 1.0 - pc
    if cube_family is None:
        cube_family = dyadic_cube_family(weight.grid)
    best = 0.0
    for part in cube_family:
        if part.grid != weight.grid:
            raise ModelError("cube family does not match the weight's grid")
        blocks = _block_view(weight.values, part)
        axes = (1,) if part.grid.dim == 1 else (1, 3)
        sel = (slice(None), None) if part.grid.dim == 1 else (slice(None), None, slice(None), None)
        wavg = blocks.mean(axis=axes)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.mean((blocks / wavg[sel]) ** dual_exp, axis=axes)
            vals = np.where(wavg > 0, ratio ** (1.0 / pc), np.inf)
        best = max(best, float(np.max(vals)))
    return best


def a1_constant(weight: GridFunction, cube_family=None) -> float:
    """Max over dyadic cubes of (avg w) / (min w); +inf when the min is zero."""
    if cube_family is None:
        cube_family = dyadic_cube_family(weight.grid)
    best = 0.0
    for part in cube_family:
        if part.grid != weight.grid:
            raise ModelError("cube family does not match the weight's grid")
        wavg = _block_means(weight.values, part)
        wmin = _block_mins(weight.values, part)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(wmin > 0, wavg / wmin, np.where(wavg > 0, np.inf, 1.0))
        best = max(best, float(np.max(vals)))
    return best
