"""Construction and independent validation of finite epsilon-nets.

The builder follows the constructive recipe behind the compactness criteria:
split the target epsilon into three equal budgets, spend the first on
truncation to a dyadic box (smallest level whose tail modulus fits), the
second on projection onto cube averages (coarsest dyadic mesh whose
translation modulus fits a 2**-dim share of the budget, which the projection
inflates by at most 2**dim), and the third on rounding the finitely many cube
coefficients to a step lattice.  Every stage is measured, not assumed: the
certificate stores the realised budget and the validator recomputes all
member-to-net distances from scratch.

For weights that vanish on whole cubes the projector has a dedicated variant
that pins those coefficients to zero; the norm cannot see values supported on
weight-null cubes, so the error budget is unaffected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import HypothesisError, ModelError
from .grid import (
    DyadicPartition,
    Grid,
    GridFunction,
    dyadic_partition,
    inside_mask,
    restrict_inside,
)
from .moduli import Family, tail_modulus, translation_modulus
from .spaces import WeightedSpace, indicator_norm, weighted_norm

__all__ = [
    "EpsilonBudget",
    "NetPlan",
    "NetCertificate",
    "PowerTransferRecord",
    "ValidationReport",
    "GreedyNet",
    "select_tail_level",
    "select_mesh",
    "null_cube_mask",
    "cube_witnesses",
    "cube_projection",
    "expand_coefficients",
    "projection_error",
    "quantize_net",
    "QuantizedNet",
    "greedy_net",
    "build_certificate",
    "validate_certificate",
    "certificate_to_dict",
    "certificate_from_dict",
    "save_certificate",
    "load_certificate",
]

VARIANTS = ("banach", "vanishing")


@dataclass(frozen=True)
class EpsilonBudget:
    """Measured worst-case contribution of each stage; each must stay below
    a third of the target epsilon."""

    tail: float
    projection: float
    quantization: float


@dataclass(frozen=True)
class NetPlan:
    epsilon: float
    box_level: int
    cube_exp: int
    quant_step: float
    coeff_bound: float
    budget: EpsilonBudget

    def __post_init__(self):
        third = self.epsilon / 3.0
        if not (self.budget.tail < third and self.budget.projection < third):
            raise ModelError("tail and projection budgets must stay below epsilon/3")
        if self.budget.quantization > third:
            raise ModelError("quantization budget exceeded epsilon/3")


@dataclass(frozen=True)
class PowerTransferRecord:
    """Book-keeping for certificates built through the power transfer."""

    p: float
    n_power: int
    epsilon: float
    eps_prime: float
    c_max: float
    audit_distances: tuple[float, ...]


@dataclass(frozen=True)
class NetCertificate:
    """A finite net together with everything needed to re-check it."""

    plan: NetPlan
    grid: Grid
    space_p: float
    variant: str
    net_elements: np.ndarray  # (n_net, n_cubes), row-major cube order
    assignment: tuple[int, ...]
    distances: tuple[float, ...]
    labels: tuple[str, ...]
    null_cubes: tuple[int, ...] = ()
    witness_cells: tuple[int, ...] = ()
    quasi: PowerTransferRecord | None = None

    def __post_init__(self):
        arr = np.asarray(self.net_elements, dtype=np.float64)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "net_elements", arr)

    @property
    def partition(self) -> DyadicPartition:
        return dyadic_partition(self.grid, self.plan.box_level, self.plan.cube_exp)

    @property
    def n_net(self) -> int:
        return int(self.net_elements.shape[0])


def select_tail_level(family: Family, space: WeightedSpace, epsilon: float) -> int:
    """Smallest dyadic box level whose box-tail modulus is below epsilon/3."""
    if epsilon <= 0:
        raise ModelError("epsilon must be positive")
    grid = family.grid
    threshold = epsilon / 3.0
    last = math.inf
    for m in range(grid.cell_exp, grid.box_level + 1):
        last = tail_modulus(family, space, 2.0 ** m, region="box")
        if last < threshold:
            return m
    raise HypothesisError(
        "vanishing-at-infinity",
        f"select_tail_level: tail modulus is {last:.6g} at the full box (level "
        f"{grid.box_level}), needs < {threshold:.6g}; the family does not vanish "
        f"at infinity at this resolution",
    )


def select_mesh(
    family: Family, space: WeightedSpace, epsilon: float, max_exp: int | None = None
) -> int:
    """Largest cube exponent whose box-shift modulus is below 2**-dim * eps/3.

    The translation modulus is nondecreasing in the radius (stencils nest), so
    the scan walks up from the cell scale and stops at the first failure.
    """
    if epsilon <= 0:
        raise ModelError("epsilon must be positive")
    grid = family.grid
    hi = grid.box_level if max_exp is None else max_exp
    threshold = 2.0 ** (-grid.dim) * epsilon / 3.0
    best = None
    value = math.inf
    for i in range(grid.cell_exp, hi + 1):
        value = translation_modulus(family, space, 2.0 ** i, stencil="box")
        if value < threshold:
            best = i
        else:
            break
    if best is None:
        raise HypothesisError(
            "equicontinuity",
            f"select_mesh: translation modulus is {value:.6g} already at one cell "
            f"(shift {grid.cell_side}), needs < {threshold:.6g}; the family is not "
            f"equicontinuous at this resolution",
        )
    return best


def null_cube_mask(part: DyadicPartition, space: WeightedSpace) -> np.ndarray:
    """Cubes on which the weight vanishes identically (flat, row-major)."""
    if part.grid != space.grid:
        raise ModelError("partition and space live on different grids")
    flags = np.empty(part.n_cubes, dtype=bool)
    for k in range(part.n_cubes):
        flags[k] = not np.any(space.weight.values[part.cube_slices(k)] > 0)
    return flags


def cube_witnesses(part: DyadicPartition, space: WeightedSpace) -> tuple[int, ...]:
    """Per cube, the flat grid index of its first positive-weight cell, -1 if none.

    These are the finiteness witnesses that make the zeroed projector well
    defined: every cube that the norm can see contains a cell of positive
    weight, and grid functions are finite there by construction.
    """
    shape = part.grid.shape
    out = []
    for k in range(part.n_cubes):
        block = space.weight.values[part.cube_slices(k)] > 0
        if not np.any(block):
            out.append(-1)
            continue
        local = np.unravel_index(int(np.flatnonzero(block.reshape(-1))[0]), block.shape)
        sl = part.cube_slices(k)
        cell = tuple(s.start + i for s, i in zip(sl, local))
        out.append(int(np.ravel_multi_index(cell, shape)))
    return tuple(out)


def cube_projection(
    f: GridFunction,
    part: DyadicPartition,
    space: WeightedSpace | None = None,
    variant: str = "banach",
) -> np.ndarray:
    """Cube-average coefficients of f over the partition.

    ``variant="banach"`` takes the plain average on every cube.  With
    ``variant="vanishing"`` cubes of vanishing weight get coefficient zero;
    the space is needed to identify them.
    """
    from .grid import all_cube_averages

    if f.grid != part.grid:
        raise ModelError("function and partition live on different grids")
    if variant not in VARIANTS:
        raise ModelError(f"unknown projector variant {variant!r}")
    coeffs = all_cube_averages(f, part)
    if variant == "vanishing":
        if space is None:
            raise ModelError("the vanishing-weight variant needs the space")
        coeffs = np.where(null_cube_mask(part, space), 0.0, coeffs)
    if not np.all(np.isfinite(coeffs)):
        raise ModelError("cube averages must be finite")
    return coeffs


def expand_coefficients(coeffs: np.ndarray, part: DyadicPartition) -> GridFunction:
    """Piecewise-constant function with the given value on each cube, zero outside."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (part.n_cubes,):
        raise ModelError(
            f"expected {part.n_cubes} coefficients, got shape {coeffs.shape}"
        )
    grid = part.grid
    values = np.zeros(grid.shape)
    b, c = part.cubes_per_axis, part.cells_per_cube_axis
    if grid.dim == 1:
        inner = np.repeat(coeffs, c)
    else:
        inner = np.repeat(
            np.repeat(coeffs.reshape(b, b), c, axis=0), c, axis=1
        )
    values[part.inside_slices()] = inner
    return GridFunction(grid, values)


def projection_error(
    f: GridFunction,
    coeffs: np.ndarray,
    part: DyadicPartition,
    space: WeightedSpace,
    check: bool = False,
    tol: float | None = None,
) -> tuple[float, float]:
    """Measured projection error and its translation-modulus guarantee.

    Returns ``(measured, guarantee)`` where measured is the norm distance from
    the box-truncated f to its piecewise-cube reconstruction, and guarantee is
    ``2**dim`` times the box translation modulus at the cube side.  The bound
    holds because the deviation from a cube average is an average of shifted
    differences: with c cells per cube axis the shifts involved fit the box
    stencil of radius (c-1) cells, and there are at most ``(2c-1)**dim`` of
    them against ``c**dim`` cube cells, a ratio strictly below ``2**dim``.
    With ``check=True`` a violation (possible only through arithmetic error
    for p >= 1) raises.
    """
    truncated = restrict_inside(f, 2.0 ** part.box_level, region="box")
    recon = expand_coefficients(coeffs, part)
    measured = weighted_norm(truncated - recon, space)
    single = Family(grid=f.grid, members=(f,), labels=("f",))
    guarantee = 2.0 ** f.grid.dim * translation_modulus(
        single, space, 2.0 ** part.cube_exp, stencil="box"
    )
    if check:
        slack = tol if tol is not None else 1e-10 * weighted_norm(f, space)
        if measured > guarantee + slack:
            raise ModelError(
                f"projection error {measured!r} exceeds its guarantee {guarantee!r}"
            )
    return measured, guarantee


@dataclass(frozen=True)
class QuantizedNet:
    net_elements: np.ndarray  # (n_net, n_cubes)
    assignment: tuple[int, ...]
    distances: tuple[float, ...]


def quantize_net(
    coeff_vectors: np.ndarray,
    quant_step: float,
    coeff_bound: float,
    part: DyadicPartition,
    space: WeightedSpace,
) -> QuantizedNet:
    """Round coefficient vectors to the step lattice and deduplicate.

    Each coefficient moves by at most half a step, so the rounding error is
    dominated pointwise by (step/2) * indicator of the partition box; lattice
    monotonicity then bounds the norm error by (step/2) * that indicator's
    norm, for every exponent p > 0.  Deduplication happens on the integer
    lattice coordinates, so equality of net elements is exact.  Inputs must
    already lie in [-coeff_bound, coeff_bound]; with coeff_bound a lattice
    multiple the rounded values stay inside the same interval.
    """
    coeffs = np.asarray(coeff_vectors, dtype=np.float64)
    if coeffs.ndim != 2 or coeffs.shape[1] != part.n_cubes:
        raise ModelError("coefficient vectors must be (members, cubes)")
    if quant_step <= 0:
        raise ModelError("quantization step must be positive")
    if np.any(np.abs(coeffs) > coeff_bound):
        raise ModelError("coefficient outside the declared bound")
    lattice = np.rint(coeffs / quant_step)
    rounded = lattice * quant_step
    # float rounding may overshoot step/2 by an ulp, never more
    if np.any(np.abs(coeffs - rounded) > 0.5 * quant_step * (1 + 1e-12)):
        raise ModelError("lattice rounding moved a coefficient beyond half a step")
    seen: dict[tuple, int] = {}
    assignment = []
    for row in lattice.astype(np.int64):
        key = tuple(row.tolist())
        if key not in seen:
            seen[key] = len(seen)
        assignment.append(seen[key])
    elements = np.array(
        [np.array(key, dtype=np.float64) * quant_step for key in seen], dtype=np.float64
    ).reshape(len(seen), part.n_cubes)
    distances = tuple(
        weighted_norm(expand_coefficients(coeffs[i] - elements[assignment[i]], part), space)
        for i in range(coeffs.shape[0])
    )
    return QuantizedNet(
        net_elements=elements, assignment=tuple(assignment), distances=distances
    )


@dataclass(frozen=True)
class GreedyNet:
    """Farthest-point baseline net over the family itself."""

    indices: tuple[int, ...]
    assignment: tuple[int, ...]
    covering_radii: tuple[float, ...]


def greedy_net(family: Family, space: WeightedSpace, epsilon: float) -> GreedyNet:
    """Pick members farthest from the current net until all are within epsilon.

    A baseline for net-size comparisons; the certificate pipeline does not use
    it.  Deterministic: starts from member 0 and breaks ties by index.
    """
    if epsilon <= 0:
        raise ModelError("epsilon must be positive")
    n = len(family)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = weighted_norm(family.members[i] - family.members[j], space)
            dist[i, j] = dist[j, i] = d
    chosen = [0]
    best = dist[0].copy()
    radii = [float(best.max())]
    while radii[-1] >= epsilon:
        nxt = int(np.argmax(best))
        chosen.append(nxt)
        best = np.minimum(best, dist[nxt])
        radii.append(float(best.max()))
    assignment = tuple(int(np.argmin([dist[i, c] for c in chosen])) for i in range(n))
    return GreedyNet(
        indices=tuple(chosen), assignment=assignment, covering_radii=tuple(radii)
    )


def build_certificate(
    family: Family, space: WeightedSpace, epsilon: float, variant: str = "banach"
) -> NetCertificate:
    """Run the full pipeline and return a measured, self-describing certificate.

    Requires p >= 1 (the triangle inequality glues the three budget stages);
    exponents below one go through the power-transfer pipeline instead.
    """
    if family.grid != space.grid:
        raise ModelError("family and space live on different grids")
    if space.p < 1:
        raise ModelError(
            "build_certificate needs p >= 1; use the power-transfer pipeline for p < 1"
        )
    if variant not in VARIANTS:
        raise ModelError(f"unknown projector variant {variant!r}")
    grid = family.grid

    m = select_tail_level(family, space, epsilon)
    i_eps = select_mesh(family, space, epsilon, max_exp=m)
    part = dyadic_partition(grid, m, i_eps)

    tail_value = tail_modulus(family, space, 2.0 ** m, region="box")
    nulls = null_cube_mask(part, space)
    enforce = variant == "banach" and not bool(nulls.any())

    coeffs = np.stack(
        [cube_projection(f, part, space, variant) for f in family.members]
    )
    proj_errors = [
        projection_error(f, coeffs[k], part, space, check=enforce)[0]
        for k, f in enumerate(family.members)
    ]

    chi_norm = indicator_norm(space, inside_mask(grid, 2.0 ** m, region="box"))
    if chi_norm > 0:
        # shave a hair off the exact budget split so float rounding can
        # never push the quantization stage past epsilon/3
        step = (2.0 * epsilon / (3.0 * chi_norm)) * (1.0 - 1e-9)
    else:
        step = 1.0
    max_coeff = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    # a lattice multiple at least max_coeff: rounding then never leaves the bound
    coeff_bound = step * math.ceil(max_coeff / step)
    while coeff_bound < max_coeff:
        coeff_bound += step

    quant = quantize_net(coeffs, step, coeff_bound, part, space)

    distances = []
    for k, f in enumerate(family.members):
        net_fn = expand_coefficients(quant.net_elements[quant.assignment[k]], part)
        distances.append(weighted_norm(f - net_fn, space))
    bad = [k for k, d in enumerate(distances) if d >= epsilon]
    if bad:
        raise ModelError(
            f"net distance {distances[bad[0]]!r} for member "
            f"{family.labels[bad[0]]!r} reached epsilon; the budget accounting is broken"
        )

    plan = NetPlan(
        epsilon=epsilon,
        box_level=m,
        cube_exp=i_eps,
        quant_step=step,
        coeff_bound=coeff_bound,
        budget=EpsilonBudget(
            tail=tail_value,
            projection=max(proj_errors),
            quantization=max(quant.distances),
        ),
    )
    if variant == "vanishing":
        null_idx = tuple(int(k) for k in np.flatnonzero(nulls))
        witnesses = cube_witnesses(part, space)
    else:
        null_idx = ()
        witnesses = ()
    return NetCertificate(
        plan=plan,
        grid=grid,
        space_p=space.p,
        variant=variant,
        net_elements=quant.net_elements,
        assignment=quant.assignment,
        distances=tuple(distances),
        labels=family.labels,
        null_cubes=null_idx,
        witness_cells=witnesses,
    )


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    failures: tuple[str, ...]
    distances: tuple[float, ...]


def validate_certificate(
    family: Family, certificate: NetCertificate, space: WeightedSpace
) -> ValidationReport:
    """Re-check a certificate from scratch, sharing nothing with the builder.

    Recomputes every member-to-net distance directly from the stored
    coefficient vectors, checks them against the plan's epsilon, and checks
    that every net element sits on the declared step lattice inside the
    declared coefficient bound.
    """
    failures: list[str] = []
    plan = certificate.plan
    if family.grid != certificate.grid:
        failures.append("family grid does not match the certificate grid")
    if space.grid != family.grid:
        failures.append("space grid does not match the family grid")
    if not math.isclose(space.p, certificate.space_p, rel_tol=1e-12):
        failures.append(
            f"space exponent {space.p!r} does not match certificate exponent "
            f"{certificate.space_p!r}"
        )
    if len(certificate.assignment) != len(family):
        failures.append("assignment length does not match the family")
    if failures:
        return ValidationReport(False, tuple(failures), ())

    part = certificate.partition
    elements = certificate.net_elements
    if elements.ndim != 2 or elements.shape[1] != part.n_cubes:
        return ValidationReport(
            False, (f"net elements have shape {elements.shape}, expected (*, {part.n_cubes})",), ()
        )

    step = plan.quant_step
    lattice = elements / step
    off = np.abs(lattice - np.rint(lattice))
    if np.any(off > 1e-9):
        worst = int(np.argmax(off.max(axis=1)))
        failures.append(f"net element {worst} leaves the quantization lattice")
    if np.any(np.abs(elements) > plan.coeff_bound * (1 + 1e-12)):
        failures.append("a net coefficient exceeds the declared bound")

    distances = []
    for k in range(len(family)):
        idx = certificate.assignment[k]
        if not 0 <= idx < elements.shape[0]:
            failures.append(f"member {family.labels[k]!r} is assigned to a missing net element")
            distances.append(math.inf)
            continue
        net_fn = expand_coefficients(elements[idx], part)
        d = weighted_norm(family.members[k] - net_fn, space)
        distances.append(d)
        if not d < plan.epsilon:
            failures.append(
                f"member {family.labels[k]!r} has distance {d!r}, not below epsilon "
                f"{plan.epsilon!r}"
            )
        recorded = certificate.distances[k]
        if not math.isclose(d, recorded, rel_tol=1e-9, abs_tol=1e-12):
            failures.append(
                f"member {family.labels[k]!r}: recomputed distance {d!r} disagrees "
                f"with the recorded {recorded!r}"
            )
    return ValidationReport(not failures, tuple(failures), tuple(distances))


def certificate_to_dict(cert: NetCertificate) -> dict:
    plan = cert.plan
    doc = {
        "plan": {
            "epsilon": plan.epsilon,
            "box_level": plan.box_level,
            "cube_exp": plan.cube_exp,
            "quant_step": plan.quant_step,
            "coeff_bound": plan.coeff_bound,
            "budget": {
                "tail": plan.budget.tail,
                "projection": plan.budget.projection,
                "quantization": plan.budget.quantization,
            },
        },
        "grid": {
            "dim": cert.grid.dim,
            "box_level": cert.grid.box_level,
            "cell_exp": cert.grid.cell_exp,
        },
        "space_p": cert.space_p,
        "variant": cert.variant,
        "cube_order": "row-major by cube corner",
        "net_elements": [[float(v) for v in row] for row in cert.net_elements],
        "assignment": list(cert.assignment),
        "distances": list(cert.distances),
        "labels": list(cert.labels),
        "null_cubes": list(cert.null_cubes),
        "witness_cells": list(cert.witness_cells),
    }
    if cert.quasi is not None:
        q = cert.quasi
        doc["quasi"] = {
            "p": q.p,
            "n_power": q.n_power,
            "epsilon": q.epsilon,
            "eps_prime": q.eps_prime,
            "c_max": q.c_max,
            "audit_distances": list(q.audit_distances),
        }
    return doc


def certificate_from_dict(doc: dict) -> NetCertificate:
    try:
        plan_doc = doc["plan"]
        budget = plan_doc["budget"]
        plan = NetPlan(
            epsilon=float(plan_doc["epsilon"]),
            box_level=int(plan_doc["box_level"]),
            cube_exp=int(plan_doc["cube_exp"]),
            quant_step=float(plan_doc["quant_step"]),
            coeff_bound=float(plan_doc["coeff_bound"]),
            budget=EpsilonBudget(
                tail=float(budget["tail"]),
                projection=float(budget["projection"]),
                quantization=float(budget["quantization"]),
            ),
        )
        grid = Grid(
            dim=int(doc["grid"]["dim"]),
            box_level=int(doc["grid"]["box_level"]),
            cell_exp=int(doc["grid"]["cell_exp"]),
        )
        quasi = None
        if "quasi" in doc:
            q = doc["quasi"]
            quasi = PowerTransferRecord(
                p=float(q["p"]),
                n_power=int(q["n_power"]),
                epsilon=float(q["epsilon"]),
                eps_prime=float(q["eps_prime"]),
                c_max=float(q["c_max"]),
                audit_distances=tuple(float(v) for v in q["audit_distances"]),
            )
        return NetCertificate(
            plan=plan,
            grid=grid,
            space_p=float(doc["space_p"]),
            variant=str(doc["variant"]),
            net_elements=np.asarray(doc["net_elements"], dtype=np.float64),
            assignment=tuple(int(i) for i in doc["assignment"]),
            distances=tuple(float(d) for d in doc["distances"]),
            labels=tuple(str(s) for s in doc["labels"]),
            null_cubes=tuple(int(i) for i in doc.get("null_cubes", ())),
            witness_cells=tuple(int(i) for i in doc.get("witness_cells", ())),
            quasi=quasi,
        )
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed certificate document: {exc}") from exc


def save_certificate(cert: NetCertificate, path) -> None:
    with open(path, "w") as fh:
        json.dump(certificate_to_dict(cert), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_certificate(path) -> NetCertificate:
    with open(path) as fh:
        return certificate_from_dict(json.load(fh))
