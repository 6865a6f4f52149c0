"""
Linear constraint families on couplings.

A constraint subspace is stored as a finite list of generator tensors
``omega_j``; a coupling ``pi`` satisfies the family when
``sum_x omega_j(x) * pi(x) == 0`` for every ``j``. Generators are kept
pre-evaluated on the grid, so LP assembly is a reshape.

Truncating an infinite-dimensional family to finitely many generators is the
caller's modelling choice; the martingale and finite-group families built in
this package are exact on finite grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .measures import DiscreteMeasure, ProductGrid, _grid_array

SINGLE_AXIS_TOL = 1e-12
COMPAT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ConstraintGenerator:
    name: str
    values: np.ndarray

    def __repr__(self):
        return f"ConstraintGenerator({self.name!r}, shape={self.values.shape})"


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """An ordered, name-unique family of generators on one grid."""

    grid: ProductGrid
    generators: tuple

    def __init__(self, grid: ProductGrid, generators: Sequence = ()):
        gens = []
        for g in generators:
            if isinstance(g, ConstraintGenerator):
                name, values = g.name, g.values
            else:
                name, values = g
            gens.append(ConstraintGenerator(str(name), _grid_array(grid, values, f"generator {name!r}")))
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate generator names: {dup}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "generators", tuple(gens))

    @classmethod
    def empty(cls, grid: ProductGrid) -> "ConstraintSet":
        return cls(grid, ())

    @property
    def names(self) -> list:
        return [g.name for g in self.generators]

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __add__(self, other: "ConstraintSet") -> "ConstraintSet":
        if other.grid != self.grid:
            raise ValueError("cannot combine constraint sets on different grids")
        return ConstraintSet(self.grid, self.generators + other.generators)

    def subset(self, indices) -> "ConstraintSet":
        return ConstraintSet(self.grid, [self.generators[i] for i in indices])

    def __repr__(self):
        return f"ConstraintSet({len(self)} generators on {self.grid.shape})"


def assemble_rows(ws: ConstraintSet) -> np.ndarray:
    """Generator ``j`` flattened into row ``j``; the right-hand side is zero."""
    if not len(ws):
        return np.zeros((0, ws.grid.size))
    return np.stack([g.values.reshape(-1) for g in ws.generators])


def reduce_generators(ws: ConstraintSet, tol: float = 1e-10) -> ConstraintSet:
    """Drop generators that lie in the span of earlier ones.

    Generators are scanned in order and kept when their component orthogonal
    to the already-kept ones exceeds ``tol`` relative to the largest generator
    norm (Gram-Schmidt with one reorthogonalization pass). The feasible set of
    couplings is unchanged.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rows = assemble_rows(ws)
    if rows.shape[0] == 0:
        return ws
    scale = max(np.linalg.norm(rows, axis=1).max(), 1e-300)
    basis = np.zeros((0, rows.shape[1]))
    kept = []
    for j, row in enumerate(rows):
        r = row / scale
        for _ in range(2):
            r = r - basis.T @ (basis @ r)
        norm = np.linalg.norm(r)
        if norm > tol:
            basis = np.vstack([basis, r / norm])
            kept.append(j)
    return ws.subset(kept)


def single_coordinate_axis(values: np.ndarray, tol: float = SINGLE_AXIS_TOL):
    """Axis ``k`` if ``values`` is constant (within ``tol``) along every other axis.

    Constant tensors report axis 0. Returns ``None`` when the tensor depends
    on two or more coordinates.
    """
    varying = [
        k for k in range(values.ndim)
        if np.ptp(values, axis=k).max(initial=0.0) >= tol
    ]
    if len(varying) > 1:
        return None
    return varying[0] if varying else 0


@dataclass(frozen=True)
class CompatibilityEntry:
    generator: str
    factor: int | None
    integral: float | None
    violated: bool

    @property
    def applicable(self) -> bool:
        return self.factor is not None


@dataclass(frozen=True)
class CompatibilityReport:
    entries: tuple

    @property
    def compatible(self) -> bool:
        return not any(e.violated for e in self.entries)

    @property
    def violations(self) -> list:
        return [e for e in self.entries if e.violated]


def check_marginal_compatibility(ws: ConstraintSet, measures: Sequence[DiscreteMeasure],
                                 tol: float = COMPAT_TOL) -> CompatibilityReport:
    """Necessary condition for a non-empty constrained plan set.

    A generator that only depends on coordinate ``k`` integrates against any
    plan to ``sum_i f(i) mu_k(i)``, so that number must vanish. Generators
    depending on several coordinates are listed with ``factor=None``.
    """
    if len(measures) != ws.grid.ndim:
        raise ValueError(f"{len(measures)} measures for {ws.grid.ndim} factors")
    entries = []
    for g in ws.generators:
        k = single_coordinate_axis(g.values)
        if k is None:
            entries.append(CompatibilityEntry(g.name, None, None, False))
            continue
        # any slice along the other axes gives the one-variable function
        index = [0] * g.values.ndim
        index[k] = slice(None)
        f = g.values[tuple(index)]
        integral = float(f @ measures[k].weights)
        entries.append(CompatibilityEntry(g.name, k, abs(integral), abs(integral) > tol))
    return CompatibilityReport(tuple(entries))
