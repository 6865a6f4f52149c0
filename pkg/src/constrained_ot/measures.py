"""
Finite spaces, probability vectors, product grids and tensors over them.

Every tensor in the package is a dense ``numpy`` array whose shape is the
shape of a :class:`ProductGrid`. Flat indices follow C (row-major) order with
the first factor varying slowest; file formats and LP column layouts rely on
this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MASS_TOL = 1e-9


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteSpace:
    """A finite, ordered set of labeled points.

    Parameters
    ----------
    id : str
        Identifier of the space.
    labels : sequence of str
        Point labels, unique within the space.
    coordinates : sequence of float, optional
        One real coordinate per point. Required by the martingale tools.
    """

    id: str
    labels: tuple
    coordinates: np.ndarray | None = None

    def __init__(self, id: str, labels: Sequence[str], coordinates=None):
        labels = tuple(str(lab) for lab in labels)
        if not labels:
            raise ValueError(f"space {id!r} has no points")
        if len(set(labels)) != len(labels):
            raise ValueError(f"space {id!r} has duplicate point labels")
        if coordinates is not None:
            coordinates = _frozen(coordinates)
            if coordinates.shape != (len(labels),):
                raise ValueError(
                    f"space {id!r}: {coordinates.size} coordinates for {len(labels)} points"
                )
            if not np.all(np.isfinite(coordinates)):
                raise ValueError(f"space {id!r} has non-finite coordinates")
        object.__setattr__(self, "id", str(id))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "coordinates", coordinates)

    @classmethod
    def from_coordinates(cls, id: str, coordinates) -> "DiscreteSpace":
        """Space whose labels are the printed coordinates."""
        coords = np.asarray(coordinates, dtype=float)
        return cls(id, [f"{x:g}" for x in coords], coords)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def has_coordinates(self) -> bool:
        return self.coordinates is not None

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, DiscreteSpace):
            return NotImplemented
        if self.id != other.id or self.labels != other.labels:
            return False
        if self.coordinates is None or other.coordinates is None:
            return self.coordinates is None and other.coordinates is None
        return bool(np.array_equal(self.coordinates, other.coordinates))

    def __hash__(self):
        return hash((self.id, self.labels))

    def __repr__(self):
        return f"DiscreteSpace({self.id!r}, size={self.size})"


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability weights on the points of a :class:`DiscreteSpace`.

    Weights must be nonnegative and sum to one within ``1e-9``; they are then
    divided by their sum. Anything further from one is rejected rather than
    silently rescaled.
    """

    space: DiscreteSpace
    weights: np.ndarray

    def __init__(self, space: DiscreteSpace, weights):
        w = np.array(weights, dtype=float)
        if w.shape != (space.size,):
            raise ValueError(
                f"measure on {space.id!r}: {w.size} weights for {space.size} points"
            )
        if not np.all(np.isfinite(w)):
            raise ValueError(f"measure on {space.id!r} has non-finite weights")
        if np.any(w < 0):
            raise ValueError(f"measure on {space.id!r} has negative weights")
        total = w.sum()
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"measure on {space.id!r} has total mass {total!r}, expected 1")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "weights", _frozen(w / total))

    @classmethod
    def uniform(cls, space: DiscreteSpace) -> "DiscreteMeasure":
        return cls(space, np.full(space.size, 1.0 / space.size))

    @classmethod
    def dirac(cls, space: DiscreteSpace, index: int) -> "DiscreteMeasure":
        w = np.zeros(space.size)
        w[index] = 1.0
        return cls(space, w)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    def mean(self) -> float:
        if self.space.coordinates is None:
            raise ValueError(f"space {self.space.id!r} has no coordinates")
        return float(self.weights @ self.space.coordinates)

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.space, self.weights.tobytes()))

    def __repr__(self):
        return f"DiscreteMeasure({self.space.id!r}, {self.weights.tolist()})"


@dataclass(frozen=True)
class ProductGrid:
    """The product X_1 x ... x X_n of finite spaces."""

    factors: tuple

    def __init__(self, factors: Sequence[DiscreteSpace]):
        factors = tuple(factors)
        if not factors:
            raise ValueError("a product grid needs at least one factor")
        object.__setattr__(self, "factors", factors)

    @property
    def ndim(self) -> int:
        return len(self.factors)

    @property
    def shape(self) -> tuple:
        return tuple(f.size for f in self.factors)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def flat_index(self, multi_index) -> int:
        return int(np.ravel_multi_index(tuple(multi_index), self.shape))

    def multi_index(self, flat: int) -> tuple:
        return tuple(int(i) for i in np.unravel_index(flat, self.shape))

    def cells(self):
        """All multi-indices in canonical (row-major) order."""
        return np.ndindex(*self.shape)

    def coordinate_grids(self) -> list:
        """Per-factor coordinates broadcast to the grid shape."""
        out = []
        for k, space in enumerate(self.factors):
            if space.coordinates is None:
                raise ValueError(f"space {space.id!r} has no coordinates")
            view = [1] * self.ndim
            view[k] = space.size
            out.append(np.broadcast_to(space.coordinates.reshape(view), self.shape))
        return out


def _grid_array(grid: ProductGrid, values, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.size != grid.size:
        raise ValueError(f"{what}: {arr.size} entries for a grid of size {grid.size}")
    if arr.shape != grid.shape:
        if arr.ndim != 1:
            raise ValueError(f"{what}: shape {arr.shape} does not match grid {grid.shape}")
        arr = arr.reshape(grid.shape)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what}: non-finite entries")
    return _frozen(arr)


@dataclass(frozen=True, eq=False)
class CostTensor:
    """Real-valued function on a product grid."""

    grid: ProductGrid
    values: np.ndarray

    def __init__(self, grid: ProductGrid, values):
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", _grid_array(grid, values, "cost"))

    @classmethod
    def from_function(cls, grid: ProductGrid, func) -> "CostTensor":
        """Evaluate ``func(*coordinates)`` on the coordinate grids."""
        return cls(grid, func(*grid.coordinate_grids()))

    def __neg__(self):
        return CostTensor(self.grid, -self.values)

    def __repr__(self):
        return f"CostTensor(shape={self.grid.shape})"


@dataclass(frozen=True, eq=False)
class Coupling:
    """Nonnegative weights of total mass one on a product grid."""

    grid: ProductGrid
    weights: np.ndarray

    def __init__(self, grid: ProductGrid, weights):
        w = np.array(_grid_array(grid, weights, "coupling"))
        if np.any(w < 0):
            raise ValueError("coupling has negative weights")
        if abs(w.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"coupling has total mass {w.sum()!r}, expected 1")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def from_atoms(cls, grid: ProductGrid, atoms: dict) -> "Coupling":
        """Build from ``{multi_index: weight}``."""
        w = np.zeros(grid.shape)
        for idx, mass in atoms.items():
            w[tuple(idx)] += mass
        return cls(grid, w)

    def support(self, tol: float = 1e-9) -> list:
        """Multi-indices carrying weight above ``tol``, in canonical order."""
        return [tuple(int(i) for i in idx) for idx in np.argwhere(self.weights > tol)]

    def __repr__(self):
        return f"Coupling(shape={self.grid.shape}, atoms={len(self.support(0.0))})"


def marginal(coupling: Coupling, k: int) -> DiscreteMeasure:
    """Pushforward of ``coupling`` onto factor ``k``, counted from 1."""
    n = coupling.grid.ndim
    if not 1 <= k <= n:
        raise IndexError(f"factor index {k} out of range 1..{n}")
    axes = tuple(a for a in range(n) if a != k - 1)
    return DiscreteMeasure(coupling.grid.factors[k - 1], coupling.weights.sum(axis=axes))


def product_measure(measures: Sequence[DiscreteMeasure]) -> Coupling:
    """The independent coupling mu_1 x ... x mu_n."""
    grid = ProductGrid([m.space for m in measures])
    w = np.ones(())
    for m in measures:
        w = np.multiply.outer(w, m.weights)
    return Coupling(grid, w)


def _values(obj) -> np.ndarray:
    return obj.values if hasattr(obj, "values") else np.asarray(obj, dtype=float)


def integrate(tensor, coupling: Coupling) -> float:
    """Sum of ``tensor(x) * coupling(x)`` over the grid.

    ``tensor`` may be a :class:`CostTensor`, a constraint generator or a bare
    array of the grid shape.
    """
    values = _values(tensor)
    grid = getattr(tensor, "grid", None)
    if grid is not None and grid.shape != coupling.grid.shape:
        raise ValueError(f"grid mismatch: {grid.shape} vs {coupling.grid.shape}")
    if values.size != coupling.grid.size:
        raise ValueError(f"shape mismatch: {values.shape} vs {coupling.grid.shape}")
    return float(values.reshape(-1) @ coupling.weights.reshape(-1))


def _check_permutation(p, size: int, where: str) -> np.ndarray:
    p = np.asarray(p)
    if p.shape != (size,) or not np.array_equal(np.sort(p), np.arange(size)):
        raise ValueError(f"{where}: not a bijection of {size} points: {p.tolist()}")
    return p.astype(np.intp)


def pushforward(coupling: Coupling, point_map: Sequence) -> Coupling:
    """Image of ``coupling`` under a diagonal relabeling of the grid.

    ``point_map[k][i]`` is the image of point ``i`` of factor ``k``; the atom at
    ``(i_1, ..., i_n)`` moves to ``(point_map[0][i_1], ..., point_map[n-1][i_n])``.
    """
    grid = coupling.grid
    if len(point_map) != grid.ndim:
        raise ValueError(f"{len(point_map)} factor maps for {grid.ndim} factors")
    perms = [_check_permutation(p, s, f"factor {k}") for k, (p, s) in enumerate(zip(point_map, grid.shape))]
    # image[p(i)] = w[i]  <=>  image = w[p^{-1}]
    inverse = [np.argsort(p) for p in perms]
    return Coupling(grid, coupling.weights[np.ix_(*inverse)])
