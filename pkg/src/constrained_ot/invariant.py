"""
Transport restricted to couplings invariant under a finite group.

A group acts diagonally on the grid: element ``g`` is a tuple of per-factor
permutations and sends ``(x_1, ..., x_n)`` to ``(g_1[x_1], ..., g_n[x_n])``.
Invariance of ``pi`` is the linear constraint family ``h o g - h`` over
indicator functions ``h`` of grid cells. The group average (uniform Haar
measure) gives the symmetrization operator used by the reduced dual.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constraints import ConstraintSet, reduce_generators
from .measures import CostTensor, Coupling, DiscreteMeasure, ProductGrid, _check_permutation
from .solver import ConstrainedProblem, SolveReport, solve_primal

MAX_GROUP_ORDER = 10_000
INVARIANCE_TOL = 1e-9
REDUCTION_TOL = 1e-7


class GroupAxiomError(ValueError):
    pass


def _key(element) -> tuple:
    return tuple(tuple(int(i) for i in p) for p in element)


@dataclass(frozen=True, eq=False)
class GroupAction:
    """Finite group of diagonal permutations, listed element by element."""

    elements: tuple
    identity: int = 0
    _lookup: dict = field(default=None, repr=False, compare=False)

    def __init__(self, elements: Sequence[Sequence], identity: int | None = None):
        elems = tuple(tuple(np.asarray(p, dtype=np.intp) for p in e) for e in elements)
        if not elems:
            raise GroupAxiomError("a group needs at least one element")
        sizes = tuple(len(p) for p in elems[0])
        for e in elems:
            if tuple(len(p) for p in e) != sizes:
                raise GroupAxiomError("elements act on spaces of different sizes")
            for k, p in enumerate(e):
                try:
                    _check_permutation(p, sizes[k], f"factor {k}")
                except ValueError as exc:
                    raise GroupAxiomError(str(exc)) from None
            for p in e:
                p.flags.writeable = False
        if identity is None:
            ids = [i for i, e in enumerate(elems) if all(np.array_equal(p, np.arange(len(p))) for p in e)]
            identity = ids[0] if ids else 0
        lookup = {}
        for i, e in enumerate(elems):
            lookup.setdefault(_key(e), i)
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "identity", identity)
        object.__setattr__(self, "_lookup", lookup)

    @classmethod
    def trivial(cls, shape) -> "GroupAction":
        return cls([[np.arange(s) for s in shape]])

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def shape(self) -> tuple:
        return tuple(len(p) for p in self.elements[0])

    def index_of(self, element) -> int | None:
        return self._lookup.get(_key(element))

    def apply(self, tensor: np.ndarray, i: int) -> np.ndarray:
        """``(h o g)(x) = h(g(x))`` for element ``i``."""
        return tensor[np.ix_(*self.elements[i])]

    def __len__(self):
        return self.order


def compose(g, h) -> tuple:
    """``(g o h)(x) = g(h(x))`` factor by factor."""
    return tuple(pg[ph] for pg, ph in zip(g, h))


def inverse(g) -> tuple:
    return tuple(np.argsort(p) for p in g)


@dataclass(frozen=True)
class GroupReport:
    valid: bool
    order: int
    table: np.ndarray | None = None  # table[i, j] = index of elements[i] o elements[j]
    message: str = ""


def validate_group(g: GroupAction) -> GroupReport:
    """Check identity, closure and inverses; return the composition table."""
    ident = tuple(np.arange(s) for s in g.shape)
    if g.index_of(ident) is None:
        return GroupReport(False, g.order, message="identity element missing")
    if len(g._lookup) != g.order:
        return GroupReport(False, g.order, message="repeated elements")
    table = np.empty((g.order, g.order), dtype=np.intp)
    for i, a in enumerate(g.elements):
        for j, b in enumerate(g.elements):
            k = g.index_of(compose(a, b))
            if k is None:
                return GroupReport(False, g.order,
                                   message=f"closure fails: element {i} o element {j} is not in the group")
            table[i, j] = k
    for i, a in enumerate(g.elements):
        if g.index_of(inverse(a)) is None:
            return GroupReport(False, g.order, message=f"inverse of element {i} is missing")
    return GroupReport(True, g.order, table)


def _require_valid(g: GroupAction):
    rep = validate_group(g)
    if not rep.valid:
        raise GroupAxiomError(rep.message)


def group_from_generators(generators: Sequence[Sequence], shape=None,
                          max_order: int = MAX_GROUP_ORDER) -> GroupAction:
    """Close a set of diagonal permutations under composition."""
    gens = [tuple(np.asarray(p, dtype=np.intp) for p in e) for e in generators]
    if shape is None:
        if not gens:
            raise ValueError("shape is required when there are no generators")
        shape = tuple(len(p) for p in gens[0])
    ident = tuple(np.arange(s) for s in shape)
    elements = [ident]
    seen = {_key(ident)}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for s in gens:
                b = compose(s, a)
                k = _key(b)
                if k not in seen:
                    if len(elements) >= max_order:
                        raise GroupAxiomError(f"group order exceeds {max_order}")
                    seen.add(k)
                    elements.append(b)
                    nxt.append(b)
        frontier = nxt
    return GroupAction(elements, identity=0)


def invariance_generators(g: GroupAction, grid: ProductGrid, reduce: bool = False) -> ConstraintSet:
    """Generators ``1_z o g - 1_z`` for every non-identity ``g`` and cell ``z``.

    The raw family is highly redundant; ``reduce=True`` passes it through
    :func:`reduce_generators`. Either way a coupling satisfies the family iff it
    is invariant under the group.
    """
    _require_valid(g)
    if g.shape != grid.shape:
        raise ValueError(f"group acts on {g.shape}, grid is {grid.shape}")
    gens = []
    for i, elem in enumerate(g.elements):
        if i == g.identity:
            continue
        # (1_z o g)(x) = 1 iff g(x) = z, i.e. x = g^{-1}(z)
        inv = inverse(elem)
        for z in grid.cells():
            w = np.zeros(grid.shape)
            w[tuple(p[j] for p, j in zip(inv, z))] += 1.0
            w[z] -= 1.0
            gens.append((f"inv[g={i};{','.join(map(str, z))}]", w))
    ws = ConstraintSet(grid, gens)
    return reduce_generators(ws) if reduce else ws


def _group_average(values: np.ndarray, g: GroupAction) -> np.ndarray:
    stack = np.stack([g.apply(values, i) for i in range(g.order)])
    # sorting makes the sum independent of group order, so the average is
    # bit-for-bit invariant
    return np.sort(stack, axis=0).sum(axis=0) / g.order


def symmetrize_function(c: CostTensor, g: GroupAction) -> CostTensor:
    """Group average ``(1/|G|) sum_g c(g(x))``."""
    _require_valid(g)
    return CostTensor(c.grid, _group_average(c.values, g))


def projection_W1(h: CostTensor, g: GroupAction) -> CostTensor:
    """``h`` minus its group average: the projection onto the non-invariant part."""
    return CostTensor(h.grid, h.values - symmetrize_function(h, g).values)


def _pushforward_values(w: np.ndarray, elem) -> np.ndarray:
    return w[np.ix_(*inverse(elem))]


def symmetrize_measure(pi: Coupling, g: GroupAction) -> Coupling:
    """``(1/|G|) sum_g g_# pi``."""
    _require_valid(g)
    stack = np.stack([_pushforward_values(pi.weights, e) for e in g.elements])
    return Coupling(pi.grid, np.sort(stack, axis=0).sum(axis=0) / g.order)


def invariance_residual(pi: Coupling, g: GroupAction) -> float:
    """``max_g max_x |g_# pi(x) - pi(x)|``."""
    return float(max(np.abs(_pushforward_values(pi.weights, e) - pi.weights).max() for e in g.elements))


def is_invariant_measure(mu: DiscreteMeasure, perm, tol: float = INVARIANCE_TOL) -> bool:
    return bool(np.abs(mu.weights[np.asarray(perm)] - mu.weights).max() <= tol)


def check_invariant_marginals(marginals: Sequence[DiscreteMeasure], g: GroupAction, tol: float = INVARIANCE_TOL):
    for e in g.elements:
        for k, (mu, p) in enumerate(zip(marginals, e)):
            if not is_invariant_measure(mu, p, tol):
                raise ValueError(f"marginal {k} ({mu.space.id!r}) is not invariant under the group")


def invariant_problem(marginals: Sequence[DiscreteMeasure], cost: CostTensor, g: GroupAction,
                      reduce: bool = True) -> ConstrainedProblem:
    return ConstrainedProblem(marginals, cost, invariance_generators(g, cost.grid, reduce=reduce))


@dataclass(frozen=True)
class InvariantReductionReport:
    constrained: SolveReport
    symmetrized: SolveReport
    symmetrized_cost: CostTensor
    difference: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.difference <= self.tol * (1 + abs(self.constrained.primal_value))


def invariant_reduction_check(p: ConstrainedProblem, g: GroupAction,
                              tol: float = REDUCTION_TOL) -> InvariantReductionReport:
    """Compare the invariant problem with the unconstrained one for the averaged cost.

    ``p`` must carry the invariance constraints of ``g`` and have invariant
    marginals. For a finite group the two optimal values coincide.
    """
    _require_valid(g)
    check_invariant_marginals(p.marginals, g)
    constrained = solve_primal(p)
    cbar = symmetrize_function(p.cost, g)
    free = solve_primal(ConstrainedProblem(p.marginals, cbar))
    if not (constrained.optimal and free.optimal):
        raise RuntimeError("invariant problem with invariant marginals must be solvable")
    diff = abs(constrained.primal_value - free.primal_value)
    return InvariantReductionReport(constrained, free, cbar, diff, tol)
