"""
Martingale transport on real-valued grids.

The martingale condition ``E[X_{k+1} | X_1..X_k] = X_k`` is linear in the
coupling: it says ``sum rho(x_1..x_k) (x_{k+1} - x_k) dpi = 0`` for every test
function ``rho`` of the first ``k`` coordinates. On a finite grid the
indicators of prefix cells span all such ``rho``, so one generator per prefix
cell describes the constraint exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constraints import ConstraintSet
from .measures import CostTensor, Coupling, DiscreteMeasure, ProductGrid
from .solver import (
    ConstrainedProblem,
    DualCertificate,
    SolveReport,
    solve_primal,
)

MEAN_TOL = 1e-9
PREFIX_MASS_TOL = 1e-12


def _require_coordinates(grid: ProductGrid):
    missing = [s.id for s in grid.factors if s.coordinates is None]
    if missing:
        raise ValueError(f"martingale constraints need coordinates; missing on {missing}")


def martingale_generators(grid: ProductGrid) -> ConstraintSet:
    """One generator ``1{prefix} * (x_{k+1} - x_k)`` per step ``k`` and prefix cell.

    There are ``sum_k |X_1| ... |X_k|`` generators for ``k = 1..n-1``. Names
    read ``mart[k=<step>;<i_1>,...,<i_k>]`` with 1-based steps.
    """
    _require_coordinates(grid)
    coords = grid.coordinate_grids()
    idx = np.indices(grid.shape)
    gens = []
    for k in range(grid.ndim - 1):
        step = coords[k + 1] - coords[k]
        for prefix in np.ndindex(*grid.shape[:k + 1]):
            mask = np.ones(grid.shape, dtype=bool)
            for axis, i in enumerate(prefix):
                mask &= idx[axis] == i
            name = f"mart[k={k + 1};{','.join(map(str, prefix))}]"
            gens.append((name, np.where(mask, step, 0.0)))
    return ConstraintSet(grid, gens)


@dataclass(frozen=True)
class ConvexOrderResult:
    ordered: bool
    mean_gap: float
    witness_strike: float | None = None
    call_gap: float = 0.0  # max over strikes of C_1(t) - C_2(t)

    def __bool__(self):
        return self.ordered


def call_prices(mu: DiscreteMeasure, strikes) -> np.ndarray:
    """``sum_x mu(x) (x - t)^+`` for each strike ``t``."""
    x = mu.space.coordinates
    t = np.asarray(strikes, float)
    return np.maximum(x[None, :] - t[:, None], 0.0) @ mu.weights


def convex_order_check(mu1: DiscreteMeasure, mu2: DiscreteMeasure, tol: float = MEAN_TOL) -> ConvexOrderResult:
    """Test ``mu1 <=_cx mu2`` by means and call prices at all support points.

    Call price functions are piecewise linear with kinks at the support
    points, so comparing them there (plus equal means for the left tail) is
    necessary and sufficient.
    """
    for m in (mu1, mu2):
        if m.space.coordinates is None:
            raise ValueError(f"space {m.space.id!r} has no coordinates")
    mean_gap = mu1.mean() - mu2.mean()
    strikes = np.union1d(mu1.space.coordinates[mu1.weights > 0], mu2.space.coordinates[mu2.weights > 0])
    diff = call_prices(mu1, strikes) - call_prices(mu2, strikes)
    worst = int(np.argmax(diff))
    call_gap = float(diff[worst])
    if abs(mean_gap) > tol:
        return ConvexOrderResult(False, mean_gap, None, call_gap)
    if call_gap > tol:
        return ConvexOrderResult(False, mean_gap, float(strikes[worst]), call_gap)
    return ConvexOrderResult(True, mean_gap, None, call_gap)


@dataclass(frozen=True)
class MartingaleProblem:
    marginals: tuple
    payoff: CostTensor

    def __init__(self, marginals: Sequence[DiscreteMeasure], payoff: CostTensor):
        marginals = tuple(marginals)
        if len(marginals) < 2:
            raise ValueError("a martingale problem needs at least two marginals")
        _require_coordinates(payoff.grid)
        object.__setattr__(self, "marginals", marginals)
        object.__setattr__(self, "payoff", payoff)

    @property
    def grid(self) -> ProductGrid:
        return self.payoff.grid

    def constrained(self, payoff: CostTensor | None = None) -> ConstrainedProblem:
        payoff = self.payoff if payoff is None else payoff
        return ConstrainedProblem(self.marginals, payoff, martingale_generators(self.grid))


class MartingaleInfeasibleError(ValueError):
    """No martingale coupling has the given marginals."""

    def __init__(self, message, report: SolveReport, convex_order: ConvexOrderResult | None = None):
        super().__init__(message)
        self.report = report
        self.convex_order = convex_order


@dataclass(frozen=True)
class PriceBounds:
    """Model-free price interval of a payoff under martingale couplings.

    ``upper_report`` is the solve of the negated payoff; its certificate,
    negated (see :attr:`superhedge`), is a pointwise super-replicating
    portfolio.
    """

    lower: float
    upper: float
    lower_report: SolveReport
    upper_report: SolveReport
    convex_order: ConvexOrderResult | None = None

    @property
    def subhedge(self) -> DualCertificate:
        return self.lower_report.certificate

    @property
    def superhedge(self) -> DualCertificate:
        c = self.upper_report.certificate
        return DualCertificate(tuple(-f for f in c.potentials), -c.multipliers, c.names)


def price_bounds(p: MartingaleProblem) -> PriceBounds:
    """Lowest and highest expected payoff over martingale couplings.

    Raises
    ------
    MartingaleInfeasibleError
        If no martingale coupling exists (for two marginals: the convex order
        fails).
    """
    cx = convex_order_check(*p.marginals) if len(p.marginals) == 2 else None
    low = solve_primal(p.constrained())
    if not low.optimal:
        witness = ""
        if cx is not None and not cx.ordered:
            witness = f" (convex order fails: mean gap {cx.mean_gap:.6g}, strike {cx.witness_strike})"
        raise MartingaleInfeasibleError("no martingale coupling with these marginals" + witness, low, cx)
    high = solve_primal(p.constrained(-p.payoff))
    return PriceBounds(low.primal_value, -high.primal_value, low, high, cx)


def conditional_mean_residual(coupling: Coupling) -> float:
    """Largest ``|E[X_{k+1} - X_k | prefix]|`` over steps and charged prefixes."""
    grid = coupling.grid
    _require_coordinates(grid)
    coords = grid.coordinate_grids()
    w = coupling.weights
    worst = 0.0
    for k in range(grid.ndim - 1):
        tail = tuple(range(k + 1, grid.ndim))
        step = coords[k + 1] - coords[k]
        drift = (w * step).sum(axis=tail)
        mass = w.sum(axis=tail)
        charged = mass > PREFIX_MASS_TOL
        if charged.any():
            worst = max(worst, float(np.max(np.abs(drift[charged]) / mass[charged])))
    return worst

