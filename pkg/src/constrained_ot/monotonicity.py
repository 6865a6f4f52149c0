"""
Cost-minimality of finitely supported measures within their constraint class.

Two measures are equivalent when they share every marginal and every
generator integral. A support set passes the check when each probability
measure ``beta`` carried by a small subset of it costs no more than every
equivalent ``alpha`` on the candidate grid. Optimal plans of a constrained
problem always pass (necessity); passing is not claimed to imply optimality.

The verdict is at grid resolution: ``alpha`` ranges over measures on the
candidate grid, not over all measures on the underlying spaces.

Two facts keep the check cheap and exact:

* ``alpha`` must share the marginals of ``beta``, so it lives on the product
  of the marginal supports of ``beta`` (at most ``m^n`` cells).
* Whether ``beta`` is optimal in its class depends only on its support. An
  optimal dual ``y`` for one weighting bounds the violation of any other
  weighting ``beta'`` by ``sum_s beta'_s * reduced_cost_s(y)``; only
  weightings where that bound exceeds the tolerance get their own LP.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constraints import ConstraintSet
from .lp import LinearProgram, LPBreakdownError, Status, solve_lp
from .measures import CostTensor, Coupling
from .solver import ConstrainedProblem, SolveReport, marginal_rows

MONOTONE_TOL = 1e-7
SUBSET_CAP = 10_000
SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class SupportSet:
    """Distinct grid cells with positive weights summing to one."""

    points: tuple
    weights: np.ndarray

    def __init__(self, points: Sequence, weights=None):
        pts = tuple(tuple(int(i) for i in p) for p in points)
        if not pts:
            raise ValueError("support set is empty")
        if len(set(pts)) != len(pts):
            raise ValueError("support set has repeated points")
        if weights is None:
            w = np.full(len(pts), 1.0 / len(pts))
        else:
            w = np.asarray(weights, float)
            if w.shape != (len(pts),) or np.any(w <= 0) or abs(w.sum() - 1) > 1e-9:
                raise ValueError("support weights must be positive and sum to 1")
            w = w / w.sum()
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class MonotonicityVerdict:
    passed: bool
    worst_violation: float
    witness: Coupling | None = None  # the cheaper equivalent alpha, when failed
    worst_support: SupportSet | None = None
    subsets_checked: int = 0
    measures_checked: int = 0
    lp_solves: int = 0
    exhaustive: bool = True
    tol: float = MONOTONE_TOL


class _ClassLP:
    """Class LP for one support subset, restricted to the product of its marginal supports."""

    def __init__(self, cells, cost: CostTensor, ws: ConstraintSet, candidate):
        grid = cost.grid
        n = grid.ndim
        axes = []
        for k in range(n):
            used = sorted({c[k] for c in cells})
            if candidate is not None:
                allowed = set(candidate[k])
                if not set(used) <= allowed:
                    raise ValueError(f"support points leave the candidate grid on factor {k}")
            axes.append(np.array(used, dtype=np.intp))
        self.grid = grid
        self.axes = axes
        self.shape = tuple(a.size for a in axes)
        sub = np.ix_(*axes)
        self.cost = cost.values[sub].reshape(-1)
        rows = [marginal_rows(self.shape)]
        if len(ws):
            rows.append(np.stack([g.values[sub].reshape(-1) for g in ws.generators]))
        self.A = np.vstack(rows)
        # column of each support cell inside the sub-grid
        pos = [{int(v): i for i, v in enumerate(a)} for a in axes]
        self.cols = np.array([np.ravel_multi_index(tuple(pos[k][c[k]] for k in range(n)), self.shape)
                              for c in cells])

    def rhs(self, beta_weights):
        return self.A[:, self.cols] @ beta_weights

    def solve(self, beta_weights):
        sol = solve_lp(LinearProgram(self.cost, self.A, self.rhs(beta_weights)))
        if sol.status is not Status.OPTIMAL:
            raise LPBreakdownError(f"class LP returned {sol.status}; beta itself is feasible")
        return sol

    def embed(self, x) -> np.ndarray:
        full = np.zeros(self.grid.shape)
        full[np.ix_(*self.axes)] = np.maximum(x, 0.0).reshape(self.shape)
        return full


def equivalence_minimize(beta: SupportSet, cost: CostTensor, ws: ConstraintSet | None = None,
                         candidate: Sequence[Sequence[int]] | None = None):
    """Cheapest measure equivalent to ``beta``.

    Parameters
    ----------
    beta : SupportSet
        Finitely supported probability measure on the grid of ``cost``.
    cost : CostTensor
    ws : ConstraintSet, optional
        Generators whose integrals ``alpha`` must share with ``beta``.
    candidate : list of index lists, optional
        Per-factor point indices allowed for ``alpha``; defaults to the full
        grid.

    Returns
    -------
    value : float
        ``min int c d alpha`` over the equivalence class of ``beta``.
    alpha : Coupling
        A minimizer, on the full grid.
    """
    ws = ConstraintSet.empty(cost.grid) if ws is None else ws
    lp = _ClassLP(beta.points, cost, ws, candidate)
    sol = lp.solve(beta.weights)
    return sol.objective_value, Coupling(cost.grid, lp.embed(sol.primal))


def _subsets(n_points, m_max, trials, rng):
    m_max = min(m_max, n_points)
    total = sum(math.comb(n_points, m) for m in range(1, m_max + 1))
    if total <= SUBSET_CAP:
        for m in range(1, m_max + 1):
            yield from itertools.combinations(range(n_points), m)
        return
    for _ in range(trials):
        m = int(rng.integers(1, m_max + 1))
        yield tuple(sorted(rng.choice(n_points, size=m, replace=False).tolist()))


def _random_weights(rng, m, trials):
    w = rng.dirichlet(np.ones(m), size=trials)
    w = np.maximum(w, 1e-12)
    return w / w.sum(axis=1, keepdims=True)


def check_cW_monotone(support: Sequence, cost: CostTensor, ws: ConstraintSet | None = None,
                      m_max: int = 3, trials: int = 50, candidate=None,
                      tol: float = MONOTONE_TOL, seed: int = 42) -> MonotonicityVerdict:
    """Test whether a set of grid cells is monotone for ``cost`` and ``ws``.

    Every subset of at most ``m_max`` points is examined when there are at most
    10 000 of them; otherwise ``trials`` random subsets are drawn. Each subset
    is tested with the uniform weighting and ``trials`` random positive
    weightings. ``worst_violation`` is the largest ``int c d beta - min_alpha
    int c d alpha`` found, clipped at zero; for weightings settled by a reused
    dual certificate the certified upper bound on the violation is used.
    """
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    ws = ConstraintSet.empty(cost.grid) if ws is None else ws
    points = [tuple(int(i) for i in p) for p in support]
    if len(set(points)) != len(points):
        raise ValueError("support has repeated points")
    rng = np.random.default_rng(seed)
    m_cap = min(m_max, len(points))
    exhaustive = sum(math.comb(len(points), m) for m in range(1, m_cap + 1)) <= SUBSET_CAP

    worst = 0.0
    witness = None
    worst_beta = None
    n_sub = n_meas = n_lp = 0
    for subset in _subsets(len(points), m_max, trials, rng):
        cells = [points[i] for i in subset]
        m = len(cells)
        weightings = np.vstack([np.full((1, m), 1.0 / m), _random_weights(rng, m, trials)])
        n_sub += 1
        n_meas += weightings.shape[0]
        lp = _ClassLP(cells, cost, ws, candidate)
        cell_cost = np.array([cost.values[c] for c in cells])
        sol = lp.solve(weightings[0])
        n_lp += 1
        results = {0: sol}
        reduced = cell_cost - lp.A[:, lp.cols].T @ sol.dual
        bounds = weightings @ reduced
        for r in np.flatnonzero(bounds > tol):
            if r not in results:
                results[r] = lp.solve(weightings[r])
                n_lp += 1
        # unsolved weightings are certified: their violation is at most the bound
        unsolved = np.setdiff1d(np.arange(weightings.shape[0]), list(results))
        if unsolved.size:
            worst = max(worst, float(bounds[unsolved].max()))
        for r, s in results.items():
            viol = float(weightings[r] @ cell_cost - s.objective_value)
            if viol > worst:
                worst = viol
                witness = Coupling(cost.grid, lp.embed(s.primal))
                worst_beta = SupportSet(cells, weightings[r])
    passed = worst <= tol
    return MonotonicityVerdict(
        passed, max(worst, 0.0),
        None if passed else witness,
        None if passed else worst_beta,
        n_sub, n_meas, n_lp, exhaustive, tol,
    )


def verify_solution_monotone(report: SolveReport, p: ConstrainedProblem, m_max: int = 3,
                             trials: int = 50, tol: float = MONOTONE_TOL,
                             seed: int = 42) -> MonotonicityVerdict:
    """Run :func:`check_cW_monotone` on the support of an optimal coupling."""
    if not report.optimal:
        raise ValueError(f"report is {report.status}, not optimal")
    support = report.coupling.support(SUPPORT_TOL)
    return check_cW_monotone(support, p.cost, p.constraints, m_max=m_max, trials=trials,
                             tol=tol, seed=seed)


def pairwise_c_monotone(cost: np.ndarray, a, b, tol: float = MONOTONE_TOL) -> bool:
    """Two-point swap test ``c(x1,y1) + c(x2,y2) <= c(x1,y2) + c(x2,y1) + tol``."""
    (x1, y1), (x2, y2) = a, b
    return cost[x1, y1] + cost[x2, y2] <= cost[x1, y2] + cost[x2, y1] + tol
