"""
Dense two-phase primal simplex for equality-form linear programs.

    minimize    c @ x
    subject to  A @ x == b,  x >= 0

Pricing is Dantzig (most negative reduced cost) for the first ``3 * (M + N)``
iterations of each phase and Bland's smallest-index rule afterwards, which
guarantees termination on degenerate problems. The solver is deterministic:
ties are always broken by smallest index.

Duals are read off the final basis, ``y = c_B^T B^{-1}``. Infeasible problems
come back with a Farkas certificate ``y`` (``b @ y > 0``, ``A^T y <= 0``) and
unbounded ones with a recession ray.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

PIVOT_TOL = 1e-9
ZERO_ROW_TOL = 1e-11
ZERO_RHS_TOL = 1e-9
CERT_TOL = 1e-9


class LPBreakdownError(RuntimeError):
    """Pivoting could not proceed, or a result failed its own verification."""


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class LinearProgram:
    """``min c @ x`` s.t. ``A @ x == b``, ``x >= 0`` except where ``free`` is set."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    free: np.ndarray | None = None

    def __post_init__(self):
        c = np.array(self.c, dtype=float).reshape(-1)
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if A.ndim == 1 and A.size == b.size * c.size:
            A = A.reshape(b.size, c.size)
        if A.shape != (b.size, c.size):
            raise ValueError(f"A has shape {A.shape}, expected {(b.size, c.size)}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("linear program data must be finite")
        free = None
        if self.free is not None:
            free = np.array(self.free, dtype=bool).reshape(-1)
            if free.shape != c.shape:
                raise ValueError("free mask must have one entry per variable")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "free", free)

    @property
    def shape(self):
        return self.A.shape


@dataclass(frozen=True)
class LpSolution:
    status: Status
    objective_value: float = float("nan")
    primal: np.ndarray | None = None
    dual: np.ndarray | None = None
    certificate: np.ndarray | None = None  # Farkas vector when infeasible
    ray: np.ndarray | None = None  # improving direction when unbounded
    iterations: int = 0
    dropped_rows: tuple = field(default=())

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: np.ndarray | None = None
    certificate: np.ndarray | None = None


class _Tableau:
    """Rows ``[B^{-1} A | B^{-1} b]`` plus a reduced-cost row."""

    def __init__(self, T, basis, cost):
        self.T = T
        self.basis = basis
        self.set_cost(cost)

    def set_cost(self, cost):
        self.cost = cost
        ncols = self.T.shape[1] - 1
        cb = cost[self.basis]
        self.d = cost[:ncols] - cb @ self.T[:, :ncols]
        self.z = float(cb @ self.T[:, -1])

    def pivot(self, r, s):
        T = self.T
        T[r] /= T[r, s]
        col = T[:, s].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, s] = 0.0
        T[r, s] = 1.0
        ds = self.d[s]
        self.d -= ds * T[r, :-1]
        self.d[s] = 0.0
        self.z += ds * T[r, -1]
        self.basis[r] = s

    def entering(self, allowed, bland):
        d = np.where(allowed, self.d, 0.0)
        if bland:
            cand = np.flatnonzero(d < -PIVOT_TOL)
            return int(cand[0]) if cand.size else -1
        s = int(np.argmin(d))
        return s if d[s] < -PIVOT_TOL else -1

    def leaving(self, s):
        col = self.T[:, s]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return -1
        ratios = np.maximum(self.T[rows, -1], 0.0) / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
        # smallest basic variable index among the ties (Bland)
        return int(ties[np.argmin(self.basis[ties])])

    def run(self, allowed, max_iter):
        """Iterate to optimality. Returns ('optimal'|'unbounded', entering, iterations)."""
        m, ncols = self.T.shape[0], self.T.shape[1] - 1
        dantzig_limit = 3 * (m + ncols)
        it = 0
        while True:
            s = self.entering(allowed, bland=it >= dantzig_limit)
            if s < 0:
                return "optimal", -1, it
            r = self.leaving(s)
            if r < 0:
                return "unbounded", s, it
            if it >= max_iter:
                raise LPBreakdownError(f"simplex did not terminate within {max_iter} pivots")
            self.pivot(r, s)
            it += 1


def _split_free(lp: LinearProgram):
    """Replace each free column j by the pair x_j^+ , x_j^-."""
    if lp.free is None or not lp.free.any():
        return lp.c, lp.A, None
    neg = np.flatnonzero(lp.free)
    return np.concatenate([lp.c, -lp.c[neg]]), np.hstack([lp.A, -lp.A[:, neg]]), neg


def solve_lp(lp: LinearProgram, max_iter: int | None = None) -> LpSolution:
    """Solve a linear program in equality standard form.

    Parameters
    ----------
    lp : LinearProgram
        Problem data. Variables flagged in ``lp.free`` are split into
        differences of nonnegative parts.
    max_iter : int, optional
        Pivot budget per phase. Exceeding it raises :class:`LPBreakdownError`.

    Returns
    -------
    LpSolution
        ``primal`` and ``dual`` are set when optimal; ``certificate`` when
        infeasible; ``ray`` when unbounded. Every result is verified before it
        is returned.
    """
    c, A, neg = _split_free(lp)
    b = lp.b
    M, N = A.shape
    if max_iter is None:
        max_iter = 50 * (M + N) ** 2 + 1000

    row_scale = np.abs(A).max(axis=1, initial=0.0)
    zero_rows = row_scale < ZERO_ROW_TOL
    for i in np.flatnonzero(zero_rows):
        if abs(b[i]) >= ZERO_RHS_TOL:
            y = np.zeros(M)
            y[i] = np.sign(b[i])
            return _infeasible(lp, y, neg, 0)
    rows = np.flatnonzero(~zero_rows)
    sign = np.where(b[rows] < 0, -1.0, 1.0)
    A1 = A[rows] * sign[:, None]
    b1 = b[rows] * sign
    m = rows.size

    # phase 1: artificial basis
    T = np.zeros((m, N + m + 1))
    T[:, :N] = A1
    T[:, N:N + m] = np.eye(m)
    T[:, -1] = b1
    tab = _Tableau(T, np.arange(N, N + m), np.concatenate([np.zeros(N), np.ones(m)]))
    _, _, it1 = tab.run(np.ones(N + m, dtype=bool), max_iter)

    feas_tol = 1e-9 * max(1.0, np.abs(b1).max(initial=0.0))
    if tab.z > feas_tol:
        # y1 = c_B^T B^{-1}; the artificial columns carry B^{-1}
        y1 = 1.0 - tab.d[N:N + m]
        y = np.zeros(M)
        y[rows] = sign * y1
        return _infeasible(lp, y, neg, it1)

    # drive zero-level artificials out of the basis, dropping redundant rows;
    # an artificial may sit in any tableau row, and the original row it
    # belongs to is the one that turns out redundant
    keep = np.ones(m, dtype=bool)
    redundant = np.zeros(m, dtype=bool)
    for r in range(m):
        if tab.basis[r] < N:
            continue
        row = np.abs(tab.T[r, :N])
        j = int(np.argmax(row)) if N else 0
        if N and row[j] > PIVOT_TOL:
            tab.pivot(r, j)
        else:
            keep[r] = False
            redundant[tab.basis[r] - N] = True
    dropped = tuple(sorted(int(i) for i in np.concatenate([np.flatnonzero(zero_rows), rows[redundant]])))

    T2 = np.hstack([tab.T[keep, :N], tab.T[keep, -1:]])
    basis = tab.basis[keep].copy()
    tab = _Tableau(T2, basis, c)
    outcome, s, it2 = tab.run(np.ones(N, dtype=bool), max_iter)
    iterations = it1 + it2

    if outcome == "unbounded":
        ray = np.zeros(N)
        ray[s] = 1.0
        ray[tab.basis] = -tab.T[:, s]
        ray = np.maximum(ray, 0.0)
        return _unbounded(lp, ray, neg, iterations)

    kept = rows[~redundant]
    B = A[kept][:, tab.basis]
    x = np.zeros(N)
    y = np.zeros(M)
    if kept.size:
        try:
            x[tab.basis] = np.linalg.solve(B, b[kept])
            y[kept] = np.linalg.solve(B.T, c[tab.basis])
        except np.linalg.LinAlgError as exc:
            raise LPBreakdownError("final basis is singular") from exc
    if np.any(x < -1e-9):
        raise LPBreakdownError(f"basic solution has negative entries (min {x.min():.3e})")
    x = np.maximum(x, 0.0)
    return _optimal(lp, c, A, x, y, neg, iterations, dropped)


def _merge(x, n, neg):
    if neg is None:
        return x
    out = x[:n].copy()
    out[neg] -= x[n:]
    return out


def _optimal(lp, c, A, x, y, neg, iterations, dropped):
    n = lp.c.size
    value = float(c @ x)
    reduced = c - A.T @ y
    scale = 1.0 + np.abs(lp.b).max(initial=0.0)
    residual = np.abs(A @ x - lp.b).max(initial=0.0)
    if residual > 1e-8 * scale:
        raise LPBreakdownError(f"primal residual {residual:.3e} exceeds tolerance")
    if reduced.min(initial=0.0) < -1e-7:
        raise LPBreakdownError(f"dual infeasibility {-reduced.min():.3e} at optimum")
    gap = abs(value - float(lp.b @ y))
    if gap > 1e-7 * (1.0 + abs(value)):
        raise LPBreakdownError(f"duality gap {gap:.3e} at optimum")
    return LpSolution(Status.OPTIMAL, value, _merge(x, n, neg), y, iterations=iterations,
                      dropped_rows=dropped)


def _infeasible(lp, y, neg, iterations):
    if not verify_farkas(lp.A, lp.b, y, free=lp.free):
        raise LPBreakdownError("infeasibility certificate failed verification")
    return LpSolution(Status.INFEASIBLE, certificate=y, iterations=iterations)


def _unbounded(lp, ray, neg, iterations):
    c, A, _ = _split_free(lp)
    if not (c @ ray < 0 and np.abs(A @ ray).max(initial=0.0) <= 1e-8 * (1 + np.abs(ray).max())):
        raise LPBreakdownError("unbounded ray failed verification")
    return LpSolution(Status.UNBOUNDED, -np.inf, ray=_merge(ray, lp.c.size, neg),
                      iterations=iterations)


def verify_farkas(A, b, y, free=None, tol: float = CERT_TOL) -> bool:
    """Check ``b @ y > tol`` and ``A^T y <= tol`` (``== 0`` on free columns)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    aty = A.T @ y
    ok = float(np.asarray(b) @ y) > tol and bool(np.all(aty <= tol))
    if free is not None and np.any(free):
        ok = ok and bool(np.all(np.abs(aty[np.asarray(free)]) <= tol))
    return ok


def phase1_feasibility(A, b) -> FeasibilityResult:
    """Decide whether ``A x = b`` has a solution ``x >= 0``.

    Returns a verified witness ``x`` when feasible, or a Farkas certificate
    ``y`` with ``b @ y > 0`` and ``A^T y <= 0`` when not.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    sol = solve_lp(LinearProgram(np.zeros(A.shape[1]), A, b))
    if sol.status is Status.INFEASIBLE:
        return FeasibilityResult(False, certificate=sol.certificate)
    x = sol.primal
    if np.abs(A @ x - b).max(initial=0.0) > 1e-8 * (1 + np.abs(b).max(initial=0.0)) or x.min(initial=0) < -1e-9:
        raise LPBreakdownError("feasibility witness failed verification")
    return FeasibilityResult(True, witness=x)
