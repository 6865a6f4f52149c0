import numpy as np
import pytest

from constrained_ot import LinearProgram, LPBreakdownError, Status, phase1_feasibility, solve_lp
from constrained_ot.lp import verify_farkas
from oracles import random_lp, vertex_enumeration_lp


def check_optimal(lp, sol):
    A, b, c = lp.A, lp.b, lp.c
    x, y = sol.primal, sol.dual
    assert np.all(np.abs(A @ x - b) <= 1e-8 * (1 + np.abs(b).max(initial=0)))
    assert x.min() >= -1e-9
    reduced = c - A.T @ y
    assert reduced.min() >= -1e-7
    assert np.all(x * reduced <= 1e-7)
    assert abs(sol.objective_value - c @ x) <= 1e-8
    assert abs(c @ x - b @ y) <= 1e-7 * (1 + abs(c @ x))


def test_single_binding_constraint():
    lp = LinearProgram([1, 0], [[1, 1]], [1])
    sol = solve_lp(lp)
    assert sol.status is Status.OPTIMAL
    assert sol.objective_value == 0
    np.testing.assert_allclose(sol.primal, [0, 1])
    check_optimal(lp, sol)


def test_negative_rhs_infeasible():
    lp = LinearProgram([0], [[1]], [-1])
    sol = solve_lp(lp)
    assert sol.status is Status.INFEASIBLE
    assert verify_farkas(lp.A, lp.b, sol.certificate)


def test_zero_row_unbounded():
    sol = solve_lp(LinearProgram([-1], [[0]], [0]))
    assert sol.status is Status.UNBOUNDED
    assert sol.ray[0] > 0


def test_inconsistent_zero_row_is_infeasible():
    sol = solve_lp(LinearProgram([1, 1], [[1, 1], [0, 0]], [1, 1]))
    assert sol.status is Status.INFEASIBLE


def test_redundant_rows_are_dropped():
    lp = LinearProgram([1, 2, 3], [[1, 1, 1], [2, 2, 2], [0, 0, 0]], [1, 2, 0])
    sol = solve_lp(lp)
    assert sol.optimal and sol.objective_value == pytest.approx(1)
    assert len(sol.dropped_rows) == 2
    check_optimal(lp, sol)


def test_phase1_examples():
    res = phase1_feasibility([[1, 1]], [1])
    assert res.feasible
    np.testing.assert_allclose([1, 1] @ res.witness, 1)
    res = phase1_feasibility([[1], [-1]], [1, 1])
    assert not res.feasible
    y = res.certificate
    assert np.array([1, 1]) @ y > 1e-9
    assert (np.array([[1], [-1]]).T @ y).max() <= 1e-9
    # the only certificate direction is (1, 1) up to scale
    assert y[0] == pytest.approx(y[1])


def test_phase1_construct_then_solve():
    rng = np.random.default_rng(11)
    for _ in range(200):
        m, n = (int(v) for v in rng.integers(1, 8, size=2))
        A = rng.normal(size=(m, n))
        x0 = rng.random(n) * (rng.random(n) < 0.6)
        b = A @ x0
        res = phase1_feasibility(A, b)
        assert res.feasible
        assert np.abs(A @ res.witness - b).max() <= 1e-8 * (1 + np.abs(b).max())
        assert res.witness.min() >= -1e-9


def test_beale_cycling_example_terminates():
    c = [0, 0, 0, -0.75, 150, -0.02, 6]
    A = [[1, 0, 0, 0.25, -60, -0.04, 9],
         [0, 1, 0, 0.5, -90, -0.02, 3],
         [0, 0, 1, 0, 0, 1, 0]]
    lp = LinearProgram(c, A, [0, 0, 1])
    sol = solve_lp(lp)
    assert sol.optimal
    assert sol.objective_value == pytest.approx(-0.05, abs=1e-12)
    check_optimal(lp, sol)


def test_free_variables():
    # x1 free, x2 >= 0: min x1 on x1 + x2 = 2 runs off to -inf
    lp = LinearProgram([1, 0], [[1, 1]], [2], free=[True, False])
    sol = solve_lp(lp)
    assert sol.status is Status.UNBOUNDED
    # min x1 + x2 on x1 - x2 = -3 is attained at x1 = -3
    lp = LinearProgram([1, 1], [[1, -1]], [-3], free=[True, False])
    sol = solve_lp(lp)
    assert sol.optimal
    np.testing.assert_allclose(sol.primal, [-3, 0], atol=1e-12)
    assert sol.objective_value == pytest.approx(-3)


def test_iteration_limit_raises():
    rng = np.random.default_rng(0)
    c, A, b = rng.normal(size=6), rng.normal(size=(3, 6)), np.abs(rng.normal(size=3))
    with pytest.raises(LPBreakdownError):
        solve_lp(LinearProgram(c, A, b), max_iter=0)


def test_bad_dimensions():
    with pytest.raises(ValueError):
        LinearProgram([1, 2], [[1, 2, 3]], [1])
    with pytest.raises(ValueError):
        LinearProgram([np.inf], [[1]], [1])


def test_deterministic():
    rng = np.random.default_rng(4)
    c, A, b = random_lp(rng)
    s1 = solve_lp(LinearProgram(c, A, b))
    s2 = solve_lp(LinearProgram(c, A, b))
    assert s1.status == s2.status
    for a, bb in [(s1.primal, s2.primal), (s1.dual, s2.dual), (s1.certificate, s2.certificate)]:
        if a is not None:
            assert np.array_equal(a, bb)


def test_small_random_lps_against_vertex_enumeration():
    rng = np.random.default_rng(2024)
    seen = set()
    for _ in range(150):
        c, A, b = random_lp(rng, max_n=7, max_m=4)
        if rng.random() < 0.5:
            b = A @ rng.integers(0, 3, size=A.shape[1])
        status, value = vertex_enumeration_lp(c, A, b)
        lp = LinearProgram(c, A, b)
        sol = solve_lp(lp)
        seen.add(status)
        assert sol.status.value == status
        if status == "optimal":
            assert sol.objective_value == pytest.approx(value, abs=1e-6)
            check_optimal(lp, sol)
        elif status == "infeasible":
            assert verify_farkas(A, b, sol.certificate)
        else:
            d = sol.ray
            assert d.min() >= -1e-9 and np.abs(A @ d).max() <= 1e-8 and c @ d < 0
    assert seen == {"optimal", "infeasible", "unbounded"}
