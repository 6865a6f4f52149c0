import numpy as np
import pytest

from constrained_ot import (
    ConstrainedProblem,
    CostTensor,
    Coupling,
    DiscreteMeasure,
    DiscreteSpace,
    MartingaleInfeasibleError,
    MartingaleProblem,
    ProductGrid,
    assemble_rows,
    conditional_mean_residual,
    convex_order_check,
    martingale_generators,
    phase1_feasibility,
    price_bounds,
    product_measure,
)
from constrained_ot.martingale import call_prices
from constrained_ot.solver import assemble_lp

from instances import grid2, random_marginal_pair


def measure(name, atoms):
    xs = sorted(atoms)
    return DiscreteMeasure(DiscreteSpace.from_coordinates(name, xs), [atoms[x] for x in xs])


def abs_payoff(mu, nu, fn=lambda x, y: abs(x - y)):
    return CostTensor.from_function(ProductGrid([mu.space, nu.space]), fn)


def test_generator_formula_and_count():
    g = ProductGrid([DiscreteSpace.from_coordinates("X", [-1, 1]), DiscreteSpace.from_coordinates("Y", [-2, 2])])
    ws = martingale_generators(g)
    assert len(ws) == 2
    np.testing.assert_array_equal(ws.generators[0].values, [[-1, 3], [0, 0]])
    g3 = ProductGrid([DiscreteSpace.from_coordinates(n, [0, 1]) for n in "ABC"])
    assert len(martingale_generators(g3)) == 2 + 4


def test_generators_need_coordinates():
    with pytest.raises(ValueError):
        martingale_generators(grid2(2, 2))


def test_generator_integrals_are_conditional_drifts():
    rng = np.random.default_rng(0)
    g = ProductGrid([DiscreteSpace.from_coordinates("X", [-1, 0, 2]), DiscreteSpace.from_coordinates("Y", [-3, 1, 4])])
    ws = martingale_generators(g)
    x, y = g.coordinate_grids()
    for _ in range(10):
        w = rng.random((3, 3))
        w /= w.sum()
        drift = ((y - x) * w).sum(axis=1)
        np.testing.assert_allclose(assemble_rows(ws) @ w.ravel(), drift, atol=1e-15)


def test_convex_order_examples():
    assert convex_order_check(measure("X", {0: 1.0}), measure("Y", {-1: 0.5, 1: 0.5})).ordered
    res = convex_order_check(measure("X", {-1: 0.5, 1: 0.5}), measure("Y", {0: 1.0}))
    assert not res.ordered and res.witness_strike == 0.0 and res.call_gap == pytest.approx(0.5)
    assert convex_order_check(measure("X", {-1: 0.5, 1: 0.5}), measure("Y", {-2: 0.5, 2: 0.5})).ordered


def test_call_prices_hand_values():
    mu = measure("Y", {-2: 0.5, 2: 0.5})
    np.testing.assert_allclose(call_prices(mu, [-2, -1, 1, 2]), [2, 1.5, 0.5, 0])


def test_mean_mismatch_is_not_ordered():
    res = convex_order_check(measure("X", {0: 1.0}), measure("Y", {1: 1.0}))
    assert not res.ordered and res.witness_strike is None and res.mean_gap == -1.0


def test_price_bounds_examples():
    mu, nu = measure("X", {0: 1.0}), measure("Y", {-1: 0.5, 1: 0.5})
    b = price_bounds(MartingaleProblem([mu, nu], abs_payoff(mu, nu)))
    assert b.lower == pytest.approx(1.0, abs=1e-12) and b.upper == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(b.lower_report.coupling.weights, product_measure([mu, nu]).weights, atol=1e-12)

    mu, nu = measure("X", {-1: 0.5, 1: 0.5}), measure("Y", {-2: 0.5, 2: 0.5})
    b = price_bounds(MartingaleProblem([mu, nu], abs_payoff(mu, nu)))
    assert b.lower == pytest.approx(1.5, abs=1e-9) and b.upper == pytest.approx(1.5, abs=1e-9)
    assert b.convex_order.ordered

    mu, nu = measure("X", {-1: 0.5, 1: 0.5}), measure("Y", {0: 1.0})
    with pytest.raises(MartingaleInfeasibleError) as info:
        price_bounds(MartingaleProblem([mu, nu], abs_payoff(mu, nu, lambda x, y: x * y)))
    assert not info.value.convex_order.ordered
    assert info.value.report.infeasibility is not None


def test_hedges_bracket_payoff():
    rng = np.random.default_rng(1)
    mu = measure("X", {-1: 0.5, 1: 0.5})
    nu = measure("Y", {-3: 0.25, 0: 0.5, 3: 0.25})
    payoff = CostTensor(ProductGrid([mu.space, nu.space]), rng.normal(size=(2, 3)))
    p = MartingaleProblem([mu, nu], payoff)
    b = price_bounds(p)
    assert b.lower <= b.upper + 1e-9
    cp = p.constrained()
    sub = b.subhedge.lower_envelope(cp.grid, cp.constraints)
    sup = b.superhedge.lower_envelope(cp.grid, cp.constraints)
    assert np.all(sub <= payoff.values + 1e-7) and np.all(sup >= payoff.values - 1e-7)
    assert b.superhedge.value(p.marginals) == pytest.approx(b.upper, abs=1e-9)


def test_problem_validation():
    mu = measure("X", {0: 1.0})
    with pytest.raises(ValueError):
        MartingaleProblem([mu], CostTensor(ProductGrid([mu.space]), [0.0]))
    g = grid2(2, 2)
    with pytest.raises(ValueError):
        MartingaleProblem([DiscreteMeasure.uniform(f) for f in g.factors], CostTensor(g, np.zeros((2, 2))))


def test_residual_examples():
    mu, nu = measure("X", {0: 1.0}), measure("Y", {-1: 0.5, 1: 0.5})
    assert conditional_mean_residual(product_measure([mu, nu])) == 0.0
    g = ProductGrid([DiscreteSpace.from_coordinates("X", [-1, 1]), DiscreteSpace.from_coordinates("Y", [-2, 2])])
    pi = Coupling(g, [[0.375, 0.125], [0.125, 0.375]])
    assert conditional_mean_residual(pi) <= 1e-12
    g = ProductGrid([DiscreteSpace.from_coordinates("X", [-1, 1]), DiscreteSpace.from_coordinates("Y", [-1, 1])])
    assert conditional_mean_residual(Coupling(g, [[0.5, 0], [0, 0.5]])) == 0.0


def test_three_period_bounds():
    a = measure("A", {0: 1.0})
    b = measure("B", {-1: 0.5, 1: 0.5})
    c = measure("C", {-2: 0.25, 0: 0.5, 2: 0.25})
    g = ProductGrid([a.space, b.space, c.space])
    payoff = CostTensor.from_function(g, lambda x, y, z: np.maximum(z - y, 0) + abs(z))
    bnd = price_bounds(MartingaleProblem([a, b, c], payoff))
    assert bnd.convex_order is None
    assert bnd.lower <= bnd.upper + 1e-9
    for rep in (bnd.lower_report, bnd.upper_report):
        assert conditional_mean_residual(rep.coupling) <= 1e-8
        assert rep.gap <= 1e-7 * (1 + abs(rep.primal_value))


def test_identity_coupling_bounds_lower_price():
    rng = np.random.default_rng(2)
    for _ in range(10):
        xs = np.sort(rng.choice(np.arange(-5, 6), size=4, replace=False)).astype(float)
        w = rng.random(4) + 0.1
        mu = DiscreteMeasure(DiscreteSpace.from_coordinates("X", xs), w / w.sum())
        nu = DiscreteMeasure(DiscreteSpace.from_coordinates("Y", xs), w / w.sum())
        c = rng.normal(size=(4, 4))
        b = price_bounds(MartingaleProblem([mu, nu], CostTensor(ProductGrid([mu.space, nu.space]), c)))
        assert b.lower <= float(np.diag(c) @ mu.weights) + 1e-9


def test_convex_order_matches_phase1_small_batch():
    rng = np.random.default_rng(3)
    for _ in range(80):
        mu, nu = random_marginal_pair(rng)
        g = ProductGrid([mu.space, nu.space])
        lp = assemble_lp(ConstrainedProblem([mu, nu], CostTensor(g, np.zeros(g.shape)), martingale_generators(g)))
        assert convex_order_check(mu, nu).ordered == phase1_feasibility(lp.A, lp.b).feasible
