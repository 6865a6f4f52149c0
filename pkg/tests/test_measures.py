import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constrained_ot import (
    CostTensor,
    Coupling,
    DiscreteMeasure,
    DiscreteSpace,
    ProductGrid,
    integrate,
    marginal,
    product_measure,
    pushforward,
)
from oracles import double_loop_marginals, triple_loop_product

from instances import grid2, labeled_space


def test_space_validation():
    with pytest.raises(ValueError):
        DiscreteSpace("A", [])
    with pytest.raises(ValueError):
        DiscreteSpace("A", ["a", "a"])
    with pytest.raises(ValueError):
        DiscreteSpace("A", ["a", "b"], coordinates=[0.0])
    s = DiscreteSpace.from_coordinates("X", [-1, 1])
    assert s.has_coordinates and s.size == 2


def test_measure_normalization_rule():
    s = labeled_space("A", 2)
    m = DiscreteMeasure(s, [0.5, 0.5 + 5e-10])
    assert m.weights.sum() == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        DiscreteMeasure(s, [0.5, 0.6])
    with pytest.raises(ValueError):
        DiscreteMeasure(s, [1.5, -0.5])
    with pytest.raises(ValueError):
        DiscreteMeasure(s, [1.0])


def test_objects_are_immutable():
    m = DiscreteMeasure.uniform(labeled_space("A", 3))
    with pytest.raises(ValueError):
        m.weights[0] = 1.0


def test_grid_flat_index_is_row_major():
    g = ProductGrid([labeled_space("A", 2), labeled_space("B", 3), labeled_space("C", 2)])
    assert g.shape == (2, 3, 2) and g.size == 12
    for flat, cell in enumerate(g.cells()):
        assert g.flat_index(cell) == flat
        assert g.multi_index(flat) == cell


def test_coupling_mass_check():
    g = grid2(2, 2)
    with pytest.raises(ValueError):
        Coupling(g, [[0.5, 0.0], [0.0, 0.4]])
    with pytest.raises(ValueError):
        Coupling(g, [[1.1, -0.1], [0.0, 0.0]])


def test_marginal_of_product_is_factor():
    g = grid2(2, 2)
    mu = DiscreteMeasure(g.factors[0], [0.5, 0.5])
    nu = DiscreteMeasure(g.factors[1], [1 / 3, 2 / 3])
    pi = product_measure([mu, nu])
    np.testing.assert_allclose(marginal(pi, 2).weights, [1 / 3, 2 / 3], atol=1e-15)


def test_marginal_of_diagonal():
    pi = Coupling.from_atoms(grid2(2, 2), {(0, 0): 0.5, (1, 1): 0.5})
    np.testing.assert_array_equal(marginal(pi, 1).weights, [0.5, 0.5])


def test_marginal_index_out_of_range():
    pi = Coupling.from_atoms(grid2(2, 2), {(0, 0): 1.0})
    for k in (0, 3):
        with pytest.raises(IndexError):
            marginal(pi, k)


def test_marginal_matches_double_loop_oracle():
    rng = np.random.default_rng(3)
    w = rng.random((3, 3))
    w /= w.sum()
    pi = Coupling(grid2(3, 3), w)
    rows, cols = double_loop_marginals(w)
    np.testing.assert_allclose(marginal(pi, 1).weights, rows, atol=1e-15)
    np.testing.assert_allclose(marginal(pi, 2).weights, cols, atol=1e-15)


def test_product_measure_examples():
    g = ProductGrid([labeled_space("A", 1), labeled_space("B", 2)])
    pi = product_measure([DiscreteMeasure(g.factors[0], [1.0]), DiscreteMeasure(g.factors[1], [0.5, 0.5])])
    np.testing.assert_array_equal(pi.weights.ravel(), [0.5, 0.5])
    g2 = grid2(2, 2)
    pi2 = product_measure([DiscreteMeasure.uniform(f) for f in g2.factors])
    np.testing.assert_array_equal(pi2.weights, np.full((2, 2), 0.25))


def test_product_measure_three_factors_vs_oracle():
    rng = np.random.default_rng(5)
    spaces = [labeled_space(n, s) for n, s in zip("ABC", (2, 2, 3))]
    ms = []
    for sp in spaces:
        w = rng.random(sp.size)
        ms.append(DiscreteMeasure(sp, w / w.sum()))
    pi = product_measure(ms)
    np.testing.assert_allclose(pi.weights, triple_loop_product(*[m.weights for m in ms]), atol=1e-16)


def test_integrate_examples():
    g = grid2(2, 2, coords=True)
    diag = Coupling.from_atoms(g, {(0, 0): 0.5, (1, 1): 0.5})
    anti = Coupling.from_atoms(g, {(0, 1): 0.5, (1, 0): 0.5})
    one = CostTensor(g, np.ones((2, 2)))
    absd = CostTensor.from_function(g, lambda x, y: abs(x - y))
    assert integrate(one, diag) == 1.0
    assert integrate(absd, diag) == 0.0
    assert integrate(absd, anti) == 1.0


def test_integrate_shape_mismatch():
    pi = Coupling.from_atoms(grid2(2, 2), {(0, 0): 1.0})
    with pytest.raises(ValueError):
        integrate(np.ones((3, 2)), pi)


def test_pushforward_examples():
    g = grid2(2, 2)
    diag = Coupling.from_atoms(g, {(0, 0): 0.5, (1, 1): 0.5})
    ident = [np.arange(2), np.arange(2)]
    swap = [np.array([1, 0]), np.array([1, 0])]
    np.testing.assert_array_equal(pushforward(diag, ident).weights, diag.weights)
    np.testing.assert_array_equal(pushforward(diag, swap).weights, diag.weights)
    atom = Coupling.from_atoms(g, {(0, 0): 1.0})
    moved = pushforward(atom, [np.array([1, 0]), np.arange(2)])
    assert moved.weights[1, 0] == 1.0 and moved.weights.sum() == 1.0


def test_pushforward_rejects_non_bijection():
    atom = Coupling.from_atoms(grid2(2, 2), {(0, 0): 1.0})
    with pytest.raises(ValueError):
        pushforward(atom, [np.array([0, 0]), np.arange(2)])


# -- properties -----------------------------------------------------------------

sizes = st.lists(st.integers(1, 4), min_size=1, max_size=3)


@settings(max_examples=60, deadline=None)
@given(sizes, st.integers(0, 2**32 - 1))
def test_marginal_of_product_roundtrip(shape, seed):
    rng = np.random.default_rng(seed)
    ms = []
    for k, s in enumerate(shape):
        w = rng.random(s) + 0.01
        ms.append(DiscreteMeasure(labeled_space(f"S{k}", s), w / w.sum()))
    pi = product_measure(ms)
    for k, m in enumerate(ms, start=1):
        np.testing.assert_allclose(marginal(pi, k).weights, m.weights, rtol=0, atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.floats(-10, 10), st.floats(-10, 10), st.integers(0, 2**32 - 1))
def test_integrate_bilinear(n1, n2, a, b, seed):
    rng = np.random.default_rng(seed)
    g = grid2(n1, n2)
    c1, c2 = rng.normal(size=(2, n1, n2))
    w = rng.random((n1, n2))
    pi = Coupling(g, w / w.sum())
    lhs = integrate(CostTensor(g, a * c1 + b * c2), pi)
    rhs = a * integrate(CostTensor(g, c1), pi) + b * integrate(CostTensor(g, c2), pi)
    assert abs(lhs - rhs) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(sizes, st.integers(0, 2**32 - 1))
def test_pushforward_inverse_is_exact(shape, seed):
    rng = np.random.default_rng(seed)
    g = ProductGrid([labeled_space(f"S{k}", s) for k, s in enumerate(shape)])
    w = rng.random(g.shape)
    pi = Coupling(g, w / w.sum())
    perms = [rng.permutation(s) for s in shape]
    inv = [np.argsort(p) for p in perms]
    moved = pushforward(pi, perms)
    assert math.fsum(moved.weights.ravel()) == math.fsum(pi.weights.ravel())
    np.testing.assert_array_equal(pushforward(moved, inv).weights, pi.weights)
