import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from conftest import constants
from fdhomog.curves import (
    FunctionalSample,
    Grid,
    finite_difference,
    l2_distance,
    order_statistic,
    order_statistic_rank,
    pairwise_l2,
    pointwise_ranks,
    trapezoid_integral,
    trapezoid_weights,
)
from fdhomog.errors import ContractError, DegenerateInputError

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


class TestGrid:
    def test_rejects_non_increasing(self):
        with pytest.raises(ContractError):
            Grid([0.0, 0.5, 0.5])
        with pytest.raises(ContractError):
            Grid([1.0, 0.5, 0.0])

    def test_rejects_nan_and_short(self):
        with pytest.raises(ContractError):
            Grid([0.0, np.nan, 1.0])
        with pytest.raises(DegenerateInputError):
            Grid([0.0])

    def test_length_and_immutability(self):
        g = Grid.uniform(5, 2.0, 4.0)
        assert g.length == 2.0
        with pytest.raises(ValueError):
            g.points[0] = 1.0

    def test_equality_is_bitwise(self):
        assert Grid([0, 0.5, 1]) == Grid(np.array([0.0, 0.5, 1.0]))
        assert Grid([0, 0.5, 1]) != Grid([0, 0.5000001, 1])


class TestFunctionalSample:
    def test_shape_checks(self, unit3):
        with pytest.raises(ContractError):
            FunctionalSample(unit3, [[0.0, 1.0]])
        with pytest.raises(ContractError):
            FunctionalSample(unit3, [[0.0, np.inf, 1.0]])
        with pytest.raises(ContractError):
            FunctionalSample(unit3, [[0.0] * 3], labels=("a", "b"))

    def test_single_curve_promoted(self, unit3):
        s = FunctionalSample(unit3, [1.0, 2.0, 3.0])
        assert s.n == 1 and s.m == 3

    def test_append_and_take(self, three_constants):
        s = three_constants.append([5.0, 5.0, 5.0])
        assert s.n == 4
        np.testing.assert_array_equal(s.take([3, 0, 0]).values[:, 0], [5.0, 0.0, 0.0])


class TestTrapezoid:
    def test_linear_exact(self):
        assert trapezoid_integral([0.0, 1.0, 2.0], Grid([0.0, 0.5, 1.0])) == 1.0

    @pytest.mark.parametrize("m", [2, 3, 7, 30])
    def test_unit_constant(self, m):
        assert trapezoid_integral(np.ones(m), Grid.uniform(m)) == pytest.approx(1.0, abs=1e-15)

    def test_quadratic_error_bound(self):
        g = Grid.uniform(31)
        v = g.points**2
        got = trapezoid_integral(v, g)
        assert got == pytest.approx(oracles.trapz(list(v), list(g.points)), abs=1e-15)
        assert abs(got - 1 / 3) <= 1 / (6 * 30**2) + 1e-15

    def test_length_mismatch(self, unit3):
        with pytest.raises(ContractError):
            trapezoid_integral([1.0, 2.0], unit3)

    def test_weights_agree(self, rng):
        g = Grid(np.sort(rng.uniform(0, 3, 9)))
        v = rng.standard_normal(9)
        assert trapezoid_weights(g) @ v == pytest.approx(trapezoid_integral(v, g), abs=1e-13)

    @settings(max_examples=60, deadline=None)
    @given(arrays(float, 6, elements=finite), arrays(float, 6, elements=finite), finite, finite)
    def test_linearity(self, u, v, a, b):
        g = Grid([0.0, 0.1, 0.35, 0.5, 0.8, 1.0])
        lhs = trapezoid_integral(a * u + b * v, g)
        rhs = a * trapezoid_integral(u, g) + b * trapezoid_integral(v, g)
        scale = abs(a) * np.abs(u).sum() + abs(b) * np.abs(v).sum() + 1.0
        assert abs(lhs - rhs) <= 1e-12 * scale


class TestL2:
    def test_identity_and_unit_offset(self, unit3):
        assert l2_distance([1, 2, 3], [1, 2, 3], unit3) == 0.0
        assert l2_distance([0, 0, 0], [1, 1, 1], unit3) == 1.0

    def test_identity_curve_against_zero(self):
        g = Grid.uniform(30)
        got = l2_distance(g.points, np.zeros(30), g)
        assert got == pytest.approx(oracles.l2(list(g.points), [0.0] * 30, list(g.points)), abs=1e-15)
        # trapezoid overshoots int t^2 by exactly h^2/6
        assert got == pytest.approx(math.sqrt(1 / 3 + 1 / (6 * 29**2)), abs=1e-14)
        assert abs(got - 1 / math.sqrt(3)) < 1e-3

    def test_grid_mismatch(self, unit3):
        with pytest.raises(ContractError):
            l2_distance([0, 1], [0, 1, 2], unit3)

    @settings(max_examples=60, deadline=None)
    @given(arrays(float, (3, 5), elements=finite))
    def test_triangle_inequality(self, x):
        g = Grid([0.0, 0.2, 0.3, 0.7, 1.0])
        a, b, c = x
        assert l2_distance(a, c, g) <= l2_distance(a, b, g) + l2_distance(b, c, g) + 1e-9

    def test_pairwise_matches_scalar(self, rng):
        g = Grid.uniform(6)
        s = FunctionalSample(g, rng.standard_normal((4, 6)))
        d = pairwise_l2(s)
        assert d[1, 3] == pytest.approx(l2_distance(s.values[1], s.values[3], g), abs=1e-14)
        np.testing.assert_allclose(d, d.T)


class TestFiniteDifference:
    def test_constant(self, unit3):
        s = constants(Grid.uniform(5), [3.0])
        np.testing.assert_array_equal(finite_difference(s, 1).values, 0.0)

    def test_identity_slope(self):
        g = Grid.uniform(11)
        out = finite_difference(FunctionalSample(g, g.points), 1)
        np.testing.assert_allclose(out.values, 1.0, atol=1e-12)
        assert out.m == 10
        np.testing.assert_allclose(out.grid.points, (g.points[1:] + g.points[:-1]) / 2)

    def test_quadratic_second_difference_exact(self):
        g = Grid(np.arange(11.0))
        out = finite_difference(FunctionalSample(g, g.points**2), 2)
        np.testing.assert_array_equal(out.values, 2.0)
        out = finite_difference(FunctionalSample(Grid.uniform(30), Grid.uniform(30).points ** 2), 2)
        np.testing.assert_allclose(out.values, 2.0, atol=1e-9)

    def test_symbolic_second_divided_difference(self):
        t, d = sympy.symbols("t Delta", positive=True)
        f = lambda s: s**2  # noqa: E731
        first = lambda s: (f(s + d) - f(s)) / d  # noqa: E731
        # midpoints of consecutive segments are Delta apart
        second = (first(t + d) - first(t)) / d
        assert sympy.simplify(second) == 2

    def test_constant_increment(self):
        g = Grid.uniform(9)
        c = 0.7
        out = finite_difference(FunctionalSample(g, c * g.points + 4.0), 1)
        np.testing.assert_allclose(out.values, c, atol=1e-12)

    def test_too_short(self, unit3):
        with pytest.raises(DegenerateInputError):
            finite_difference(constants(unit3, [1.0]), 3)


class TestRanks:
    def test_single_curve(self, unit3):
        np.testing.assert_array_equal(pointwise_ranks(constants(unit3, [4.0])), 1)

    def test_total_order(self, three_constants):
        np.testing.assert_array_equal(pointwise_ranks(three_constants), [[1] * 3, [2] * 3, [3] * 3])

    def test_ties_count_both(self, unit3):
        np.testing.assert_array_equal(pointwise_ranks(constants(unit3, [1.0, 1.0])), 2)

    @settings(max_examples=60, deadline=None)
    @given(arrays(float, (6, 4), elements=st.integers(-2, 2).map(float)))
    def test_column_sums(self, x):
        s = FunctionalSample(Grid([0, 1, 2, 3]), x)
        r = pointwise_ranks(s)
        n = x.shape[0]
        for k in range(4):
            no_ties = len(set(x[:, k])) == n
            total = r[:, k].sum()
            assert total >= n * (n + 1) // 2
            assert (total == n * (n + 1) // 2) == no_ties
            assert r[:, k].min() >= 1 and r[:, k].max() == n


class TestOrderStatistic:
    def test_rank_convention(self):
        assert order_statistic_rank(0.05, 1000) == 50
        assert order_statistic_rank(0.95, 1000) == 950
        assert order_statistic_rank(0.15, 20) == 3
        assert order_statistic_rank(0.15, 3) == 1
        assert order_statistic_rank(0.15, 1225) == 184

    def test_value(self):
        assert order_statistic(np.arange(1.0, 21.0)[::-1], 0.15) == 3.0
