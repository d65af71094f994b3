import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import constants, random_sample
from fdhomog.curves import FunctionalSample, Grid
from fdhomog.depth import DepthKind, DepthSpec, draw_directions
from fdhomog.errors import ContractError, DegenerateInputError
from fdhomog.homogeneity import (
    StatisticKind,
    Tail,
    TestConfig,
    bootstrap_statistics,
    bootstrap_test,
    bootstrap_test_many,
    critical_value,
    evaluate_statistics,
    stat_p1,
    stat_p2,
    stat_p3,
    stat_p4,
)

P1, P2, P3, P4 = StatisticKind
BD = DepthSpec("bd")


@pytest.fixture
def pair_grid():
    return Grid([0.0, 1.0])


class TestClosedForm:
    """Constant curves where every band membership can be counted by hand."""

    def test_p1_inside(self, pair_grid):
        F, G = constants(pair_grid, [0, 2]), constants(pair_grid, [1, 5])
        assert stat_p1(F, G, BD) == 1.0

    def test_p1_p2_outside(self, pair_grid):
        F, G = constants(pair_grid, [0, 2]), constants(pair_grid, [10, 11])
        # 10 joins {0, 2}: only the pairs that contain it are banded around it
        assert stat_p1(F, G, BD) == pytest.approx(2 / 3, abs=1e-15)
        assert stat_p2(F, G, BD) == pytest.approx(1 / 3, abs=1e-15)

    def test_p3_p4(self, pair_grid):
        F, G = constants(pair_grid, [0, 2]), constants(pair_grid, [1, 10])
        assert stat_p3(F, G, BD) == 1.0
        # P1(G,G) = 2/3 for both members of {1, 10}, P1(F,F) = 1
        assert stat_p4(F, G, BD) == pytest.approx(0.0, abs=1e-15)
        G = constants(pair_grid, [10, 11])
        assert stat_p4(F, G, BD) == pytest.approx(1 / 9, abs=1e-15)

    def test_tails(self):
        assert P1.tail is Tail.LOWER and P3.tail is Tail.LOWER
        assert P2.tail is Tail.UPPER and P4.tail is Tail.UPPER


def _oracle_stats(F, G, spec):
    t = F.grid.points.tolist()
    directions = None
    if spec.kind is DepthKind.RPD:
        directions = draw_directions(F.grid, spec.projections, spec.rng_seed).tolist()
    return oracles.statistics(
        F.values.tolist(), G.values.tolist(), t, spec.kind.value, directions, floor=1e-12
    )


class TestOracleStatistics:
    @pytest.mark.parametrize("kind", list(DepthKind))
    @pytest.mark.parametrize("seed", range(4))
    def test_matches_loops(self, kind, seed):
        rng = np.random.default_rng(seed)
        F = random_sample(rng, int(rng.integers(2, 6)), 4, ties=seed % 2 == 1)
        G = FunctionalSample(F.grid, rng.standard_normal((int(rng.integers(2, 6)), 4)) + 0.3)
        spec = DepthSpec(kind, projections=7, rng_seed=seed, on_degenerate="floor")
        got = evaluate_statistics(F, G, spec)
        want = _oracle_stats(F, G, spec)
        for k in StatisticKind:
            assert got[k] == pytest.approx(want[k.value], rel=1e-12, abs=1e-12), k


samples = st.tuples(st.integers(0, 10_000), st.integers(2, 7), st.integers(2, 6))


class TestIdentities:
    @settings(max_examples=25, deadline=None)
    @given(samples, st.sampled_from(list(DepthKind)))
    def test_self_comparison(self, params, kind):
        seed, n, m = params
        F = random_sample(np.random.default_rng(seed), n, m)
        spec = DepthSpec(kind, projections=5, on_degenerate="floor")
        s = evaluate_statistics(F, F, spec)
        assert s[P2] == 0.0
        assert s[P4] == 0.0
        assert s[P3] == s[P1]

    @settings(max_examples=25, deadline=None)
    @given(samples, st.sampled_from(list(DepthKind)))
    def test_p3_dominates_p1(self, params, kind):
        seed, n, m = params
        rng = np.random.default_rng(seed)
        F = random_sample(rng, n, m)
        G = FunctionalSample(F.grid, rng.standard_normal((n + 1, m)))
        s = evaluate_statistics(F, G, DepthSpec(kind, projections=5, on_degenerate="floor"))
        assert s[P3] >= s[P1]
        assert s[P2] >= 0 and s[P4] >= 0

    def test_selection_does_not_change_values(self, rng):
        F = random_sample(rng, 5, 4)
        G = FunctionalSample(F.grid, rng.standard_normal((4, 4)))
        full = evaluate_statistics(F, G, BD)
        for k in StatisticKind:
            assert evaluate_statistics(F, G, BD, [k])[k] == full[k]

    def test_grid_mismatch(self, unit3, pair_grid):
        with pytest.raises(ContractError):
            stat_p1(constants(unit3, [0, 1]), constants(pair_grid, [0, 1]), BD)


class TestCriticalValue:
    def test_ranks(self):
        v = np.arange(1.0, 1001.0)[::-1]
        assert critical_value(v, 0.05, Tail.LOWER) == 50.0
        assert critical_value(v, 0.05, Tail.UPPER) == 950.0

    def test_small(self):
        assert critical_value([3.0, 1.0, 2.0, 5.0, 4.0], 0.2, "lower") == 1.0
        assert critical_value([3.0, 1.0, 2.0, 5.0, 4.0], 0.2, "upper") == 4.0


class TestConfigValidation:
    def test_rejects_bad_values(self):
        with pytest.raises(ContractError):
            TestConfig(bootstrap=0)
        with pytest.raises(ContractError):
            TestConfig(alpha=1.0)
        with pytest.raises(ContractError):
            TestConfig(bootstrap=10, alpha=0.05)
        with pytest.raises(ContractError):
            TestConfig(rng_seed=-1)

    def test_round_trip_dict(self):
        d = TestConfig(bootstrap=20, statistic="p3").to_dict()
        assert d["statistic"] == "p3" and d["depth"]["kind"] == "fm"


class TestBootstrap:
    @pytest.fixture
    def two_samples(self, rng):
        g = Grid.uniform(8)
        F = FunctionalSample(g, rng.standard_normal((6, 8)))
        G = FunctionalSample(g, rng.standard_normal((5, 8)) + 0.2)
        return F, G

    @pytest.mark.parametrize("kind", list(DepthKind))
    def test_identical_curves_never_reject(self, unit3, kind):
        F = constants(unit3, [1.0] * 5)
        cfg = TestConfig(bootstrap=40, depth=DepthSpec(kind, projections=5))
        for res in bootstrap_test_many(F, F, cfg, list(StatisticKind)).values():
            assert not res.reject
            assert res.observed == res.critical_value

    def test_deterministic(self, two_samples):
        F, G = two_samples
        cfg = TestConfig(bootstrap=30, rng_seed=7, depth=DepthSpec("mbd"), statistic="p3")
        a, b = bootstrap_test(F, G, cfg), bootstrap_test(F, G, cfg)
        np.testing.assert_array_equal(a.bootstrap_values, b.bootstrap_values)
        assert a.to_dict() == b.to_dict()
        c = bootstrap_test(F, G, TestConfig(bootstrap=30, rng_seed=8, depth=DepthSpec("mbd"), statistic="p3"))
        assert not np.array_equal(a.bootstrap_values, c.bootstrap_values)

    @pytest.mark.parametrize("kind", ["fm", "rpd"])
    def test_many_equals_single(self, two_samples, kind):
        F, G = two_samples
        cfg = TestConfig(bootstrap=20, rng_seed=3, depth=DepthSpec(kind, projections=6))
        many = bootstrap_test_many(F, G, cfg, list(StatisticKind))
        for k in StatisticKind:
            single = bootstrap_test(F, G, TestConfig(20, 0.05, 3, cfg.depth, k))
            assert single.to_dict() == many[k].to_dict()

    def test_prefix_property(self, two_samples):
        F, G = two_samples
        short = bootstrap_statistics(F, G, DepthSpec("fm"), [P1], 10, 5)[P1]
        long = bootstrap_statistics(F, G, DepthSpec("fm"), [P1], 25, 5)[P1]
        np.testing.assert_array_equal(short, long[:10])

    def test_relabel_invariance(self, two_samples):
        F, G = two_samples
        cfg = TestConfig(bootstrap=20, depth=DepthSpec("bd"))
        a = bootstrap_test(F, G, cfg)
        b = bootstrap_test(F.take(range(F.n)), G.take(range(G.n)), cfg)
        assert a.to_dict() == b.to_dict()

    def test_reject_rule(self, two_samples):
        F, G = two_samples
        res = bootstrap_test(F, G, TestConfig(bootstrap=40, statistic="p2"))
        assert res.reject == (res.observed > res.critical_value)
        assert res.tail is Tail.UPPER
        assert res.bootstrap_values.shape == (40,)

    def test_far_apart_rejects(self, rng):
        g = Grid.uniform(10)
        F = FunctionalSample(g, rng.standard_normal((15, 10)))
        G = FunctionalSample(g, rng.standard_normal((15, 10)) + 6.0)
        assert bootstrap_test(F, G, TestConfig(bootstrap=60, statistic="p3")).reject

    def test_too_small(self, unit3):
        with pytest.raises(DegenerateInputError):
            bootstrap_test(constants(unit3, [1.0]), constants(unit3, [1.0, 2.0]), TestConfig(bootstrap=20))
