import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.builtins import builtin_system
from artifact.errors import InvalidInputError, ResourceError, UnsupportedMapError
from artifact.orbitspace import (GREEDY, ITINERARY, OrbitPoint, bar_distance, cylinder_count,
                                 depth_for, factor_map_residual, friedland_estimate,
                                 itinerary_count, separated_count, truncation_error)
from artifact.systems import CommutingSystem, circle_expanding
from oracles import cylinder_intervals, greedy_separated_oracle

LOG5 = np.log(5)


@pytest.fixture(scope="module")
def t23():
    return builtin_system("times2-times3")


def const_point(value, length=30):
    return OrbitPoint(np.ones(length, np.int8), np.full((length + 1, 1), value), length)


class TestBarDistance:
    def test_identical(self, t23):
        a = OrbitPoint.build(t23, [1, 2, 1, 1], [0.3])
        assert bar_distance(a, a, 4) == 0.0

    def test_geometric_series(self):
        d = bar_distance(const_point(0.0), const_point(0.5), 30)
        assert abs(d - 1.0) <= truncation_error(30)

    def test_depth_zero(self, t23):
        a, b = OrbitPoint.build(t23, [1], [0.1]), OrbitPoint.build(t23, [2], [0.95])
        assert bar_distance(a, b, 0) == pytest.approx(0.15, abs=1e-15)

    def test_depth_too_large(self, t23):
        a = OrbitPoint.build(t23, [1, 2], [0.1])
        with pytest.raises(InvalidInputError):
            bar_distance(a, a, 3)

    @given(st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_metric_axioms(self, seed):
        g = np.random.default_rng(seed)
        s = builtin_system("times2-times3")
        pts = [OrbitPoint.build(s, g.integers(1, 3, 12), [g.random()]) for _ in range(3)]
        d = lambda a, b: bar_distance(a, b, 12)  # noqa: E731
        a, b, c = pts
        assert d(a, b) == d(b, a) >= 0
        assert d(a, c) <= d(a, b) + d(b, c) + 1e-15


class TestOrbitPoint:
    @given(st.integers(0, 10**6), st.integers(1, 40))
    @settings(max_examples=40, deadline=None)
    def test_relation(self, seed, n):
        g = np.random.default_rng(seed)
        for name in ("times2-times3", "cat-and-square"):
            s = builtin_system(name)
            p = OrbitPoint.build(s, g.integers(1, 3, n), g.random(s.dim))
            assert p.check_relation(s) <= 1e-12 and len(p) == n

    @given(st.integers(0, 10**6), st.integers(2, 30))
    @settings(max_examples=40, deadline=None)
    def test_factor_map(self, seed, n):
        g = np.random.default_rng(seed)
        s = builtin_system("times2-times3")
        assert factor_map_residual(s, g.integers(1, 3, n), [g.random()]) == 0.0


class TestCounting:
    def test_depth_rule(self):
        for eps in (0.5, 0.1, 0.05, 0.013):
            d = depth_for(eps)
            assert 2.0**-d < eps / 10 <= 2.0 ** -(d - 1)

    def test_n_zero(self, t23):
        assert separated_count(t23, 0, 0.05) == 1 and itinerary_count(t23, 0, 0.05) == 1

    @pytest.mark.parametrize("n", range(13))
    def test_cylinder_identity(self, t23, n):
        assert cylinder_count(t23, n) == 5**n

    @pytest.mark.parametrize("n", range(7))
    def test_cylinder_identity_brute_force(self, n):
        assert len(cylinder_intervals((2, 3), n)) == 5**n

    @pytest.mark.parametrize("ks,n,eps", [((2, 3), 1, 0.05), ((2, 3), 2, 0.05), ((2, 3), 3, 0.1),
                                          ((2, 3), 3, 0.05), ((2,), 5, 0.1), ((3,), 4, 0.05)])
    def test_greedy_matches_oracle(self, ks, n, eps):
        maps = [circle_expanding(k) for k in ks]
        target = maps[0] if len(maps) == 1 else builtin_system("times2-times3")
        assert separated_count(target, n, eps) == greedy_separated_oracle(ks, n, eps, depth_for(eps))

    def test_greedy_shift_steps_matches_oracle(self, t23):
        assert separated_count(t23, 2, 0.05, shift_steps=2) == \
            greedy_separated_oracle((2, 3), 2, 0.05, depth_for(0.05), shift_steps=2)

    def test_single_times2(self):
        assert separated_count(circle_expanding(2), 10, 0.1) == 2**10

    def test_monotone_in_epsilon(self, t23):
        counts = [separated_count(t23, 5, e) for e in (0.02, 0.05, 0.1, 0.2)]
        assert counts == sorted(counts, reverse=True)
        it = [itinerary_count(t23, 8, e) for e in (0.02, 0.05, 0.1, 0.2)]
        assert it == sorted(it, reverse=True)

    def test_monotone_in_shift_steps(self, t23):
        counts = [separated_count(t23, 4, 0.05, shift_steps=s) for s in range(3)]
        assert counts == sorted(counts)

    def test_budget(self, t23):
        with pytest.raises(ResourceError) as exc:
            separated_count(t23, 12, 0.05)
        assert exc.value.feasible == 10 and "feasible n <= 10" in str(exc.value)

    def test_unsupported_kind(self):
        with pytest.raises(UnsupportedMapError):
            separated_count(builtin_system("cat-and-square"), 3, 0.1)

    def test_itinerary_exact_for_single_map(self):
        # every itinerary of x -> kx on M arcs is realized: M * k^(n-1) when k divides M
        assert itinerary_count(circle_expanding(2), 10, 0.05) == 20 * 2**9


class TestEstimate:
    def test_times2_times3(self, t23):
        est = friedland_estimate(t23, (8, 12), 0.05)
        assert est.method == ITINERARY
        assert abs(est.slope - LOG5) <= 0.08
        assert est.formula_value == pytest.approx(LOG5, rel=1e-15)
        assert [row[0] for row in est.table()] == list(range(8, 13))

    def test_single_generators(self):
        for k in (2, 3):
            est = friedland_estimate(circle_expanding(k), (5, 9), 0.1)
            assert est.slope == pytest.approx(np.log(k), abs=0.05)
            assert est.formula_value is None

    def test_times2_greedy_slope(self):
        est = friedland_estimate(circle_expanding(2), (6, 12), 0.1, method=GREEDY)
        assert abs(est.slope - np.log(2)) <= 0.05

    def test_identical_generators(self):
        s = CommutingSystem.build(circle_expanding(2, "times2a"), circle_expanding(2, "times2b"))
        est = friedland_estimate(s, (8, 12), 0.05)
        assert est.slope == pytest.approx(np.log(2), abs=1e-9)
        assert cylinder_count(s, 8) == 4**8

    def test_slope_consistency_small_epsilon(self, t23):
        for eps in (0.05, 0.02, 0.01):
            for lo in (8, 10):
                est = friedland_estimate(t23, (lo, lo + 4), eps, method=ITINERARY)
                assert abs(est.slope - LOG5) <= 0.1

    def test_needs_four_values(self, t23):
        with pytest.raises(InvalidInputError):
            friedland_estimate(t23, [8, 9, 10], 0.05)

    def test_to_dict(self, t23):
        d = friedland_estimate(t23, (8, 12), 0.05).to_dict()
        assert {"slope", "stderr", "formula_value", "epsilon", "depth"} <= set(d)
