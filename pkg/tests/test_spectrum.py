import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.builtins import CAT, CAT_LAMBDA, builtin_system, cat_map
from artifact.errors import InvalidInputError
from artifact.lyapunov import (group_exponents, lyapunov_spectrum, random_lyapunov_spectrum)
from artifact.systems import circle_expanding, linear_toral, truncated_operator
from oracles import eigen_log_moduli

X0_2D = np.array([0.1234, 0.5678])


class TestDeterministic:
    def test_cat_matches_eigenvalues(self):
        s = lyapunov_spectrum(cat_map(), X0_2D, p=2, n=10_000, seed=1)
        np.testing.assert_allclose(s.exponents, eigen_log_moduli(CAT), atol=1e-6)
        assert s.multiplicities == (1, 1)
        assert s.r == 1 and s.above_threshold() == [(s.exponents[0], 1)]

    def test_times2(self):
        s = lyapunov_spectrum(circle_expanding(2), [0.3], p=1, n=1000)
        assert s.top == pytest.approx(np.log(2), abs=1e-9)

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_identity_is_zero(self, p):
        s = lyapunov_spectrum(truncated_operator(np.eye(3), radius=None), np.zeros(3), p, n=200)
        np.testing.assert_allclose(s.raw, 0.0, atol=1e-15)
        assert s.multiplicities == (p,) and s.r == 0

    def test_multiplicity_grouping(self):
        m = truncated_operator(np.diag([3.0, 3.0, 0.5]), radius=None)
        s = lyapunov_spectrum(m, np.zeros(3), 3, n=500)
        assert s.multiplicities == (2, 1)
        np.testing.assert_allclose(s.exponents, [np.log(3), np.log(0.5)], atol=1e-12)

    def test_threshold_marks_unresolved(self):
        s = lyapunov_spectrum(cat_map(), X0_2D, 2, n=1000, lambda_alpha=CAT_LAMBDA - 1e-3)
        assert s.r == 1 and s.unresolved() == []
        from artifact.lyapunov import LyapunovSpectrum
        fuzzy = LyapunovSpectrum((0.01, -0.5), (1, 1), (0.02, 0.001), 1000)
        assert fuzzy.unresolved() == [0.01] and fuzzy.r == 1

    @pytest.mark.parametrize("kwargs", [dict(p=0), dict(p=3), dict(n=99), dict(burn_in=-1)])
    def test_bad_sizes(self, kwargs):
        args = dict(p=2, n=1000) | kwargs
        with pytest.raises(InvalidInputError):
            lyapunov_spectrum(cat_map(), X0_2D, **args)

    def test_sum_rule_volume_preserving(self):
        for a in (CAT, [[5, 3], [3, 2]], [[1, 1], [0, 1]]):
            s = lyapunov_spectrum(linear_toral(a), X0_2D, 2, n=2000, seed=4)
            assert abs(sum(e * k for e, k in zip(s.exponents, s.multiplicities))) <= 1e-8

    @given(st.integers(0, 2**31), st.integers(1, 2))
    @settings(max_examples=15, deadline=None)
    def test_nesting(self, seed, p):
        m = truncated_operator(np.array([[2.0, 1.0, 0.0], [0.0, 0.7, 0.3], [0.0, 0.0, 0.4]]),
                               radius=None)
        big = lyapunov_spectrum(m, np.zeros(3), 3, n=2000, seed=seed)
        small = lyapunov_spectrum(m, np.zeros(3), p, n=2000, seed=seed + 1)
        assert abs(big.partial_sum(p) - small.partial_sum(p)) <= 1e-6

    def test_nesting_tight(self):
        a = truncated_operator(np.diag([4.0, 2.0, 0.5]), radius=None)
        big = lyapunov_spectrum(a, np.zeros(3), 3, n=2000, seed=0)
        small = lyapunov_spectrum(a, np.zeros(3), 2, n=2000, seed=9)
        assert abs(big.partial_sum(2) - small.partial_sum(2)) <= 1e-6

    def test_deterministic_in_seed(self):
        a = lyapunov_spectrum(cat_map(), X0_2D, 2, n=500, seed=3)
        b = lyapunov_spectrum(cat_map(), X0_2D, 2, n=500, seed=3)
        assert a.raw == b.raw

    def test_to_dict_keys(self):
        d = lyapunov_spectrum(cat_map(), X0_2D, 2, n=500).to_dict()
        assert {"exponents", "multiplicities", "ci", "n", "samples", "seed"} <= set(d)


class TestGrouping:
    def test_merges_close(self):
        exps, mults, *_ = group_exponents([1.0, 1.0005, 0.2], [0.0, 0.0, 0.0])
        assert mults == (2, 1) and exps[0] == pytest.approx(1.00025)

    def test_ci_widens_gap(self):
        _, mults, *_ = group_exponents([1.0, 0.98], [0.01, 0.01])
        assert mults == (2,)

    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=8))
    def test_strictly_descending(self, raw):
        exps, mults, *_ = group_exponents(raw, [0.0] * len(raw))
        assert sum(mults) == len(raw)
        assert all(a - b > 1e-3 for a, b in zip(exps, exps[1:]))


class TestRandom:
    def test_times2_times3(self):
        s = random_lyapunov_spectrum(builtin_system("times2-times3"), [0.2], 1, 2000, 30, seed=5)
        target = 0.5 * np.log(6)
        assert abs(s.top - target) <= s.ci_halfwidth[0] + 1e-12

    def test_times2_times3_against_sampled_product(self):
        from artifact.lyapunov.spectrum import sample_symbols
        sysm = builtin_system("times2-times3")
        s = random_lyapunov_spectrum(sysm, [0.2], 1, 500, 8, seed=2, burn_in=0)
        sym = sample_symbols(sysm.nu, 500, 2, 8)
        direct = np.where(sym == 1, np.log(2), np.log(3)).mean(axis=1).mean()
        assert s.top == pytest.approx(direct, abs=1e-12)

    def test_cat_and_square(self):
        s = random_lyapunov_spectrum(builtin_system("cat-and-square"), X0_2D, 1, 10_000, 50, seed=3)
        assert abs(s.top - 1.5 * CAT_LAMBDA) <= s.ci_halfwidth[0]

    def test_cat_and_inverse(self):
        s = random_lyapunov_spectrum(builtin_system("cat-and-inverse"), X0_2D, 1, 10_000, 50, seed=3)
        assert abs(s.top) <= 0.05

    def test_degenerate_weights_reproduce_generator(self):
        sysm = builtin_system("cat-and-square", nu=(1.0, 0.0))
        r = random_lyapunov_spectrum(sysm, X0_2D, 2, 1000, 1, seed=7)
        d = lyapunov_spectrum(sysm.f1, X0_2D, 2, 1000, seed=7)
        assert r.raw == d.raw

    def test_jobs_do_not_change_results(self):
        sysm = builtin_system("cat-and-square")
        a = random_lyapunov_spectrum(sysm, X0_2D, 2, 500, 7, seed=1, jobs=1)
        b = random_lyapunov_spectrum(sysm, X0_2D, 2, 500, 7, seed=1, jobs=3)
        assert a.raw == b.raw and a.raw_ci == b.raw_ci

    def test_samples_positive(self):
        with pytest.raises(InvalidInputError):
            random_lyapunov_spectrum(builtin_system("times2-times3"), [0.1], 1, 200, 0)
