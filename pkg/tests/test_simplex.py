import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtri

import levyflow as lf
from levyflow.errors import InfiniteDivergence

# Hand-computed surprise oracles: each value written out from the per-term
# definition sum(p * log2(p/q)) with math.log2 arithmetic.
KL_ORACLE_PAIRS = [
    ((0.5, 0.5), (0.5, 0.5), 0.0),
    ((0.5, 0.5), (0.25, 0.75), 0.5 * math.log2(0.5 / 0.25) + 0.5 * math.log2(0.5 / 0.75)),
    ((1.0, 0.0), (0.5, 0.5), 1.0),
    ((0.25, 0.75), (0.5, 0.5), 0.25 * math.log2(0.5) + 0.75 * math.log2(1.5)),
    ((0.2, 0.3, 0.5), (0.5, 0.3, 0.2), 0.2 * math.log2(0.4) + 0.5 * math.log2(2.5)),
    ((0.1, 0.9), (0.9, 0.1), 0.1 * math.log2(1.0 / 9.0) + 0.9 * math.log2(9.0)),
]


class TestKLDivergence:
    @pytest.mark.parametrize("p,q,expected", KL_ORACLE_PAIRS)
    def test_hand_oracle(self, p, q, expected):
        assert lf.kl_divergence(p, q) == pytest.approx(expected, abs=1e-12)

    def test_published_value(self):
        assert lf.kl_divergence((0.5, 0.5), (0.25, 0.75)) == pytest.approx(0.207519, abs=5e-7)

    def test_infinite_divergence(self):
        with pytest.raises(InfiniteDivergence):
            lf.kl_divergence((0.5, 0.5), (1.0, 0.0))

    def test_rows_matches_scalar(self):
        rng = np.random.default_rng(3)
        p = rng.dirichlet(np.ones(5), size=20)
        q = rng.dirichlet(np.ones(5), size=20)
        rows = lf.kl_divergence_rows(p, q)
        for i in range(20):
            assert rows[i] == pytest.approx(lf.kl_divergence(p[i], q[i]), abs=1e-12)

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=60, deadline=None)
    def test_gibbs_inequality(self, seed):
        rng = np.random.default_rng(seed)
        p = rng.dirichlet(np.full(4, 0.5))
        q = rng.dirichlet(np.full(4, 0.5))
        assert lf.kl_divergence(p, q) >= 0.0
        assert lf.kl_divergence(p, p) <= 1e-12


class TestSampleDirichlet:
    def test_on_simplex(self):
        rng = lf.make_rng(0)
        draws = lf.sample_dirichlet(np.array([0.3, 1.0, 2.5]), rng, size=5000)
        np.testing.assert_allclose(draws.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(draws >= 0)

    def test_symmetric_mean(self):
        rng = lf.make_rng(1)
        draws = lf.sample_dirichlet(np.ones(3), rng, size=100_000)
        se = np.sqrt((1 / 3) * (2 / 3) / 4 / 100_000)
        np.testing.assert_allclose(draws.mean(axis=0), 1 / 3, atol=3 * se)

    def test_asymmetric_mean(self):
        rng = lf.make_rng(2)
        draws = lf.sample_dirichlet(np.array([10.0, 1.0]), rng, size=100_000)
        # Var of component 1 is m(1-m)/(A+1) with m = 10/11, A = 11
        se = np.sqrt((10 / 11) * (1 / 11) / 12 / 100_000)
        assert draws[:, 0].mean() == pytest.approx(10 / 11, abs=3 * se)

    def test_component_variance(self):
        rng = lf.make_rng(3)
        draws = lf.sample_dirichlet(np.array([2.0, 2.0]), rng, size=100_000)
        x = draws[:, 0]
        sample_var = x.var()
        se_var = np.std((x - x.mean()) ** 2) / np.sqrt(x.size)
        assert sample_var == pytest.approx(1 / 20, abs=3 * se_var)

    def test_tiny_shapes_stay_finite(self):
        rng = lf.make_rng(4)
        draws = lf.sample_dirichlet(np.array([1e-5, 1e-4, 0.1]), rng, size=20_000)
        assert np.all(np.isfinite(draws))
        np.testing.assert_allclose(draws.sum(axis=1), 1.0, atol=1e-9)

    def test_alpha_vector_accepted(self):
        rng = lf.make_rng(5)
        av = lf.AlphaVector(np.array([1.0, 2.0]))
        assert lf.sample_dirichlet(av, rng).shape == (2,)


class TestLogNormal:
    def test_degenerate_sigma_limit(self):
        rng = lf.make_rng(0)
        draws = lf.sample_lognormal(lf.LevyParams(0.0, 1e-6), rng, size=1000)
        np.testing.assert_allclose(draws, 1.0, atol=1e-5)

    def test_sample_median(self):
        rng = lf.make_rng(1)
        draws = lf.sample_lognormal(lf.LevyParams(0.0, 1.0), rng, size=100_000)
        # median of log-draws is mu with SE ~ 1.2533 * sigma / sqrt(M)
        assert np.median(np.log(draws)) == pytest.approx(0.0, abs=4 * 1.2533 / np.sqrt(100_000))

    def test_sample_mean(self):
        rng = lf.make_rng(2)
        draws = lf.sample_lognormal(lf.LevyParams(0.0, 1.0), rng, size=100_000)
        sd = np.sqrt((np.e - 1) * np.e)
        assert draws.mean() == pytest.approx(np.exp(0.5), abs=3 * sd / np.sqrt(100_000))

    def test_quantile_median_exact(self):
        assert lf.lognormal_quantile(lf.LevyParams(1.7, 0.4), 0.5) == pytest.approx(
            np.exp(1.7), rel=1e-15
        )

    def test_quantile_cdf_consistency(self):
        params = lf.LevyParams(0.3, 1.1)
        rng = lf.make_rng(3)
        draws = lf.sample_lognormal(params, rng, size=100_000)
        for q in (0.15, 0.5, 0.85):
            point = lf.lognormal_quantile(params, q)
            assert np.mean(draws <= point) == pytest.approx(q, abs=0.01)

    def test_published_range_large_scale(self):
        # median 8.11, 85% point 19.01 pin sigma; the 15% point must come out 3.46
        mu = math.log(8.11)
        sigma = (math.log(19.01) - mu) / ndtri(0.85)
        q15 = lf.lognormal_quantile(lf.LevyParams(mu, sigma), 0.15)
        assert q15 == pytest.approx(3.46, abs=0.02)
        # log-symmetry: the 15% point is exactly median^2 / 85%-point
        assert q15 == pytest.approx(8.11**2 / 19.01, abs=1e-9)

    def test_published_range_small_scale(self):
        mu = math.log(0.81)
        sigma = (math.log(4.23) - mu) / ndtri(0.85)
        q15 = lf.lognormal_quantile(lf.LevyParams(mu, sigma), 0.15)
        assert q15 == pytest.approx(0.155, abs=0.001)
        assert q15 == pytest.approx(0.15, abs=0.02)

    def test_lambda_range_bundle(self):
        params = lf.LevyParams(0.5, 0.9)
        rng_ = lf.lambda_range(params)
        assert rng_.q15 <= rng_.median <= rng_.q85
        assert rng_.median == pytest.approx(np.exp(0.5), rel=1e-12)


class TestRNG:
    def test_same_seed_same_stream(self):
        a = lf.make_rng(lf.child_seed_sequence(42, "task", 7)).random(100)
        b = lf.make_rng(lf.child_seed_sequence(42, "task", 7)).random(100)
        np.testing.assert_array_equal(a, b)

    def test_different_labels_differ(self):
        a = lf.make_rng(lf.child_seed_sequence(42, "task", 7)).random(8)
        b = lf.make_rng(lf.child_seed_sequence(42, "task", 8)).random(8)
        assert not np.array_equal(a, b)

    def test_sampling_reproducible(self):
        draws = [
            lf.sample_dirichlet(np.array([0.5, 0.5, 2.0]), lf.make_rng(99), size=10)
            for _ in range(2)
        ]
        np.testing.assert_array_equal(draws[0], draws[1])
