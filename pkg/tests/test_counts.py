import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonbell.analytic import DegenerateError
from photonbell.counts import (
    CountMoments,
    CountSample,
    CountSamples,
    SamplerSpec,
    conditional_expectations,
    estimate_correlation,
    oracle_covariance,
    sample_counts,
    simulate,
)
from photonbell.model import ExperimentConfig

from .conftest import random_config


def brute_force_oracle(cfg, convention="ratio", n=20000):
    """Midpoint rule over theta, evaluated point by point."""
    acc = 0.0
    for k in range(n):
        th = (k + 0.5) * 2 * math.pi / n
        ex, ey = conditional_expectations(th, cfg, convention)
        acc += float(ex) * float(ey)
    return acc / n


class TestConditionalExpectations:
    def test_at_theta_i(self):
        cfg = ExperimentConfig(theta_i=0.7)
        ex, _ = conditional_expectations(0.7, cfg)
        assert ex == pytest.approx(1.0)

    def test_quarter_turn_from_theta_i(self):
        cfg = ExperimentConfig(theta_i=0.7)
        ex, _ = conditional_expectations(0.7 + math.pi / 2, cfg)
        assert ex == pytest.approx(0.0, abs=1e-15)

    def test_y_sign_conventions(self):
        cfg = ExperimentConfig(theta_j=0.2)
        _, ey_ratio = conditional_expectations(0.2 + math.pi / 2, cfg, "ratio")
        _, ey_published = conditional_expectations(0.2 + math.pi / 2, cfg, "published")
        assert ey_ratio == pytest.approx(-1.0)
        assert ey_published == pytest.approx(1.0)

    @settings(max_examples=100)
    @given(theta=st.floats(0, 2 * math.pi), alpha=st.floats(0.01, 5), beta=st.floats(0, 5))
    def test_ratio_is_cos_and_minus_sin(self, theta, alpha, beta):
        cfg = ExperimentConfig(alpha=alpha, beta=beta, theta_i=0.3, theta_j=1.1)
        ex, ey = conditional_expectations(theta, cfg)
        assert ex == pytest.approx(math.cos(theta - 0.3), abs=1e-12)
        assert ey == pytest.approx(-math.sin(theta - 1.1), abs=1e-12)

    @pytest.mark.parametrize("cfg", [ExperimentConfig(C=0.0), ExperimentConfig(alpha=0.0, beta=0.0)])
    def test_degenerate(self, cfg):
        with pytest.raises(DegenerateError):
            conditional_expectations(0.1, cfg)
        with pytest.raises(DegenerateError):
            conditional_expectations(0.1, cfg, "published")


class TestOracle:
    def test_against_brute_force(self, rng):
        for _ in range(5):
            cfg = random_config(rng)
            assert oracle_covariance(cfg) == pytest.approx(brute_force_oracle(cfg), abs=1e-9)

    def test_half_sine(self):
        cfg = ExperimentConfig(theta_i=math.pi / 2, theta_j=0.0)
        assert oracle_covariance(cfg) == pytest.approx(-0.5, abs=1e-14)
        assert oracle_covariance(cfg, "published") == pytest.approx(0.5, abs=1e-14)


class TestSampler:
    def test_spec_validation(self):
        for kw in ({"n": 0}, {"seed": -1}, {"seed": 2**64}, {"chunk": 0}, {"n": 1.5}):
            with pytest.raises(ValueError):
                SamplerSpec(**kw)

    def test_chunking(self):
        spec = SamplerSpec(n=10, chunk=4)
        assert spec.n_chunks == 3
        assert [spec.chunk_size(k) for k in range(3)] == [4, 4, 2]

    def test_same_seed_same_stream(self, default_cfg):
        spec = SamplerSpec(n=5000, seed=99, chunk=777)
        a = sample_counts(spec, default_cfg)
        b = sample_counts(spec, default_cfg)
        assert np.array_equal(a.theta, b.theta)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)

    def test_different_seed_differs(self, default_cfg):
        a = sample_counts(SamplerSpec(n=1000, seed=1), default_cfg)
        b = sample_counts(SamplerSpec(n=1000, seed=2), default_cfg)
        assert not np.array_equal(a.theta, b.theta)

    def test_outcomes_are_pm1(self, default_cfg):
        s = sample_counts(SamplerSpec(n=2000, seed=3), default_cfg)
        assert set(np.unique(s.x)) <= {-1, 1}
        assert set(np.unique(s.y)) <= {-1, 1}
        assert np.all((s.theta >= 0) & (s.theta < 2 * math.pi))

    def test_pinned_theta(self):
        cfg = ExperimentConfig(theta_i=1.2)
        s = sample_counts(SamplerSpec(n=5000, seed=4), cfg, theta=1.2)
        assert np.all(s.x == 1)

    def test_iterates_trials(self, default_cfg):
        s = sample_counts(SamplerSpec(n=3, seed=5), default_cfg)
        rows = list(s)
        assert len(rows) == 3 and isinstance(rows[0], CountSample)

    @pytest.mark.parametrize("workers", [1, 2, 8])
    def test_worker_count_is_irrelevant(self, default_cfg, workers):
        spec = SamplerSpec(n=200_003, seed=11, chunk=10_000)
        ref = simulate(spec, default_cfg, workers=1)
        got = simulate(spec, default_cfg, workers=workers)
        assert got.moments == ref.moments
        assert got.cov == ref.cov


class TestEstimators:
    def test_means_and_covariance(self):
        cfg = ExperimentConfig(theta_i=math.pi / 2, theta_j=0.0)
        res = simulate(SamplerSpec(n=1_000_000, seed=2024), cfg)
        assert res.mean_x.contains(0.0)
        assert res.mean_y.contains(0.0)
        assert res.cov.contains(-0.5)
        assert not res.cov.contains(-1.0)

    def test_consistency_over_configs(self, rng):
        for k in range(5):
            cfg = random_config(rng)
            res = simulate(SamplerSpec(n=200_000, seed=100 + k), cfg)
            assert res.cov.contains(oracle_covariance(cfg))

    def test_independent_fair_coins(self):
        rng = np.random.default_rng(8)
        n = 100_000
        s = CountSamples(np.zeros(n), rng.choice([-1, 1], n).astype(np.int8), rng.choice([-1, 1], n).astype(np.int8))
        assert estimate_correlation(s).contains(0.0)

    def test_identical_outcomes(self):
        rng = np.random.default_rng(9)
        x = rng.choice([-1, 1], 100_000).astype(np.int8)
        est = estimate_correlation(CountSamples(np.zeros(len(x)), x, x.copy()))
        mx = x.mean()
        assert est.mean == pytest.approx(1.0 - mx * mx, abs=1e-12)
        assert est.mean == pytest.approx(1.0, abs=1e-3)

    def test_accepts_trial_iterables(self):
        rows = [(0.0, 1, 1), (0.0, -1, -1), (0.0, 1, -1), (0.0, -1, 1)]
        assert estimate_correlation(rows).mean == pytest.approx(0.0)

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            estimate_correlation([(0.0, 1, 1)])
        with pytest.raises(ValueError):
            simulate(SamplerSpec(n=1), ExperimentConfig())

    def test_rejects_non_pm1(self):
        with pytest.raises(ValueError):
            estimate_correlation([(0.0, 1, 0), (0.0, 1, 1)])

    def test_standard_error_matches_brute_force(self):
        # plug-in se from the closed-form fourth moment equals the sample
        # std of the centred products
        rng = np.random.default_rng(12)
        x = np.where(rng.random(5000) < 0.6, 1, -1).astype(np.int8)
        y = np.where(rng.random(5000) < 0.45, 1, -1) * np.where(rng.random(5000) < 0.8, x, -x)
        est = estimate_correlation(CountSamples(np.zeros(5000), x, y.astype(np.int8)))
        xf, yf = x.astype(float), y.astype(float)
        prod = (xf - xf.mean()) * (yf - yf.mean())
        assert est.mean == pytest.approx(prod.mean(), abs=1e-12)
        assert est.se == pytest.approx(prod.std() / math.sqrt(5000), rel=1e-9)

    def test_se_scales_with_inverse_root_n(self, default_cfg):
        small = simulate(SamplerSpec(n=40_000, seed=1), default_cfg).cov.se
        large = simulate(SamplerSpec(n=640_000, seed=1), default_cfg).cov.se
        assert small / large == pytest.approx(4.0, rel=0.05)

    def test_moments_add(self):
        a = CountMoments(2, 0, 2, 0)
        b = CountMoments(3, 1, -1, 3)
        assert a + b == CountMoments(5, 1, 1, 3)


class TestLocality:
    def test_conditional_independence(self):
        cfg = ExperimentConfig(alpha=0.8, beta=1.1, theta_i=0.5, theta_j=2.0)
        s = sample_counts(SamplerSpec(n=1_000_000, seed=77), cfg)
        ex, ey = conditional_expectations(s.theta, cfg)
        resid = (s.x - ex) * (s.y - ey)
        # pooled over all theta
        assert abs(resid.mean()) <= 4 * resid.std() / math.sqrt(len(resid))
        # narrow strata of width 2pi/1000
        strata = np.floor(s.theta / (2 * math.pi / 1000)).astype(int)
        for k in (0, 137, 500, 999):
            r = resid[strata == k]
            assert abs(r.mean()) <= 4 * r.std(ddof=1) / math.sqrt(len(r))
