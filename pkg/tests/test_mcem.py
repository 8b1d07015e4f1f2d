"""Monte Carlo EM steps, the weighted median, and reproducibility."""

import math

import numpy as np
import pytest

from cemfit.censoring import CensoredSample
from cemfit.datasets import example_laplace, example_normal, example_rayleigh
from cemfit.distributions import Family, Laplace, Normal, Rayleigh
from cemfit.em import e_step
from cemfit.exceptions import DataError, ParameterError
from cemfit.fitting import Algorithm, FitConfig
from cemfit.mcem import (
    fit_mcem,
    mcem_step_laplace,
    mcem_step_normal,
    mcem_step_rayleigh,
    weighted_median,
)
from cemfit.streams import RandomStream
from cemfit.truncated import (
    sample_truncated_laplace,
    sample_truncated_normal,
    sample_truncated_rayleigh,
)

import reference_values as rv


def replicate_draws(sample, params, k, stream, sampler):
    """Blocks of conditional draws, addressed exactly like the fit loop."""
    blocks = []
    for idx, bound in zip(sample.censored_indices, sample.censor_times):
        u = stream.substream(int(idx)).uniforms(k)
        if isinstance(params, Rayleigh):
            blocks.append(sampler(params.beta, float(bound), u))
        else:
            blocks.append(sampler(params.mu, params.sigma, float(bound), u))
    return blocks


class TestWeightedMedian:
    def test_matches_brute_force_on_random_multisets(self):
        rng = np.random.default_rng(99)
        for _ in range(300):
            size = int(rng.integers(1, 12))
            values = np.round(rng.normal(0, 10, size=size), 3)
            weights = rng.integers(0, 100, size=size)
            if weights.sum() == 0:
                weights[rng.integers(size)] = 1
            expected = float(np.median(np.repeat(values, weights)))
            assert weighted_median(values, weights) == expected

    def test_even_total_averages_the_middle_pair(self):
        assert weighted_median([1.0, 2.0, 10.0], [1, 1, 2]) == 6.0
        assert weighted_median([3.0, 7.0], [1, 1]) == 5.0

    def test_odd_total_returns_exact_element(self):
        assert weighted_median([5.0, 1.0, 3.0], [1, 1, 1]) == 3.0
        assert weighted_median([2.0, 9.0], [3, 2]) == 2.0

    def test_single_point_masses(self):
        assert weighted_median([4.5], [7]) == 4.5
        assert weighted_median([4.5, 8.0], [7, 0]) == 4.5

    def test_domain_errors(self):
        with pytest.raises(ParameterError):
            weighted_median([], [])
        with pytest.raises(ParameterError):
            weighted_median([1.0], [-1])
        with pytest.raises(ParameterError):
            weighted_median([1.0, 2.0], [0, 0])
        with pytest.raises(ParameterError):
            weighted_median([1.0, 2.0], [1])


class TestNormalStep:
    def test_monte_carlo_moments_match_closed_form(self):
        # the exact E-step is an independent oracle for the simulated one
        sample = example_normal()
        params = Normal(1.7422, 0.0791**2)
        k = 1_000_000
        stream = RandomStream(9).substream(1)
        blocks = replicate_draws(sample, params, k, stream, sample_truncated_normal)

        closed = e_step(sample, params)
        v1 = sum(float(b.sum()) for b in blocks)
        v2 = sum(float((b * b).sum()) for b in blocks)
        se1 = math.sqrt(sum(b.var(ddof=1) / k for b in blocks))
        se2 = math.sqrt(sum((b * b).var(ddof=1) / k for b in blocks))
        assert abs(v1 / k - closed.s1) <= 3 * se1
        assert abs(v2 / k - closed.s2) <= 3 * se2

    def test_step_equals_augmented_sample_mle(self):
        sample = example_normal()
        params = Normal(1.7, 0.004)
        k = 500
        new = mcem_step_normal(sample, params, k, RandomStream(3).substream(1))
        blocks = replicate_draws(sample, params, k, RandomStream(3).substream(1),
                                 sample_truncated_normal)
        pooled = np.concatenate([np.repeat(sample.uncensored, k)] + blocks)
        assert new.mu == pytest.approx(pooled.mean(), rel=1e-12)
        assert new.sigma2 == pytest.approx(pooled.var(), rel=1e-9)

    def test_complete_data_is_one_step_exact(self):
        rng = np.random.default_rng(1)
        w = rng.normal(4.0, 2.0, size=25)
        s = CensoredSample(w, np.ones(25, dtype=int))
        new = mcem_step_normal(s, Normal(0.0, 1.0), 10, RandomStream(0).substream(1))
        assert new.mu == pytest.approx(w.mean(), rel=1e-14)
        assert new.sigma2 == pytest.approx(w.var(), rel=1e-13)


class TestLaplaceStep:
    def test_bundled_data_location_is_pinned_by_order_statistics(self):
        # every conditional draw exceeds the censoring time, which exceeds
        # every observed value, so the augmented median is always the
        # midpoint of the 10th and 11th observed order statistics
        sample = example_laplace()
        y = np.sort(sample.uncensored)
        midpoint = 0.5 * (y[9] + y[10])
        assert midpoint == pytest.approx(49.766095, abs=1e-9)
        for seed, k in [(0, 10), (1, 100), (2, 5000)]:
            new = mcem_step_laplace(sample, Laplace(0.0, 1.0), k,
                                    RandomStream(seed).substream(1))
            assert new.mu == midpoint

    def test_step_matches_materialized_multiset(self):
        rng = np.random.default_rng(5)
        w = np.round(rng.normal(0, 2, size=8), 2)
        delta = np.array([1, 1, 0, 1, 0, 1, 1, 0])
        sample = CensoredSample(w, delta)
        params = Laplace(0.0, 2.0)
        k = 60
        new = mcem_step_laplace(sample, params, k, RandomStream(7).substream(1))
        blocks = replicate_draws(sample, params, k, RandomStream(7).substream(1),
                                 sample_truncated_laplace)
        pooled = np.concatenate([np.repeat(sample.uncensored, k)] + blocks)
        assert new.mu == float(np.median(pooled))
        scale = (math.fsum(np.abs(sample.uncensored - new.mu))
                 + math.fsum(np.abs(np.concatenate(blocks) - new.mu)) / k) / sample.n
        assert new.sigma == pytest.approx(scale, rel=1e-13)

    def test_complete_data_is_median_and_mean_absolute_deviation(self):
        w = np.array([1.0, 9.0, 3.0, 7.0, 5.0])
        s = CensoredSample(w, np.ones(5, dtype=int))
        new = mcem_step_laplace(s, Laplace(0.0, 1.0), 50, RandomStream(2).substream(1))
        assert new.mu == 5.0
        assert new.sigma == pytest.approx(np.abs(w - 5.0).mean(), rel=1e-15)


class TestRayleighStep:
    def test_complete_data_closed_form(self):
        w = np.array([1.0, 2.0, 2.5])
        s = CensoredSample(w, np.ones(3, dtype=int))
        expected = math.sqrt(float(w @ w) / 6.0)
        for start in (0.5, 40.0):
            new = mcem_step_rayleigh(s, Rayleigh(start), 25, RandomStream(1).substream(1))
            assert new.beta == pytest.approx(expected, rel=1e-15)

    def test_step_uses_average_of_squared_draws(self):
        sample = example_rayleigh()
        params = Rayleigh(6.0)
        k = 400
        new = mcem_step_rayleigh(sample, params, k, RandomStream(4).substream(1))
        blocks = replicate_draws(sample, params, k, RandomStream(4).substream(1),
                                 sample_truncated_rayleigh)
        y = sample.uncensored
        b2 = (float(y @ y) + sum(float((b * b).sum()) for b in blocks) / k) / (2 * sample.n)
        assert new.beta == pytest.approx(math.sqrt(b2), rel=1e-12)


class TestFitMcem:
    def test_trace_shape_and_convergence_flag(self):
        cfg = FitConfig(Family.RAYLEIGH, Algorithm.MCEM, start=Rayleigh(1.0),
                        k=200, max_iter=6, seed=11)
        trace = fit_mcem(example_rayleigh(), cfg)
        assert [row.s for row in trace.rows] == list(range(7))
        assert trace.converged
        assert trace.rows[0].params == Rayleigh(1.0)

    def test_bit_identical_reruns(self):
        cfg = FitConfig(Family.RAYLEIGH, Algorithm.MCEM, start=Rayleigh(1.0),
                        k=300, max_iter=5, seed=42)
        a = fit_mcem(example_rayleigh(), cfg)
        b = fit_mcem(example_rayleigh(), cfg)
        assert a.to_csv() == b.to_csv()

    def test_seed_changes_the_draw_path(self):
        base = FitConfig(Family.RAYLEIGH, Algorithm.MCEM, start=Rayleigh(1.0),
                         k=300, max_iter=5, seed=42)
        other = FitConfig(Family.RAYLEIGH, Algorithm.MCEM, start=Rayleigh(1.0),
                          k=300, max_iter=5, seed=43)
        assert (fit_mcem(example_rayleigh(), base).to_csv()
                != fit_mcem(example_rayleigh(), other).to_csv())

    def test_iterations_use_fresh_draws(self):
        cfg = FitConfig(Family.RAYLEIGH, Algorithm.MCEM, start=Rayleigh(6.1341),
                        k=50, max_iter=4, seed=5)
        trace = fit_mcem(example_rayleigh(), cfg)
        betas = [row.params.beta for row in trace.rows[1:]]
        assert len(set(betas)) == len(betas)  # reused draws would repeat a value

    def test_early_stop_on_three_small_changes(self):
        rng = np.random.default_rng(12)
        w = rng.normal(0, 1, size=20)
        s = CensoredSample(w, np.ones(20, dtype=int))
        cfg = FitConfig(Family.NORMAL, Algorithm.MCEM, k=10, max_iter=15, seed=0)
        trace = fit_mcem(s, cfg)
        # complete data: every sweep repeats the MLE, so the stop rule fires
        # after the third consecutive small change
        assert trace.converged
        assert trace.iterations == 3

    def test_rejects_mismatched_config(self):
        with pytest.raises(ParameterError):
            fit_mcem(example_normal(), FitConfig(Family.NORMAL, Algorithm.EM))

    def test_rejects_unfittable_sample(self):
        s = CensoredSample([1.0, 2.0], [0, 0])
        with pytest.raises(DataError):
            fit_mcem(s, FitConfig(Family.NORMAL, Algorithm.MCEM))


class TestStationaryNoise:
    def test_iterate_scatter_shrinks_with_k(self):
        # one sweep from the fixed point, repeated over seeds: the spread of
        # the location update should shrink like 1/sqrt(K)
        sample = example_normal()
        center = Normal(1.7422, 0.0791**2)
        spreads = []
        for k in (500, 5_000, 50_000):
            mus = [
                mcem_step_normal(sample, center, k, RandomStream(seed).substream(1)).mu
                for seed in range(16)
            ]
            spreads.append(np.std(mus))
        assert spreads[0] > spreads[1] > spreads[2]
        assert 1.5 < spreads[0] / spreads[1] < 7.0
        assert 1.5 < spreads[1] / spreads[2] < 7.0
