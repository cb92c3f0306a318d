"""Tests for noise.py."""
from __future__ import annotations

import numpy as np
import pytest
from scipy import integrate

from lh1rc.bath import BathSpec
from lh1rc.exceptions import NoiseError
from lh1rc.models import TimeGrid
from lh1rc.noise import (
    CirculantNoise,
    ExponentialNoise,
    ModeSumKernels,
    ModeSumNoise,
    correlation_mismatch,
    discretize_bath,
    empirical_correlation,
    lag_correlation,
    make_generator,
    noise_check,
    sample_path,
    site_streams,
)


def _paths(generator, times, n_paths, seed=0, n_sites=1):
    return np.stack(
        [generator.sample(times, site_streams(seed, k, n_sites), seed=seed, trajectory=k).values[0] for k in range(n_paths)]
    )


# ── Streams ──────────────────────────────────────────────────────────────────


class TestSiteStreams:
    def test_same_key_same_draws(self):
        a = site_streams(7, 3, 2)[1].standard_normal(5)
        b = site_streams(7, 3, 2)[1].standard_normal(5)
        assert np.array_equal(a, b)

    def test_keys_are_independent(self):
        first = site_streams(7, 3, 2)
        assert not np.array_equal(first[0].standard_normal(5), first[1].standard_normal(5))
        assert not np.array_equal(
            site_streams(7, 3, 1)[0].standard_normal(5), site_streams(7, 4, 1)[0].standard_normal(5)
        )

    def test_trajectory_stream_ignores_ensemble_size(self):
        # trajectory k's draws depend only on (seed, k, site)
        assert np.array_equal(
            site_streams(0, 99, 4)[2].standard_normal(3), site_streams(0, 99, 3)[2].standard_normal(3)
        )


# ── Mode sum ─────────────────────────────────────────────────────────────────


class TestDiscretizeBath:
    spec = BathSpec.uniform(1, 0.4, 100.0)

    def test_default_truncation_small(self):
        modes = discretize_bath(self.spec)
        assert modes.n_modes == 400
        assert modes.truncation_error[0] < 0.02

    def test_weights_nonnegative(self):
        modes = discretize_bath(self.spec, 64)
        assert np.all(modes.w_plus >= 0) and np.all(modes.w_minus >= 0)
        assert np.all(modes.w_plus >= modes.w_minus)

    def test_recurrence_time(self):
        modes = discretize_bath(self.spec, 400, 2000.0)
        assert modes.recurrence_time == pytest.approx(2 * np.pi / 5.0)

    def test_too_few_modes(self):
        with pytest.raises(NoiseError):
            discretize_bath(self.spec, 1)

    def test_cutoff_below_drude_peak(self):
        with pytest.raises(NoiseError, match="Drude"):
            discretize_bath(self.spec, 400, 300.0)

    def test_target_close_to_alpha_real_part(self):
        assert correlation_mismatch(discretize_bath(self.spec), self.spec).real < 0.05

    def test_mismatch_reports_imaginary_part_apart(self):
        mismatch = correlation_mismatch(discretize_bath(self.spec), self.spec)
        assert np.isfinite(mismatch.imag)
        assert mismatch.imag >= 0
        assert mismatch.format() == f"re={mismatch.real:.4f} im={mismatch.imag:.4f}"


class TestModeSumKernels:
    def test_matches_quadrature(self):
        spec = BathSpec.uniform(1, 0.3, 10.0, 0.025)
        modes = discretize_bath(spec, 50)
        t = 0.3
        o0, o1 = ModeSumKernels(modes).tabulate(np.array([t]))
        for n, table in ((0, o0), (1, o1)):

            def kernel(s, part):
                value = s**n * np.conj(modes.correlation(np.array([s]), 0)[0])
                return value.real if part == "re" else value.imag

            re, _ = integrate.quad(kernel, 0, t, args=("re",), limit=400, epsabs=1e-13, epsrel=1e-12)
            im, _ = integrate.quad(kernel, 0, t, args=("im",), limit=400, epsabs=1e-13, epsrel=1e-12)
            assert abs(table[0, 0] - complex(re, im)) < 1e-8 * max(1.0, abs(complex(re, im)))


class TestModeSumPaths:
    def test_path_on_grid(self):
        spec = BathSpec.uniform(3, 0.4, 100.0)
        grid = TimeGrid(1e-3, 0.1)
        path = sample_path(discretize_bath(spec, 32), grid, site_streams(0, 0, 3), seed=0, trajectory=0)
        assert path.values.shape == (3, grid.n_noise)
        assert path.step == pytest.approx(5e-4)
        assert path.index_of(0.05) == 100

    def test_off_grid_time_rejected(self):
        spec = BathSpec.uniform(1, 0.4, 100.0)
        path = sample_path(discretize_bath(spec, 32), TimeGrid(1e-3, 0.1), site_streams(0, 0, 1))
        with pytest.raises(NoiseError):
            path.index_of(0.2)
        with pytest.raises(NoiseError):
            path.index_of(0.00025)

    def test_stream_count_checked(self):
        spec = BathSpec.uniform(2, 0.4, 100.0)
        with pytest.raises(NoiseError):
            sample_path(discretize_bath(spec, 32), TimeGrid(1e-3, 0.1), site_streams(0, 0, 1))

    def test_statistics_match_target(self):
        spec = BathSpec.uniform(1, 0.4, 100.0)
        report = noise_check(ModeSumNoise(discretize_bath(spec)), spec, n_paths=2000, points=8)
        assert report.fraction_within >= 0.9
        assert report.pseudo_fraction_within >= 0.9
        assert report.mismatch.real < 0.05

    def test_lag_table(self):
        spec = BathSpec.uniform(1, 0.4, 100.0)
        report = noise_check(ModeSumNoise(discretize_bath(spec)), spec, n_paths=2000, points=8)
        rows = report.rows()
        assert len(rows) == 51
        assert [len(r) for r in rows] == [6] * 51
        assert rows[0][0] == 0.0
        assert rows[1][0] == pytest.approx(0.05 / 100)
        assert np.allclose([r[1] for r in rows], report.lag_target.real)
        assert all(r[5] > 0 for r in rows[1:])
        assert report.lag_fraction_within >= 0.9
        assert len(report.pair_rows()) == 64


# ── Exponential ──────────────────────────────────────────────────────────────


class TestExponentialNoise:
    spec = BathSpec.uniform(1, 0.3, 10.0, 0.025)

    def test_intensity_is_real_part_of_alpha(self):
        generator = ExponentialNoise.from_bath(self.spec)
        assert generator.intensity[0] == pytest.approx(24.0)
        kernels = generator.kernels()
        assert kernels.amplitude[0] == pytest.approx(24.0 + 0j)

    def test_stationary_correlation(self):
        generator = ExponentialNoise.from_bath(self.spec)
        times = np.arange(2001) * 0.01
        data = _paths(generator, times, 400)
        lags, estimate, _ = lag_correlation(data, 20)
        target = generator.correlation(lags * 0.01, 0)
        assert estimate[0].real == pytest.approx(24.0, rel=0.03)
        assert np.max(np.abs(estimate - target)) < 0.03 * 24.0

    def test_first_sample_is_stationary(self):
        generator = ExponentialNoise.from_bath(self.spec)
        data = _paths(generator, np.arange(3) * 0.01, 400)
        assert np.mean(np.abs(data[:, 0]) ** 2) == pytest.approx(24.0, rel=0.2)

    def test_pseudo_correlation_vanishes(self):
        generator = ExponentialNoise.from_bath(self.spec)
        data = _paths(generator, np.arange(501) * 0.01, 200)
        assert abs(np.mean(data * data)) < 0.05 * 24.0

    def test_zero_coupling_gives_zero_noise(self):
        generator = ExponentialNoise.from_bath(BathSpec.uniform(2, 0.0, 10.0))
        path = generator.sample(TimeGrid(1e-3, 0.01), site_streams(0, 0, 2))
        assert not np.any(path.values)


# ── Circulant ────────────────────────────────────────────────────────────────


class TestCirculantNoise:
    def test_complex_correlation_needs_clipping(self):
        spec = BathSpec.uniform(1, 0.3, 10.0, 0.025)
        _, clipped = CirculantNoise(spec).spectrum(1024, 0.01)
        assert 0 < clipped[0] < 0.5

    def test_hermitian_extension(self):
        spec = BathSpec.uniform(1, 0.3, 10.0, 0.025)
        generator = CirculantNoise(spec)
        lags = np.array([0.1, 0.2])
        assert np.allclose(generator.correlation(-lags, 0), np.conj(generator.correlation(lags, 0)))


# ── Generators and estimators ────────────────────────────────────────────────


class TestEstimators:
    def test_make_generator(self):
        spec = BathSpec.uniform(1, 0.3, 10.0)
        assert make_generator("exponential", spec).method == "exponential"
        assert make_generator("mode-sum", spec, n_modes=16).method == "mode-sum"
        assert make_generator("circulant", spec).method == "circulant"
        with pytest.raises(NoiseError):
            make_generator("white", spec)

    def test_too_few_paths(self):
        with pytest.raises(NoiseError, match="at least"):
            empirical_correlation(np.zeros((10, 5), dtype=complex))

    def test_lag_beyond_path(self):
        with pytest.raises(NoiseError):
            lag_correlation(np.zeros((200, 5), dtype=complex), 5)

    def test_error_packing(self):
        rng = np.random.default_rng(0)
        data = rng.standard_normal((500, 4)) + 0j
        estimate = empirical_correlation(data, points=4)
        # real data: imaginary parts and their errors vanish
        assert np.all(estimate.hermitian_err.imag == 0)
        assert np.all(estimate.hermitian_err.real > 0)
        assert estimate.hermitian.shape == (4, 4)
