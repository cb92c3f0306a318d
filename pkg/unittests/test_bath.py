"""Tests for bath.py."""
from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from lh1rc.bath import (
    BathSpec,
    MemoryKernels,
    alpha_T,
    memory_kernel,
    post_markov_validity,
    spectral_density,
    validity_log_values,
    validity_scale,
)
from lh1rc.ring import build_ring


def _quad_complex(func, upper: float) -> complex:
    re, _ = integrate.quad(lambda s: func(s).real, 0, upper, epsabs=1e-14, epsrel=1e-13)
    im, _ = integrate.quad(lambda s: func(s).imag, 0, upper, epsabs=1e-14, epsrel=1e-13)
    return complex(re, im)


# ── Bath spec ────────────────────────────────────────────────────────────────


class TestBathSpec:
    def test_default_beta_from_gamma(self):
        spec = BathSpec.from_config({"g": 0.4, "gamma": 100.0}, 3)
        assert spec.beta == pytest.approx(0.0025)
        assert spec.n_sites == 3

    def test_per_site_lists(self):
        spec = BathSpec.from_config({"g": [0.1, 0.2], "gamma": 10.0, "beta": 0.1}, 2)
        assert np.array_equal(spec.g, [0.1, 0.2])

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            BathSpec.from_config({"g": [0.1, 0.2, 0.3]}, 2)

    @pytest.mark.parametrize("g, gamma, beta", [(-0.1, 10.0, 0.1), (0.1, 0.0, 0.1), (0.1, 10.0, 0.0)])
    def test_invalid_parameters(self, g, gamma, beta):
        with pytest.raises(ValueError):
            BathSpec.uniform(2, g, gamma, beta)


# ── Correlation and spectral density ─────────────────────────────────────────


class TestCorrelation:
    def test_alpha_at_zero(self):
        spec = BathSpec.uniform(1, 0.4, 100.0)
        assert alpha_T(0.0, 0, spec) == pytest.approx(320 + 80j)

    def test_alpha_decays(self):
        spec = BathSpec.uniform(1, 0.3, 10.0, 0.025)
        values = np.abs(alpha_T(np.linspace(0, 1, 50), 0, spec))
        assert np.all(np.diff(values) < 0)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            alpha_T(-0.1, 0, BathSpec.uniform(1, 0.3, 10.0))

    def test_spectral_density_value(self):
        spec = BathSpec.uniform(1, 0.4, 10.0)
        assert spectral_density(100.0, 0, spec) == pytest.approx(800 / 10100)

    def test_spectral_density_odd_and_positive(self):
        spec = BathSpec.uniform(1, 0.4, 10.0)
        w = np.linspace(0, 200, 101)
        assert np.allclose(spectral_density(-w, 0, spec), -spectral_density(w, 0, spec))
        assert np.all(spectral_density(w, 0, spec) >= 0)
        assert spectral_density(10.0, 0, spec) == pytest.approx(0.4)


# ── Memory kernels ───────────────────────────────────────────────────────────


class TestMemoryKernels:
    spec = BathSpec.uniform(1, 0.3, 10.0, 0.025)

    @pytest.mark.parametrize("n", [0, 1])
    def test_matches_quadrature(self, n):
        t = 0.5
        expected = _quad_complex(lambda s: s**n * alpha_T(s, 0, self.spec), t)
        assert abs(memory_kernel(n, t, 0, self.spec) - expected) < 1e-10

    def test_zero_at_origin(self):
        assert memory_kernel(0, 0.0, 0, self.spec) == 0
        assert memory_kernel(1, 0.0, 0, self.spec) == 0

    def test_long_time_limit(self):
        kernels = MemoryKernels.from_bath(self.spec)
        assert np.allclose(kernels.zeroth(50.0), kernels.limit(0))
        assert kernels.limit(0)[0] == pytest.approx(self.spec.amplitude[0] / 10.0)
        assert kernels.limit(1)[0] == pytest.approx(self.spec.amplitude[0] / 100.0)

    def test_tabulate_shape(self):
        spec = BathSpec.uniform(3, 0.3, 10.0)
        o0, o1 = MemoryKernels.from_bath(spec).tabulate(np.linspace(0, 1, 7))
        assert o0.shape == (7, 3) and o1.shape == (7, 3)

    def test_higher_orders_rejected(self):
        with pytest.raises(ValueError):
            memory_kernel(2, 0.5, 0, self.spec)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            memory_kernel(0, -1.0, 0, self.spec)


# ── Validity ─────────────────────────────────────────────────────────────────


def _direct_validity(n: int, S: float, gamma: float, t: float) -> float:
    """(S/gamma)^n (Gamma(n+1) - Gamma(n+1, t gamma)) / gamma from the lower-gamma power series."""
    x = gamma * t
    term = 1.0 / (n + 1)
    total = term
    k = 0
    while term > 1e-18 * total and k < 10_000:
        k += 1
        term *= x / (n + 1 + k)
        total += term
    lower = x ** (n + 1) * math.exp(-x) * total
    return (S / gamma) ** n * lower / gamma


class TestValidity:
    def test_fast_bath_verdict_true(self):
        assert post_markov_validity(5.0, 100.0, 5.0, 10).verdict

    def test_slow_bath_verdict_false(self):
        assert not post_markov_validity(5.0, 1.0, 5.0, 10).verdict

    def test_zero_scale_verdict_true(self):
        assert post_markov_validity(0.0, 10.0, 5.0, 10).verdict

    def test_order_threshold(self):
        # F_{n+1}/F_n -> (n+1) S/gamma at large gamma*t
        assert post_markov_validity(1.0, 10.0, 10.0, 9).verdict
        assert not post_markov_validity(1.0, 10.0, 10.0, 11).verdict

    @pytest.mark.parametrize("S, gamma", [(5.0, 100.0), (5.0, 1.0), (1.0, 10.0)])
    def test_values_match_direct_evaluation(self, S, gamma):
        times = np.array([0.05, 0.5, 2.0])
        values = np.exp(validity_log_values(S, gamma, times, 6))
        for n in range(7):
            for k, t in enumerate(times):
                direct = _direct_validity(n, S, gamma, t)
                assert values[n, k] == pytest.approx(direct, rel=1e-10, abs=1e-300)

    def test_rows_and_table(self):
        report = post_markov_validity(5.0, 100.0, 5.0, 4)
        rows = report.rows()
        assert [r[0] for r in rows] == [0, 1, 2, 3, 4]
        assert rows[1][2] == pytest.approx(0.1, rel=1e-3)
        assert "verdict: monotone decreasing" in report.format_table()

    def test_overflow_reported(self, caplog):
        report = post_markov_validity(1e3, 1e-3, 1e4, 200)
        assert report.overflow
        assert "overflow" in caplog.text

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            post_markov_validity(1.0, 0.0, 5.0, 10)

    def test_scale_of_smooth_ring(self, closed_ring):
        assert validity_scale(closed_ring) == pytest.approx(5.0)

    def test_scale_counts_site_energies(self):
        model = build_ring({"M": 2, "rc_enabled": False, "hopping": [[1.5, 1.8], [1.8, 1.0]]})
        assert validity_scale(model) == pytest.approx(1.8)
        model = build_ring({"M": 2, "rc_enabled": False, "omega": [0.0, 4.0], "hopping": "none"})
        assert validity_scale(model) == pytest.approx(4.0)
