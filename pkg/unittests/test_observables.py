"""Tests for observables.py."""
from __future__ import annotations

import numpy as np
import pytest

from lh1rc.exceptions import SchemaError
from lh1rc.models import AmplitudeState, DensityState
from lh1rc.observables import (
    TrajectoryObservables,
    density_momentum_deviation,
    ensemble_mean,
    ensemble_momentum_populations,
    momentum_populations,
    pairwise_sum,
    read_csv,
    read_table,
    reduce_trajectories,
    series_from_density,
    site_populations,
    sniff_kind,
    transmission,
    write_amplitudes,
    write_csv,
    write_table,
)
from lh1rc.ring import MomentumGrid


def _random_amplitudes(shape: tuple[int, ...], seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return 0.3 * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


# ── Populations ──────────────────────────────────────────────────────────────


class TestPopulations:
    def test_transmission_closes_the_books(self):
        a = _random_amplitudes((5, 4))
        pops = site_populations(a)
        assert np.allclose(transmission(pops) + pops.sum(axis=-1), 1.0)

    def test_scalar_transmission(self):
        assert transmission(np.array([0.25, 0.25])) == 0.5
        assert isinstance(transmission(np.array([0.25, 0.25])), float)

    def test_density_and_amplitude_agree(self):
        a = _random_amplitudes((4,), 1)
        rho = np.outer(a, a.conj())
        assert np.allclose(site_populations(AmplitudeState(a)), site_populations(DensityState(rho)))

    def test_momentum_from_density_matches_amplitudes(self):
        grid = MomentumGrid(4, 0.2)
        a = _random_amplitudes((5,), 2)
        rho = np.outer(a, a.conj())
        assert np.allclose(momentum_populations(DensityState(rho), grid), momentum_populations(a, grid))

    def test_momentum_ignores_rc(self):
        grid = MomentumGrid(3, 0.2)
        a = np.array([0.0, 0.0, 0.0, 1.0], dtype=complex)
        assert np.allclose(momentum_populations(a, grid), 0.0)

    def test_ensemble_bilinears_match_mean_density(self):
        grid = MomentumGrid(6, 0.2)
        a = _random_amplitudes((37, 3, 7), 3)
        rho = np.mean(a[..., :, None] * a[..., None, :].conj(), axis=0)
        from_density = momentum_populations(DensityState(rho), grid)
        assert np.max(np.abs(from_density - ensemble_momentum_populations(a, grid))) < 1e-12
        assert density_momentum_deviation(rho, a, grid) < 1e-12

    def test_density_deviation_sees_a_wrong_density(self):
        grid = MomentumGrid(4, 0.2)
        a = _random_amplitudes((10, 5), 4)
        rho = np.mean(a[:, :, None] * a[:, None, :].conj(), axis=0)
        assert density_momentum_deviation(0.5 * rho, a, grid) > 1e-3


# ── Reduction ────────────────────────────────────────────────────────────────


class TestReduction:
    def test_pairwise_sum_matches_sum(self):
        values = np.random.default_rng(3).standard_normal((37, 2, 3))
        assert np.allclose(pairwise_sum(values), values.sum(axis=0))

    def test_pairwise_sum_is_order_fixed(self):
        values = np.random.default_rng(4).standard_normal((100, 5))
        assert np.array_equal(pairwise_sum(values), pairwise_sum(values.copy()))

    def test_single_trajectory_has_zero_error(self):
        mean, err = ensemble_mean(np.array([[0.2, 0.4]]))
        assert np.array_equal(mean, [0.2, 0.4])
        assert np.array_equal(err, [0.0, 0.0])

    def test_standard_error(self):
        values = np.array([1.0, 2.0, 3.0, 4.0])
        mean, err = ensemble_mean(values)
        assert mean == pytest.approx(2.5)
        assert err == pytest.approx(np.std(values, ddof=1) / 2.0)

    def test_reduce_and_head(self):
        grid = MomentumGrid(3, 0.2)
        amps = _random_amplitudes((6, 5, 4), 5)
        obs = TrajectoryObservables.from_amplitudes(amps, grid)
        series = reduce_trajectories(np.arange(5) * 0.1, obs, grid.zero_index)
        assert series.n_trajectories == 6
        assert np.allclose(series.p_t + series.populations.sum(axis=1), 1.0)
        assert np.allclose(series.p_q0 + series.p_ns, series.momentum.sum(axis=1))
        head = reduce_trajectories(np.arange(5) * 0.1, obs.head(2), grid.zero_index)
        direct = reduce_trajectories(
            np.arange(5) * 0.1, TrajectoryObservables.from_amplitudes(amps[:2], grid), grid.zero_index
        )
        assert np.array_equal(head.p_t, direct.p_t)

    def test_concatenate_keeps_order(self):
        grid = MomentumGrid(2, 0.2)
        parts = [TrajectoryObservables.from_amplitudes(_random_amplitudes((2, 3, 3), k), grid) for k in range(3)]
        joined = TrajectoryObservables.concatenate(parts)
        assert joined.n_trajectories == 6
        assert np.array_equal(joined.populations[2:4], parts[1].populations)

    def test_series_from_density(self):
        grid = MomentumGrid(2, 0.2)
        rho = np.zeros((2, 3, 3), dtype=complex)
        rho[0, 0, 0] = 1.0
        rho[1, 2, 2] = 0.5
        series = series_from_density(np.array([0.0, 1.0]), rho, grid)
        assert np.allclose(series.p_t, [0.0, 0.5])
        assert np.allclose(series.p_q0 + series.p_ns, [1.0, 0.0])


# ── CSV formats ──────────────────────────────────────────────────────────────


class TestCsv:
    def _series(self):
        grid = MomentumGrid(3, 0.2)
        obs = TrajectoryObservables.from_amplitudes(_random_amplitudes((4, 6, 4), 7), grid)
        return reduce_trajectories(np.arange(6) * 0.01, obs, grid.zero_index)

    def test_summary_columns(self, tmp_path):
        path = write_csv(self._series(), tmp_path / "run.csv")
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# lh1rc-observables schema=1")
        assert lines[1] == "t,P_T,P_T_stderr,P_q0,P_q0_stderr,P_NS,P_NS_stderr"
        assert len(lines) == 8

    def test_read_back_full(self, tmp_path):
        series = self._series()
        back = read_csv(write_csv(series, tmp_path / "run.csv", full=True))
        assert np.array_equal(back.p_t, series.p_t)
        assert np.array_equal(back.p_t_err, series.p_t_err)
        assert back.populations.shape == (6, 4)
        assert back.momentum.shape == (6, 3)
        assert back.n_trajectories == 4

    def test_summary_has_no_population_columns(self, tmp_path):
        back = read_csv(write_csv(self._series(), tmp_path / "run.csv"))
        assert back.populations.shape == (6, 0)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(SchemaError, match="empty"):
            read_csv(path)
        with pytest.raises(SchemaError, match="empty"):
            sniff_kind(path)

    def test_foreign_csv_rejected(self, tmp_path):
        path = tmp_path / "foreign.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(SchemaError):
            read_csv(path)
        with pytest.raises(SchemaError, match="header"):
            sniff_kind(path)

    def test_future_schema_rejected(self, tmp_path):
        path = tmp_path / "future.csv"
        path.write_text("# lh1rc-observables schema=9\nt,P_T,P_T_stderr,P_q0,P_q0_stderr,P_NS,P_NS_stderr\n0,0,0,0,0,0,0\n")
        with pytest.raises(SchemaError, match="schema"):
            read_csv(path)

    def test_header_only_rejected(self, tmp_path):
        path = tmp_path / "header.csv"
        path.write_text("# lh1rc-observables schema=1\nt,P_T,P_T_stderr,P_q0,P_q0_stderr,P_NS,P_NS_stderr\n")
        with pytest.raises(SchemaError, match="no data"):
            read_csv(path)

    def test_table_meta(self, tmp_path):
        path = write_table(tmp_path / "s.csv", "sweep", ["g", "P_T", "P_T_stderr"], [(0.1, 0.5, 0.01)], parameter="g")
        assert sniff_kind(path) == "sweep"
        table = read_table(path, "sweep")
        assert table.meta["parameter"] == "g"
        assert table.columns == ["g", "P_T", "P_T_stderr"]
        assert table.data.shape == (1, 3)
        with pytest.raises(SchemaError):
            read_table(path, "convergence")

    def test_amplitude_dump(self, tmp_path):
        amps = np.array([[1.0 + 0j, 0.0], [0.5, 0.5j]])
        path = write_amplitudes(tmp_path / "a.csv", np.array([0.0, 0.1]), amps)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,re(a_1),im(a_1),re(a_2),im(a_2)"
        assert lines[2] == "0.10000000000000001,0.5,0,0,0.5"
