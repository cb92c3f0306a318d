"""Tests for plotting.py."""
from __future__ import annotations

import numpy as np
import pytest

from lh1rc.exceptions import SchemaError
from lh1rc.models import ObservableSeries
from lh1rc.observables import write_csv, write_table
from lh1rc.plotting import render_plot


def _series(n_states: int = 3, M: int = 2) -> ObservableSeries:
    t = np.linspace(0, 1, 11)
    p_t = 1 - np.exp(-t)
    pops = np.column_stack([np.exp(-t) / n_states] * n_states)
    momentum = np.column_stack([np.exp(-t) / M] * M)
    err = np.full_like(t, 0.01)
    return ObservableSeries(
        t=t,
        p_t=p_t,
        p_q0=momentum[:, 0],
        p_ns=momentum[:, 1:].sum(axis=1),
        populations=pops,
        momentum=momentum,
        p_t_err=err,
        p_q0_err=err,
        p_ns_err=err,
        n_trajectories=10,
    )


@pytest.fixture
def summary_csv(tmp_path):
    return write_csv(_series(), tmp_path / "summary.csv")


@pytest.fixture
def full_csv(tmp_path):
    return write_csv(_series(), tmp_path / "full.csv", full=True)


# ── Layouts ──────────────────────────────────────────────────────────────────


class TestLayouts:
    def test_auto_picks_transport(self, summary_csv, tmp_path):
        result = render_plot([summary_csv], tmp_path / "out.svg")
        assert result.layout == "transport"
        assert result.panels == 2
        assert "<svg" in result.path.read_text()

    def test_momentum_single_panel(self, summary_csv, tmp_path):
        result = render_plot([summary_csv], tmp_path / "out.svg", "momentum")
        assert result.panels == 1

    def test_population_needs_full_csv(self, summary_csv, full_csv, tmp_path):
        with pytest.raises(SchemaError, match="--full"):
            render_plot([summary_csv], tmp_path / "out.svg", "population")
        assert render_plot([full_csv], tmp_path / "out.svg", "population").panels == 1

    def test_overlay_counts_series(self, summary_csv, full_csv, tmp_path):
        assert render_plot([summary_csv, full_csv], tmp_path / "out.svg").series == 2

    def test_sweep_auto(self, tmp_path):
        path = write_table(
            tmp_path / "sweep.csv",
            "sweep",
            ["gamma", "g", "P_T", "P_T_stderr"],
            [(100.0, 0.0, 0.03, 0.0), (100.0, 0.2, 0.05, 0.01), (10.0, 0.0, 0.03, 0.0), (10.0, 0.2, 0.08, 0.01)],
            parameter="g",
            outer="gamma",
        )
        result = render_plot([path], tmp_path / "out.svg")
        assert result.layout == "sweep"
        assert result.panels == 1
        assert "gamma=100" in result.path.read_text()


# ── Rejections ───────────────────────────────────────────────────────────────


class TestRejections:
    def test_no_inputs(self, tmp_path):
        with pytest.raises(SchemaError):
            render_plot([], tmp_path / "out.svg")

    def test_unknown_layout(self, summary_csv, tmp_path):
        with pytest.raises(ValueError):
            render_plot([summary_csv], tmp_path / "out.svg", "heatmap")

    def test_mixed_kinds(self, summary_csv, tmp_path):
        sweep = write_table(tmp_path / "s.csv", "sweep", ["g", "P_T", "P_T_stderr"], [(0.1, 0.2, 0.0)])
        with pytest.raises(SchemaError, match="mix"):
            render_plot([summary_csv, sweep], tmp_path / "out.svg")

    def test_sweep_layout_refuses_observables(self, summary_csv, tmp_path):
        with pytest.raises(SchemaError):
            render_plot([summary_csv], tmp_path / "out.svg", "sweep")

    def test_empty_csv(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        with pytest.raises(SchemaError, match="empty"):
            render_plot([empty], tmp_path / "out.svg")
