"""Tests for diagnostics.py."""
from __future__ import annotations

import json

import numpy as np

from lh1rc import __version__
from lh1rc.bath import post_markov_validity
from lh1rc.config import load_config
from lh1rc.diagnostics import (
    build_manifest,
    package_manifest,
    timing_report,
    validity_summary,
    write_manifest,
    write_validity,
)
from lh1rc.engine import Scenario, run_ensemble
from lh1rc.observables import read_table


class TestPackageManifest:
    def test_version_matches_package(self):
        meta = package_manifest()
        assert meta["version"] == __version__
        assert meta["csv_schema"] == 1
        assert "lh1rc" in meta["loggers"]


class TestValidityOutput:
    def test_summary_is_json_ready(self):
        summary = validity_summary(post_markov_validity(5.0, 100.0, 5.0, 4))
        assert summary["verdict"] is True
        assert summary["rows"][-1]["next_ratio"] is None
        json.dumps(summary)

    def test_csv_table(self, tmp_path):
        report = post_markov_validity(5.0, 1.0, 5.0, 4)
        table = read_table(write_validity(report, tmp_path / "v.csv"), "validity")
        assert table.columns == ["n", "F_n", "ratio"]
        assert table.data[:, 0].tolist() == [0.0, 1.0, 2.0, 3.0, 4.0]
        assert np.allclose(table.data[:, 1], report.values[:, -1], rtol=1e-15)
        assert np.isnan(table.data[-1, 2])
        assert table.meta["verdict"] == "false"


class TestRunManifest:
    def test_ensemble_manifest_round_trips_scenario(self, ring_config, tmp_path):
        s = Scenario.from_config(ring_config).with_overrides("run", trajectories=4)
        stats = run_ensemble(s, single_thread=True)
        manifest = build_manifest("run", s.config, seed=s.seed, stats=stats)
        path = write_manifest(manifest, tmp_path / "run.manifest.json")
        document = json.loads(path.read_text())
        assert document["command"] == "run"
        assert document["finished"] is not None
        assert document["timing"]["trajectories"] == 4
        assert document["checks"]["absorbed_deviation"] >= 0
        assert load_config(path) == s.config

    def test_timing_report(self, ring_config):
        stats = run_ensemble(Scenario.from_config(ring_config).with_overrides("run", trajectories=2), single_thread=True)
        timing = timing_report(stats)
        assert timing["workers"] == 1
        assert timing["per_trajectory_s"] > 0
        assert np.isclose(timing["trajectories_per_s"], 2 / stats.wall_clock)

    def test_manifest_without_stats(self, ring_config):
        s = Scenario.from_config(ring_config)
        manifest = build_manifest("sweep", s.config, seed=s.seed)
        assert manifest.timing is None
        assert manifest.validity is None
        assert manifest.to_dict()["version"] == __version__
