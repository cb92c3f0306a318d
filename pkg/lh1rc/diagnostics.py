"""Run manifests, timing reports and validity output."""
from __future__ import annotations

import json
import logging
import platform
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .bath import ValidityReport
from .models import EnsembleStats
from .observables import write_table

_LOGGER = logging.getLogger(__name__)

MANIFEST_VERSION = 1


def package_manifest() -> dict[str, Any]:
    """The package's own manifest.json (version, schema numbers, loggers)."""
    return json.loads(resources.files("lh1rc").joinpath("manifest.json").read_text(encoding="utf-8"))


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Path):
        return str(value)
    return value


def validity_summary(report: ValidityReport) -> dict[str, Any]:
    return {
        "S": report.S,
        "gamma": report.gamma,
        "ratio": report.ratio,
        "t_max": report.t_max,
        "n_max": report.n_max,
        "verdict": report.verdict,
        "overflow_samples": len(report.overflow),
        "rows": [
            {"n": n, "F_n": value if np.isfinite(value) else None, "next_ratio": ratio if np.isfinite(ratio) else None}
            for n, value, ratio in report.rows()
        ],
    }


def timing_report(stats: EnsembleStats) -> dict[str, Any]:
    """Wall clock, per-trajectory cost and throughput of one ensemble."""
    throughput = stats.n_trajectories / stats.wall_clock if stats.wall_clock > 0 else None
    return {
        "trajectories": stats.n_trajectories,
        "workers": stats.workers,
        "wall_clock_s": stats.wall_clock,
        "per_trajectory_s": stats.per_trajectory,
        "trajectories_per_s": throughput,
    }


@dataclass
class RunManifest:
    """Everything needed to re-execute a run bit-exactly."""

    command: str
    scenario: dict[str, Any]
    seed: int
    version: str
    started: str
    finished: str | None = None
    outputs: dict[str, str] = field(default_factory=dict)
    validity: dict[str, Any] | None = None
    timing: dict[str, Any] | None = None
    checks: dict[str, Any] = field(default_factory=dict)
    manifest_version: int = MANIFEST_VERSION
    csv_schema: int = 1
    python: str = field(default_factory=platform.python_version)
    numpy: str = np.__version__

    def finish(self) -> None:
        self.finished = _now()

    def to_dict(self) -> dict[str, Any]:
        return _jsonable(asdict(self))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def build_manifest(
    command: str,
    scenario: dict[str, Any],
    *,
    seed: int,
    stats: EnsembleStats | None = None,
    validity: ValidityReport | None = None,
) -> RunManifest:
    meta = package_manifest()
    manifest = RunManifest(
        command=command,
        scenario=_jsonable(scenario),
        seed=seed,
        version=meta["version"],
        started=_now(),
        csv_schema=meta.get("csv_schema", 1),
    )
    report = validity or (stats.validity if stats is not None else None)
    if report is not None:
        manifest.validity = validity_summary(report)
    if stats is not None:
        manifest.timing = timing_report(stats)
        manifest.checks["absorbed_deviation"] = stats.absorbed_deviation
        if stats.density is not None:
            manifest.checks["momentum_deviation"] = stats.momentum_deviation
    return manifest


def write_manifest(manifest: RunManifest, path: str | Path) -> Path:
    path = Path(path)
    if manifest.finished is None:
        manifest.finish()
    path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=False) + "\n", encoding="utf-8")
    _LOGGER.info("Wrote run manifest: path=%s", path)
    return path


def write_validity(report: ValidityReport, path: str | Path) -> Path:
    """F_n table with columns n, F_n, ratio; the last ratio is nan."""
    return write_table(
        path,
        "validity",
        ["n", "F_n", "ratio"],
        report.rows(),
        S=f"{report.S:.6g}",
        gamma=f"{report.gamma:.6g}",
        t_max=f"{report.t_max:g}",
        verdict=str(report.verdict).lower(),
    )
