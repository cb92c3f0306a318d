"""Static SVG renderings of transport, momentum, population and sweep results."""
from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.axes import Axes
from matplotlib.figure import Figure

from .exceptions import SchemaError
from .models import ObservableSeries
from .observables import Table, read_csv, read_table, sniff_kind

_LOGGER = logging.getLogger(__name__)

LAYOUT_AUTO = "auto"
LAYOUT_TRANSPORT = "transport"
LAYOUT_MOMENTUM = "momentum"
LAYOUT_POPULATION = "population"
LAYOUT_SWEEP = "sweep"
LAYOUTS = [LAYOUT_AUTO, LAYOUT_TRANSPORT, LAYOUT_MOMENTUM, LAYOUT_POPULATION, LAYOUT_SWEEP]

KIND_OBSERVABLES = "observables"
KIND_SWEEP = "sweep"


@dataclass
class PlotResult:
    path: Path
    layout: str
    panels: int
    series: int


def _band(ax: Axes, t: np.ndarray, y: np.ndarray, err: np.ndarray | None, label: str) -> None:
    (line,) = ax.plot(t, y, lw=1.5, label=label)
    if err is not None and np.any(err > 0):
        ax.fill_between(t, y - err, y + err, color=line.get_color(), alpha=0.25, lw=0)


def _finish(ax: Axes, ylabel: str, *, xlabel: str = "t [1/J]", legend: bool = True) -> None:
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    if legend:
        ax.legend(fontsize=8, framealpha=0.9)


def _transport(fig: Figure, runs: list[tuple[str, ObservableSeries]]) -> int:
    upper, lower = fig.subplots(2, 1, sharex=True)
    for label, s in runs:
        _band(upper, s.t, s.p_ns, s.p_ns_err, label)
        _band(lower, s.t, s.p_t, s.p_t_err, label)
    _finish(upper, "P_NS", xlabel="")
    _finish(lower, "P_T")
    return 2


def _momentum(fig: Figure, runs: list[tuple[str, ObservableSeries]]) -> int:
    ax = fig.subplots()
    for label, s in runs:
        _band(ax, s.t, s.p_t, s.p_t_err, f"P_T {label}")
        _band(ax, s.t, s.p_q0, s.p_q0_err, f"P_q0 {label}")
    _finish(ax, "probability")
    return 1


def _population(fig: Figure, runs: list[tuple[str, ObservableSeries]], site: int = 0) -> int:
    ax = fig.subplots()
    for label, s in runs:
        if s.populations.shape[1] <= site:
            raise SchemaError(f"{label}: population layout needs a CSV written with --full")
        _band(ax, s.t, s.populations[:, site], None, label)
    _finish(ax, f"P_{site + 1}")
    return 1


def _sweep(fig: Figure, tables: list[tuple[str, Table]]) -> int:
    ax = fig.subplots()
    for label, table in tables:
        parameter = table.meta.get("parameter", table.columns[0])
        outer = table.meta.get("outer")
        if outer:
            groups = [(f"{outer}={v:g}", table.data[table.data[:, 0] == v, 1:]) for v in np.unique(table.data[:, 0])]
        else:
            groups = [(label, table.data)]
        for name, rows in groups:
            ax.errorbar(rows[:, 0], rows[:, 1], yerr=rows[:, 2], marker="o", ms=4, capsize=3, label=name)
        ax.set_xlabel(parameter)
    _finish(ax, "P_T(readout)", xlabel=ax.get_xlabel())
    return 1


def render_plot(csv_paths: Sequence[str | Path], out_path: str | Path, layout: str = LAYOUT_AUTO) -> PlotResult:
    """Render one figure from schema-conforming CSVs; rejects foreign or empty files."""
    if not csv_paths:
        raise SchemaError("no CSV files given")
    if layout not in LAYOUTS:
        raise ValueError(f"unknown layout {layout!r}; expected one of {LAYOUTS}")
    paths = [Path(p) for p in csv_paths]
    kinds = {sniff_kind(p) for p in paths}
    if len(kinds) > 1:
        raise SchemaError(f"cannot mix CSV kinds in one plot: {sorted(kinds)}")
    kind = kinds.pop()
    if layout == LAYOUT_AUTO:
        layout = LAYOUT_SWEEP if kind == KIND_SWEEP else LAYOUT_TRANSPORT
    if (layout == LAYOUT_SWEEP) != (kind == KIND_SWEEP):
        raise SchemaError(f"layout {layout!r} does not accept {kind} CSVs")

    fig = Figure(figsize=(6.4, 6.4 if layout == LAYOUT_TRANSPORT else 4.2), layout="constrained")
    if layout == LAYOUT_SWEEP:
        panels = _sweep(fig, [(p.stem, read_table(p, KIND_SWEEP)) for p in paths])
    else:
        if kind != KIND_OBSERVABLES:
            raise SchemaError(f"layout {layout!r} needs observables CSVs, got {kind}")
        runs = [(p.stem, read_csv(p)) for p in paths]
        if layout == LAYOUT_TRANSPORT:
            panels = _transport(fig, runs)
        elif layout == LAYOUT_MOMENTUM:
            panels = _momentum(fig, runs)
        else:
            panels = _population(fig, runs)
    out = Path(out_path)
    fig.savefig(out, format="svg")
    _LOGGER.info("Wrote plot: path=%s, layout=%s, inputs=%d", out, layout, len(paths))
    return PlotResult(out, layout, panels, len(paths))
