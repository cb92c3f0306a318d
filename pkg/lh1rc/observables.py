"""Transport and momentum observables, ensemble reduction, and the CSV formats."""
from __future__ import annotations

import csv
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .const import CSV_MAGIC, CSV_SCHEMA_VERSION
from .exceptions import SchemaError
from .models import AmplitudeState, DensityState, ObservableSeries
from .ring import MomentumGrid, to_momentum

_LOGGER = logging.getLogger(__name__)

_LEAF = 8
_BASE_COLUMNS = ["t", "P_T", "P_T_stderr", "P_q0", "P_q0_stderr", "P_NS", "P_NS_stderr"]


def site_populations(state: AmplitudeState | DensityState | np.ndarray) -> np.ndarray:
    """|a_j|^2 for amplitudes (any leading batch axes) or rho_jj for a density."""
    if isinstance(state, DensityState):
        return np.real(np.diagonal(state.rho, axis1=-2, axis2=-1)).copy()
    a = state.a if isinstance(state, AmplitudeState) else state
    a = np.asarray(a)
    return (a * a.conj()).real


def transmission(pops: np.ndarray) -> np.ndarray | float:
    """P_T = 1 - sum of all remaining site populations."""
    value = 1.0 - np.sum(pops, axis=-1)
    return float(value) if np.ndim(value) == 0 else value


def momentum_populations(
    state: AmplitudeState | DensityState | np.ndarray, grid: MomentumGrid
) -> np.ndarray:
    """P_q of the antenna block.

    Amplitudes give |A_q|^2; densities give
    (1/M) sum_jk exp(-iq(r_j - r_k)) rho_jk.
    """
    M = grid.n_sites
    if isinstance(state, DensityState):
        block = np.asarray(state.rho)[..., :M, :M]
        F = grid.phases
        return np.real(np.einsum("qj,...jk,qk->...q", F, block, F.conj()))
    a = state.a if isinstance(state, AmplitudeState) else state
    return to_momentum(np.asarray(a)[..., :M], grid).populations


def ensemble_momentum_populations(amplitudes: np.ndarray, grid: MomentumGrid) -> np.ndarray:
    """Bilinear ensemble mean of |A_q|^2 over the leading trajectory axis."""
    return pairwise_sum(momentum_populations(amplitudes, grid)) / amplitudes.shape[0]


def density_momentum_deviation(density: np.ndarray, amplitudes: np.ndarray, grid: MomentumGrid) -> float:
    """Largest gap between P_q from the ensemble density and from the trajectory bilinears."""
    from_density = momentum_populations(DensityState(density), grid)
    return float(np.max(np.abs(from_density - ensemble_momentum_populations(amplitudes, grid))))


def pairwise_sum(values: np.ndarray) -> np.ndarray:
    """Sum over axis 0 by a fixed binary tree over trajectory indices."""
    n = values.shape[0]
    if n <= _LEAF:
        total = np.zeros(values.shape[1:], dtype=values.dtype)
        for row in values:
            total = total + row
        return total
    half = n // 2
    return pairwise_sum(values[:half]) + pairwise_sum(values[half:])


def ensemble_mean(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error over axis 0 (zero error for a single trajectory)."""
    n = values.shape[0]
    mean = pairwise_sum(values) / n
    if n < 2:
        return mean, np.zeros_like(mean, dtype=float)
    dev = values - mean
    var = pairwise_sum((dev * np.conj(dev)).real) / (n - 1)
    return mean, np.sqrt(var / n)


@dataclass
class TrajectoryObservables:
    """Per-trajectory bilinears on the output grid, rows ordered by trajectory index."""

    populations: np.ndarray
    momentum: np.ndarray

    @classmethod
    def from_amplitudes(cls, amplitudes: np.ndarray, grid: MomentumGrid) -> TrajectoryObservables:
        return cls(site_populations(amplitudes), momentum_populations(amplitudes, grid))

    @classmethod
    def concatenate(cls, parts: Sequence[TrajectoryObservables]) -> TrajectoryObservables:
        return cls(
            np.concatenate([p.populations for p in parts]),
            np.concatenate([p.momentum for p in parts]),
        )

    def head(self, count: int) -> TrajectoryObservables:
        return TrajectoryObservables(self.populations[:count], self.momentum[:count])

    @property
    def n_trajectories(self) -> int:
        return self.populations.shape[0]


def reduce_trajectories(
    times: np.ndarray, obs: TrajectoryObservables, zero_index: int
) -> ObservableSeries:
    """Ensemble means and standard errors of every series."""
    pops, momentum = obs.populations, obs.momentum
    p_t = transmission(pops)
    p_q0 = momentum[..., zero_index]
    p_ns = np.sum(momentum, axis=-1) - p_q0
    p_t_mean, p_t_err = ensemble_mean(p_t)
    q0_mean, q0_err = ensemble_mean(p_q0)
    ns_mean, ns_err = ensemble_mean(p_ns)
    pop_mean, pop_err = ensemble_mean(pops)
    mom_mean, mom_err = ensemble_mean(momentum)
    return ObservableSeries(
        t=np.asarray(times),
        p_t=p_t_mean,
        p_q0=q0_mean,
        p_ns=ns_mean,
        populations=pop_mean,
        momentum=mom_mean,
        p_t_err=p_t_err,
        p_q0_err=q0_err,
        p_ns_err=ns_err,
        populations_err=pop_err,
        momentum_err=mom_err,
        n_trajectories=obs.n_trajectories,
    )


def series_from_density(times: np.ndarray, rho: np.ndarray, grid: MomentumGrid) -> ObservableSeries:
    pops = site_populations(DensityState(rho))
    momentum = momentum_populations(DensityState(rho), grid)
    p_q0 = momentum[:, grid.zero_index]
    return ObservableSeries(
        t=np.asarray(times),
        p_t=transmission(pops),
        p_q0=p_q0,
        p_ns=np.sum(momentum, axis=-1) - p_q0,
        populations=pops,
        momentum=momentum,
    )


# ── CSV ──────────────────────────────────────────────────────────────────────


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _zeros_if_none(values: np.ndarray | None, like: np.ndarray) -> np.ndarray:
    return np.zeros_like(like) if values is None else values


def write_csv(series: ObservableSeries, path: str | Path, *, full: bool = False) -> Path:
    """Write the observables CSV; --full appends site and momentum populations."""
    path = Path(path)
    n_states = series.populations.shape[1]
    M = series.momentum.shape[1]
    header = list(_BASE_COLUMNS)
    if full:
        header += [f"pop_{j + 1}" for j in range(n_states)]
        header += [f"P_q{m + 1}" for m in range(M)]
    columns = [
        series.t,
        series.p_t,
        _zeros_if_none(series.p_t_err, series.p_t),
        series.p_q0,
        _zeros_if_none(series.p_q0_err, series.p_q0),
        series.p_ns,
        _zeros_if_none(series.p_ns_err, series.p_ns),
    ]
    with path.open("w", newline="", encoding="utf-8") as handle:
        handle.write(
            f"# {CSV_MAGIC} schema={CSV_SCHEMA_VERSION} trajectories={series.n_trajectories} "
            f"sites={n_states} momenta={M}\n"
        )
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for k in range(len(series.t)):
            row = [_fmt(col[k]) for col in columns]
            if full:
                row += [_fmt(v) for v in series.populations[k]]
                row += [_fmt(v) for v in series.momentum[k]]
            writer.writerow(row)
    _LOGGER.debug("Wrote observables CSV: path=%s, rows=%d, full=%s", path, len(series.t), full)
    return path


def _parse_meta(line: str, magic: str, path: Path) -> dict[str, str]:
    parts = line.lstrip("#").split()
    if not parts or parts[0] != magic:
        raise SchemaError(f"{path}: not a {magic} file")
    meta = dict(p.split("=", 1) for p in parts[1:] if "=" in p)
    if meta.get("schema") != str(CSV_SCHEMA_VERSION):
        raise SchemaError(f"{path}: unsupported schema version {meta.get('schema')!r}")
    return meta


def _read_rows(path: Path) -> tuple[str, list[str], np.ndarray]:
    with path.open(encoding="utf-8") as handle:
        first = handle.readline()
        if not first:
            raise SchemaError(f"{path}: empty CSV")
        reader = csv.reader(handle)
        header = next(reader, None)
        rows = [r for r in reader if r]
    if not header or not rows:
        raise SchemaError(f"{path}: CSV has no data rows")
    try:
        data = np.array([[float(v) for v in r] for r in rows])
    except ValueError as err:
        raise SchemaError(f"{path}: non-numeric value: {err}") from err
    if data.shape[1] != len(header):
        raise SchemaError(f"{path}: row width {data.shape[1]} does not match header width {len(header)}")
    return first, header, data


def read_csv(path: str | Path) -> ObservableSeries:
    """Read an observables CSV, rejecting unknown schema versions."""
    path = Path(path)
    first, header, data = _read_rows(path)
    meta = _parse_meta(first, CSV_MAGIC, path)
    if header[: len(_BASE_COLUMNS)] != _BASE_COLUMNS:
        raise SchemaError(f"{path}: unexpected columns {header[:len(_BASE_COLUMNS)]}")
    col = {name: data[:, i] for i, name in enumerate(header)}
    pop_cols = [name for name in header if name.startswith("pop_")]
    mom_cols = [name for name in header if name.startswith("P_q") and name != "P_q0" and not name.endswith("_stderr")]
    empty = np.zeros((len(data), 0))
    return ObservableSeries(
        t=col["t"],
        p_t=col["P_T"],
        p_q0=col["P_q0"],
        p_ns=col["P_NS"],
        populations=np.column_stack([col[c] for c in pop_cols]) if pop_cols else empty,
        momentum=np.column_stack([col[c] for c in mom_cols]) if mom_cols else empty,
        p_t_err=col["P_T_stderr"],
        p_q0_err=col["P_q0_stderr"],
        p_ns_err=col["P_NS_stderr"],
        n_trajectories=int(meta.get("trajectories", 1)),
    )


@dataclass
class Table:
    """A versioned result table (sweep, convergence, validity, noise-check)."""

    kind: str
    columns: list[str]
    data: np.ndarray
    meta: dict[str, str]


def write_table(
    path: str | Path, kind: str, columns: Sequence[str], rows: Sequence[Sequence[Any]], **meta: Any
) -> Path:
    path = Path(path)
    tags = " ".join(f"{k}={v}" for k, v in meta.items())
    with path.open("w", newline="", encoding="utf-8") as handle:
        handle.write(f"# lh1rc-{kind} schema={CSV_SCHEMA_VERSION} {tags}".rstrip() + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    _LOGGER.debug("Wrote table: kind=%s, path=%s, rows=%d", kind, path, len(rows))
    return path


def read_table(path: str | Path, kind: str) -> Table:
    path = Path(path)
    first, header, data = _read_rows(path)
    meta = _parse_meta(first, f"lh1rc-{kind}", path)
    return Table(kind, header, data, meta)


def sniff_kind(path: str | Path) -> str:
    """Kind tag of a result CSV (e.g. 'observables', 'sweep'); raises on foreign files."""
    path = Path(path)
    with path.open(encoding="utf-8") as handle:
        first = handle.readline()
    if not first:
        raise SchemaError(f"{path}: empty CSV")
    parts = first.lstrip("#").split()
    if not parts or not parts[0].startswith("lh1rc-"):
        raise SchemaError(f"{path}: missing lh1rc schema header")
    return parts[0].removeprefix("lh1rc-")


def write_amplitudes(path: str | Path, times: np.ndarray, amplitudes: np.ndarray) -> Path:
    """Raw amplitude dump: t, re(a_1), im(a_1), ..."""
    path = Path(path)
    n = amplitudes.shape[1]
    header = ["t"] + [f"{part}(a_{j + 1})" for j in range(n) for part in ("re", "im")]
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for t, row in zip(times, amplitudes):
            values = [_fmt(t)]
            for a in row:
                values += [_fmt(a.real), _fmt(a.imag)]
            writer.writerow(values)
    return path
