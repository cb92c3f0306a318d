"""Data models shared across the lh1rc modules."""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .bath import ValidityReport


@dataclass(frozen=True)
class TimeGrid:
    """Fixed-step integration grid with a strided output grid.

    Noise lives on a grid twice as fine as the integrator step so that
    RK4 midpoints read exact noise values.
    """

    dt: float
    t_max: float
    stride: int = 1

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.t_max <= 0:
            raise ValueError(f"dt and t_max must be positive: dt={self.dt}, t_max={self.t_max}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1: stride={self.stride}")
        ratio = self.t_max / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"t_max must be a multiple of dt: dt={self.dt}, t_max={self.t_max}")
        if round(ratio) % self.stride:
            raise ValueError(
                f"step count must be a multiple of stride: steps={round(ratio)}, stride={self.stride}"
            )

    @property
    def n_steps(self) -> int:
        return round(self.t_max / self.dt)

    @property
    def n_output(self) -> int:
        return self.n_steps // self.stride + 1

    @property
    def output_times(self) -> np.ndarray:
        return np.arange(self.n_output) * (self.stride * self.dt)

    @property
    def noise_step(self) -> float:
        return 0.5 * self.dt

    @property
    def n_noise(self) -> int:
        return 2 * self.n_steps + 1

    @property
    def noise_times(self) -> np.ndarray:
        return np.arange(self.n_noise) * self.noise_step

    def refined(self) -> TimeGrid:
        """Same horizon and output times at half the step."""
        return TimeGrid(self.dt / 2, self.t_max, self.stride * 2)

    def output_index(self, time: float) -> int:
        """Index of the output point at `time`; raises if none is within half a step."""
        idx = int(round(time / (self.stride * self.dt)))
        if idx < 0 or idx >= self.n_output or abs(idx * self.stride * self.dt - time) > 0.5 * self.dt:
            raise ValueError(f"time {time} is not on the output grid (t_max={self.t_max})")
        return idx


@dataclass
class AmplitudeState:
    """Trajectory amplitudes a_j over the antenna sites plus the RC."""

    a: np.ndarray
    t: float = 0.0


@dataclass
class DensityState:
    """Density matrix over the antenna sites plus the RC."""

    rho: np.ndarray
    t: float = 0.0


@dataclass
class ObservableSeries:
    """Transport and momentum diagnostics on the output grid."""

    t: np.ndarray
    p_t: np.ndarray
    p_q0: np.ndarray
    p_ns: np.ndarray
    populations: np.ndarray
    momentum: np.ndarray
    p_t_err: np.ndarray | None = None
    p_q0_err: np.ndarray | None = None
    p_ns_err: np.ndarray | None = None
    populations_err: np.ndarray | None = None
    momentum_err: np.ndarray | None = None
    absorbed: np.ndarray | None = None
    n_trajectories: int = 1

    def readout(self, time: float) -> tuple[float, float]:
        """P_T and its standard error at the output point closest to `time`."""
        idx = int(np.argmin(np.abs(self.t - time)))
        step = self.t[1] - self.t[0] if len(self.t) > 1 else 0.0
        if abs(self.t[idx] - time) > 0.5 * step + 1e-12:
            raise ValueError(f"readout time {time} outside the series (t_max={self.t[-1]})")
        err = float(self.p_t_err[idx]) if self.p_t_err is not None else 0.0
        return float(self.p_t[idx]), err


@dataclass
class EnsembleStats:
    """Reduced result of one ensemble run."""

    series: ObservableSeries
    n_trajectories: int
    wall_clock: float
    per_trajectory: float
    validity: ValidityReport
    workers: int = 1
    density: np.ndarray | None = None
    density_err: np.ndarray | None = None
    absorbed_deviation: float = 0.0
    momentum_deviation: float = 0.0
