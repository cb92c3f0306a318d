"""Thermal bath correlation, Drude-Lorentz spectral density and memory kernels."""
from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import special

from .const import BETA_GAMMA, CONF_BETA, CONF_COUPLING, CONF_DECAY, DEFAULT_DECAY
from .ring import RingModel

_LOGGER = logging.getLogger(__name__)

_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True, eq=False)
class BathSpec:
    """Per-site Drude-Lorentz bath with local (site-diagonal) correlations."""

    g: np.ndarray
    gamma: np.ndarray
    beta: float
    local: bool = True

    def __post_init__(self) -> None:
        g = np.array(self.g, dtype=float)
        gamma = np.array(self.gamma, dtype=float)
        if g.ndim != 1 or g.shape != gamma.shape:
            raise ValueError(f"g and gamma must be per-site vectors of equal length: {g.shape} vs {gamma.shape}")
        if np.any(g < 0):
            raise ValueError("bath coupling g must be non-negative")
        if np.any(gamma <= 0):
            raise ValueError("bath decay rate gamma must be positive")
        if not self.beta > 0:
            raise ValueError(f"inverse temperature must be positive: beta={self.beta}")
        if not self.local:
            raise ValueError("only local bath correlations are supported")
        g.setflags(write=False)
        gamma.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def uniform(cls, n_sites: int, g: float, gamma: float, beta: float | None = None) -> BathSpec:
        if beta is None:
            beta = BETA_GAMMA / gamma
        return cls(np.full(n_sites, g), np.full(n_sites, gamma), beta)

    @classmethod
    def from_config(cls, section: Mapping[str, Any], n_sites: int) -> BathSpec:
        """Build from a validated [bath] section; beta defaults to beta*gamma = 0.25."""
        g = _per_site(section.get(CONF_COUPLING, 0.0), n_sites, CONF_COUPLING)
        gamma = _per_site(section.get(CONF_DECAY, DEFAULT_DECAY), n_sites, CONF_DECAY)
        beta = section.get(CONF_BETA)
        if beta is None:
            beta = BETA_GAMMA / float(np.mean(gamma))
        return cls(g, gamma, float(beta))

    @property
    def n_sites(self) -> int:
        return len(self.g)

    @property
    def amplitude(self) -> np.ndarray:
        """A_j = g_j (2/beta + 2i gamma_j), the t = 0 value of the correlation."""
        return self.g * (2.0 / self.beta + 2j * self.gamma)


def _per_site(raw: Any, n_sites: int, name: str) -> np.ndarray:
    if isinstance(raw, (int, float)):
        return np.full(n_sites, float(raw))
    values = np.asarray(raw, dtype=float)
    if values.shape != (n_sites,):
        raise ValueError(f"{name} has {values.size} entries, expected {n_sites}")
    return values


def _check_time(t: Any) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("correlation and kernels are defined for t >= 0 only")
    return t


def alpha_T(t: float | np.ndarray, site: int, spec: BathSpec) -> complex | np.ndarray:
    """alpha_T(t) = g (2/beta + 2i gamma) exp(-gamma t)."""
    t = _check_time(t)
    value = spec.amplitude[site] * np.exp(-spec.gamma[site] * t)
    return complex(value) if value.ndim == 0 else value


def spectral_density(omega: float | np.ndarray, site: int, spec: BathSpec) -> float | np.ndarray:
    """Drude-Lorentz J(w) = 2 g w gamma / (w^2 + gamma^2); odd in w, peak g at w = gamma."""
    omega = np.asarray(omega, dtype=float)
    g, gamma = spec.g[site], spec.gamma[site]
    value = 2 * g * omega * gamma / (omega**2 + gamma**2)
    return float(value) if value.ndim == 0 else value


def _kernel(n: int, amplitude: Any, gamma: Any, t: Any) -> Any:
    # int_0^t s^n A e^{-gamma s} ds = A n! P(n+1, gamma t) / gamma^(n+1)
    return amplitude * math.factorial(n) * special.gammainc(n + 1, gamma * t) / gamma ** (n + 1)


def memory_kernel(n: int, t: float | np.ndarray, site: int, spec: BathSpec) -> complex | np.ndarray:
    """O^n(t) = int_0^t (t - tau)^n alpha_T(t - tau) dtau for n in {0, 1}."""
    if n not in (0, 1):
        raise ValueError(f"memory kernels exist for n = 0, 1 only: n={n}")
    t = _check_time(t)
    value = _kernel(n, spec.amplitude[site], spec.gamma[site], t)
    return complex(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True, eq=False)
class MemoryKernels:
    """Closed-form O^0 and O^1 for exponential correlations A_j exp(-gamma_j t)."""

    amplitude: np.ndarray
    gamma: np.ndarray

    @classmethod
    def from_bath(cls, spec: BathSpec) -> MemoryKernels:
        return cls(spec.amplitude, spec.gamma)

    def zeroth(self, t: float | np.ndarray) -> np.ndarray:
        t = _check_time(t)[..., None]
        return _kernel(0, self.amplitude, self.gamma, t)

    def first(self, t: float | np.ndarray) -> np.ndarray:
        t = _check_time(t)[..., None]
        return _kernel(1, self.amplitude, self.gamma, t)

    def limit(self, n: int) -> np.ndarray:
        return self.amplitude * math.factorial(n) / self.gamma ** (n + 1)

    def tabulate(self, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(O^0, O^1) on `times`, each shaped (len(times), n_sites)."""
        return self.zeroth(times), self.first(times)


@dataclass
class ValidityReport:
    """Post-Markov validity functions F_n(t) and their monotonicity verdict."""

    S: float
    gamma: float
    t_max: float
    n_max: int
    times: np.ndarray
    log_values: np.ndarray
    verdict: bool
    overflow: list[tuple[int, float]] = field(default_factory=list)

    @property
    def ratio(self) -> float:
        return self.S / self.gamma

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    def rows(self) -> list[tuple[int, float, float]]:
        """(n, F_n(t_max), F_{n+1}(t_max)/F_n(t_max)) for n = 0..n_max."""
        last = self.log_values[:, -1]
        rows = []
        for n in range(self.n_max + 1):
            if n < self.n_max and np.isfinite(last[n]) and last[n] > -np.inf:
                ratio = float(np.exp(last[n + 1] - last[n]))
            else:
                ratio = float("nan")
            rows.append((n, float(self.values[n, -1]), ratio))
        return rows

    def format_table(self) -> str:
        lines = [
            f"S={self.S:.6g}  gamma={self.gamma:.6g}  S/gamma={self.ratio:.6g}  t_max={self.t_max:g}",
            f"{'n':>3}  {'F_n(t_max)':>14}  {'F_n+1/F_n':>12}",
        ]
        for n, value, ratio in self.rows():
            lines.append(f"{n:>3}  {value:>14.6e}  {ratio:>12.6g}")
        if self.overflow:
            lines.append(f"overflow at {len(self.overflow)} (n, t) samples")
        lines.append(f"verdict: {'monotone decreasing' if self.verdict else 'NOT monotone'}")
        return "\n".join(lines)


def validity_log_values(S: float, gamma: float, times: np.ndarray, n_max: int) -> np.ndarray:
    """log F_n(t) for n = 0..n_max, shaped (n_max + 1, len(times))."""
    n = np.arange(n_max + 1)[:, None]
    x = gamma * np.asarray(times, dtype=float)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = math.log(S / gamma) if S > 0 else -np.inf
        power = np.where(n == 0, 0.0, n * log_ratio)
        return power + special.gammaln(n + 1) + np.log(special.gammainc(n + 1, x)) - math.log(gamma)


def post_markov_validity(
    S: float, gamma: float, t_max: float, n_max: int, *, n_samples: int = 64
) -> ValidityReport:
    """F_n(t) = (S/gamma)^n (Gamma[1+n] - Gamma[1+n, t gamma]) / gamma on (0, t_max]."""
    if S < 0 or gamma <= 0 or t_max <= 0:
        raise ValueError(f"need S >= 0, gamma > 0, t_max > 0: S={S}, gamma={gamma}, t_max={t_max}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1: n_max={n_max}")
    times = np.linspace(t_max / n_samples, t_max, n_samples)
    logs = validity_log_values(S, gamma, times, n_max)

    overflow = [(int(n), float(times[k])) for n, k in zip(*np.nonzero(logs > _LOG_MAX))]
    if overflow:
        _LOGGER.warning(
            "Validity functions overflow double precision: samples=%d, first_n=%d, S=%g, gamma=%g",
            len(overflow),
            overflow[0][0],
            S,
            gamma,
        )
    upper, lower = logs[:-1], logs[1:]
    both_zero = np.isneginf(upper) & np.isneginf(lower)
    verdict = bool(np.all((upper > lower) | both_zero))
    report = ValidityReport(S, gamma, t_max, n_max, times, logs, verdict, overflow)
    _LOGGER.debug("Validity report: S=%g, gamma=%g, n_max=%d, verdict=%s", S, gamma, n_max, verdict)
    return report


def validity_scale(model: RingModel) -> float:
    """S = max(max_{p != j} |J_pj|, max_{p,j} |e_p - e_j|) with e_j = omega_j + J_jj."""
    hopping = model.hopping
    off = hopping - np.diag(np.diag(hopping))
    energies = model.omega + np.diag(hopping)
    spread = float(np.max(energies) - np.min(energies))
    return max(float(np.max(np.abs(off))), spread)
