"""Per-site complex colored Gaussian noise and its empirical statistics.

Correlations are reported as C(s) = E[z*(t) z(t - s)]; the propagation
kernels use alpha(s) = conj(C(s)).
"""
from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from scipy import signal

from .bath import BathSpec, MemoryKernels, alpha_T, spectral_density
from .const import (
    DEFAULT_N_MODES,
    DEFAULT_OMEGA_MAX_FACTOR,
    MIN_OMEGA_MAX_FACTOR,
    NOISE_CIRCULANT,
    NOISE_EXPONENTIAL,
    NOISE_MODE_SUM,
)
from .exceptions import NoiseError
from .models import TimeGrid

_LOGGER = logging.getLogger(__name__)

_TIME_CHUNK = 1024
_MIN_PATHS = 100


def site_streams(seed: int, trajectory: int, n_sites: int) -> list[np.random.Generator]:
    """Counter-based streams keyed by (seed, trajectory, site)."""
    return [
        np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trajectory, site])))
        for site in range(n_sites)
    ]


def _complex_normal(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard circular complex Gaussians, E|x|^2 = 1."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2)


def _times_of(grid: TimeGrid | np.ndarray) -> tuple[np.ndarray, float]:
    if isinstance(grid, TimeGrid):
        return grid.noise_times, grid.noise_step
    times = np.asarray(grid, dtype=float)
    if times.ndim != 1 or len(times) < 2:
        raise NoiseError("time grid needs at least two points")
    steps = np.diff(times)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps[0]:
        raise NoiseError("time grid must be strictly increasing with a uniform step")
    return times, float(steps[0])


@dataclass(frozen=True, eq=False)
class NoisePath:
    """One trajectory's noise z*_j(t_k) for every site on the half-step grid."""

    values: np.ndarray
    step: float
    method: str
    seed: int | None = None
    trajectory: int | None = None
    n_modes: int | None = None

    @property
    def n_sites(self) -> int:
        return self.values.shape[0]

    def index_of(self, t: float) -> int:
        """Grid index of time `t`; raises when `t` is off the grid or outside it."""
        k = int(round(t / self.step))
        if k < 0 or k >= self.values.shape[1] or abs(k * self.step - t) > 1e-9 * max(1.0, abs(t)):
            raise NoiseError(f"noise path does not cover t={t} (step={self.step}, points={self.values.shape[1]})")
        return k


class NoiseGenerator(Protocol):
    method: str

    def sample(
        self, grid: TimeGrid | np.ndarray, rngs: Sequence[np.random.Generator], *, seed: int | None = None, trajectory: int | None = None
    ) -> NoisePath: ...

    def correlation(self, lags: np.ndarray, site: int) -> np.ndarray: ...


# ── Mode-sum generator ───────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class ModeEnsemble:
    """Thermally weighted Drude-Lorentz modes on a midpoint grid."""

    frequencies: np.ndarray
    delta_omega: float
    w_plus: np.ndarray
    w_minus: np.ndarray
    truncation_error: np.ndarray

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    @property
    def n_sites(self) -> int:
        return self.w_plus.shape[0]

    @property
    def recurrence_time(self) -> float:
        return 2 * np.pi / self.delta_omega

    def correlation(self, lags: np.ndarray, site: int) -> np.ndarray:
        """C(s) = sum_l w+ exp(i w s) + w- exp(-i w s)."""
        phase = np.exp(1j * np.outer(np.asarray(lags, dtype=float), self.frequencies))
        return phase @ self.w_plus[site] + phase.conj() @ self.w_minus[site]


def discretize_bath(
    spec: BathSpec, n_modes: int = DEFAULT_N_MODES, omega_max: float | None = None
) -> ModeEnsemble:
    """Midpoint discretization of the Drude-Lorentz bath up to omega_max."""
    if n_modes < 2:
        raise NoiseError(f"need at least two modes: n_modes={n_modes}")
    if omega_max is None:
        omega_max = DEFAULT_OMEGA_MAX_FACTOR * float(np.max(spec.gamma))
    if omega_max <= 0:
        raise NoiseError(f"omega_max must be positive: omega_max={omega_max}")
    if np.any(omega_max < MIN_OMEGA_MAX_FACTOR * spec.gamma):
        raise NoiseError(
            f"omega_max={omega_max:g} does not cover the Drude peak; need >= {MIN_OMEGA_MAX_FACTOR:g}*gamma"
        )
    delta = omega_max / n_modes
    freqs = (np.arange(n_modes) + 0.5) * delta
    density = np.stack([spectral_density(freqs, j, spec) for j in range(spec.n_sites)])
    with np.errstate(over="ignore"):
        occupation = 1.0 / np.expm1(spec.beta * freqs)
    w_plus = density * (occupation + 1) * delta / np.pi
    w_minus = density * occupation * delta / np.pi

    target = np.abs(spec.amplitude)
    total = w_plus.sum(axis=1) + w_minus.sum(axis=1)
    error = np.divide(np.abs(total - target), target, out=np.zeros_like(target), where=target > 0)
    for arr in (freqs, w_plus, w_minus, error):
        arr.setflags(write=False)
    _LOGGER.debug(
        "Discretized bath: n_modes=%d, omega_max=%g, delta_omega=%g, max_truncation_error=%.3e",
        n_modes,
        omega_max,
        delta,
        float(np.max(error)),
    )
    return ModeEnsemble(freqs, delta, w_plus, w_minus, error)


def sample_path(
    modes: ModeEnsemble,
    grid: TimeGrid | np.ndarray,
    rngs: Sequence[np.random.Generator],
    *,
    seed: int | None = None,
    trajectory: int | None = None,
) -> NoisePath:
    """z*_j(t) = sum_l sqrt(w+) conj(xi_jl) exp(i w t) + sqrt(w-) eta_jl exp(-i w t)."""
    times, step = _times_of(grid)
    if len(rngs) != modes.n_sites:
        raise NoiseError(f"need one stream per site: streams={len(rngs)}, sites={modes.n_sites}")
    xi = np.empty((modes.n_sites, modes.n_modes), dtype=complex)
    eta = np.empty_like(xi)
    for site, rng in enumerate(rngs):
        xi[site] = _complex_normal(rng, modes.n_modes)
        eta[site] = _complex_normal(rng, modes.n_modes)
    plus = np.sqrt(modes.w_plus) * xi.conj()
    minus = np.sqrt(modes.w_minus) * eta

    values = np.empty((modes.n_sites, len(times)), dtype=complex)
    for start in range(0, len(times), _TIME_CHUNK):
        chunk = times[start : start + _TIME_CHUNK]
        phase = np.exp(1j * np.outer(modes.frequencies, chunk))
        values[:, start : start + len(chunk)] = plus @ phase + minus @ phase.conj()
    return NoisePath(values, step, NOISE_MODE_SUM, seed, trajectory, modes.n_modes)


@dataclass(frozen=True, eq=False)
class ModeSumKernels:
    """O^0 and O^1 of the kernel alpha(s) = conj(C(s)) of a mode ensemble."""

    modes: ModeEnsemble

    def tabulate(self, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        times = np.asarray(times, dtype=float)
        w = self.modes.frequencies
        o0 = np.empty((len(times), self.modes.n_sites), dtype=complex)
        o1 = np.empty_like(o0)
        for start in range(0, len(times), _TIME_CHUNK):
            t = times[start : start + _TIME_CHUNK, None]
            down = np.exp(-1j * w * t)
            up = down.conj()
            # int_0^t e^{-iws} ds and int_0^t s e^{-iws} ds, and their w -> -w partners
            i0_down = (1 - down) / (1j * w)
            i0_up = (up - 1) / (1j * w)
            i1_down = down * (1j * t / w + 1 / w**2) - 1 / w**2
            i1_up = up * (-1j * t / w + 1 / w**2) - 1 / w**2
            sl = slice(start, start + len(t))
            o0[sl] = i0_down @ self.modes.w_plus.T + i0_up @ self.modes.w_minus.T
            o1[sl] = i1_down @ self.modes.w_plus.T + i1_up @ self.modes.w_minus.T
        return o0, o1


@dataclass(frozen=True, eq=False)
class ModeSumNoise:
    modes: ModeEnsemble
    method: str = NOISE_MODE_SUM

    def sample(self, grid, rngs, *, seed=None, trajectory=None) -> NoisePath:
        return sample_path(self.modes, grid, rngs, seed=seed, trajectory=trajectory)

    def correlation(self, lags: np.ndarray, site: int) -> np.ndarray:
        return self.modes.correlation(lags, site)

    def kernels(self) -> ModeSumKernels:
        return ModeSumKernels(self.modes)


# ── Exponential (Ornstein-Uhlenbeck) generator ───────────────────────────────


@dataclass(frozen=True, eq=False)
class ExponentialNoise:
    """Stationary complex OU noise with C(s) = c exp(-gamma |s|), c = 2g/beta.

    Sampled exactly on the grid as an AR(1) recursion, so the realized
    correlation carries no discretization error.
    """

    intensity: np.ndarray
    gamma: np.ndarray
    method: str = NOISE_EXPONENTIAL

    @classmethod
    def from_bath(cls, spec: BathSpec) -> ExponentialNoise:
        return cls(spec.amplitude.real.copy(), spec.gamma.copy())

    @property
    def n_sites(self) -> int:
        return len(self.intensity)

    def correlation(self, lags: np.ndarray, site: int) -> np.ndarray:
        lags = np.abs(np.asarray(lags, dtype=float))
        return (self.intensity[site] * np.exp(-self.gamma[site] * lags)).astype(complex)

    def kernels(self) -> MemoryKernels:
        return MemoryKernels(self.intensity.astype(complex), self.gamma)

    def sample(self, grid, rngs, *, seed=None, trajectory=None) -> NoisePath:
        times, step = _times_of(grid)
        if len(rngs) != self.n_sites:
            raise NoiseError(f"need one stream per site: streams={len(rngs)}, sites={self.n_sites}")
        values = np.zeros((self.n_sites, len(times)), dtype=complex)
        for site, rng in enumerate(rngs):
            draws = _complex_normal(rng, len(times))
            c = self.intensity[site]
            if c == 0:
                continue
            decay = math.exp(-self.gamma[site] * step)
            scale = math.sqrt(c * (1 - decay**2))
            # first sample drawn from the stationary law
            draws[0] *= math.sqrt(c) / scale
            values[site] = signal.lfilter([scale], [1.0, -decay], draws)
        return NoisePath(values, step, NOISE_EXPONENTIAL, seed, trajectory)


# ── Circulant-embedding generator (cross-check only) ─────────────────────────


@dataclass(frozen=True, eq=False)
class CirculantNoise:
    """Spectral synthesis of the Hermitian extension of conj(alpha_T).

    The embedding spectrum is sign-indefinite; negative mass is clipped
    and its fraction reported.
    """

    spec: BathSpec
    method: str = NOISE_CIRCULANT

    def correlation(self, lags: np.ndarray, site: int) -> np.ndarray:
        lags = np.asarray(lags, dtype=float)
        value = np.conj(alpha_T(np.abs(lags), site, self.spec))
        return np.where(lags >= 0, value, np.conj(value))

    def spectrum(self, n_times: int, step: float) -> tuple[np.ndarray, np.ndarray]:
        """Embedding eigenvalues (sites, 2(n-1)) and the clipped negative fraction per site."""
        lags = np.arange(n_times) * step
        eig = []
        clipped = []
        for site in range(self.spec.n_sites):
            head = self.correlation(lags, site)
            row = np.concatenate([head, np.conj(head[-2:0:-1])])
            lam = np.fft.fft(row).real
            total = np.sum(np.abs(lam))
            clipped.append(float(np.sum(np.abs(np.minimum(lam, 0))) / total) if total else 0.0)
            eig.append(np.maximum(lam, 0))
        return np.array(eig), np.array(clipped)

    def sample(self, grid, rngs, *, seed=None, trajectory=None) -> NoisePath:
        times, step = _times_of(grid)
        n = len(times)
        eig, clipped = self.spectrum(n, step)
        if np.any(clipped > 0):
            _LOGGER.debug("Circulant embedding clipped negative spectrum: max_fraction=%.3e", float(np.max(clipped)))
        size = eig.shape[1]
        values = np.empty((self.spec.n_sites, n), dtype=complex)
        for site, rng in enumerate(rngs):
            weights = np.sqrt(eig[site] / size) * _complex_normal(rng, size)
            values[site] = (size * np.fft.ifft(weights))[:n]
        return NoisePath(values, step, NOISE_CIRCULANT, seed, trajectory)


def make_generator(method: str, spec: BathSpec, *, n_modes: int = DEFAULT_N_MODES, omega_max: float | None = None) -> NoiseGenerator:
    if method == NOISE_EXPONENTIAL:
        return ExponentialNoise.from_bath(spec)
    if method == NOISE_MODE_SUM:
        return ModeSumNoise(discretize_bath(spec, n_modes, omega_max))
    if method == NOISE_CIRCULANT:
        return CirculantNoise(spec)
    raise NoiseError(f"unknown noise method: {method}")


# ── Empirical statistics ─────────────────────────────────────────────────────


@dataclass
class CorrelationEstimate:
    """Ensemble estimates on a subsampled (t, tau) grid.

    Standard errors carry the real-part error in `.real` and the
    imaginary-part error in `.imag`.
    """

    times: np.ndarray
    hermitian: np.ndarray
    hermitian_err: np.ndarray
    pseudo: np.ndarray
    pseudo_err: np.ndarray
    n_paths: int


def _stack(paths: Sequence[NoisePath] | np.ndarray, site: int) -> np.ndarray:
    if isinstance(paths, np.ndarray):
        data = paths if paths.ndim == 2 else paths[:, site, :]
    else:
        data = np.stack([p.values[site] for p in paths])
    if data.shape[0] < _MIN_PATHS:
        raise NoiseError(f"need at least {_MIN_PATHS} paths for correlation estimates: got {data.shape[0]}")
    return data


def _mean_and_err(products: list[np.ndarray], n: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean and complex-packed standard error from accumulated sums."""
    total, sq_re, sq_im = products
    mean = total / n
    var_re = np.maximum(sq_re / n - mean.real**2, 0) * n / max(n - 1, 1)
    var_im = np.maximum(sq_im / n - mean.imag**2, 0) * n / max(n - 1, 1)
    return mean, (np.sqrt(var_re) + 1j * np.sqrt(var_im)) / math.sqrt(n)


def empirical_correlation(
    paths: Sequence[NoisePath] | np.ndarray,
    *,
    site: int = 0,
    other_site: int | None = None,
    points: int = 32,
    step: float | None = None,
) -> CorrelationEstimate:
    """E[z*_p(t) z_j(tau)] and E[z_p(t) z_j(tau)] with standard errors.

    `other_site` defaults to `site`; a different site gives the
    cross-site estimate.
    """
    first = _stack(paths, site)
    second = first if other_site is None or other_site == site else _stack(paths, other_site)
    n_paths, n_times = first.shape
    idx = np.unique(np.linspace(0, n_times - 1, min(points, n_times)).round().astype(int))
    a, b = first[:, idx], second[:, idx]
    if step is None and not isinstance(paths, np.ndarray):
        step = paths[0].step
    times = idx * (step if step is not None else 1.0)

    herm = [np.zeros((len(idx), len(idx)), dtype=complex), np.zeros((len(idx), len(idx))), np.zeros((len(idx), len(idx)))]
    pseudo = [np.zeros_like(herm[0]), np.zeros_like(herm[1]), np.zeros_like(herm[2])]
    for start in range(0, n_paths, 1000):
        sa, sb = a[start : start + 1000], b[start : start + 1000]
        h = sa[:, :, None] * sb.conj()[:, None, :]
        p = sa.conj()[:, :, None] * sb.conj()[:, None, :]
        for acc, prod in ((herm, h), (pseudo, p)):
            acc[0] += prod.sum(axis=0)
            acc[1] += (prod.real**2).sum(axis=0)
            acc[2] += (prod.imag**2).sum(axis=0)
    herm_mean, herm_err = _mean_and_err(herm, n_paths)
    pseudo_mean, pseudo_err = _mean_and_err(pseudo, n_paths)
    return CorrelationEstimate(times, herm_mean, herm_err, pseudo_mean, pseudo_err, n_paths)


def lag_correlation(
    paths: Sequence[NoisePath] | np.ndarray, max_lag: int, *, site: int = 0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stationary estimate of C(d*h) for d = 0..max_lag.

    Returns (lag indices, estimate, standard error packed as in
    CorrelationEstimate); the error is taken across paths.
    """
    data = _stack(paths, site)
    n_paths, n_times = data.shape
    if max_lag >= n_times:
        raise NoiseError(f"max_lag={max_lag} exceeds path length {n_times}")
    per_path = np.empty((n_paths, max_lag + 1), dtype=complex)
    for d in range(max_lag + 1):
        per_path[:, d] = np.mean(data[:, d:] * data[:, : n_times - d].conj(), axis=1)
    estimate = per_path.mean(axis=0)
    err = (per_path.real.std(axis=0, ddof=1) + 1j * per_path.imag.std(axis=0, ddof=1)) / math.sqrt(n_paths)
    return np.arange(max_lag + 1), estimate, err


@dataclass(frozen=True)
class KernelMismatch:
    """max over s in [0, 5/gamma] of |C(s) - alpha_T(s)| / |alpha_T(0)|, per component."""

    real: float
    imag: float

    def format(self) -> str:
        return f"re={self.real:.4f} im={self.imag:.4f}"


def correlation_mismatch(
    modes: ModeEnsemble, spec: BathSpec, site: int = 0, *, samples: int = 201
) -> KernelMismatch:
    """Discrete mode-sum correlation against alpha_T, real and imaginary parts apart.

    Only the real part is held to the 5% bar; the imaginary part is reported.
    """
    gamma = spec.gamma[site]
    lags = np.linspace(0, 5 / gamma, samples)
    target = alpha_T(lags, site, spec)
    scale = abs(spec.amplitude[site])
    if scale == 0:
        return KernelMismatch(0.0, 0.0)
    diff = modes.correlation(lags, site) - target
    return KernelMismatch(float(np.max(np.abs(diff.real)) / scale), float(np.max(np.abs(diff.imag)) / scale))


# ── Statistics check ─────────────────────────────────────────────────────────


@dataclass
class NoiseCheckReport:
    """Empirical correlations of a generator against its own target and alpha_T.

    `lags`, `lag_target`, `lag_estimate` and `lag_err` hold the stationary
    lag table; `estimate` and `target` the two-time matrix behind the
    pass fractions.
    """

    method: str
    n_paths: int
    estimate: CorrelationEstimate
    target: np.ndarray
    fraction_within: float
    pseudo_fraction_within: float
    mismatch: KernelMismatch | None
    lags: np.ndarray
    lag_target: np.ndarray
    lag_estimate: np.ndarray
    lag_err: np.ndarray
    lag_fraction_within: float

    @property
    def passed(self) -> bool:
        statistics_ok = self.fraction_within >= 0.95 and self.pseudo_fraction_within >= 0.95
        return statistics_ok and (self.mismatch is None or self.mismatch.real <= 0.05)

    def rows(self) -> list[tuple[float, ...]]:
        """(lag, re_target, im_target, re_emp, im_emp, stderr) per lag."""
        stderr = np.hypot(self.lag_err.real, self.lag_err.imag)
        return [
            (lag, target.real, target.imag, est.real, est.imag, err)
            for lag, target, est, err in zip(self.lags, self.lag_target, self.lag_estimate, stderr)
        ]

    def pair_rows(self) -> list[tuple[float, ...]]:
        """Two-time rows: t1, t2, target, estimate and errors split re/im, then |E[zz]|."""
        est, err, times = self.estimate.hermitian, self.estimate.hermitian_err, self.estimate.times
        rows = []
        for i, t1 in enumerate(times):
            for k, t2 in enumerate(times):
                rows.append(
                    (
                        t1,
                        t2,
                        self.target[i, k].real,
                        self.target[i, k].imag,
                        est[i, k].real,
                        est[i, k].imag,
                        err[i, k].real,
                        err[i, k].imag,
                        abs(self.estimate.pseudo[i, k]),
                    )
                )
        return rows


def _within(estimate: np.ndarray, target: np.ndarray, err: np.ndarray, sigmas: float = 3.0) -> np.ndarray:
    dev = estimate - target
    ok_re = np.abs(dev.real) <= sigmas * err.real
    ok_im = np.abs(dev.imag) <= sigmas * err.imag
    return ok_re & ok_im


def noise_check(
    generator: NoiseGenerator,
    spec: BathSpec,
    *,
    n_paths: int = 10_000,
    seed: int = 0,
    points: int = 16,
    n_times: int = 101,
) -> NoiseCheckReport:
    """Sample `n_paths` site-0 paths over [0, 5/gamma] and compare E[z*z] and E[zz] with targets."""
    gamma = float(spec.gamma[0])
    times = np.linspace(0, 5 / gamma, n_times)
    step = float(times[1] - times[0])
    values = np.empty((n_paths, n_times), dtype=complex)
    for trajectory in range(n_paths):
        path = generator.sample(times, site_streams(seed, trajectory, spec.n_sites), seed=seed, trajectory=trajectory)
        values[trajectory] = path.values[0]
    estimate = empirical_correlation(values, points=points, step=step)
    lags = estimate.times[:, None] - estimate.times[None, :]
    target = generator.correlation(np.abs(lags).ravel(), 0).reshape(lags.shape)
    # C(-s) = conj(C(s)) for a stationary process
    target = np.where(lags < 0, target.conj(), target)
    fraction = float(np.mean(_within(estimate.hermitian, target, estimate.hermitian_err)))
    pseudo_ok = np.abs(estimate.pseudo) <= 3 * np.abs(estimate.pseudo_err)
    pseudo_fraction = float(np.mean(pseudo_ok))

    index, lag_estimate, lag_err = lag_correlation(values, (n_times - 1) // 2)
    lag_times = index * step
    lag_target = generator.correlation(lag_times, 0)
    lag_fraction = float(np.mean(_within(lag_estimate, lag_target, lag_err)))

    mismatch = None
    if isinstance(generator, ModeSumNoise):
        mismatch = correlation_mismatch(generator.modes, spec)
    report = NoiseCheckReport(
        method=generator.method,
        n_paths=n_paths,
        estimate=estimate,
        target=target,
        fraction_within=fraction,
        pseudo_fraction_within=pseudo_fraction,
        mismatch=mismatch,
        lags=lag_times,
        lag_target=lag_target,
        lag_estimate=lag_estimate,
        lag_err=lag_err,
        lag_fraction_within=lag_fraction,
    )
    _LOGGER.info(
        "Noise check: method=%s, paths=%d, within_3sigma=%.3f, lag_within=%.3f, pseudo_within=%.3f, alpha_T=%s",
        generator.method,
        n_paths,
        fraction,
        lag_fraction,
        pseudo_fraction,
        "n/a" if mismatch is None else mismatch.format(),
    )
    return report
