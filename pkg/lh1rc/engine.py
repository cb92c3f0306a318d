"""Deterministic parallel trajectory ensembles, convergence scans and sweeps."""
from __future__ import annotations

import asyncio
import copy
import logging
import time
from collections.abc import Mapping, Sequence
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .bath import BathSpec, MemoryKernels, ValidityReport, post_markov_validity, validity_scale
from .const import (
    CONF_AMPLITUDES,
    CONF_BATH,
    CONF_COUPLING,
    CONF_DECAY,
    CONF_DT,
    CONF_INITIAL,
    CONF_KAPPA,
    CONF_KERNELS,
    CONF_METHOD,
    CONF_MODEL,
    CONF_MOMENTUM,
    CONF_N_MODES,
    CONF_NAME,
    CONF_NOISE,
    CONF_OMEGA,
    CONF_OMEGA0,
    CONF_OMEGA_MAX_FACTOR,
    CONF_RUN,
    CONF_SEED,
    CONF_SITE,
    CONF_SOLVER,
    CONF_STATE,
    CONF_STATE_SEED,
    CONF_STRIDE,
    CONF_T_MAX,
    CONF_THREADS,
    CONF_TRAJECTORIES,
    CONF_UNRAVELING,
    DEFAULT_VALIDITY_ORDER,
    DIMER_CHECK_PASS_FRACTION,
    DIMER_CHECK_SAMPLES,
    KERNELS_CLOSED_FORM,
    KERNELS_MATCHED,
    NOISE_CIRCULANT,
    NOISE_EXPONENTIAL,
    NOISE_MODE_SUM,
    OMEGA_DISORDER,
    SOLVER_SSE,
    STATE_AMPLITUDES,
    STATE_MOMENTUM,
    STATE_RANDOM,
    STATE_SITE,
    STATE_SYMMETRIC,
    SWEEP_DISORDER,
    SWEEP_G,
    SWEEP_GAMMA,
    SWEEP_KAPPA,
    SWEEP_PARAMETERS,
    TRAJECTORY_CHUNK,
    UNRAVELING_NONLINEAR,
)
from .exceptions import NumericalError, ScenarioError
from .models import DensityState, EnsembleStats, ObservableSeries, TimeGrid
from .noise import (
    ExponentialNoise,
    ModeSumNoise,
    NoiseGenerator,
    discretize_bath,
    site_streams,
)
from .observables import (
    TrajectoryObservables,
    density_momentum_deviation,
    ensemble_mean,
    reduce_trajectories,
    series_from_density,
)
from .propagation import (
    KernelSource,
    Propagator,
    absorbed_deviation,
    integrate_master,
    step_halving_check,
)
from .ring import MomentumGrid, RingModel, build_ring

_LOGGER = logging.getLogger(__name__)


# ── Scenario ─────────────────────────────────────────────────────────────────


def initial_amplitudes(section: Mapping[str, Any], model: RingModel) -> np.ndarray:
    """Normalized initial amplitudes over all states from an [initial] section."""
    M, n = model.n_sites, model.n_states
    kind = section.get(CONF_STATE, STATE_SITE)
    a = np.zeros(n, dtype=complex)
    if kind == STATE_SITE:
        site = int(section.get(CONF_SITE, 1))
        if not 1 <= site <= n:
            raise ScenarioError(f"initial site {site} outside 1..{n}", path=f"{CONF_INITIAL}.{CONF_SITE}")
        a[site - 1] = 1.0
    elif kind == STATE_SYMMETRIC:
        a[:M] = 1 / np.sqrt(M)
    elif kind == STATE_MOMENTUM:
        m = int(section.get(CONF_MOMENTUM, M))
        if not 1 <= m <= M:
            raise ScenarioError(f"momentum index {m} outside 1..{M}", path=f"{CONF_INITIAL}.{CONF_MOMENTUM}")
        a[:M] = MomentumGrid(M, model.d0).phases[m - 1].conj()
    elif kind == STATE_RANDOM:
        rng = np.random.default_rng(int(section.get(CONF_STATE_SEED, 0)))
        a[:M] = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    elif kind == STATE_AMPLITUDES:
        raw = section.get(CONF_AMPLITUDES)
        if raw is None:
            raise ScenarioError("explicit initial state needs amplitudes", path=f"{CONF_INITIAL}.{CONF_AMPLITUDES}")
        values = np.array([complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in raw])
        if len(values) not in (M, n):
            raise ScenarioError(
                f"{len(values)} amplitudes given, expected {M} or {n}", path=f"{CONF_INITIAL}.{CONF_AMPLITUDES}"
            )
        a[: len(values)] = values
    else:
        raise ScenarioError(f"unknown initial state: {kind}", path=f"{CONF_INITIAL}.{CONF_STATE}")
    norm = np.linalg.norm(a)
    if norm == 0:
        raise ScenarioError("initial state has zero norm", path=CONF_INITIAL)
    return a / norm


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything one ensemble run needs, plus the resolved config it came from."""

    name: str
    model: RingModel
    bath: BathSpec
    initial: np.ndarray
    grid: TimeGrid
    n_trajectories: int
    seed: int
    unraveling: str = UNRAVELING_NONLINEAR
    kernels: str = KERNELS_MATCHED
    noise_method: str = NOISE_EXPONENTIAL
    n_modes: int = 400
    omega_max_factor: float = 20.0
    solver: str = SOLVER_SSE
    threads: int = 1
    config: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n_trajectories < 1:
            raise ScenarioError("trajectory count must be >= 1", path=f"{CONF_RUN}.{CONF_TRAJECTORIES}")
        if abs(np.linalg.norm(self.initial) - 1) > 1e-12:
            raise ScenarioError("initial amplitudes must be normalized", path=CONF_INITIAL)
        if len(self.initial) != self.model.n_states:
            raise ScenarioError(
                f"initial state has {len(self.initial)} entries, model has {self.model.n_states}", path=CONF_INITIAL
            )
        if self.bath.n_sites != self.model.n_sites:
            raise ScenarioError("bath and model disagree on the number of sites", path=CONF_BATH)

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> Scenario:
        """Build from a schema-validated config dict."""
        resolved = copy.deepcopy(dict(config))
        try:
            model = build_ring(resolved[CONF_MODEL])
        except ValueError as err:
            raise ScenarioError(str(err), path=CONF_MODEL) from err
        try:
            bath = BathSpec.from_config(resolved.get(CONF_BATH, {}), model.n_sites)
        except ValueError as err:
            raise ScenarioError(str(err), path=CONF_BATH) from err
        run = resolved.get(CONF_RUN, {})
        noise = resolved.get(CONF_NOISE, {})
        try:
            grid = TimeGrid(run[CONF_DT], run[CONF_T_MAX], run[CONF_STRIDE])
        except (KeyError, ValueError) as err:
            raise ScenarioError(str(err), path=CONF_RUN) from err
        return cls(
            name=resolved.get(CONF_NAME, "scenario"),
            model=model,
            bath=bath,
            initial=initial_amplitudes(resolved.get(CONF_INITIAL, {}), model),
            grid=grid,
            n_trajectories=run[CONF_TRAJECTORIES],
            seed=run[CONF_SEED],
            unraveling=run[CONF_UNRAVELING],
            kernels=run[CONF_KERNELS],
            noise_method=noise[CONF_METHOD],
            n_modes=noise[CONF_N_MODES],
            omega_max_factor=noise[CONF_OMEGA_MAX_FACTOR],
            solver=run[CONF_SOLVER],
            threads=run[CONF_THREADS],
            config=resolved,
        )

    def with_overrides(self, section: str, **values: Any) -> Scenario:
        """Rebuild with `values` merged into one config section."""
        config = copy.deepcopy(self.config)
        config.setdefault(section, {}).update(values)
        return Scenario.from_config(config)

    @property
    def noiseless(self) -> bool:
        return not np.any(self.bath.g)


@dataclass(frozen=True, eq=False)
class NoiseSetup:
    generator: NoiseGenerator
    kernels: KernelSource
    shift: tuple[np.ndarray, np.ndarray] | None


def noise_setup(s: Scenario) -> NoiseSetup:
    """Noise generator, the kernels the propagators use, and the shift law."""
    if s.noise_method == NOISE_CIRCULANT:
        raise ScenarioError(
            "circulant noise is a cross-check generator for noise-check only", path=f"{CONF_NOISE}.{CONF_METHOD}"
        )
    if s.noise_method == NOISE_MODE_SUM:
        if s.unraveling == UNRAVELING_NONLINEAR:
            raise ScenarioError(
                "the nonlinear unraveling needs exponential noise; use unraveling = \"linear\" with mode-sum",
                path=f"{CONF_RUN}.{CONF_UNRAVELING}",
            )
        modes = discretize_bath(s.bath, s.n_modes, s.omega_max_factor * float(np.max(s.bath.gamma)))
        if modes.recurrence_time < 2 * s.grid.t_max:
            _LOGGER.warning(
                "Mode-sum noise recurs within the run: recurrence=%.3g, t_max=%g; raise n_modes",
                modes.recurrence_time,
                s.grid.t_max,
            )
        generator: NoiseGenerator = ModeSumNoise(modes)
    else:
        generator = ExponentialNoise.from_bath(s.bath)
    if s.kernels == KERNELS_CLOSED_FORM:
        if not s.noiseless:
            _LOGGER.warning(
                "Closed-form kernels differ from the correlation the %s generator realizes; "
                "trajectories and the master equation may disagree at strong coupling: scenario=%s, g_max=%.3g",
                s.noise_method,
                s.name,
                float(np.max(s.bath.g)),
            )
        kernels: KernelSource = MemoryKernels.from_bath(s.bath)
    else:
        kernels = generator.kernels()
    shift = None
    if s.unraveling == UNRAVELING_NONLINEAR:
        shift = (generator.intensity, generator.gamma)
    return NoiseSetup(generator, kernels, shift)


def master_kernels(s: Scenario) -> KernelSource:
    """Kernels the master equation uses; the same ones the scenario's ensemble would use."""
    if s.kernels == KERNELS_CLOSED_FORM or s.noise_method == NOISE_CIRCULANT:
        return MemoryKernels.from_bath(s.bath)
    if s.noise_method == NOISE_MODE_SUM:
        modes = discretize_bath(s.bath, s.n_modes, s.omega_max_factor * float(np.max(s.bath.gamma)))
        return ModeSumNoise(modes).kernels()
    return ExponentialNoise.from_bath(s.bath).kernels()


def scenario_validity(s: Scenario, n_max: int = DEFAULT_VALIDITY_ORDER) -> ValidityReport:
    """Validity report for the scenario's system scale against its slowest bath."""
    return post_markov_validity(validity_scale(s.model), float(np.min(s.bath.gamma)), s.grid.t_max, n_max)


# ── Chunk workers ────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class ChunkContext:
    propagator: Propagator
    generator: NoiseGenerator
    seed: int
    initial: np.ndarray
    momentum: MomentumGrid
    noiseless: bool
    keep_density: bool = False


@dataclass
class ChunkResult:
    start: int
    observables: TrajectoryObservables
    absorbed: np.ndarray
    amplitudes: np.ndarray | None
    first_amplitudes: np.ndarray | None
    elapsed: float


def lane_seconds(began: float, sampled: float, integrated: float, finished: float, count: int) -> float:
    """Chunk time charged to its `count` real trajectories.

    Batched integration always runs TRAJECTORY_CHUNK lanes; the padded
    lanes' share of that span is not billed.
    """
    return (sampled - began) + (integrated - sampled) * count / TRAJECTORY_CHUNK + (finished - integrated)


_WORKER_CONTEXT: ChunkContext | None = None


def _init_worker(context: ChunkContext) -> None:
    global _WORKER_CONTEXT
    _WORKER_CONTEXT = context


def _run_chunk(context: ChunkContext | None, start: int, count: int) -> ChunkResult:
    """Integrate trajectories start..start+count-1 in one zero-padded batch."""
    ctx = context if context is not None else _WORKER_CONTEXT
    if ctx is None:
        raise RuntimeError("worker context not initialized")
    began = time.perf_counter()
    prop = ctx.propagator
    grid = prop.grid
    n, M = prop.n_states, prop.model.n_sites
    a0 = np.zeros((TRAJECTORY_CHUNK, n), dtype=complex)
    a0[:count] = ctx.initial
    noise = None
    if not ctx.noiseless:
        noise = np.zeros((grid.n_noise, TRAJECTORY_CHUNK, n), dtype=complex)
        for row in range(count):
            trajectory = start + row
            path = ctx.generator.sample(
                grid, site_streams(ctx.seed, trajectory, M), seed=ctx.seed, trajectory=trajectory
            )
            noise[:, row, :M] = path.values.T
    sampled = time.perf_counter()
    amps, absorbed = prop.integrate_batch(a0, noise, offset=start)
    integrated = time.perf_counter()
    amps, absorbed = amps[:count], absorbed[:count]
    return ChunkResult(
        start=start,
        observables=TrajectoryObservables.from_amplitudes(amps, ctx.momentum),
        absorbed=absorbed,
        amplitudes=amps if ctx.keep_density else None,
        first_amplitudes=amps[0] if start == 0 else None,
        elapsed=lane_seconds(began, sampled, integrated, time.perf_counter(), count),
    )


# ── Coordinator ──────────────────────────────────────────────────────────────


class EnsembleCoordinator:
    """Runs one scenario's trajectories as executor jobs and reduces them.

    Results depend only on (seed, scenario): trajectories draw from
    counter-based streams, chunks have a fixed size, and reduction runs
    over trajectory indices in a fixed tree.
    """

    def __init__(
        self,
        scenario: Scenario,
        *,
        workers: int | None = None,
        single_thread: bool = False,
        keep_density: bool = False,
        timeout: float | None = None,
    ) -> None:
        self.scenario = scenario
        self.workers = 1 if single_thread else max(1, workers or scenario.threads)
        self.single_thread = single_thread or self.workers == 1
        self.keep_density = keep_density
        self.timeout = timeout
        self.trajectories: TrajectoryObservables | None = None
        self.first_amplitudes: np.ndarray | None = None

    def _context(self) -> tuple[ChunkContext, NoiseSetup]:
        s = self.scenario
        setup = noise_setup(s)
        propagator = Propagator.build(s.model, setup.kernels, s.grid, unraveling=s.unraveling, shift=setup.shift)
        return ChunkContext(
            propagator=propagator,
            generator=setup.generator,
            seed=s.seed,
            initial=s.initial,
            momentum=MomentumGrid.for_ring(s.model),
            noiseless=s.noiseless,
            keep_density=self.keep_density,
        ), setup

    def _self_check(self, context: ChunkContext, setup: NoiseSetup) -> float:
        s = self.scenario
        refined = Propagator.build(
            s.model, setup.kernels, s.grid.refined(), unraveling=s.unraveling, shift=setup.shift
        )
        return step_halving_check(context.propagator, refined, s.initial)

    async def _async_chunks(self, context: ChunkContext) -> list[ChunkResult]:
        total = self.scenario.n_trajectories
        jobs = [(start, min(TRAJECTORY_CHUNK, total - start)) for start in range(0, total, TRAJECTORY_CHUNK)]
        if self.single_thread:
            results = []
            for start, count in jobs:
                results.append(_run_chunk(context, start, count))
                _LOGGER.debug("Chunk done: start=%d, count=%d", start, count)
                await asyncio.sleep(0)
            return results
        loop = asyncio.get_running_loop()
        executor: Executor = ProcessPoolExecutor(
            max_workers=self.workers, initializer=_init_worker, initargs=(context,)
        )
        try:
            futures = [loop.run_in_executor(executor, _run_chunk, None, start, count) for start, count in jobs]
            return list(await asyncio.gather(*futures))
        finally:
            executor.shutdown(wait=True, cancel_futures=True)

    async def async_run(self) -> EnsembleStats:
        s = self.scenario
        _LOGGER.info(
            "Ensemble starting: scenario=%s, trajectories=%d, workers=%d, unraveling=%s, noise=%s",
            s.name,
            s.n_trajectories,
            self.workers,
            s.unraveling,
            s.noise_method,
        )
        validity = scenario_validity(s)
        if not validity.verdict:
            _LOGGER.warning(
                "Post-Markov expansion may not converge: scenario=%s, S=%.4g, gamma=%.4g",
                s.name,
                validity.S,
                validity.gamma,
            )
        began = time.perf_counter()
        context, setup = self._context()
        loop = asyncio.get_running_loop()
        try:
            async with asyncio.timeout(self.timeout):
                if self.single_thread:
                    self._self_check(context, setup)
                else:
                    await loop.run_in_executor(None, self._self_check, context, setup)
                results = await self._async_chunks(context)
        except NumericalError as err:
            _LOGGER.error(
                "Ensemble failed: scenario=%s, error=%s",
                s.name,
                err,
                exc_info=_LOGGER.isEnabledFor(logging.DEBUG),
            )
            raise
        results.sort(key=lambda r: r.start)

        observables = TrajectoryObservables.concatenate([r.observables for r in results])
        self.trajectories = observables
        self.first_amplitudes = results[0].first_amplitudes
        series = reduce_trajectories(s.grid.output_times, observables, MomentumGrid.for_ring(s.model).zero_index)
        absorbed, _ = ensemble_mean(np.concatenate([r.absorbed for r in results]))
        series.absorbed = absorbed
        deviation = 0.0
        if s.model.rc_enabled and (s.unraveling == UNRAVELING_NONLINEAR or s.noiseless):
            deviation = absorbed_deviation(series.p_t, absorbed)
        density = density_err = None
        momentum_deviation = 0.0
        if self.keep_density:
            amplitudes = np.concatenate([r.amplitudes for r in results])
            density, density_err = ensemble_mean(amplitudes[..., :, None] * amplitudes[..., None, :].conj())
            momentum_deviation = density_momentum_deviation(density, amplitudes, MomentumGrid.for_ring(s.model))
            _LOGGER.debug("Density momentum cross-check: scenario=%s, deviation=%.3g", s.name, momentum_deviation)

        wall = time.perf_counter() - began
        per_trajectory = sum(r.elapsed for r in results) / s.n_trajectories
        _LOGGER.info(
            "Ensemble finished: scenario=%s, trajectories=%d, wall=%.2fs, per_trajectory=%.4fs",
            s.name,
            s.n_trajectories,
            wall,
            per_trajectory,
        )
        return EnsembleStats(
            series=series,
            n_trajectories=s.n_trajectories,
            wall_clock=wall,
            per_trajectory=per_trajectory,
            validity=validity,
            workers=self.workers,
            density=density,
            density_err=density_err,
            absorbed_deviation=deviation,
            momentum_deviation=momentum_deviation,
        )


async def run_ensemble_async(s: Scenario, **kwargs: Any) -> EnsembleStats:
    return await EnsembleCoordinator(s, **kwargs).async_run()


def run_ensemble(
    s: Scenario,
    *,
    workers: int | None = None,
    single_thread: bool = False,
    keep_density: bool = False,
) -> EnsembleStats:
    """Run NM trajectories and reduce them; bit-identical for any worker count."""
    coordinator = EnsembleCoordinator(s, workers=workers, single_thread=single_thread, keep_density=keep_density)
    return asyncio.run(coordinator.async_run())


@dataclass
class MasterResult:
    series: ObservableSeries
    rho: np.ndarray
    hermiticity_drift: float
    validity: ValidityReport
    wall_clock: float


def run_master(s: Scenario) -> MasterResult:
    """Master-equation oracle for the scenario, with the kernels its ensemble would use."""
    began = time.perf_counter()
    kernels = master_kernels(s)
    psi = s.initial
    density = integrate_master(DensityState(np.outer(psi, psi.conj())), s.model, kernels, s.grid)
    series = series_from_density(density.times, density.rho, MomentumGrid.for_ring(s.model))
    wall = time.perf_counter() - began
    _LOGGER.info("Master equation finished: scenario=%s, wall=%.2fs", s.name, wall)
    return MasterResult(series, density.rho, density.hermiticity_drift, scenario_validity(s), wall)


# ── Scans and sweeps ─────────────────────────────────────────────────────────


@dataclass
class ConvergenceRow:
    n_trajectories: int
    p_t: float
    p_t_err: float
    max_stderr: float
    max_deviation: float


def convergence_scan(
    s: Scenario, nm_list: Sequence[int], *, readout_time: float | None = None, **kwargs: Any
) -> list[ConvergenceRow]:
    """P_T for growing ensembles; smaller ensembles are prefixes of the largest."""
    counts = sorted(set(int(nm) for nm in nm_list))
    if not counts or counts[0] < 1:
        raise ValueError(f"trajectory counts must be >= 1: {nm_list}")
    readout = s.grid.t_max if readout_time is None else readout_time
    biggest = s.with_overrides(CONF_RUN, **{CONF_TRAJECTORIES: counts[-1]})
    coordinator = EnsembleCoordinator(biggest, **kwargs)
    asyncio.run(coordinator.async_run())
    zero = MomentumGrid.for_ring(s.model).zero_index
    rows: list[ConvergenceRow] = []
    previous: np.ndarray | None = None
    for count in counts:
        series = reduce_trajectories(s.grid.output_times, coordinator.trajectories.head(count), zero)
        p_t, err = series.readout(readout)
        deviation = float("nan") if previous is None else float(np.max(np.abs(series.p_t - previous)))
        rows.append(ConvergenceRow(count, p_t, err, float(np.max(series.p_t_err)), deviation))
        previous = series.p_t
    return rows


@dataclass
class SweepRow:
    value: float
    p_t: float
    p_t_err: float


def scenario_for(s: Scenario, parameter: str, value: float) -> Scenario:
    """Scenario with one sweep parameter replaced."""
    if parameter == SWEEP_G:
        return s.with_overrides(CONF_BATH, **{CONF_COUPLING: value})
    if parameter == SWEEP_GAMMA:
        return s.with_overrides(CONF_BATH, **{CONF_DECAY: value})
    if parameter == SWEEP_KAPPA:
        return s.with_overrides(CONF_MODEL, **{CONF_KAPPA: value})
    if parameter == SWEEP_DISORDER:
        return s.with_overrides(CONF_MODEL, **{CONF_OMEGA: OMEGA_DISORDER, CONF_OMEGA0: value})
    raise ValueError(f"unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}")


def sweep(
    s: Scenario, parameter: str, values: Sequence[float], readout_time: float, **kwargs: Any
) -> list[SweepRow]:
    """One ensemble per value; P_T and its standard error at `readout_time`."""
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}")
    rows = []
    for value in values:
        stats = run_ensemble(scenario_for(s, parameter, float(value)), **kwargs)
        p_t, err = stats.series.readout(readout_time)
        _LOGGER.info("Sweep point: parameter=%s, value=%g, P_T=%.6f, stderr=%.2e", parameter, value, p_t, err)
        rows.append(SweepRow(float(value), p_t, err))
    return rows


# ── Oracle comparison ────────────────────────────────────────────────────────


@dataclass
class OracleReport:
    passed: bool
    fraction_within: float
    max_deviation: float
    max_sigma: float
    times: np.ndarray
    sse: np.ndarray
    master: np.ndarray
    stderr: np.ndarray
    deterministic: bool

    def format(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        if self.deterministic:
            detail = f"max_deviation={self.max_deviation:.3e} (deterministic, tolerance 1e-8)"
        else:
            detail = (
                f"within_3sigma={self.fraction_within:.1%} of {len(self.times)} times "
                f"(need {DIMER_CHECK_PASS_FRACTION:.0%}), max_deviation={self.max_deviation:.3e}, "
                f"max_sigma={self.max_sigma:.3e}"
            )
        return f"{verdict}: {detail}"


def compare_with_master(
    stats: EnsembleStats, master: MasterResult, *, site: int = 0, samples: int = DIMER_CHECK_SAMPLES, noiseless: bool = False
) -> OracleReport:
    """Pointwise site-population comparison of an ensemble with the master oracle."""
    series = stats.series
    idx = np.unique(np.linspace(0, len(series.t) - 1, samples).round().astype(int))
    sse = series.populations[idx, site]
    oracle = master.series.populations[idx, site]
    err = series.populations_err[idx, site]
    dev = np.abs(sse - oracle)
    if noiseless:
        passed = bool(np.max(dev) <= 1e-8)
        fraction = 1.0 if passed else float(np.mean(dev <= 1e-8))
    else:
        fraction = float(np.mean(dev <= 3 * err))
        passed = fraction >= DIMER_CHECK_PASS_FRACTION
    return OracleReport(
        passed, fraction, float(np.max(dev)), float(np.max(err)), series.t[idx], sse, oracle, err, noiseless
    )
