"""Fixed-step RK4 integration of SSE trajectories and the post-Markov master equation.

Trajectories are integrated in batches: amplitudes are rows of a
(B, n_states) array. Noise and kernels are tabulated on the half-step
grid, so stage k reads indices 2k, 2k+1 and 2k+2.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .const import (
    ABSORBED_WARN,
    HERMITICITY_WARN,
    SELF_CHECK_TOLERANCE,
    UNRAVELING_LINEAR,
    UNRAVELING_NONLINEAR,
)
from .exceptions import IntegratorCheckFailed, NumericalError
from .models import AmplitudeState, DensityState, TimeGrid
from .noise import NoisePath
from .ring import RingModel, hamiltonian_matrix, hopping_operator

_LOGGER = logging.getLogger(__name__)


class KernelSource(Protocol):
    def tabulate(self, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...


def _pad(table: np.ndarray, n_states: int) -> np.ndarray:
    """Embed per-antenna columns into the full state space (zero on the RC)."""
    out = np.zeros(table.shape[:-1] + (n_states,), dtype=complex)
    out[..., : table.shape[-1]] = table
    return out


@dataclass(frozen=True, eq=False)
class Propagator:
    """Operators and kernel tables for one model on one time grid.

    `shift_intensity` and `shift_decay` describe the exponential noise
    correlation c*exp(-gamma*s) used by the nonlinear unraveling to
    shift the noise by c * int exp(-gamma(t-s)) <A_j>_s ds.
    """

    model: RingModel
    grid: TimeGrid
    H: np.ndarray
    hopping: np.ndarray
    o0: np.ndarray
    o1: np.ndarray
    unraveling: str = UNRAVELING_LINEAR
    shift_intensity: np.ndarray | None = None
    shift_decay: np.ndarray | None = None

    @classmethod
    def build(
        cls,
        model: RingModel,
        kernels: KernelSource,
        grid: TimeGrid,
        *,
        unraveling: str = UNRAVELING_LINEAR,
        shift: tuple[np.ndarray, np.ndarray] | None = None,
    ) -> Propagator:
        if unraveling not in (UNRAVELING_LINEAR, UNRAVELING_NONLINEAR):
            raise ValueError(f"unknown unraveling: {unraveling}")
        if unraveling == UNRAVELING_NONLINEAR and shift is None:
            raise ValueError("the nonlinear unraveling needs the exponential noise intensity and decay")
        n = model.n_states
        o0, o1 = kernels.tabulate(grid.noise_times)
        intensity = decay = None
        if shift is not None:
            intensity = np.zeros(n)
            decay = np.zeros(n)
            intensity[: model.n_sites] = shift[0]
            decay[: model.n_sites] = shift[1]
        return cls(
            model=model,
            grid=grid,
            H=hamiltonian_matrix(model),
            hopping=hopping_operator(model),
            o0=_pad(o0, n),
            o1=_pad(o1, n),
            unraveling=unraveling,
            shift_intensity=intensity,
            shift_decay=decay,
        )

    @property
    def n_states(self) -> int:
        return self.model.n_states

    @property
    def antenna_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_states)
        mask[: self.model.n_sites] = 1.0
        return mask

    # ── Right-hand sides ─────────────────────────────────────────────────

    def linear_rhs(self, a: np.ndarray, z: np.ndarray, k: int) -> np.ndarray:
        """da/dt of the linear single-noise equation at half-step index k."""
        o0, o1 = self.o0[k], self.o1[k]
        hop = a @ self.hopping
        return -1j * (a @ self.H.T) + z * a - o0 * a - 1j * o1 * hop

    def nonlinear_rhs(
        self, a: np.ndarray, shift: np.ndarray, z: np.ndarray, k: int
    ) -> tuple[np.ndarray, np.ndarray]:
        """(da/dt, dS/dt) of the norm-preserving unraveling at half-step index k."""
        o0, o1 = self.o0[k], self.o1[k]
        pop = (a * a.conj()).real
        norm = pop.sum(axis=-1, keepdims=True)
        safe = np.where(norm > 0, norm, 1.0)
        occ = pop * self.antenna_mask / safe

        shifted = z + shift
        noise = shifted * a - (occ * shifted).sum(axis=-1, keepdims=True) * a

        hop = a @ self.hopping
        direct = o0 * a + 1j * o1 * hop
        mean = occ * o0 * a - 1j * ((occ * o1 * a) @ self.hopping) + 1j * occ * o1 * hop
        memory = direct - mean
        proj = (a.conj() * memory).sum(axis=-1, keepdims=True) / safe

        da = -1j * (a @ self.H.T) + noise - (memory - proj * a)
        dshift = self.shift_intensity * occ - self.shift_decay * shift
        return da, dshift

    def _rhs(self, y: np.ndarray, z: np.ndarray, k: int) -> np.ndarray:
        """Packed state y = [a | S | absorbed]; S is zero for the linear unraveling."""
        n = self.n_states
        a = y[:, :n]
        dy = np.zeros_like(y)
        if self.unraveling == UNRAVELING_NONLINEAR:
            da, dshift = self.nonlinear_rhs(a, y[:, n : 2 * n].real, z, k)
            dy[:, n : 2 * n] = dshift
        else:
            da = self.linear_rhs(a, z, k)
        dy[:, :n] = da
        rc = self.model.rc_index
        if rc is not None:
            dy[:, 2 * n] = 2 * self.model.kappa * np.abs(a[:, rc]) ** 2
        return dy

    # ── Integration ──────────────────────────────────────────────────────

    def integrate_batch(
        self, a0: np.ndarray, noise: np.ndarray | None, *, offset: int = 0
    ) -> tuple[np.ndarray, np.ndarray]:
        """RK4 over the whole grid for a batch.

        `noise` is (n_noise, B, n_states) with zeros in the RC column, or
        None for noise-free evolution. Returns amplitudes (B, n_output,
        n_states) and absorbed probability (B, n_output).
        """
        grid = self.grid
        n = self.n_states
        batch = a0.shape[0]
        y = np.zeros((batch, 2 * n + 1), dtype=complex)
        y[:, :n] = a0
        zero = np.zeros((batch, n), dtype=complex)
        amps = np.empty((batch, grid.n_output, n), dtype=complex)
        absorbed = np.empty((batch, grid.n_output))
        amps[:, 0] = a0
        absorbed[:, 0] = 0.0
        h = grid.dt
        for step in range(grid.n_steps):
            i0, im, i1 = 2 * step, 2 * step + 1, 2 * step + 2
            z0 = noise[i0] if noise is not None else zero
            zm = noise[im] if noise is not None else zero
            z1 = noise[i1] if noise is not None else zero
            k1 = self._rhs(y, z0, i0)
            k2 = self._rhs(y + 0.5 * h * k1, zm, im)
            k3 = self._rhs(y + 0.5 * h * k2, zm, im)
            k4 = self._rhs(y + h * k3, z1, i1)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if (step + 1) % grid.stride == 0:
                out = (step + 1) // grid.stride
                if not np.all(np.isfinite(y)):
                    row = int(np.nonzero(~np.all(np.isfinite(y), axis=1))[0][0])
                    raise NumericalError(
                        "non-finite amplitudes", trajectory=offset + row, time=(step + 1) * h
                    )
                amps[:, out] = y[:, :n]
                absorbed[:, out] = y[:, 2 * n].real
        return amps, absorbed


@dataclass
class TrajectoryResult:
    times: np.ndarray
    amplitudes: np.ndarray
    absorbed: np.ndarray


@dataclass
class DensitySeries:
    times: np.ndarray
    rho: np.ndarray
    hermiticity_drift: float


def _noise_rows(z: NoisePath, model: RingModel) -> np.ndarray:
    """(n_noise, n_states) view of a single path with a zero RC column."""
    rows = np.zeros((z.values.shape[1], model.n_states), dtype=complex)
    rows[:, : model.n_sites] = z.values.T
    return rows


def sse_rhs(
    t: float,
    a: AmplitudeState,
    model: RingModel,
    kernels: KernelSource,
    z: NoisePath,
) -> np.ndarray:
    """da/dt of the linear trajectory equation at a noise-grid time t."""
    k = z.index_of(t)
    o0, o1 = kernels.tabulate(np.array([t]))
    amps = np.asarray(a.a, dtype=complex)
    zt = np.zeros(model.n_states, dtype=complex)
    zt[: model.n_sites] = z.values[:, k]
    o0 = _pad(o0, model.n_states)[0]
    o1 = _pad(o1, model.n_states)[0]
    hop = hopping_operator(model)
    H = hamiltonian_matrix(model)
    return -1j * (H @ amps) + zt * amps - o0 * amps - 1j * o1 * (hop @ amps)


def sse_rhs_nonlinear(
    t: float,
    a: AmplitudeState,
    shift: np.ndarray,
    model: RingModel,
    kernels: KernelSource,
    z: NoisePath,
) -> np.ndarray:
    """da/dt of the norm-preserving trajectory equation at a noise-grid time t.

    `shift` holds the current noise shift S_j for the antenna sites.
    """
    k = z.index_of(t)
    grid_times = np.array([t])
    o0, o1 = kernels.tabulate(grid_times)
    n = model.n_states
    prop = Propagator(
        model=model,
        grid=TimeGrid(z.step, z.step),
        H=hamiltonian_matrix(model),
        hopping=hopping_operator(model),
        o0=_pad(o0, n),
        o1=_pad(o1, n),
        unraveling=UNRAVELING_NONLINEAR,
        shift_intensity=np.zeros(n),
        shift_decay=np.zeros(n),
    )
    zt = np.zeros((1, n), dtype=complex)
    zt[0, : model.n_sites] = z.values[:, k]
    padded_shift = np.zeros((1, n))
    padded_shift[0, : model.n_sites] = shift
    da, _ = prop.nonlinear_rhs(np.asarray(a.a, dtype=complex)[None, :], padded_shift, zt, 0)
    return da[0]


def step_halving_check(
    propagator: Propagator, refined: Propagator, a0: np.ndarray, *, tolerance: float = SELF_CHECK_TOLERANCE
) -> float:
    """Compare noise-free runs at dt and dt/2 on the common output grid."""
    coarse, _ = propagator.integrate_batch(a0[None, :], None)
    fine, _ = refined.integrate_batch(a0[None, :], None)
    deviation = float(np.max(np.abs(coarse - fine)))
    _LOGGER.debug("Step-halving check: dt=%g, max_deviation=%.3e", propagator.grid.dt, deviation)
    if deviation > tolerance:
        raise IntegratorCheckFailed(deviation, tolerance, propagator.grid.dt)
    return deviation


def integrate_trajectory(
    a0: AmplitudeState,
    model: RingModel,
    kernels: KernelSource,
    z: NoisePath | None,
    grid: TimeGrid,
    *,
    unraveling: str = UNRAVELING_LINEAR,
    shift: tuple[np.ndarray, np.ndarray] | None = None,
    check: bool = False,
) -> TrajectoryResult:
    """Integrate one trajectory; the linear form is unnormalized.

    `z` must live on the half-step grid of `grid`; None integrates
    without noise.
    """
    propagator = Propagator.build(model, kernels, grid, unraveling=unraveling, shift=shift)
    amps0 = np.asarray(a0.a, dtype=complex)
    if check:
        refined = Propagator.build(model, kernels, grid.refined(), unraveling=unraveling, shift=shift)
        step_halving_check(propagator, refined, amps0)
    noise = None
    if z is not None:
        if z.values.shape[1] != grid.n_noise or abs(z.step - grid.noise_step) > 1e-12 * grid.dt:
            raise ValueError(
                f"noise path does not match the grid: points={z.values.shape[1]}, expected={grid.n_noise}"
            )
        noise = _noise_rows(z, model)[:, None, :]
    amps, absorbed = propagator.integrate_batch(amps0[None, :], noise)
    return TrajectoryResult(grid.output_times, amps[0], absorbed[0])


# ── Master equation ──────────────────────────────────────────────────────────


def _master_rhs(
    rho: np.ndarray, H: np.ndarray, hopping: np.ndarray, o0: np.ndarray, o1: np.ndarray
) -> np.ndarray:
    """-i(H rho - rho H^dag) - B rho - rho B^dag + K + K^dag.

    B = diag(O0) + i diag(O1) J_off is sum_j A_j Obar_j, and
    K = sum_j Obar_j rho A_j with Obar_j = O0_j A_j - i O1_j [J_off, A_j].
    """
    occ = np.diag(rho)
    hop_rho = hopping @ rho
    b_rho = o0[:, None] * rho + 1j * o1[:, None] * hop_rho
    gain = -1j * hopping * (o1 * occ)[None, :]
    gain[np.diag_indices_from(gain)] += o0 * occ + 1j * o1 * np.diag(hop_rho)
    coherent = -1j * (H @ rho - rho @ H.conj().T)
    return coherent - b_rho - b_rho.conj().T + gain + gain.conj().T


def master_rhs(t: float, rho: DensityState, model: RingModel, kernels: KernelSource) -> np.ndarray:
    """d rho/dt of the post-Markov master equation with local kernels."""
    o0, o1 = kernels.tabulate(np.array([t]))
    n = model.n_states
    return _master_rhs(
        np.asarray(rho.rho, dtype=complex),
        hamiltonian_matrix(model),
        hopping_operator(model),
        _pad(o0, n)[0],
        _pad(o1, n)[0],
    )


def integrate_master(
    rho0: DensityState, model: RingModel, kernels: KernelSource, grid: TimeGrid
) -> DensitySeries:
    """RK4 on the master equation, symmetrizing rho after every step."""
    n = model.n_states
    H = hamiltonian_matrix(model)
    hopping = hopping_operator(model)
    o0_tab, o1_tab = kernels.tabulate(grid.noise_times)
    o0_tab, o1_tab = _pad(o0_tab, n), _pad(o1_tab, n)
    rho = np.array(rho0.rho, dtype=complex)
    out = np.empty((grid.n_output, n, n), dtype=complex)
    out[0] = rho
    h = grid.dt
    drift = 0.0

    def f(r: np.ndarray, k: int) -> np.ndarray:
        return _master_rhs(r, H, hopping, o0_tab[k], o1_tab[k])

    for step in range(grid.n_steps):
        i0, im, i1 = 2 * step, 2 * step + 1, 2 * step + 2
        k1 = f(rho, i0)
        k2 = f(rho + 0.5 * h * k1, im)
        k3 = f(rho + 0.5 * h * k2, im)
        k4 = f(rho + h * k3, i1)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = max(drift, float(np.max(np.abs(rho - rho.conj().T))))
        rho = 0.5 * (rho + rho.conj().T)
        if (step + 1) % grid.stride == 0:
            if not np.all(np.isfinite(rho)):
                raise NumericalError("non-finite density matrix", time=(step + 1) * h)
            out[(step + 1) // grid.stride] = rho
    if drift > HERMITICITY_WARN:
        _LOGGER.warning("Master equation Hermiticity drift: max_drift=%.3e, dt=%g", drift, h)
    else:
        _LOGGER.debug("Master equation finished: steps=%d, max_drift=%.3e", grid.n_steps, drift)
    return DensitySeries(grid.output_times, out, drift)


def absorbed_deviation(p_t: np.ndarray, absorbed: np.ndarray) -> float:
    """Max |P_T - int 2 kappa pop_RC dt|; logged when above the warning level."""
    deviation = float(np.max(np.abs(p_t - absorbed))) if len(p_t) else 0.0
    if deviation > ABSORBED_WARN:
        _LOGGER.warning("Absorbed-probability cross-check deviates: max_deviation=%.3e", deviation)
    return deviation
