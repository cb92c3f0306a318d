"""Ring Hamiltonian in the site basis and its momentum-space transforms.

Sites 0..M-1 are the antenna molecules, index M (when enabled) is the
reaction center. Energies and rates are in units of J.
"""
from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np

from .const import (
    CONF_DISORDER_SEED,
    CONF_HOPPING,
    CONF_HOPPING_DISTANCE,
    CONF_HOPPING_STRENGTH,
    CONF_KAPPA,
    CONF_OMEGA,
    CONF_OMEGA0,
    CONF_OMEGA_RC,
    CONF_RC_COUPLING,
    CONF_RC_ENABLED,
    CONF_SITES,
    CONF_SPACING,
    DEFAULT_KAPPA,
    DEFAULT_RC_COUPLING,
    DEFAULT_SPACING,
    DISTANCE_LINEAR,
    DISTANCE_PERIODIC,
    HOPPING_NEAREST,
    HOPPING_NONE,
    HOPPING_SMOOTH,
    OMEGA_DISORDER,
    OMEGA_UNIFORM,
)

_LOGGER = logging.getLogger(__name__)


def _frozen(values: Any, dtype: type = float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RingModel:
    """Parameters of the single-excitation ring Hamiltonian."""

    n_sites: int
    d0: float
    omega: np.ndarray
    hopping: np.ndarray
    rc_coupling: np.ndarray
    omega_rc: float = 0.0
    kappa: float = DEFAULT_KAPPA
    rc_enabled: bool = True

    def __post_init__(self) -> None:
        M = self.n_sites
        if M < 1:
            raise ValueError(f"ring needs at least one antenna site: M={M}")
        if self.d0 <= 0:
            raise ValueError(f"spacing must be positive: d0={self.d0}")
        omega = _frozen(self.omega)
        hopping = _frozen(self.hopping)
        coupling = _frozen(self.rc_coupling)
        if omega.shape != (M,):
            raise ValueError(f"omega has shape {omega.shape}, expected ({M},)")
        if hopping.shape != (M, M):
            raise ValueError(f"hopping has shape {hopping.shape}, expected ({M}, {M})")
        if coupling.shape != (M,):
            raise ValueError(f"rc_coupling has shape {coupling.shape}, expected ({M},)")
        if not np.array_equal(hopping, hopping.T):
            raise ValueError("hopping matrix must be exactly symmetric")
        if self.kappa < 0:
            raise ValueError(f"sink rate must be non-negative: kappa={self.kappa}")
        if not self.rc_enabled and (np.any(coupling) or self.kappa):
            raise ValueError("rc_coupling and kappa must be zero when the reaction center is disabled")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "hopping", hopping)
        object.__setattr__(self, "rc_coupling", coupling)

    @property
    def n_states(self) -> int:
        return self.n_sites + 1 if self.rc_enabled else self.n_sites

    @property
    def rc_index(self) -> int | None:
        return self.n_sites if self.rc_enabled else None


@dataclass(frozen=True)
class MomentumSpectrum:
    """Momentum amplitudes A_q of the antenna block."""

    amplitudes: np.ndarray

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Discrete momenta q_m = 2*pi*m/(d0*M), m = 1..M, of a periodic ring.

    Array position M-1 holds m = M, the q = 0 representative.
    """

    n_sites: int
    d0: float

    @classmethod
    def for_ring(cls, model: RingModel) -> MomentumGrid:
        return cls(model.n_sites, model.d0)

    @property
    def zero_index(self) -> int:
        return self.n_sites - 1

    @cached_property
    def q(self) -> np.ndarray:
        m = np.arange(1, self.n_sites + 1)
        return 2 * np.pi * m / (self.d0 * self.n_sites)

    @cached_property
    def r(self) -> np.ndarray:
        return self.d0 * np.arange(1, self.n_sites + 1)

    @cached_property
    def phases(self) -> np.ndarray:
        """Unitary matrix F[m, j] = exp(-i q_m r_j) / sqrt(M)."""
        M = self.n_sites
        idx = np.arange(1, M + 1)
        # q_m r_j = 2 pi m j / M; reduce the integer product first
        turns = np.outer(idx, idx) % M
        mat = np.exp(-2j * np.pi * turns / M) / np.sqrt(M)
        mat.setflags(write=False)
        return mat

    def delta_error(self) -> float:
        """Max deviation of (1/M) sum_j exp(i(q_m - q_n) r_j) from the identity."""
        gram = self.phases.conj() @ self.phases.T
        return float(np.max(np.abs(gram - np.eye(self.n_sites))))


def hopping_matrix(M: int, d0: float, *, distance: str = DISTANCE_PERIODIC) -> np.ndarray:
    """Smooth hopping J_pj = 1/(dist(p, j) * d0) with zero diagonal."""
    if d0 <= 0:
        raise ValueError(f"spacing must be positive: d0={d0}")
    if M < 1:
        raise ValueError(f"ring needs at least one antenna site: M={M}")
    idx = np.arange(M)
    dist = np.abs(idx[:, None] - idx[None, :])
    if distance == DISTANCE_PERIODIC:
        dist = np.minimum(dist, M - dist)
    elif distance != DISTANCE_LINEAR:
        raise ValueError(f"unknown hopping distance: {distance}")
    out = np.zeros((M, M))
    np.divide(1.0, dist * d0, out=out, where=dist > 0)
    return out


def nearest_neighbour_hopping(M: int, strength: float, *, distance: str = DISTANCE_PERIODIC) -> np.ndarray:
    idx = np.arange(M)
    dist = np.abs(idx[:, None] - idx[None, :])
    if distance == DISTANCE_PERIODIC:
        dist = np.minimum(dist, M - dist)
    return np.where(dist == 1, strength, 0.0)


def resonant_rc_energy(omega: np.ndarray, hopping: np.ndarray) -> float:
    """Energy of the symmetric antenna mode, <s|H_antenna|s>."""
    M = len(omega)
    return float(np.mean(omega) + np.sum(hopping) / M)


def momentum_energies(model: RingModel) -> np.ndarray:
    """Diagonal of the antenna Hamiltonian in the momentum basis, indexed like MomentumGrid."""
    F = MomentumGrid.for_ring(model).phases
    block = model.hopping + np.diag(model.omega)
    return np.real(np.einsum("mj,jk,mk->m", F, block, F.conj()))


def _site_values(raw: Any, M: int, name: str) -> np.ndarray:
    if isinstance(raw, (int, float)):
        return np.full(M, float(raw))
    values = np.asarray(raw, dtype=float)
    if values.shape != (M,):
        raise ValueError(f"{name} has {values.size} entries, expected {M}")
    return values


def build_ring(config: Mapping[str, Any]) -> RingModel:
    """Assemble a RingModel from a validated [model] section."""
    M = int(config[CONF_SITES])
    d0 = float(config.get(CONF_SPACING, DEFAULT_SPACING))
    distance = config.get(CONF_HOPPING_DISTANCE, DISTANCE_PERIODIC)

    raw_omega = config.get(CONF_OMEGA, OMEGA_UNIFORM)
    omega0 = float(config.get(CONF_OMEGA0, 0.0))
    if raw_omega == OMEGA_UNIFORM:
        omega = np.full(M, omega0)
    elif raw_omega == OMEGA_DISORDER:
        rng = np.random.default_rng(int(config.get(CONF_DISORDER_SEED, 0)))
        omega = omega0 * rng.random(M)
    else:
        omega = _site_values(raw_omega, M, CONF_OMEGA)

    raw_hopping = config.get(CONF_HOPPING, HOPPING_SMOOTH)
    if raw_hopping == HOPPING_SMOOTH:
        hopping = hopping_matrix(M, d0, distance=distance)
    elif raw_hopping == HOPPING_NEAREST:
        hopping = nearest_neighbour_hopping(
            M, float(config.get(CONF_HOPPING_STRENGTH, 1.0)), distance=distance
        )
    elif raw_hopping == HOPPING_NONE:
        hopping = np.zeros((M, M))
    else:
        hopping = np.asarray(raw_hopping, dtype=float)
        if hopping.shape != (M, M):
            raise ValueError(f"hopping has shape {hopping.shape}, expected ({M}, {M})")

    rc_enabled = bool(config.get(CONF_RC_ENABLED, True))
    if rc_enabled:
        coupling = _site_values(config.get(CONF_RC_COUPLING, DEFAULT_RC_COUPLING), M, CONF_RC_COUPLING)
        kappa = float(config.get(CONF_KAPPA, DEFAULT_KAPPA))
        omega_rc = config.get(CONF_OMEGA_RC)
        if omega_rc is None:
            omega_rc = resonant_rc_energy(omega, hopping)
    else:
        coupling, kappa, omega_rc = np.zeros(M), 0.0, 0.0

    model = RingModel(
        n_sites=M,
        d0=d0,
        omega=omega,
        hopping=hopping,
        rc_coupling=coupling,
        omega_rc=float(omega_rc),
        kappa=kappa,
        rc_enabled=rc_enabled,
    )
    _LOGGER.debug(
        "Built ring: M=%d, d0=%g, omega=%s, hopping=%s, rc_enabled=%s, omega_rc=%.4g, kappa=%g",
        M,
        d0,
        raw_omega if isinstance(raw_omega, str) else "explicit",
        raw_hopping if isinstance(raw_hopping, str) else "explicit",
        rc_enabled,
        model.omega_rc,
        kappa,
    )
    return model


def hamiltonian_matrix(model: RingModel) -> np.ndarray:
    """Site-basis generator H, with the sink as -i*kappa on the RC diagonal."""
    M = model.n_sites
    H = np.zeros((model.n_states, model.n_states), dtype=complex)
    H[:M, :M] = model.hopping + np.diag(model.omega)
    if model.rc_enabled:
        H[:M, M] = model.rc_coupling
        H[M, :M] = model.rc_coupling
        H[M, M] = model.omega_rc - 1j * model.kappa
    return H


def hopping_operator(model: RingModel) -> np.ndarray:
    """Antenna off-diagonal hopping embedded in the full state space."""
    M = model.n_sites
    out = np.zeros((model.n_states, model.n_states))
    out[:M, :M] = model.hopping - np.diag(np.diag(model.hopping))
    return out


def _check_length(values: np.ndarray, grid: MomentumGrid, name: str) -> None:
    if values.shape[-1] != grid.n_sites:
        raise ValueError(f"{name} has length {values.shape[-1]}, grid has M={grid.n_sites}")


def to_momentum(a: np.ndarray, grid: MomentumGrid) -> MomentumSpectrum:
    """A_q = (1/sqrt(M)) sum_j exp(-i q r_j) a_j; accepts a leading batch axis."""
    a = np.asarray(a, dtype=complex)
    _check_length(a, grid, "amplitudes")
    return MomentumSpectrum(a @ grid.phases.T)


def from_momentum(spectrum: MomentumSpectrum | np.ndarray, grid: MomentumGrid) -> np.ndarray:
    A = spectrum.amplitudes if isinstance(spectrum, MomentumSpectrum) else np.asarray(spectrum, dtype=complex)
    _check_length(A, grid, "momentum amplitudes")
    return A @ grid.phases.conj()


def coupling_spectrum(gamma: np.ndarray, grid: MomentumGrid) -> np.ndarray:
    """Gamma_q = (1/M) sum_j Gamma_j exp(-i q r_j)."""
    gamma = np.asarray(gamma, dtype=float)
    _check_length(gamma, grid, "rc_coupling")
    return (grid.phases @ gamma) / np.sqrt(grid.n_sites)
