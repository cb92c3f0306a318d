"""Shared fixtures for the lh1rc unit tests.

The package is imported from the repository root so the suite runs
from a plain checkout without installation.
"""
from __future__ import annotations

import copy
import sys
from pathlib import Path

import numpy as np
import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent

# ── Import setup ─────────────────────────────────────────────────────────────

if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from lh1rc.bath import BathSpec  # noqa: E402
from lh1rc.config import validate_config  # noqa: E402
from lh1rc.engine import Scenario  # noqa: E402
from lh1rc.models import TimeGrid  # noqa: E402
from lh1rc.ring import RingModel, build_ring  # noqa: E402


# ── Fixtures ─────────────────────────────────────────────────────────────────


@pytest.fixture
def closed_ring() -> RingModel:
    """Uniform 32-site ring with a resonant reaction center."""
    return build_ring({"M": 32, "rc_coupling": 0.5, "kappa": 1.0})


@pytest.fixture
def rabi_dimer() -> RingModel:
    """Two degenerate sites, J12 = 1, no reaction center."""
    return RingModel(
        n_sites=2,
        d0=0.2,
        omega=np.zeros(2),
        hopping=np.array([[0.0, 1.0], [1.0, 0.0]]),
        rc_coupling=np.zeros(2),
        kappa=0.0,
        rc_enabled=False,
    )


@pytest.fixture
def quiet_bath():
    def _make(n_sites: int) -> BathSpec:
        return BathSpec.uniform(n_sites, 0.0, 100.0)

    return _make


@pytest.fixture
def small_grid() -> TimeGrid:
    return TimeGrid(dt=1e-3, t_max=0.2, stride=10)


@pytest.fixture
def dimer_config() -> dict:
    """Weakly coupled, fast-bath dimer where SSE and master agree within errors."""
    return validate_config(
        {
            "version": 1,
            "name": "weak-dimer",
            "model": {"M": 2, "rc_enabled": False, "omega": 0.0, "hopping": [[0.0, 1.0], [1.0, 0.0]]},
            "bath": {"g": 0.02, "gamma": 50.0},
            "initial": {"state": "site", "site": 1},
            "run": {"dt": 2e-3, "t_max": 2.0, "stride": 10, "trajectories": 400, "seed": 3},
        }
    )


@pytest.fixture
def ring_config() -> dict:
    """Four-site ring with sink and a fast bath; short horizon."""
    return validate_config(
        {
            "version": 1,
            "name": "small-ring",
            "model": {"M": 4, "rc_coupling": 0.5, "kappa": 1.0},
            "bath": {"g": 0.2, "gamma": 50.0},
            "initial": {"state": "site", "site": 1},
            "run": {"dt": 2e-3, "t_max": 1.0, "stride": 10, "trajectories": 40, "seed": 11},
        }
    )


@pytest.fixture
def make_scenario():
    """Build a Scenario from a config with per-section overrides."""

    def _make(config: dict, **sections: dict) -> Scenario:
        merged = copy.deepcopy(config)
        for section, values in sections.items():
            merged.setdefault(section, {}).update(values)
        return Scenario.from_config(validate_config(merged))

    return _make
