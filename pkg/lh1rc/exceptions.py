"""Exceptions raised by the lh1rc simulator."""
from __future__ import annotations


class Lh1rcError(Exception):
    """Base class for simulator errors."""


class ScenarioError(Lh1rcError, ValueError):
    """Scenario file could not be parsed or failed validation."""

    def __init__(
        self,
        message: str,
        *,
        path: str | None = None,
        line: int | None = None,
        source: str | None = None,
    ) -> None:
        self.path = path
        self.line = line
        self.source = source
        where = ""
        if path:
            where = f" (key={path}"
            where += f", line={line})" if line is not None else ")"
        elif line is not None:
            where = f" (line={line})"
        prefix = f"{source}: " if source else ""
        super().__init__(f"{prefix}{message}{where}")


class NoiseError(Lh1rcError, ValueError):
    """Noise generator parameters or estimator inputs are invalid."""


class NumericalError(Lh1rcError):
    """Integration produced a non-finite state."""

    def __init__(self, message: str, *, trajectory: int | None = None, time: float | None = None) -> None:
        self.trajectory = trajectory
        self.time = time
        super().__init__(f"{message} (trajectory={trajectory}, t={time})")


class IntegratorCheckFailed(NumericalError):
    """Step-halving self-check exceeded its tolerance."""

    def __init__(self, deviation: float, tolerance: float, dt: float) -> None:
        self.deviation = deviation
        self.tolerance = tolerance
        self.dt = dt
        Lh1rcError.__init__(
            self,
            f"Step-halving check failed: max_deviation={deviation:.3e}, "
            f"tolerance={tolerance:.1e}, dt={dt:g}; reduce dt",
        )
        self.trajectory = 0
        self.time = None


class SchemaError(Lh1rcError, ValueError):
    """Observables CSV is empty or has an unknown schema version."""
