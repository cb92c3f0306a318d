"""Single-excitation transport in an LH1-RC ring with non-Markovian dephasing."""
from __future__ import annotations

import logging

__version__ = "0.4.0"

_LOGGER = logging.getLogger(__name__)

# matplotlib is chatty at DEBUG; it follows the package level only when asked.
_LIBRARY_LOGGER = logging.getLogger("matplotlib")


def sync_library_logger(include_matplotlib: bool = False) -> None:
    """Match the plotting library's logger level to the package logger."""
    log_level = _LOGGER.getEffectiveLevel()
    _LIBRARY_LOGGER.setLevel(log_level if include_matplotlib else max(log_level, logging.INFO))
    _LOGGER.debug("Library logger level set to %s", logging.getLevelName(_LIBRARY_LOGGER.level))


from .engine import Scenario, run_ensemble, run_master
from .exceptions import Lh1rcError

__all__ = ["Lh1rcError", "Scenario", "__version__", "run_ensemble", "run_master", "sync_library_logger"]
