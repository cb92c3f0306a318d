"""Scenario files: TOML loading, presets, overrides and schema validation."""
from __future__ import annotations

import copy
import json
import logging
import re
import tomllib
from collections.abc import Mapping
from importlib import resources
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import CONF_RUN, CONF_VERSION, CONFIG_VERSION, SCENARIO_SCHEMA
from .exceptions import ScenarioError

_LOGGER = logging.getLogger(__name__)

PRESET_PACKAGE = "lh1rc.presets"
_SECTION_RE = re.compile(r"^\s*\[([A-Za-z0-9_.-]+)\]\s*$")


def _line_of(text: str | None, path: list[Any]) -> int | None:
    """1-based line of `section.key` (or of `[section]`) in a TOML document."""
    keys = [str(p) for p in path if not isinstance(p, int)]
    if not text or not keys:
        return None
    section, key = (None, keys[0]) if len(keys) == 1 else (keys[0], keys[1])
    key_re = re.compile(rf"^\s*\"?{re.escape(key)}\"?\s*=")
    current = None
    header = None
    for number, line in enumerate(text.splitlines(), start=1):
        match = _SECTION_RE.match(line)
        if match:
            current = match.group(1)
            if current == (section or key):
                header = number
        elif current == section and key_re.match(line):
            return number
    return header


def validate_config(raw: Mapping[str, Any], *, source: str | None = None, text: str | None = None) -> dict[str, Any]:
    """Apply SCENARIO_SCHEMA; errors name the offending key and, for files, its line."""
    if CONF_VERSION not in raw:
        raise ScenarioError(
            f"missing schema version; add `version = {CONFIG_VERSION}`", path=CONF_VERSION, source=source
        )
    try:
        return SCENARIO_SCHEMA(copy.deepcopy(dict(raw)))
    except vol.MultipleInvalid as err:
        first = err.errors[0]
        key = ".".join(str(p) for p in first.path) or None
        raise ScenarioError(
            first.msg, path=key, line=_line_of(text, list(first.path)), source=source
        ) from err
    except vol.Invalid as err:
        key = ".".join(str(p) for p in err.path) or None
        raise ScenarioError(err.msg, path=key, line=_line_of(text, list(err.path)), source=source) from err


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a TOML scenario, or the `scenario` block of a run manifest (.json)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ScenarioError(f"cannot read config: {err}", source=str(path)) from err
    if path.suffix == ".json":
        try:
            document = json.loads(text)
        except json.JSONDecodeError as err:
            raise ScenarioError(f"invalid JSON: {err.msg}", line=err.lineno, source=str(path)) from err
        raw = document.get("scenario", document)
        text = None
    else:
        try:
            raw = tomllib.loads(text)
        except tomllib.TOMLDecodeError as err:
            line = getattr(err, "lineno", None)
            raise ScenarioError(f"invalid TOML: {err}", line=line, source=str(path)) from err
    config = validate_config(raw, source=str(path), text=text)
    _LOGGER.debug("Loaded scenario: path=%s, name=%s", path, config.get("name"))
    return config


def preset_names() -> list[str]:
    files = resources.files(PRESET_PACKAGE)
    return sorted(p.name.removesuffix(".toml") for p in files.iterdir() if p.name.endswith(".toml"))


def load_preset(name: str) -> dict[str, Any]:
    """Load one of the bundled scenarios by name."""
    resource = resources.files(PRESET_PACKAGE) / f"{name}.toml"
    if not resource.is_file():
        raise ScenarioError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    text = resource.read_text(encoding="utf-8")
    return validate_config(tomllib.loads(text), source=f"preset:{name}", text=text)


def apply_overrides(config: Mapping[str, Any], section: str = CONF_RUN, **values: Any) -> dict[str, Any]:
    """Copy of `config` with non-None values merged into `section`, revalidated."""
    updated = copy.deepcopy(dict(config))
    changes = {k: v for k, v in values.items() if v is not None}
    if not changes:
        return updated
    updated.setdefault(section, {}).update(changes)
    _LOGGER.debug("Config overrides: section=%s, values=%s", section, changes)
    return validate_config(updated)


def resolve_config(*, config_path: str | Path | None = None, preset: str | None = None) -> dict[str, Any]:
    if config_path is not None and preset is not None:
        raise ScenarioError("pass either --config or --preset, not both")
    if config_path is not None:
        return load_config(config_path)
    if preset is not None:
        return load_preset(preset)
    raise ScenarioError("no scenario given; pass --config FILE or --preset NAME")
