"""Run configuration files.

Plain ``key = value`` lines grouped under section headers; ``#`` and ``;``
start comments. Sections map onto the config dataclasses::

    [run]
    total_iters = 700
    mode = sive

    [control]
    tau_opacity = 0.05

    [init]
    style = iconography

Unknown sections or keys are errors that name the offending line.
"""

from __future__ import annotations

import dataclasses
import re
from pathlib import Path

from hivevec.control import ControlConfig
from hivevec.initialization import InitConfig
from hivevec.optimize import RunConfig
from hivevec.raster import RasterConfig
from hivevec.styles import StyleClass

SECTIONS = {"run": RunConfig, "control": ControlConfig, "init": InitConfig, "raster": RasterConfig}
_NESTED = {"control", "init", "raster"}
_SECTION = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")
_PAIR = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line
        self.key = key


def _fields(section: str) -> dict[str, dataclasses.Field]:
    out = {f.name: f for f in dataclasses.fields(SECTIONS[section])}
    if section == "run":
        for name in _NESTED:
            out.pop(name, None)
    return out


def convert(section: str, key: str, raw: str):
    f = _fields(section)[key]
    kind = str(f.type)
    value = raw.strip()
    optional = "None" in kind
    if optional and value.lower() in ("none", ""):
        return None
    if "StyleClass" in kind:
        return StyleClass.parse(value)
    if kind.startswith("bool"):
        low = value.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if kind.startswith("int"):
        return int(value)
    if kind.startswith("float"):
        return float(value)
    return value


def parse_config_text(text: str) -> dict[str, dict[str, object]]:
    """Parse to ``{section: {key: value}}`` with values already converted."""
    result: dict[str, dict[str, object]] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].split(";", 1)[0].strip()
        if not stripped:
            continue
        m = _SECTION.match(stripped)
        if m:
            section = m.group(1).lower()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno)
            result.setdefault(section, {})
            continue
        m = _PAIR.match(stripped)
        if not m:
            raise ConfigError(f"malformed line {line.strip()!r}; expected key = value", lineno)
        if section is None:
            raise ConfigError("key outside of any [section]", lineno, m.group(1))
        key, raw = m.group(1), m.group(2)
        if key not in _fields(section):
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno, key)
        if key in result[section]:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", lineno, key)
        try:
            result[section][key] = convert(section, key, raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno, key) from None
    return result


def build_config(values: dict[str, dict[str, object]], base: RunConfig | None = None) -> RunConfig:
    """Overlay section values on ``base`` (defaults when omitted)."""
    base = base or RunConfig()
    nested = {}
    for name in _NESTED:
        current = getattr(base, name)
        nested[name] = dataclasses.replace(current, **values.get(name, {}))
    run_values = {f.name: getattr(base, f.name) for f in dataclasses.fields(RunConfig) if f.name not in _NESTED}
    run_values.update(values.get("run", {}))
    return RunConfig(**run_values, **nested)


def read_config(path, base: RunConfig | None = None) -> RunConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return build_config(parse_config_text(text), base)
    except ConfigError as exc:
        err = ConfigError(f"{path}: {exc}")
        err.line, err.key = exc.line, exc.key
        raise err from None
