"""Flat ``key = value`` settings files.

Keys are namespaced ``scenario.*``, ``router.*``, ``engine.*`` and
``sweep.*``; ``#`` starts a comment.  Sizes accept byte suffixes (``1kB``,
``1MiB``; ``Kb``/``Mb`` are read as decimal bytes) and durations accept
``s``/``min``/``m``/``h``.  Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .scenario import ConfigError, RouterKind, RouterParams, ScenarioConfig


class SettingsError(ConfigError):
    def __init__(self, key: str, message: str, line: Optional[int] = None):
        super().__init__(key, message)
        self.line = line

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.key}: {self.detail}"


_NUMBER = r"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"

_BYTE_UNITS = {
    "": 1, "b": 1, "B": 1,
    "k": 10**3, "kB": 10**3, "KB": 10**3, "kb": 10**3, "Kb": 10**3,
    "KiB": 2**10, "kiB": 2**10,
    "M": 10**6, "MB": 10**6, "Mb": 10**6, "mb": 10**6,
    "MiB": 2**20,
    "G": 10**9, "GB": 10**9, "GiB": 2**30,
}
_TIME_UNITS = {"": 1, "s": 1, "sec": 1, "m": 60, "min": 60, "h": 3600, "hr": 3600}


def _split_unit(text: str) -> tuple[float, str]:
    m = re.fullmatch(_NUMBER + r"\s*([A-Za-z/]*)", text.strip())
    if not m:
        raise ValueError(f"not a number: {text!r}")
    return float(m.group(1)), m.group(2)


def parse_bytes(text: str) -> int:
    value, unit = _split_unit(text)
    if unit not in _BYTE_UNITS:
        raise ValueError(f"unknown size unit {unit!r}")
    out = value * _BYTE_UNITS[unit]
    if out != int(out):
        raise ValueError(f"{text!r} is not a whole number of bytes")
    return int(out)


def parse_rate(text: str) -> float:
    text = text.strip()
    if text.endswith("/s"):
        text = text[:-2]
    value, unit = _split_unit(text)
    if unit not in _BYTE_UNITS:
        raise ValueError(f"unknown rate unit {unit!r}")
    return value * _BYTE_UNITS[unit]


def parse_duration(text: str) -> float:
    value, unit = _split_unit(text)
    if unit not in _TIME_UNITS:
        raise ValueError(f"unknown time unit {unit!r}")
    return value * _TIME_UNITS[unit]


def parse_int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def parse_coord(text: str) -> tuple[float, float]:
    parts = [p for p in text.strip().strip("()").split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'x, y', got {text!r}")
    return float(parts[0]), float(parts[1])


def parse_optional_coord(text: str):
    return None if text.strip().lower() in ("auto", "none", "") else parse_coord(text)


def _fmt_num(value) -> str:
    if isinstance(value, float) and value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _fmt_coord(value) -> str:
    if value is None:
        return "auto"
    return f"{_fmt_num(value[0])}, {_fmt_num(value[1])}"


@dataclass(frozen=True)
class _Key:
    target: str  # "config" or "router"
    attr: str
    parse: Callable[[str], Any]
    fmt: Callable[[Any], str] = _fmt_num
    sweepable: bool = True


KEYS: dict[str, _Key] = {
    "scenario.audience_count": _Key("config", "audience_count", parse_int),
    "scenario.artist_position": _Key("config", "artist_position", parse_optional_coord, _fmt_coord, False),
    "scenario.grid_origin": _Key("config", "grid_origin", parse_coord, _fmt_coord, False),
    "scenario.grid_spacing": _Key("config", "grid_spacing", float),
    "scenario.radio_range": _Key("config", "radio_range", float),
    "scenario.link_bandwidth": _Key("config", "link_bandwidth", parse_rate),
    "scenario.message_size": _Key("config", "message_size", parse_bytes),
    "scenario.buffer_capacity": _Key("config", "buffer_capacity", parse_bytes),
    "scenario.message_ttl": _Key("config", "message_ttl", parse_duration),
    "scenario.sim_duration": _Key("config", "sim_duration", parse_duration),
    "engine.step_size": _Key("config", "step_size", parse_duration),
    "engine.generation_interval": _Key("config", "generation_interval", parse_duration),
    "engine.rng_seed": _Key("config", "rng_seed", parse_int),
    "router.kind": _Key("config", "router_kind", lambda s: RouterKind(s.strip().upper()), lambda k: k.value),
    "router.p_init": _Key("router", "p_init", float),
    "router.p_enc_max": _Key("router", "p_enc_max", float),
    "router.i_typ": _Key("router", "i_typ", parse_duration),
    "router.beta": _Key("router", "beta", float),
    "router.gamma": _Key("router", "gamma", float),
    "router.aging_interval": _Key("router", "aging_interval", parse_duration),
    "router.copies_l": _Key("router", "copies_l", parse_int),
    "router.focus_threshold": _Key("router", "focus_threshold", parse_duration),
    "router.timer_offset": _Key("router", "timer_offset", parse_duration),
}

SWEEP_KEYS = ("sweep.axis", "sweep.values", "sweep.seeds", "sweep.output_dir")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    seeds: tuple = (0,)
    output_dir: str = "sweep-out"

    def validate(self) -> "SweepSpec":
        if self.axis not in KEYS or not KEYS[self.axis].sweepable:
            raise SettingsError("sweep.axis", f"{self.axis!r} is not a sweepable key")
        if not self.values:
            raise SettingsError("sweep.values", "at least one value is required")
        if not self.seeds:
            raise SettingsError("sweep.seeds", "at least one seed is required")
        return self


@dataclass
class Settings:
    config: ScenarioConfig
    sweep: dict = field(default_factory=dict)


def split_list(text: str) -> list[str]:
    return [v.strip() for v in text.replace(";", ",").split(",") if v.strip()]


def apply_value(config: ScenarioConfig, key: str, raw: str) -> ScenarioConfig:
    """Return ``config`` with ``key`` set from its textual ``raw`` value."""
    spec = KEYS.get(key)
    if spec is None:
        raise SettingsError(key, "unknown key")
    try:
        value = spec.parse(raw)
    except (ValueError, TypeError) as exc:
        raise SettingsError(key, f"cannot parse {raw!r}: {exc}") from None
    if spec.target == "router":
        return dataclasses.replace(
            config, router_params=dataclasses.replace(config.router_params, **{spec.attr: value})
        )
    return dataclasses.replace(config, **{spec.attr: value})


def load_settings(text: str) -> Settings:
    config = ScenarioConfig()
    seen: dict[str, int] = {}
    sweep: dict[str, str] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SettingsError(line, "expected 'key = value'", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in seen:
            raise SettingsError(key, f"already set on line {seen[key]}", lineno)
        seen[key] = lineno
        if key in SWEEP_KEYS:
            sweep[key.split(".", 1)[1]] = value
            continue
        if key not in KEYS:
            raise SettingsError(key, "unknown key", lineno)
        try:
            config = apply_value(config, key, value)
        except SettingsError as exc:
            exc.line = lineno
            raise
    try:
        config.validate()
    except SettingsError:
        raise
    except ConfigError as exc:
        raise SettingsError(exc.key, exc.detail, seen.get(exc.key)) from None
    return Settings(config, sweep)


def parse_settings(text: str) -> ScenarioConfig:
    """Parse settings text into a validated config; defaults fill the gaps."""
    return load_settings(text).config


def serialize_settings(config: ScenarioConfig) -> str:
    lines = []
    section = None
    for key, spec in KEYS.items():
        ns = key.split(".", 1)[0]
        if ns != section:
            if section is not None:
                lines.append("")
            section = ns
        source = config.router_params if spec.target == "router" else config
        lines.append(f"{key} = {spec.fmt(getattr(source, spec.attr))}")
    return "\n".join(lines) + "\n"


def sweep_from_settings(
    sweep: dict,
    axis: Optional[str] = None,
    values: Optional[list[str]] = None,
    seeds: Optional[list[int]] = None,
    output_dir: Optional[str] = None,
    default_seed: int = 0,
) -> SweepSpec:
    """Merge ``sweep.*`` settings with explicit overrides into a SweepSpec."""
    axis = axis or sweep.get("axis")
    if not axis:
        raise SettingsError("sweep.axis", "no sweep axis given")
    if values is None:
        values = split_list(sweep.get("values", ""))
    if seeds is None:
        raw = sweep.get("seeds")
        try:
            seeds = [parse_int(s) for s in split_list(raw)] if raw else [default_seed]
        except ValueError as exc:
            raise SettingsError("sweep.seeds", str(exc)) from None
    output_dir = output_dir or sweep.get("output_dir") or "sweep-out"
    return SweepSpec(axis, tuple(values), tuple(seeds), output_dir).validate()
