"""Run-configuration files: parsing, rendering, and the run-level extras.

The format is one ``key = value`` assignment per line with ``#`` comments.
Rates are angular frequencies; in ``physical`` mode every rate must carry a
unit (``MHz``, converted as 2*pi*value to rad/us, or ``rad/us`` verbatim)
and every time must carry ``us``.  In ``dimensionless`` mode all values are
bare numbers in units of the rate scale.  Complex weights are written as
``[re, im]`` pairs; an infinite pulse is spelled ``inf``.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass

from .model import PulseSpec, SystemConfig

RATE_FIELDS = (
    "tau",
    "omega_sigma",
    "omega_a",
    "omega_b",
    "omega_d",
    "rabi",
    "gamma_sigma",
    "gamma_a",
    "gamma_b",
    "gamma_phi",
)
TIME_FIELDS = ("t0",)
COMPLEX_FIELDS = ("eta_sigma", "eta_a", "eta_b")
INT_FIELDS = ("n_max",)
FLOAT_FIELDS = ("rtol", "atol")
WORD_FIELDS = ("unit_mode",)

CONFIG_FIELDS = (
    WORD_FIELDS + RATE_FIELDS + COMPLEX_FIELDS + TIME_FIELDS + INT_FIELDS + FLOAT_FIELDS
)

# Keys consumed by the CLI layer rather than SystemConfig.
RUN_FIELDS = (
    "horizon",
    "samples",
    "frame",
    "dephasing_reservoir",
    "rabi_values",
    "tau_values",
    "delta_values",
    "deviation_channel",
    "rabi_bracket",
)

_DIMENSIONLESS_DEFAULTS = {
    "tau": 1.0,
    "omega_sigma": 500.0,
    "omega_a": 500.0,
    "omega_b": 500.0,
    "omega_d": 500.0,
    "rabi": 0.0,
    "gamma_sigma": 0.0,
    "gamma_a": 0.0,
    "gamma_b": 0.0,
    "gamma_phi": 0.0,
}

_PHYSICAL_REQUIRED = ("tau", "omega_sigma", "omega_a", "omega_b", "omega_d")

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_NUMBER_RE = re.compile(rf"^{_NUMBER}$")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration text."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


def _tokenize(text: str):
    """Yield (key, value, line_number) for every assignment in the text."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"empty key or value in {raw.strip()!r}", lineno)
        yield key, value, lineno


def _split_unit(value: str):
    """Separate a trailing unit token from a numeric or list body."""
    for unit in ("rad/us", "MHz", "us"):
        if value.endswith(unit):
            return value[: -len(unit)].strip(), unit
    return value, None


def _parse_number(body: str, lineno: int) -> float:
    if body == "inf":
        return math.inf
    if not _NUMBER_RE.match(body):
        raise ConfigError(f"not a number: {body!r}", lineno)
    return float(body)


def _parse_list(body: str, lineno: int) -> list[float]:
    if not (body.startswith("[") and body.endswith("]")):
        raise ConfigError(f"expected a [..] list, got {body!r}", lineno)
    inner = body[1:-1].strip()
    if not inner:
        return []
    return [_parse_number(item.strip(), lineno) for item in inner.split(",")]


def _rate_to_internal(value: float, unit: str | None, mode: str, key: str, lineno: int) -> float:
    if mode == "dimensionless":
        if unit is not None:
            raise ConfigError(f"{key}: units are not allowed in dimensionless mode", lineno)
        return value
    if unit is None:
        raise ConfigError(f"{key}: physical mode requires a unit (MHz or rad/us)", lineno)
    if unit == "MHz":
        return 2.0 * math.pi * value
    if unit == "rad/us":
        return value
    raise ConfigError(f"{key}: {unit} is not a rate unit", lineno)


def _time_to_internal(value: float, unit: str | None, mode: str, key: str, lineno: int) -> float:
    if mode == "dimensionless":
        if unit is not None:
            raise ConfigError(f"{key}: units are not allowed in dimensionless mode", lineno)
        return value
    if math.isinf(value):
        return value
    if unit != "us":
        raise ConfigError(f"{key}: physical mode requires times in us", lineno)
    return value


def _collect(text: str, allowed: tuple[str, ...]):
    seen: dict[str, tuple[str, int]] = {}
    for key, value, lineno in _tokenize(text):
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        seen[key] = (value, lineno)
    return seen


def _build_config(entries: dict[str, tuple[str, int]]) -> SystemConfig:
    mode = "dimensionless"
    if "unit_mode" in entries:
        raw, lineno = entries["unit_mode"]
        if raw not in ("dimensionless", "physical"):
            raise ConfigError(f"unit_mode must be dimensionless or physical, got {raw!r}", lineno)
        mode = raw

    if mode == "physical":
        missing = [k for k in _PHYSICAL_REQUIRED if k not in entries]
        if missing:
            raise ConfigError(f"physical mode requires explicit {', '.join(missing)}")

    values: dict[str, object] = {"unit_mode": mode}
    for key in RATE_FIELDS:
        if key in entries:
            raw, lineno = entries[key]
            body, unit = _split_unit(raw)
            values[key] = _rate_to_internal(_parse_number(body, lineno), unit, mode, key, lineno)
        elif mode == "dimensionless":
            values[key] = _DIMENSIONLESS_DEFAULTS[key]
        else:
            values[key] = 0.0  # optional rates (rabi, gammas) default to zero
    for key in TIME_FIELDS:
        if key in entries:
            raw, lineno = entries[key]
            body, unit = _split_unit(raw)
            values[key] = _time_to_internal(_parse_number(body, lineno), unit, mode, key, lineno)
        else:
            values[key] = math.inf
    for key in COMPLEX_FIELDS:
        if key in entries:
            raw, lineno = entries[key]
            if raw.startswith("["):
                pair = _parse_list(raw, lineno)
                if len(pair) != 2:
                    raise ConfigError(f"{key}: complex weights are [re, im] pairs", lineno)
                values[key] = complex(pair[0], pair[1])
            else:
                values[key] = complex(_parse_number(raw, lineno), 0.0)
    values.setdefault("eta_sigma", 2 + 0j)
    values.setdefault("eta_a", -1 + 0j)
    values.setdefault("eta_b", -1 + 0j)
    for key, default in (("n_max", 2), ("rtol", 1e-8), ("atol", 1e-10)):
        if key in entries:
            raw, lineno = entries[key]
            num = _parse_number(raw, lineno)
            values[key] = int(num) if key == "n_max" else num
        else:
            values[key] = default

    drive = PulseSpec(omega_d=values.pop("omega_d"), rabi=values.pop("rabi"), t0=values.pop("t0"))
    try:
        return SystemConfig(drive=drive, **values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text: str) -> SystemConfig:
    """Parse configuration text into a :class:`SystemConfig`.

    Unknown keys are rejected with their line number; omitted fields take
    the documented defaults (dimensionless mode only, apart from the always
    optional rates).
    """
    return _build_config(_collect(text, CONFIG_FIELDS))


def _format_float(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def render_config(cfg: SystemConfig) -> str:
    """Render a config as text that parses back to an equal SystemConfig."""
    physical = cfg.unit_mode == "physical"
    rate_suffix = " rad/us" if physical else ""
    time_suffix = " us" if physical else ""
    pairs = [("unit_mode", cfg.unit_mode)]
    for key in RATE_FIELDS:
        value = cfg.drive.omega_d if key == "omega_d" else (
            cfg.drive.rabi if key == "rabi" else getattr(cfg, key)
        )
        pairs.append((key, _format_float(value) + rate_suffix))
    for key in COMPLEX_FIELDS:
        z = getattr(cfg, key)
        pairs.append((key, f"[{_format_float(z.real)}, {_format_float(z.imag)}]"))
    t0 = cfg.drive.t0
    pairs.append(("t0", "inf" if math.isinf(t0) else _format_float(t0) + time_suffix))
    pairs.append(("n_max", str(cfg.n_max)))
    pairs.append(("rtol", repr(cfg.rtol)))
    pairs.append(("atol", repr(cfg.atol)))
    return "\n".join(f"{k} = {v}" for k, v in pairs) + "\n"


def config_sha256(cfg: SystemConfig) -> str:
    return hashlib.sha256(render_config(cfg).encode()).hexdigest()


@dataclass
class RunSpec:
    """A parsed run file: the system config plus CLI-level extras."""

    config: SystemConfig
    horizon: float | None = None
    samples: int | None = None
    frame: str | None = None
    dephasing_reservoir: bool = False
    rabi_values: list[float] | None = None
    tau_values: list[float] | None = None
    delta_values: list[float] | None = None
    deviation_channel: str | None = None
    rabi_bracket: tuple[float, float] | None = None


def load_run(text: str) -> RunSpec:
    """Parse a run file: SystemConfig fields plus sweep/run keys."""
    entries = _collect(text, CONFIG_FIELDS + RUN_FIELDS)
    run_entries = {k: entries.pop(k) for k in list(entries) if k in RUN_FIELDS}
    cfg = _build_config(entries)
    spec = RunSpec(config=cfg)
    mode = cfg.unit_mode

    def rate_list(raw: str, lineno: int, key: str) -> list[float]:
        body, unit = _split_unit(raw)
        return [
            _rate_to_internal(v, unit, mode, key, lineno)
            for v in _parse_list(body, lineno)
        ]

    for key, (raw, lineno) in run_entries.items():
        if key == "horizon":
            body, unit = _split_unit(raw)
            spec.horizon = _time_to_internal(_parse_number(body, lineno), unit, mode, key, lineno)
        elif key == "samples":
            spec.samples = int(_parse_number(raw, lineno))
        elif key == "frame":
            if raw not in ("lab", "rotating_at_drive", "rotating"):
                raise ConfigError("frame must be lab or rotating_at_drive", lineno)
            spec.frame = "rotating_at_drive" if raw.startswith("rot") else "lab"
        elif key == "dephasing_reservoir":
            if raw not in ("true", "false"):
                raise ConfigError("dephasing_reservoir must be true or false", lineno)
            spec.dephasing_reservoir = raw == "true"
        elif key in ("rabi_values", "tau_values"):
            setattr(spec, key, rate_list(raw, lineno, key))
        elif key == "delta_values":
            spec.delta_values = _parse_list(raw, lineno)
        elif key == "deviation_channel":
            if raw not in ("qubit", "resonator", "magnon"):
                raise ConfigError("deviation_channel must be qubit, resonator or magnon", lineno)
            spec.deviation_channel = raw
        elif key == "rabi_bracket":
            pair = rate_list(raw, lineno, key)
            if len(pair) != 2:
                raise ConfigError("rabi_bracket needs exactly two values", lineno)
            spec.rabi_bracket = (pair[0], pair[1])
    return spec
