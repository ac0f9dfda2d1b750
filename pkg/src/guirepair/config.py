"""INI configuration shared by the CLI and the service.

Every knob has a default; a config file only overrides what it names.
Unknown sections or keys are rejected so a typo cannot silently fall back
to a default.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace

from .calibrate import MappingProtocol
from .detect import Thresholds
from .fix import MODE_LITERAL, MODE_LUMINANCE
from .rgcn import TrainConfig
from .spectral import SignalConfig
from .synth import SynthConfig


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    max_iterations: int = 500
    recolor_mode: str = MODE_LUMINANCE


@dataclass
class AppConfig:
    run: RunConfig = field(default_factory=RunConfig)
    thresholds: Thresholds = field(default_factory=Thresholds)
    signal: SignalConfig = field(default_factory=SignalConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    calibrate: MappingProtocol = field(default_factory=MappingProtocol)
    synth: SynthConfig = field(default_factory=SynthConfig)


_SECTIONS = {
    "run": RunConfig,
    "thresholds": Thresholds,
    "signal": SignalConfig,
    "train": TrainConfig,
    "calibrate": MappingProtocol,
    "synth": SynthConfig,
}

# Keys that are not plain numbers/strings and need special parsing, or are
# nested configs that the INI file cannot express.
_SKIP_KEYS = {
    "calibrate": {"signal"},
}
_TUPLE_KEYS = {"synth": {"background"}}


def _coerce(raw: str, target_type, section: str, key: str):
    try:
        if target_type is bool:
            lowered = raw.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
        if target_type is str:
            return raw.strip()
        raise ValueError(f"unsupported type {target_type}")
    except ValueError:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from None


def load_config(path=None) -> AppConfig:
    cfg = AppConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"bad config syntax: {exc}") from None

    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        target = getattr(cfg, section)
        known = {f.name for f in fields(target)}
        skip = _SKIP_KEYS.get(section, set())
        overrides = {}
        for key, raw in parser.items(section):
            if key in skip or key not in known:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            if key in _TUPLE_KEYS.get(section, set()):
                parts = [p.strip() for p in raw.split(",")]
                if len(parts) != 3:
                    raise ConfigError(f"bad value for [{section}] {key}: {raw!r}")
                overrides[key] = tuple(_coerce(p, int, section, key) for p in parts)
            else:
                overrides[key] = _coerce(raw, _field_type(target, key), section, key)
        setattr(cfg, section, replace(target, **overrides))
    if cfg.run.recolor_mode not in (MODE_LUMINANCE, MODE_LITERAL):
        raise ConfigError(f"bad value for [run] recolor_mode: {cfg.run.recolor_mode!r}")
    # keep the calibrate sweep's signal settings in lockstep with [signal]
    cfg.calibrate = MappingProtocol(
        k=cfg.calibrate.k,
        seed=cfg.calibrate.seed,
        signal=cfg.signal,
        max_iterations=cfg.calibrate.max_iterations,
    )
    return cfg


def _field_type(obj, key):
    import typing

    hints = typing.get_type_hints(type(obj))
    t = hints[key]
    origin = typing.get_origin(t)
    if origin is typing.Union:
        args = [a for a in typing.get_args(t) if a is not type(None)]
        t = args[0]
        origin = typing.get_origin(t)
    if origin is not None:
        t = origin
    return t


def dump_config(cfg: AppConfig) -> str:
    """Render the effective configuration back out as INI text."""
    parser = configparser.ConfigParser()
    for section, _ in _SECTIONS.items():
        target = getattr(cfg, section)
        skip = _SKIP_KEYS.get(section, set())
        parser[section] = {}
        for f in fields(target):
            if f.name in skip:
                continue
            value = getattr(target, f.name)
            if isinstance(value, tuple):
                parser[section][f.name] = ", ".join(str(v) for v in value)
            else:
                parser[section][f.name] = str(value)
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
