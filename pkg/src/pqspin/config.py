"""INI run configuration.

Sections and keys (all optional; values in SI units, lists comma-separated)::

    [sequence]     tau1 tau2 tau3 gap larmor_frequency duty_factor kappa_rate strobe_multiplier
    [decoherence]  transverse_rate depumping_per_kappa2 dark_rate
    [ensemble]     atom_count spin_per_atom polarization thermal_factor
    [run]          n_traj seed n_batches max_substeps scheme
    [calibration]  enabled target_tau1 target_db
    [sweep]        tau1_list tau3_list
    [compare]      total_list split_rule
    [oracle]       kappa_values n_traj mean_pairs half_width points
    [bae]          duration kappa2_total n_traj max_slice_angle window_model

An empty or missing file resolves to the defaults below.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigurationError, ParameterError
from .experiment.config import DecoherenceConfig, SequenceConfig
from .gaussian import EnsembleConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    n_traj: int = 100_000
    seed: int = 0
    n_batches: int = 10
    max_substeps: int = 64
    scheme: str = "auto"  # auto | two | three

    def __post_init__(self):
        if self.scheme not in ("auto", "two", "three"):
            raise ConfigurationError("scheme must be auto, two or three", "scheme")
        if self.n_batches < 2:
            raise ConfigurationError("n_batches must be at least 2", "n_batches")
        if self.max_substeps < 1:
            raise ConfigurationError("max_substeps must be positive", "max_substeps")


@dataclass(frozen=True)
class CalibrationConfig:
    enabled: bool = False
    target_tau1: float = 1.23e-3
    target_db: float = 2.3


@dataclass(frozen=True)
class SweepConfig:
    tau1_list: tuple = tuple(round(0.2e-3 * i, 12) for i in range(1, 11))
    tau3_list: tuple = (0.0,) + tuple(round(0.2e-3 * i, 12) for i in range(1, 11))

    def __post_init__(self):
        for name in ("tau1_list", "tau3_list"):
            values = getattr(self, name)
            if not values:
                raise ConfigurationError("list must not be empty", name)
            if any(v < 0 for v in values):
                raise ConfigurationError("durations must be non-negative", name)


@dataclass(frozen=True)
class CompareConfig:
    total_list: tuple = tuple(round(0.25e-3 * i, 12) for i in range(1, 13))
    split_rule: str = "optimal"

    def __post_init__(self):
        if not self.total_list or any(v < 0 for v in self.total_list):
            raise ConfigurationError("total_list must be non-empty and non-negative", "total_list")
        if self.split_rule != "optimal":
            try:
                frac = float(self.split_rule)
            except ValueError:
                raise ConfigurationError("split_rule must be 'optimal' or a fraction", "split_rule") from None
            if not 0 < frac < 1:
                raise ConfigurationError("split_rule fraction must lie in (0, 1)", "split_rule")


@dataclass(frozen=True)
class OracleConfig:
    kappa_values: tuple = (0.0, 0.5, 1.0, 2.0)
    n_traj: int = 1_000_000
    mean_pairs: int = 5
    half_width: float = 8.0
    points: int = 2001


@dataclass(frozen=True)
class BAEConfig:
    duration: float = 0.2e-3
    kappa2_total: float = 2.0
    n_traj: int = 2000
    max_slice_angle: float = math.pi / 64
    window_model: str = "discrete"  # discrete | sliced

    def __post_init__(self):
        if self.window_model not in ("discrete", "sliced"):
            raise ConfigurationError("window_model must be discrete or sliced", "window_model")


@dataclass(frozen=True)
class ResolvedConfig:
    sequence: SequenceConfig = field(default_factory=SequenceConfig)
    decoherence: DecoherenceConfig = field(default_factory=DecoherenceConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    run: RunConfig = field(default_factory=RunConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    bae: BAEConfig = field(default_factory=BAEConfig)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            section = dataclasses.asdict(getattr(self, f.name))
            out[f.name] = {k: list(v) if isinstance(v, tuple) else v for k, v in section.items()}
        return out

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


SECTIONS = {f.name: f.default_factory for f in fields(ResolvedConfig)}


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and s.split("=", 1)[0].split(":", 1)[0].strip().lower() == key:
            return lineno
    return None


def _convert(raw: str, default):
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(default, int):
        value = float(raw)
        if value != int(value):
            raise ValueError(f"not an integer: {raw!r}")
        return int(value)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple):
        return tuple(float(part) for part in raw.split(",") if part.strip())
    return raw.strip()


def parse_config(text: str, strict: bool = False, source: str = "<config>") -> ResolvedConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigurationError(f"{source}:{exc.lineno}: key outside any [section]") from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else "?"
        raise ConfigurationError(f"{source}:{lineno}: cannot parse line") from exc
    except configparser.Error as exc:
        raise ConfigurationError(f"{source}: {exc}") from exc

    resolved = {}
    for name in parser.sections():
        if name not in SECTIONS:
            if strict:
                raise ConfigurationError(f"{source}: unknown section [{name}]", name)
            log.warning("ignoring unknown section [%s]", name)
    for name, factory in SECTIONS.items():
        defaults = factory()
        values = {}
        if parser.has_section(name):
            known = {f.name: getattr(defaults, f.name) for f in fields(defaults)}
            for key, raw in parser.items(name):
                if key not in known:
                    if strict:
                        raise ConfigurationError(
                            f"{source}:{_line_of(text, name, key)}: unknown key {name}.{key}", f"{name}.{key}")
                    log.warning("ignoring unknown key %s.%s", name, key)
                    continue
                try:
                    values[key] = _convert(raw, known[key])
                except ValueError as exc:
                    raise ConfigurationError(
                        f"{source}:{_line_of(text, name, key)}: bad value for {name}.{key}: {exc}",
                        f"{name}.{key}") from exc
        try:
            resolved[name] = dataclasses.replace(defaults, **values)
        except ConfigurationError as exc:
            qualified = f"{name}.{exc.field}" if exc.field else name
            raise ConfigurationError(f"{source}: invalid {qualified}: {exc}", qualified) from exc
        except ParameterError as exc:
            raise ConfigurationError(f"{source}: invalid [{name}]: {exc}", name) from exc
    return ResolvedConfig(**resolved)


def load_config(path=None, strict: bool = False) -> ResolvedConfig:
    if path is None:
        return ResolvedConfig()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, strict=strict, source=str(path))
