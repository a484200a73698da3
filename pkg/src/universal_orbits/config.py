"""Plain-text experiment configuration (``key = value`` in sections)."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


def _parse_weights(text: str) -> dict:
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        s, _, v = part.partition(":")
        out[int(s)] = Fraction(v.strip())
    return out


def _format_weights(w: dict) -> str:
    return ", ".join(f"{s}:{v}" for s, v in sorted(w.items()))


@dataclass(frozen=True)
class CocycleSpec:
    name: str
    u: dict
    v: dict
    L: int = 1


# (section, key, attribute, kind)
_LAYOUT = [
    ("sft", "file", "sft_file", "path"),
    ("measures", "depth", "depth", "int"),
    ("measures", "period_cap", "period_cap", "int"),
    ("measures", "epsilon", "epsilon", "frac"),
    ("measures", "samples", "samples", "int"),
    ("glue", "k0", "K0", "int"),
    ("glue", "rounds", "rounds", "int"),
    ("glue", "stages", "stages", "int?"),
    ("glue", "base", "base", "str"),
    ("glue", "eq5_samples", "eq5_samples", "int"),
    ("scan", "depth", "scan_depth", "int"),
    ("scan", "radius", "scan_radius", "frac"),
    ("scan", "shrink", "scan_shrink", "frac"),
    ("scan", "rounds", "scan_rounds", "int"),
    ("theorem2", "eta", "eta", "frac"),
    ("theorem2", "onset", "onset", "int"),
    ("theorem2", "cylinder", "cylinder", "str"),
    ("run", "output", "output", "path"),
    ("run", "seed", "seed", "int"),
]


@dataclass(frozen=True)
class ExperimentConfig:
    sft_file: str
    depth: int = 3
    period_cap: int = 5
    epsilon: Fraction = Fraction(1, 4)
    samples: int = 64
    K0: int = 1
    rounds: int = 2
    stages: int | None = None
    base: str = "0"
    eq5_samples: int = 100
    scan_depth: int = 3
    scan_radius: Fraction = Fraction(1, 4)
    scan_shrink: Fraction = Fraction(1, 2)
    scan_rounds: int = 1
    eta: Fraction = Fraction(1, 2)
    onset: int = 1
    cylinder: str = "0"
    output: str = "out"
    seed: int = 0
    cocycles: tuple = field(default_factory=tuple)
    source: str | None = field(default=None, compare=False)

    def ball_base_radius(self) -> Fraction:
        # round-r radius is base * shrink**r, so round 1 has radius scan_radius
        return self.scan_radius / self.scan_shrink

    def sft_path(self) -> Path:
        p = Path(self.sft_file)
        if not p.is_absolute() and self.source:
            p = Path(self.source).parent / p
        return p

    def output_path(self) -> Path:
        p = Path(self.output)
        if not p.is_absolute() and self.source:
            p = Path(self.source).parent / p
        return p

    def to_text(self) -> str:
        sections: dict = {}
        for sec, key, attr, kind in _LAYOUT:
            val = getattr(self, attr)
            if val is None:
                continue
            sections.setdefault(sec, []).append(f"{key} = {val}")
        lines = []
        for sec, rows in sections.items():
            lines.append(f"[{sec}]")
            lines.extend(rows)
            lines.append("")
        for c in self.cocycles:
            lines.append(f"[{c.name}]")
            lines.append(f"u = {_format_weights(c.u)}")
            lines.append(f"v = {_format_weights(c.v)}")
            lines.append(f"L = {c.L}")
            lines.append("")
        return "\n".join(lines)


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if key is None and current == section:
                return i
            continue
        if current == section and key is not None:
            name = line.split("=", 1)[0].strip().lower()
            if name == key:
                return i
    return None


def _convert(kind: str, raw: str):
    if kind in ("int", "int?"):
        return int(raw)
    if kind == "frac":
        return Fraction(raw)
    return raw


def parse_config(text: str, source: str | None = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    try:
        cp.read_string(text)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError(f"malformed config: {exc.message.splitlines()[0]}", line) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from None
    values = {}
    for sec, key, attr, kind in _LAYOUT:
        if not cp.has_option(sec, key):
            continue
        raw = cp.get(sec, key).strip()
        try:
            values[attr] = _convert(kind, raw)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"[{sec}] {key}: cannot read {raw!r}", _line_of(text, sec, key)) from None
    if "sft_file" not in values:
        raise ConfigError("[sft] file is required", _line_of(text, "sft", None))
    cocycles = []
    for sec in cp.sections():
        if not sec.lower().startswith("cocycle"):
            continue
        try:
            u = _parse_weights(cp.get(sec, "u"))
            v = _parse_weights(cp.get(sec, "v"))
            L = int(cp.get(sec, "L", fallback="1"))
        except (ValueError, ZeroDivisionError, configparser.NoOptionError) as exc:
            raise ConfigError(f"[{sec}]: {exc}", _line_of(text, sec.lower(), None)) from None
        cocycles.append(CocycleSpec(sec, u, v, L))
    cfg = ExperimentConfig(**values, cocycles=tuple(cocycles), source=source)
    _check_ranges(cfg, text)
    return cfg


def _check_ranges(cfg: ExperimentConfig, text: str) -> None:
    checks = [
        ("measures", "depth", cfg.depth >= 1),
        ("measures", "period_cap", cfg.period_cap >= 1),
        ("measures", "epsilon", cfg.epsilon > 0),
        ("measures", "samples", cfg.samples >= 0),
        ("glue", "k0", cfg.K0 >= 1),
        ("glue", "rounds", cfg.rounds >= 1),
        ("glue", "stages", cfg.stages is None or cfg.stages >= 1),
        ("glue", "eq5_samples", cfg.eq5_samples >= 0),
        ("scan", "depth", cfg.scan_depth >= 1),
        ("scan", "radius", cfg.scan_radius > 0),
        ("scan", "shrink", 0 < cfg.scan_shrink < 1),
        ("scan", "rounds", cfg.scan_rounds >= 1),
        ("theorem2", "eta", cfg.eta > 0),
        ("theorem2", "onset", cfg.onset >= 1),
    ]
    for sec, key, ok in checks:
        if not ok:
            raise ConfigError(f"[{sec}] {key} out of range", _line_of(text, sec, key))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def config_fields() -> list[str]:
    return [f.name for f in fields(ExperimentConfig)]
