"""Experiment configuration as a flat ``key = value`` text file."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from typing import Union

from .dubins import PathParams
from .environment import EnvKind
from .errors import ConfigError
from .planner import Variant

SEED_ENV_VAR = "HEXCOVER_SEED"

Start = Union[str, tuple[float, float]]


@dataclass
class ExperimentConfig:
    env_kind: EnvKind = EnvKind.RANDOM
    bounds: tuple[float, float, float, float] = (0.0, 0.0, 20.0, 20.0)
    n_obstacles: int = 20
    radius_range: tuple[float, float] = (0.1, 0.25)
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    variant: list[Variant] = field(default_factory=lambda: [Variant.HDCP, Variant.HDCP_E])
    start: Start = "center"
    r_t: float = 0.5
    l_r: float = 0.5
    r_min: float = 0.5
    v: float = 1.0
    dt: float = 0.02
    cell_size: float = 0.05
    observe_in_transit: bool = True  # HDCP only; HDCP-E always observes in transit
    output_dir: str = "results"

    def validate(self) -> ExperimentConfig:
        for name in ("r_t", "l_r", "r_min", "v", "dt", "cell_size"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not (self.r_min <= self.r_t <= self.l_r):
            raise ConfigError("need r_min <= r_t <= l_r")
        lo, hi = self.radius_range
        if not (0 < lo <= hi):
            raise ConfigError("radius_range must satisfy 0 < lo <= hi")
        if self.n_obstacles < 0:
            raise ConfigError("n_obstacles must be non-negative")
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmax > xmin and ymax > ymin):
            raise ConfigError("bounds must be xmin,ymin,xmax,ymax with positive extent")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if not self.variant:
            raise ConfigError("at least one variant is required")
        return self

    @property
    def path_params(self) -> PathParams:
        return PathParams(r_t=self.r_t, l_r=self.l_r, r_min=self.r_min, v=self.v)


def parse_seeds(text: str) -> list[int]:
    """``"0-9"``, ``"1,4,7"`` or a mix such as ``"0-2,10"``."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    return seeds


def _floats(text: str, n: int) -> tuple[float, ...]:
    vals = tuple(float(t) for t in text.split(","))
    if len(vals) != n:
        raise ConfigError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _parse_bool(text: str) -> bool:
    key = text.strip().lower()
    if key in ("1", "true", "yes", "on"):
        return True
    if key in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected true or false, got {text!r}")


def _parse_start(text: str) -> Start:
    text = text.strip()
    if "," in text:
        return _floats(text, 2)
    key = text.lower().replace("-", "_")
    if key not in ("center", "lower_left"):
        raise ConfigError(f"start must be center, lower_left or x,y; got {text!r}")
    return key


_PARSERS = {
    "env_kind": EnvKind.parse,
    "bounds": lambda t: _floats(t, 4),
    "n_obstacles": int,
    "radius_range": lambda t: _floats(t, 2),
    "seeds": parse_seeds,
    "variant": lambda t: [Variant.parse(p) for p in t.split(",") if p.strip()],
    "start": _parse_start,
    "observe_in_transit": _parse_bool,
    "output_dir": str.strip,
}

KEYS = tuple(f.name for f in fields(ExperimentConfig))


def set_value(cfg: ExperimentConfig, key: str, text: str) -> None:
    if key not in KEYS:
        raise ConfigError(f"unknown config key {key!r}")
    parser = _PARSERS.get(key, float)
    try:
        setattr(cfg, key, parser(text))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from exc


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = base or ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        set_value(cfg, key, value)
    return cfg


def _fmt(value) -> str:
    if isinstance(value, (EnvKind, Variant)):
        return value.value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    return "".join(f"{k} = {_fmt(getattr(cfg, k))}\n" for k in KEYS)


def load_config(path=None, overrides: dict | None = None, environ=os.environ) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if path:
        with open(path) as fh:
            cfg = parse_config(fh.read(), cfg)
    # Precedence: file, then HEXCOVER_SEED, then command-line flags.
    if environ.get(SEED_ENV_VAR):
        cfg.seeds = parse_seeds(environ[SEED_ENV_VAR])
    for key, value in (overrides or {}).items():
        if value is not None:
            set_value(cfg, key, str(value))
    return cfg.validate()
