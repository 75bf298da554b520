"""Run configuration: INI file plus command-line overrides."""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field
from typing import Optional

from .errors import ConfigError
from .lie_core import LieGroup
from .surface_words import SurfaceData

DEFAULT_TOLERANCES = {
    "chain": 1e-9,
    "fox": 1e-6,
    "closed": 1e-5,
    "invariance": 1e-9,
    "momentum": 1e-6,
    "cover": 1e-7,
    "casimir": 1e-6,
    "jacobi": 1e-3,
    "flow": 1e-4,
    "rank": 1e-9,
}


@dataclass
class RunConfig:
    group: str = "SU(2)"
    genus: int = 1
    boundaries: int = 2
    mode: str = "free"
    targets: Optional[list] = None
    seed: int = 0
    samples: int = 20
    out: Optional[str] = None
    csv: Optional[str] = None
    workers: int = 1
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    beta_sign: int = 1
    jacobi_points: int = 2
    grid: Optional[list] = None
    f: str = "x1"
    g: str = "y1"
    path_start: Optional[list] = None
    path_end: Optional[list] = None
    path_steps: int = 6

    def validate(self) -> "RunConfig":
        try:
            LieGroup.from_name(self.group)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        try:
            SurfaceData(self.genus, self.boundaries)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.mode not in ("free", "constrained"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == "constrained" and (self.targets is None or len(self.targets) != self.boundaries):
            raise ConfigError("constrained mode needs one class target per boundary circle")
        if self.samples < 1 or self.workers < 1:
            raise ConfigError("samples and workers must be positive")
        if self.beta_sign not in (1, -1):
            raise ConfigError("beta_sign must be +1 or -1")
        for k, v in self.tolerances.items():
            if k not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance {k!r}")
            if not v > 0:
                raise ConfigError(f"tolerance {k} must be positive, got {v}")
        return self

    @property
    def lie_group(self) -> LieGroup:
        return LieGroup.from_name(self.group)

    @property
    def surface(self) -> SurfaceData:
        return SurfaceData(self.genus, self.boundaries)

    def to_dict(self) -> dict:
        return asdict(self)


def parse_targets(text: str) -> list:
    """'0.2,-0.2; 0.3,-0.3' -> [[0.2, -0.2], [0.3, -0.3]]."""
    try:
        return [[float(v) for v in part.split(",")] for part in text.split(";") if part.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse class targets {text!r}") from None


def parse_grid(text: str) -> list:
    """'start:stop:count' (inclusive linspace) or a comma separated list."""
    import numpy as np
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(n))]
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse grid {text!r}") from None


_INT = {"genus", "boundaries", "seed", "samples", "workers", "beta_sign", "jacobi_points", "path_steps"}
_STR = {"group", "mode", "out", "csv", "f", "g"}
_TARGETS = {"targets", "path_start", "path_end"}


def load_ini(path: str, cfg: Optional[RunConfig] = None) -> RunConfig:
    """Read a [run] section and an optional [tolerances] section."""
    cfg = RunConfig() if cfg is None else cfg
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path}")
    if parser.has_section("run"):
        for key, val in parser.items("run"):
            try:
                if key in _INT:
                    setattr(cfg, key, int(val))
                elif key in _STR:
                    setattr(cfg, key, val)
                elif key in _TARGETS:
                    setattr(cfg, key, parse_targets(val))
                elif key == "grid":
                    cfg.grid = parse_grid(val)
                else:
                    raise ConfigError(f"unknown key {key!r} in [run]")
            except ValueError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(f"bad value for {key}: {val!r}") from None
    if parser.has_section("tolerances"):
        for key, val in parser.items("tolerances"):
            try:
                cfg.tolerances[key] = float(val)
            except ValueError:
                raise ConfigError(f"bad tolerance {key}: {val!r}") from None
    return cfg
