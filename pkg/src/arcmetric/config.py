"""Run configuration with JSON persistence.

The CLI resolves its defaults from, in order: built-in values, the file
named by the ARCMETRIC_CONFIG environment variable, then explicit flags.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

from .fit import geometric_scales
from .puiseux import DEFAULT_MAX_RAMIFICATION, DEFAULT_TRUNCATION

ENV_CONFIG_VAR = "ARCMETRIC_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    truncation: Fraction = DEFAULT_TRUNCATION
    max_ramification: int = DEFAULT_MAX_RAMIFICATION
    scale_k_min: int = 4
    scale_k_max: int = 14
    scale_base: float = 0.5
    resolution_divisor: int = 64
    snap_denominator: int = 12
    snap_tolerance: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.truncation <= 0:
            raise ConfigError("truncation must be positive")
        if self.max_ramification < 1:
            raise ConfigError("max_ramification must be at least 1")
        if not self.scale_k_min < self.scale_k_max:
            raise ConfigError("scales need k_min < k_max")
        if not 0.0 < self.scale_base < 1.0:
            raise ConfigError("scale base must lie in (0, 1)")
        if self.resolution_divisor < 8:
            raise ConfigError("resolution_divisor must be at least 8")
        if self.snap_denominator < 1:
            raise ConfigError("snap_denominator must be at least 1")
        if self.snap_tolerance <= 0:
            raise ConfigError("snap_tolerance must be positive")

    def scales(self) -> tuple[float, ...]:
        return geometric_scales(self.scale_k_min, self.scale_k_max,
                                self.scale_base)

    def to_dict(self) -> dict:
        return {
            "truncation": [self.truncation.numerator,
                           self.truncation.denominator],
            "max_ramification": self.max_ramification,
            "scales": [self.scale_k_min, self.scale_k_max, self.scale_base],
            "resolution_divisor": self.resolution_divisor,
            "snap_denominator": self.snap_denominator,
            "snap_tolerance": self.snap_tolerance,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        known = {"truncation", "max_ramification", "scales",
                 "resolution_divisor", "snap_denominator", "snap_tolerance",
                 "seed"}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        kwargs: dict = {}
        if "truncation" in obj:
            t = obj["truncation"]
            if not (isinstance(t, list) and len(t) == 2
                    and all(isinstance(v, int) for v in t) and t[1] > 0):
                raise ConfigError("truncation must be [numerator, denominator]")
            kwargs["truncation"] = Fraction(t[0], t[1])
        if "scales" in obj:
            s = obj["scales"]
            if not (isinstance(s, list) and len(s) == 3):
                raise ConfigError("scales must be [k_min, k_max, base]")
            kwargs["scale_k_min"] = int(s[0])
            kwargs["scale_k_max"] = int(s[1])
            kwargs["scale_base"] = float(s[2])
        for key in ("max_ramification", "resolution_divisor",
                    "snap_denominator", "seed"):
            if key in obj:
                kwargs[key] = int(obj[key])
        if "snap_tolerance" in obj:
            kwargs["snap_tolerance"] = float(obj["snap_tolerance"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | os.PathLike | None = None) -> "RunConfig":
        """Config from an explicit path, else $ARCMETRIC_CONFIG, else defaults."""
        if path is None:
            path = os.environ.get(ENV_CONFIG_VAR)
        if path is None:
            return cls()
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_dict(obj)

    def with_overrides(self, **kwargs) -> "RunConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs) if kwargs else self
