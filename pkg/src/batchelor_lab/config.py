"""Run configuration and manifest handling.

Configs are versioned JSON documents; the sha256 of the canonical serialization
(excluding the output directory) stamps every output so results are
attributable and replayable.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid or unparsable run configuration (CLI exit code 2)."""


@dataclass
class RunConfig:
    kappa: float
    dimension: int = 2
    cutoff: int = 64
    scheme: str = "splitting"
    dt: float = 2e-4
    seed: int = 0
    horizon: float = 20.0
    cadence: float = 0.01
    initial_condition: str = "random-shell"  # or "cos-x"
    shell_radius: int = 10
    ic_seed: int | None = None  # defaults to seed
    s_grid: tuple = ()
    snapshot_times: tuple = ()
    out_dir: str = "run-output"
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        if self.dimension not in (2, 3):
            raise ConfigError(f"dimension must be 2 or 3, got {self.dimension}")
        if self.kappa < 0:
            raise ConfigError(f"kappa must be >= 0, got {self.kappa}")
        if self.cutoff < 1:
            raise ConfigError(f"cutoff must be >= 1, got {self.cutoff}")
        if self.scheme not in ("splitting", "euler-maruyama"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.dt <= 0 or self.horizon < 0 or self.cadence <= 0:
            raise ConfigError("need dt > 0, horizon >= 0, cadence > 0")
        if self.initial_condition not in ("random-shell", "cos-x"):
            raise ConfigError(f"unknown initial condition {self.initial_condition!r}")
        if self.initial_condition == "random-shell" and not (
                1 <= self.shell_radius <= self.cutoff):
            raise ConfigError(f"shell_radius {self.shell_radius} outside 1..{self.cutoff}")
        self.s_grid = tuple(float(s) for s in self.s_grid)
        if any(s <= 0 for s in self.s_grid):
            raise ConfigError("s_grid entries must be > 0")
        self.snapshot_times = tuple(float(t) for t in self.snapshot_times)

    @property
    def effective_ic_seed(self):
        return self.seed if self.ic_seed is None else self.ic_seed

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        try:
            known = {f.name for f in dataclasses.fields(cls)}
            extra = set(d) - known
            if extra:
                raise ConfigError(f"unknown config keys: {sorted(extra)}")
            return cls(**d)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        if not isinstance(d, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_dict(d)

    def save(self, path):
        atomic_write_json(path, self.to_dict())

    def config_hash(self):
        """sha256 of the canonical JSON, excluding the output directory."""
        d = self.to_dict()
        d.pop("out_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class RunManifest:
    config_hash: str
    code_version: str
    seed: int
    wall_clock_seconds: float
    outputs: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def write(self, path):
        atomic_write_json(path, dataclasses.asdict(self))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls(**json.load(fh))


def atomic_write_json(path, payload):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
