"""Run configuration: everything that, together with the code version,
fully determines a simulated trial."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigurationError


@dataclass
class RunConfig:
    profile: str = "ORALYTICS"
    participants: int = 20
    entries_per_day: int = 2
    master_seed: int = 7
    fault_plan: str | None = None
    paper_replay: bool = False
    random_faults: float = 0.0
    memory_threshold: float = 0.9
    min_population: int = 5
    manual_red: bool = False
    base_date: str = "2024-01-01"
    run_id: str | None = None
    sink: dict = field(default_factory=lambda: {"type": "file"})
    api: dict = field(default_factory=lambda: {"host": "127.0.0.1", "port": 8710, "pace_seconds": 2.0})
    rho: dict = field(default_factory=dict)
    cost: dict = field(default_factory=dict)
    noise_variance: float | None = None
    prior_scale: float = 25.0
    random_effects_scale: float = 1.0

    def __post_init__(self):
        if self.profile not in ("ORALYTICS", "MIWAVES"):
            raise ConfigurationError(f"unknown profile {self.profile!r}")
        if self.participants < 1:
            raise ConfigurationError("participants must be >= 1")
        if self.entries_per_day < 1:
            raise ConfigurationError("entries_per_day must be >= 1")
        if not 0.0 <= self.random_faults <= 1.0:
            raise ConfigurationError("random_faults must be a probability")
        if not 0.0 < self.memory_threshold <= 1.0:
            raise ConfigurationError("memory_threshold must be in (0, 1]")

    @property
    def effective_run_id(self) -> str:
        return self.run_id or f"run-{self.profile.lower()}-seed{self.master_seed}"

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(doc: dict) -> "RunConfig":
        known = {f for f in RunConfig.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return RunConfig(**doc)

    @staticmethod
    def load(path: str | Path) -> "RunConfig":
        with open(path) as fh:
            doc = yaml.safe_load(fh) or {}
        if not isinstance(doc, dict):
            raise ConfigurationError(f"config root must be a mapping, got {type(doc).__name__}")
        return RunConfig.from_dict(doc)

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=True))
