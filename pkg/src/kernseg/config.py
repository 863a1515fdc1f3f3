"""Pipeline configuration: JSON file plus keyword overrides."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .kernel import Kernel, KernelFamily


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    kernel: str = "imq"
    delta: float = 0.35
    n_neighbors: int = 12
    m_candidates: int = 2
    threshold_factor: float = 2.0
    retry_factor: float | None = None  # e.g. 1.5: retry once if splitting yields one class
    min_component_size: int | None = None  # None: max(5, n_neighbors)
    indicator: str = "norm"  # or "prediction"
    blowup_mode: str = "fixpoint"
    skip_phase3: bool = False
    safe_sets: str = "final"  # or "grown"
    grid_step: float = 0.01
    seed: int = 1
    N: int = 900
    margin: float = 0.05
    target_q: float = 0.04
    jitter: float = 0.3
    workers: int = field(default_factory=lambda: os.cpu_count() or 1, compare=False)

    def __post_init__(self):
        try:
            KernelFamily(self.kernel)
        except ValueError:
            raise ConfigError(f"unknown kernel {self.kernel!r}") from None
        for name in ("delta", "threshold_factor", "grid_step", "target_q"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("n_neighbors", "m_candidates", "N", "workers"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.n_neighbors < 2:
            raise ConfigError("n_neighbors must be at least 2")
        if self.min_component_size is not None and self.min_component_size < 1:
            raise ConfigError("min_component_size must be at least 1")
        if self.retry_factor is not None and not self.retry_factor > 0:
            raise ConfigError("retry_factor must be positive")
        if self.margin < 0 or self.jitter < 0:
            raise ConfigError("margin and jitter must be nonnegative")
        if self.indicator not in ("norm", "prediction"):
            raise ConfigError(f"unknown indicator {self.indicator!r}")
        if self.blowup_mode not in ("fixpoint", "single-pass"):
            raise ConfigError(f"unknown blowup_mode {self.blowup_mode!r}")
        if self.safe_sets not in ("final", "grown"):
            raise ConfigError(f"unknown safe_sets {self.safe_sets!r}")

    @property
    def kernel_obj(self) -> Kernel:
        return Kernel(KernelFamily(self.kernel), self.delta)

    @property
    def min_size(self) -> int:
        if self.min_component_size is not None:
            return self.min_component_size
        return max(5, self.n_neighbors)

    def to_dict(self, with_runtime: bool = False) -> dict:
        d = asdict(self)
        if not with_runtime:
            d.pop("workers")
        return d

    def with_overrides(self, **overrides) -> "PipelineConfig":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_config(path: str | Path | None = None, **overrides) -> PipelineConfig:
    """Read a JSON object of config keys; ``overrides`` that are not None win."""
    base = {}
    if path is not None:
        try:
            base = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
    try:
        cfg = PipelineConfig().with_overrides(**base)
        return cfg.with_overrides(**overrides)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
