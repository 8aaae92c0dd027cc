"""Simulation configuration: defaults, file loading and validation."""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    """One or more configuration fields are invalid."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


NOISE_MODELS = ("antenna", "post_combiner")


@dataclass
class SimConfig:
    n_t: int = 15
    n_r: int = 15
    delta_t: float = 0.5
    delta_r: float = 0.5
    L: int = 1
    snr_grid_db: list = field(default_factory=lambda: [-5.0, 0.0, 5.0, 10.0, 15.0, 20.0])
    snr_spread_db: float = 20.0
    n0_dbm: float = -95.0
    pilot_dbm: float = 43.0
    adc_b: int = 3
    quantize: bool = True
    noiseless: bool = False
    noise_model: str = "antenna"
    trials: int = 10_000
    master_seed: int = 0
    table_cache: str | None = None
    output_dir: str = "runs"
    threads: int | None = None

    @property
    def noise_power(self) -> float:
        """N0 in watts."""
        return 10 ** ((self.n0_dbm - 30) / 10)

    @property
    def pilot_power(self) -> float:
        return 10 ** ((self.pilot_dbm - 30) / 10)

    def validate(self) -> "SimConfig":
        problems = []
        for name in ("n_t", "n_r"):
            v = getattr(self, name)
            if not isinstance(v, int) or not 1 <= v <= 16:
                problems.append(f"{name}: expected integer in 1..16, got {v!r}")
        for name in ("delta_t", "delta_r"):
            if not getattr(self, name) > 0:
                problems.append(f"{name}: must be positive")
        if not isinstance(self.L, int) or self.L < 1:
            problems.append(f"L: expected integer >= 1, got {self.L!r}")
        elif not any(p.startswith(("n_t", "n_r")) for p in problems) and self.L > min(self.n_t, self.n_r):
            problems.append(f"L: {self.L} paths do not fit a {self.n_r}x{self.n_t} grid")
        if not self.snr_grid_db:
            problems.append("snr_grid_db: empty")
        if self.snr_spread_db < 0:
            problems.append("snr_spread_db: must be >= 0")
        if self.noise_model not in NOISE_MODELS:
            problems.append(f"noise_model: expected one of {NOISE_MODELS}, got {self.noise_model!r}")
        if not isinstance(self.adc_b, int) or self.adc_b < 1:
            problems.append(f"adc_b: expected integer >= 1, got {self.adc_b!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            problems.append(f"trials: expected integer >= 1, got {self.trials!r}")
        if self.threads is not None and (not isinstance(self.threads, int) or self.threads < 1):
            problems.append(f"threads: expected integer >= 1, got {self.threads!r}")
        if problems:
            raise ConfigError(problems)
        self.snr_grid_db = [float(s) for s in self.snr_grid_db]
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, data: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError([f"{k}: unknown field" for k in unknown])
        return cls(**data)


def load_config_file(path) -> dict:
    """Read a TOML (or JSON config-echo) file into a plain mapping."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        doc = json.loads(text)
        # config echoes nest the config next to provenance data
        return doc.get("config", doc)
    return tomllib.loads(text)


def resolve(file_values: dict | None, overrides: dict) -> SimConfig:
    """Defaults, then file values, then non-None overrides."""
    data = dict(file_values or {})
    data.update({k: v for k, v in overrides.items() if v is not None})
    return SimConfig.from_mapping(data).validate()
