"""Pipeline configuration: one JSON document drives every command.

Schema (all keys optional, defaults shown; unknown keys are rejected):

    {
      "source": "cpu_jitter",          # or "rf_wav"
      "wav_path": null,                # required when source is rf_wav
      "output_dir": "out",
      "rng_seed": 0,
      "alpha": 0.01,                   # battery significance level
      "batteries": ["float", "nist", "crypto"],
      "generator": {"eta_outer": 0.05, "train_steps_per_cycle": 1,
                    "cycles_per_emission": 50,
                    "positions": [50, 100, 150, 200], "target": 0.5},
      "training": {"learning_rate": 0.05, "epochs": 20, "target_mae": 0.05,
                   "target": 0.5, "rng_seed": 0, "holdout_fraction": 0.2},
      "nist": {"block_len": null, "template_len": 9, "serial_m": 16,
               "apen_m": 10, "lc_block_len": 500, "matrix_rows": 32,
               "matrix_cols": 32, "excursions_min_cycles": 500,
               "alpha": 0.01},
      "crypto": {"alpha": 0.01, "window": 16, "train_frac": 0.8,
                 "acc_threshold": 0.6, "learning_rate": 2.0, "n_iter": 48,
                 "max_lag": 64, "acf_threshold": 0.1, "chunk": 512}
    }

load_config() resolves wav_path relative to the config file and verifies
it exists; every malformed document raises ConfigError with the offending
key named.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .bitstats import NistParams
from .crypto_eval import CryptoConfig
from .errors import ConfigError, ShapeError
from .generator import GeneratorConfig
from .nnet import TrainingConfig

__all__ = ["PipelineConfig", "config_from_dict", "config_to_dict", "load_config", "save_config"]

_SOURCES = ("cpu_jitter", "rf_wav")
_BATTERIES = ("float", "nist", "crypto")


@dataclass
class PipelineConfig:
    source: str = "cpu_jitter"
    wav_path: str | None = None
    output_dir: str = "out"
    rng_seed: int = 0
    alpha: float = 0.01
    batteries: tuple = _BATTERIES
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    nist: NistParams = field(default_factory=NistParams)
    crypto: CryptoConfig = field(default_factory=CryptoConfig)

    def __post_init__(self) -> None:
        if self.source not in _SOURCES:
            raise ConfigError(f"source must be one of {_SOURCES}, got {self.source!r}")
        if not 0.0 < self.alpha < 0.5:
            raise ConfigError("alpha must be in (0, 0.5)")
        bats = tuple(self.batteries)
        for b in bats:
            if b not in _BATTERIES:
                raise ConfigError(f"unknown battery {b!r}; choose from {_BATTERIES}")
        self.batteries = bats
        if self.source == "rf_wav" and not self.wav_path:
            raise ConfigError("source rf_wav needs wav_path")


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a JSON object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    coerced = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
    try:
        return cls(**coerced)
    except (ShapeError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(data) -> PipelineConfig:
    """Validate a parsed JSON document into a PipelineConfig."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    data = dict(data)
    nested = {
        "generator": GeneratorConfig,
        "training": TrainingConfig,
        "nist": NistParams,
        "crypto": CryptoConfig,
    }
    kwargs = {}
    for key, cls in nested.items():
        if key in data:
            kwargs[key] = _build(cls, data.pop(key), key)
    if "batteries" in data and isinstance(data["batteries"], list):
        data["batteries"] = tuple(data["batteries"])
    return _build(PipelineConfig, {**data, **kwargs}, "config")


def config_to_dict(cfg: PipelineConfig) -> dict:
    """Inverse of config_from_dict; round-trips exactly."""
    out = dataclasses.asdict(cfg)
    out["batteries"] = list(cfg.batteries)
    out["generator"]["positions"] = list(cfg.generator.positions)
    return out


def load_config(path) -> PipelineConfig:
    """Read and validate a JSON config; wav_path resolves next to the file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    cfg = config_from_dict(data)
    if cfg.wav_path:
        resolved = Path(cfg.wav_path)
        if not resolved.is_absolute():
            resolved = path.parent / resolved
        if not resolved.exists():
            raise ConfigError(f"wav_path {resolved} does not exist")
        cfg.wav_path = str(resolved)
    return cfg


def save_config(cfg: PipelineConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n")
