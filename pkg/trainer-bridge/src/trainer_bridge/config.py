"""Fine-tuning hyperparameter config, read from the emitted JSON file.

The key set is fixed; unknown keys abort before training so a typo in the
upstream preparation step cannot be silently ignored.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FinetuneConfig:
    train_frac: float = 0.9
    val_frac: float = 0.1
    batch_size: int = 32
    learning_rate: float = 2e-5
    accumulate_gradient: int = 4
    weight_decay: float = 0.01
    num_train_epochs: int = 1
    max_input_length: int = 256
    max_target_length: int = 256

    def __post_init__(self):
        if abs(self.train_frac + self.val_frac - 1.0) > 1e-9:
            raise ConfigError("train_frac + val_frac must equal 1")
        for name, value in asdict(self).items():
            if value <= 0:
                raise ConfigError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FinetuneConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as err:
            raise ConfigError(str(err)) from err


def load_config(path) -> FinetuneConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return FinetuneConfig.from_dict(raw)
