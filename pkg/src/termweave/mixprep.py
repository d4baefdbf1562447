"""Mixed fine-tuning data preparation.

Samples a portion of the generic corpus, oversamples the synthetic corpus
to the same size (whole copies plus a sampled remainder), shuffles the
combined mix with a seeded RNG, splits into train/val and emits
line-aligned trainer files plus the hyperparameter config.
"""

from __future__ import annotations

import copy
import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
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
            raise ValueError("train_frac + val_frac must equal 1")
        for name, value in asdict(self).items():
            if value <= 0:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FinetuneConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class MixedDataset:
    train: list
    val: list
    generic_count: int
    synthetic_count_before: int
    synthetic_count_after: int

    def __post_init__(self):
        if self.synthetic_count_after != self.generic_count:
            raise ValueError("oversampled synthetic size must equal generic size")


def sample_generic(corpus: list, k: int, seed: int) -> list:
    """Uniform sample without replacement; copies re-tagged as generic."""
    if not 1 <= k <= len(corpus):
        raise ValueError(f"k={k} out of range for corpus of {len(corpus)}")
    picked = random.Random(seed).sample(corpus, k)
    out = []
    for pair in picked:
        p = copy.copy(pair)
        p.origin = "generic"
        out.append(p)
    return out


def oversample_to(synthetic: list, target_size: int, seed: int) -> list:
    """Repeat the whole corpus floor(target/|S|) times, then sample the remainder."""
    if not synthetic:
        raise ValueError("synthetic corpus is empty")
    if target_size < 1:
        raise ValueError("target_size must be >= 1")
    n = len(synthetic)
    full, remainder = divmod(target_size, n)
    out = list(synthetic) * full
    if remainder:
        out.extend(random.Random(seed).sample(synthetic, remainder))
    return out


def mix_and_split(generic: list, synthetic_oversampled: list,
                  cfg: FinetuneConfig, seed: int) -> MixedDataset:
    """Concatenate, shuffle with the seed and split into train/val."""
    if len(generic) != len(synthetic_oversampled):
        raise ValueError(
            f"size mismatch: generic {len(generic)} vs "
            f"synthetic {len(synthetic_oversampled)}"
        )
    mixed = list(generic) + list(synthetic_oversampled)
    random.Random(seed).shuffle(mixed)
    n_val = round(cfg.val_frac * len(mixed))
    train, val = mixed[n_val:], mixed[:n_val]
    n_synth = len(synthetic_oversampled)
    # distinct synthetic pairs, before oversampling, for provenance
    distinct = len({id(p) for p in synthetic_oversampled})
    return MixedDataset(
        train=train, val=val,
        generic_count=len(generic),
        synthetic_count_before=distinct,
        synthetic_count_after=n_synth,
    )


def _one_line(text: str) -> str:
    return text.replace("\n", " ").replace("\r", " ")


def emit_trainer_files(dataset: MixedDataset, cfg: FinetuneConfig, out_dir) -> dict:
    """Write out/{train,val}.{src,tgt}.txt and finetune_config.json.

    Returns the mapping of logical names to written paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    for split_name, pairs in (("train", dataset.train), ("val", dataset.val)):
        for side in ("src", "tgt"):
            path = out_dir / f"{split_name}.{side}.txt"
            with path.open("w", encoding="utf-8") as f:
                for pair in pairs:
                    f.write(_one_line(getattr(pair, side)))
                    f.write("\n")
            written[f"{split_name}.{side}"] = path
    cfg_path = out_dir / "finetune_config.json"
    with cfg_path.open("w", encoding="utf-8") as f:
        json.dump(cfg.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    written["config"] = cfg_path
    return written


@dataclass
class GenericSampleSizes:
    """Default generic-corpus sample sizes per language pair."""

    sizes: dict = field(default_factory=lambda: {"cs": 372928, "de": 419881, "zh": 462780})

    def for_pair(self, non_english_code: str) -> int:
        return self.sizes[non_english_code.split("-")[0].lower()]
