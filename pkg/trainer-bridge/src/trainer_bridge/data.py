"""Loading and validation of line-aligned trainer files.

The dataset directory contains train.src.txt / train.tgt.txt and
val.src.txt / val.tgt.txt; each split's two files must have the same
number of lines.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

SPLIT_FILES = {
    "train": ("train.src.txt", "train.tgt.txt"),
    "val": ("val.src.txt", "val.tgt.txt"),
}


class DataError(ValueError):
    pass


@dataclass
class Dataset:
    train: list  # [(src_line, tgt_line), ...]
    val: list
    paths: dict  # logical name -> str path


def _read_lines(path: Path) -> list:
    if not path.exists():
        raise DataError(f"missing dataset file: {path}")
    return path.read_text(encoding="utf-8").splitlines()


def load_dataset(data_dir) -> Dataset:
    data_dir = Path(data_dir)
    splits = {}
    paths = {}
    for split, (src_name, tgt_name) in SPLIT_FILES.items():
        src_path, tgt_path = data_dir / src_name, data_dir / tgt_name
        src = _read_lines(src_path)
        tgt = _read_lines(tgt_path)
        if len(src) != len(tgt):
            raise DataError(
                f"{split}: {src_name} has {len(src)} lines but "
                f"{tgt_name} has {len(tgt)}")
        splits[split] = list(zip(src, tgt))
        paths[f"{split}.src"] = str(src_path)
        paths[f"{split}.tgt"] = str(tgt_path)
    if not splits["train"]:
        raise DataError("train split is empty")
    return Dataset(train=splits["train"], val=splits["val"], paths=paths)
