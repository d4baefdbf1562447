import json
import random

import pytest

from trainer_bridge.train import finetune

SRC_WORDS = [f"s{i}" for i in range(20)]
TGT_WORDS = [f"t{i}" for i in range(20)]


def make_toy_dataset(out_dir, n_train=180, n_val=20, seed=11):
    """A word-substitution corpus a tiny model can learn quickly."""
    rng = random.Random(seed)
    out_dir.mkdir(parents=True, exist_ok=True)

    def write(split, n):
        src_lines, tgt_lines = [], []
        for _ in range(n):
            idx = [rng.randrange(20) for _ in range(rng.randint(3, 6))]
            src_lines.append(" ".join(SRC_WORDS[i] for i in idx))
            tgt_lines.append(" ".join(TGT_WORDS[i] for i in idx))
        (out_dir / f"{split}.src.txt").write_text("\n".join(src_lines) + "\n")
        (out_dir / f"{split}.tgt.txt").write_text("\n".join(tgt_lines) + "\n")

    write("train", n_train)
    write("val", n_val)
    return out_dir


TOY_CONFIG = {
    "train_frac": 0.9, "val_frac": 0.1,
    "batch_size": 16, "learning_rate": 3e-3,
    "accumulate_gradient": 1, "weight_decay": 0.01,
    "num_train_epochs": 4,
    "max_input_length": 32, "max_target_length": 32,
}


def write_config(path, overrides=None):
    cfg = {**TOY_CONFIG, **(overrides or {})}
    path.write_text(json.dumps(cfg, indent=2) + "\n")
    return path


@pytest.fixture(scope="session")
def trained(tmp_path_factory):
    """One shared toy fine-tune: (data_dir, config_path, model_dir, manifest)."""
    root = tmp_path_factory.mktemp("toy")
    data_dir = make_toy_dataset(root / "data")
    config_path = write_config(root / "finetune_config.json")
    model_dir = root / "model"
    manifest = finetune(data_dir, config_path, "tiny-transformer", model_dir,
                        seed=0)
    return data_dir, config_path, model_dir, manifest
