"""Fine-tuning entry point: validate inputs, train, write model + manifest."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn

from .config import ConfigError, FinetuneConfig, load_config
from .data import Dataset, load_dataset
from .model import (
    BASE_MODELS,
    BOS,
    EOS,
    PAD,
    ModelConfig,
    Seq2Seq,
    Vocab,
    save_model,
)


@dataclass
class TrainerManifest:
    base_model: str
    dataset_paths: dict
    config: dict  # the consumed FinetuneConfig, echoed verbatim
    output_dir: str
    loss_trace: list = field(default_factory=list)
    val_loss: float | None = None

    def __post_init__(self):
        if not self.loss_trace:
            raise ValueError("loss trace must be non-empty after a run")

    def to_dict(self) -> dict:
        return {
            "base_model": self.base_model,
            "dataset_paths": self.dataset_paths,
            "config": self.config,
            "output_dir": self.output_dir,
            "loss_trace": self.loss_trace,
            "val_loss": self.val_loss,
        }

    def save(self, path):
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8")


def _batches(pairs: list, vocab: Vocab, cfg: FinetuneConfig, rng: random.Random):
    order = list(range(len(pairs)))
    rng.shuffle(order)
    for start in range(0, len(order), cfg.batch_size):
        chunk = [pairs[i] for i in order[start:start + cfg.batch_size]]
        src_ids = [vocab.encode(s, cfg.max_input_length) or [PAD]
                   for s, _t in chunk]
        tgt_ids = [vocab.encode(t, cfg.max_target_length) for _s, t in chunk]
        src_len = max(len(x) for x in src_ids)
        tgt_len = max(len(x) for x in tgt_ids) + 1
        src = torch.full((len(chunk), src_len), PAD, dtype=torch.long)
        dec_in = torch.full((len(chunk), tgt_len), PAD, dtype=torch.long)
        labels = torch.full((len(chunk), tgt_len), PAD, dtype=torch.long)
        for row, (s_ids, t_ids) in enumerate(zip(src_ids, tgt_ids)):
            src[row, :len(s_ids)] = torch.tensor(s_ids)
            dec = [BOS] + t_ids
            lab = t_ids + [EOS]
            dec_in[row, :len(dec)] = torch.tensor(dec)
            labels[row, :len(lab)] = torch.tensor(lab)
        yield src, dec_in, labels


def _epoch_loss(model, dataset_pairs, vocab, cfg, criterion):
    model.eval()
    total, n = 0.0, 0
    with torch.no_grad():
        for src, dec_in, labels in _batches(dataset_pairs, vocab, cfg,
                                            random.Random(0)):
            logits = model(src, dec_in)
            loss = criterion(logits.reshape(-1, logits.size(-1)),
                             labels.reshape(-1))
            total += float(loss)
            n += 1
    return total / max(n, 1)


def finetune(data_dir, config_path, base_model: str, out_dir,
             seed: int = 0) -> TrainerManifest:
    """Train the toy model on the emitted dataset and write the model dir.

    Aborts before touching the model on unknown config keys or misaligned
    dataset files.
    """
    if base_model not in BASE_MODELS:
        raise ConfigError(f"unknown base model {base_model!r}; "
                          f"expected one of {sorted(BASE_MODELS)}")
    cfg = load_config(config_path)
    raw_config = json.loads(Path(config_path).read_text(encoding="utf-8"))
    dataset: Dataset = load_dataset(data_dir)

    torch.manual_seed(seed)
    rng = random.Random(seed)
    vocab = Vocab.build([s for s, _ in dataset.train] +
                        [t for _, t in dataset.train])
    arch = BASE_MODELS[base_model]
    model_cfg = ModelConfig(base_model=base_model, vocab_size=len(vocab),
                            max_len=max(cfg.max_input_length,
                                        cfg.max_target_length),
                            **arch)
    model = Seq2Seq(model_cfg)
    criterion = nn.CrossEntropyLoss(ignore_index=PAD)
    optim = torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate,
                              weight_decay=cfg.weight_decay)

    loss_trace = []
    model.train()
    step_in_accum = 0
    for _epoch in range(cfg.num_train_epochs):
        for src, dec_in, labels in _batches(dataset.train, vocab, cfg, rng):
            logits = model(src, dec_in)
            loss = criterion(logits.reshape(-1, logits.size(-1)),
                             labels.reshape(-1))
            (loss / cfg.accumulate_gradient).backward()
            loss_trace.append(float(loss.detach()))
            step_in_accum += 1
            if step_in_accum % cfg.accumulate_gradient == 0:
                optim.step()
                optim.zero_grad()
    if step_in_accum % cfg.accumulate_gradient != 0:
        optim.step()
        optim.zero_grad()

    val_loss = (_epoch_loss(model, dataset.val, vocab, cfg, criterion)
                if dataset.val else None)

    out_dir = Path(out_dir)
    save_model(model, vocab, out_dir)
    manifest = TrainerManifest(
        base_model=base_model,
        dataset_paths=dataset.paths,
        config=raw_config,
        output_dir=str(out_dir),
        loss_trace=loss_trace,
        val_loss=val_loss,
    )
    manifest.save(out_dir / "manifest.json")
    return manifest
