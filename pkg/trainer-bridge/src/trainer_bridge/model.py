"""A small word-level transformer seq2seq model with save/load, beam-search
decoding and teacher-forced log-probability scoring.

Scale is deliberately tiny: the point is proving the file and wire
contracts end to end, not translation quality.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from torch import nn

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ["<pad>", "<bos>", "<eos>", "<unk>"]

# base_model id -> architecture hyperparameters
BASE_MODELS = {
    "tiny-transformer": dict(d_model=64, nhead=2, num_layers=1, dim_ff=128),
    "small-transformer": dict(d_model=128, nhead=4, num_layers=2, dim_ff=256),
}


class Vocab:
    def __init__(self, tokens: list):
        self.itos = SPECIALS + tokens
        self.stoi = {t: i for i, t in enumerate(self.itos)}

    def __len__(self):
        return len(self.itos)

    @classmethod
    def build(cls, lines: list) -> "Vocab":
        seen = {}
        for line in lines:
            for token in line.split():
                seen.setdefault(token, None)
        return cls(list(seen))

    def encode(self, line: str, max_len: int) -> list:
        ids = [self.stoi.get(t, UNK) for t in line.split()]
        return ids[:max_len]

    def decode(self, ids: list) -> str:
        return " ".join(self.itos[i] for i in ids
                        if i not in (PAD, BOS, EOS))


@dataclass
class ModelConfig:
    base_model: str
    vocab_size: int
    d_model: int
    nhead: int
    num_layers: int
    dim_ff: int
    max_len: int = 256


class Seq2Seq(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.embed = nn.Embedding(cfg.vocab_size, cfg.d_model, padding_idx=PAD)
        self.pos = nn.Embedding(cfg.max_len + 2, cfg.d_model)
        self.transformer = nn.Transformer(
            d_model=cfg.d_model, nhead=cfg.nhead,
            num_encoder_layers=cfg.num_layers, num_decoder_layers=cfg.num_layers,
            dim_feedforward=cfg.dim_ff, dropout=0.1, batch_first=True,
        )
        self.out = nn.Linear(cfg.d_model, cfg.vocab_size)

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.size(1), device=ids.device).unsqueeze(0)
        return self.embed(ids) + self.pos(positions)

    def forward(self, src: torch.Tensor, dec_in: torch.Tensor) -> torch.Tensor:
        """Logits over the vocabulary for every decoder position."""
        n = dec_in.size(1)
        causal = torch.triu(torch.ones(n, n, dtype=torch.bool,
                                       device=src.device), diagonal=1)
        hidden = self.transformer(
            self._embed(src), self._embed(dec_in),
            tgt_mask=causal,
            src_key_padding_mask=src == PAD,
            tgt_key_padding_mask=dec_in == PAD,
            memory_key_padding_mask=src == PAD,
        )
        return self.out(hidden)


def save_model(model: Seq2Seq, vocab: Vocab, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "model_config.json").write_text(
        json.dumps(asdict(model.cfg), indent=2) + "\n", encoding="utf-8")
    (out_dir / "vocab.json").write_text(
        json.dumps(vocab.itos, ensure_ascii=False) + "\n", encoding="utf-8")
    torch.save(model.state_dict(), out_dir / "weights.pt")


def load_model(model_dir):
    model_dir = Path(model_dir)
    cfg = ModelConfig(**json.loads(
        (model_dir / "model_config.json").read_text(encoding="utf-8")))
    itos = json.loads((model_dir / "vocab.json").read_text(encoding="utf-8"))
    vocab = Vocab(itos[len(SPECIALS):])
    model = Seq2Seq(cfg)
    model.load_state_dict(torch.load(model_dir / "weights.pt",
                                     weights_only=True))
    model.eval()
    return model, vocab


@torch.no_grad()
def translate(model: Seq2Seq, vocab: Vocab, texts: list, beam_size: int = 4,
              max_len: int = 32) -> list:
    """Deterministic beam-search decoding, one text at a time."""
    model.eval()
    out = []
    for text in texts:
        ids = vocab.encode(text, model.cfg.max_len) or [UNK]
        src = torch.tensor([ids])
        # beams: (cumulative log-prob, token list, finished)
        beams = [(0.0, [BOS], False)]
        for _ in range(max_len):
            if all(done for _, _, done in beams):
                break
            expanded = []
            for logp, seq, done in beams:
                if done:
                    expanded.append((logp, seq, done))
                    continue
                dec_in = torch.tensor([seq])
                logits = model(src, dec_in)[0, -1]
                logprobs = torch.log_softmax(logits, dim=-1)
                top = torch.topk(logprobs, beam_size)
                for score, token in zip(top.values.tolist(),
                                        top.indices.tolist()):
                    expanded.append((logp + score, seq + [token],
                                     token == EOS))
            # stable order: score desc, then token sequence, for determinism
            expanded.sort(key=lambda b: (-b[0], b[1]))
            beams = expanded[:beam_size]
        best = max(beams, key=lambda b: b[0])
        out.append(vocab.decode(best[1]))
    return out


@torch.no_grad()
def score_pairs(model: Seq2Seq, vocab: Vocab, pairs: list) -> list:
    """Average log-probability per target token (EOS included) for each pair."""
    model.eval()
    scores = []
    for src_text, tgt_text in pairs:
        src_ids = vocab.encode(src_text, model.cfg.max_len) or [UNK]
        tgt_ids = vocab.encode(tgt_text, model.cfg.max_len) or [UNK]
        src = torch.tensor([src_ids])
        dec_in = torch.tensor([[BOS] + tgt_ids])
        labels = torch.tensor([tgt_ids + [EOS]])
        logits = model(src, dec_in)
        logprobs = torch.log_softmax(logits, dim=-1)
        picked = logprobs[0].gather(1, labels[0].unsqueeze(1)).squeeze(1)
        scores.append(float(picked.mean()))
    return scores


def token_count(vocab: Vocab, text: str) -> int:
    return max(len(text.split()), 1)


def perplexity_proxy(score: float) -> float:
    return math.exp(-score)
