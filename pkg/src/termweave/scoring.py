"""Dual-direction quality scoring of the synthetic corpus.

Each pair is scored as an average log-probability per target token by the
scorer backend; corpus quality is reported as exp(mean(log-probs)), the
geometric-mean probability, side by side with a baseline obtained by
letting the reference MT model translate the same sources and score its
own output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from .backends import ScoreRequest, TranslateRequest


@dataclass
class ScoreConfig:
    beam_size: int = 4
    # faithful to the reference batching constant, even if it looks like a
    # typo for 2048; configurable, never silently changed
    max_batch_tokens: int = 2024

    def __post_init__(self):
        if self.beam_size < 1 or self.max_batch_tokens < 1:
            raise ValueError("beam_size and max_batch_tokens must be positive")


def round_half_up(value: float, places: int = 2) -> float:
    """Decimal half-up rounding (0.575 -> 0.58), unlike float banker's rounding."""
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def mean_exp_score(pairs: list, direction: tuple, scorer,
                   cfg: ScoreConfig | None = None) -> float:
    """exp of the mean per-pair log-probability; in (0, 1]."""
    if not pairs:
        raise ValueError("pairs must be non-empty")
    cfg = cfg or ScoreConfig()
    src_lang, tgt_lang = direction
    req = ScoreRequest(
        source_lang=src_lang, target_lang=tgt_lang,
        pairs=tuple((p.src, p.tgt) for p in pairs),
        max_batch_tokens=cfg.max_batch_tokens,
    )
    scores = scorer.score_pairs(req)
    return math.exp(sum(scores) / len(scores))


def baseline_self_score(sources: list, direction: tuple, mt, scorer,
                        cfg: ScoreConfig | None = None) -> float:
    """Translate the sources with the reference model, then score its own output."""
    if not sources:
        raise ValueError("sources must be non-empty")
    cfg = cfg or ScoreConfig()
    src_lang, tgt_lang = direction
    translations = mt.translate(TranslateRequest(
        source_lang=src_lang, target_lang=tgt_lang,
        texts=tuple(sources), beam_size=cfg.beam_size,
    ))
    req = ScoreRequest(
        source_lang=src_lang, target_lang=tgt_lang,
        pairs=tuple((s, t) for s, t in zip(sources, translations) if t),
        max_batch_tokens=cfg.max_batch_tokens,
    )
    scores = scorer.score_pairs(req)
    return math.exp(sum(scores) / len(scores))


@dataclass
class QualityReport:
    """Per-direction candidate/baseline scores with per-pair averages."""

    rows: list = field(default_factory=list)  # QualityRow | averaged dict rows

    def to_dict(self) -> dict:
        return {"rows": self.rows}

    def to_text(self) -> str:
        header = f"{'Lang':<8}{'Candidate':>10}{'Baseline':>10}{'Diff.':>8}"
        lines = [header, "-" * len(header)]
        for row in self.rows:
            lines.append(
                f"{row['direction']:<8}{row['candidate']:>10.2f}"
                f"{row['baseline']:>10.2f}{row['diff']:>8.2f}"
            )
        return "\n".join(lines)

    def save(self, json_path, txt_path):
        with open(json_path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")
        with open(txt_path, "w", encoding="utf-8") as f:
            f.write(self.to_text() + "\n")


def decimal_mean(values: list) -> float:
    """Mean computed in decimal, so displayed-value averages round predictably."""
    total = sum(Decimal(repr(v)) for v in values)
    return float(total / len(values))


def build_quality_report(results: dict) -> QualityReport:
    """Assemble per-direction results into rows plus per-pair average rows.

    results maps a direction string like "DE-EN" to (candidate, baseline).
    Directions are grouped into language pairs by their unordered code set;
    each pair must have both directions.
    """
    groups: dict = {}
    for direction in results:
        a, b = direction.split("-")
        groups.setdefault(frozenset((a, b)), []).append(direction)
    report = QualityReport()
    for key in sorted(groups, key=lambda k: sorted(groups[k])[0]):
        directions = groups[key]
        if len(directions) != 2:
            pair = "-".join(sorted(key))
            raise ValueError(f"language pair {pair}: missing direction "
                             f"(only {directions[0]} present)")
        cand_vals, base_vals = [], []
        for direction in directions:
            cand, base = results[direction]
            cand_r, base_r = round_half_up(cand), round_half_up(base)
            cand_vals.append(cand)
            base_vals.append(base)
            report.rows.append({
                "direction": direction,
                "candidate": cand_r,
                "baseline": base_r,
                "diff": round_half_up(base_r - cand_r),
            })
        # the averaged row's diff comes from the displayed (rounded) averages,
        # matching how such tables are conventionally assembled; the mean is
        # taken in decimal so e.g. (0.58 + 0.49) / 2 rounds up to 0.54
        cand_avg = round_half_up(decimal_mean(cand_vals))
        base_avg = round_half_up(decimal_mean(base_vals))
        report.rows.append({
            "direction": "Avg.",
            "candidate": cand_avg,
            "baseline": base_avg,
            "diff": round_half_up(base_avg - cand_avg),
        })
    return report
