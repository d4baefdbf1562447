"""Corpus filtering: exact deduplication followed by dual language-ID checks.

Duplicates are byte-exact (src, tgt) matches after NFC normalisation and
trimming; no case folding.  A pair survives language ID only if both sides
are detected as the expected language by BOTH detectors, each at or above
its threshold.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

from .languages import NON_SPACE_DELIMITED


@dataclass
class FilterConfig:
    expected_src_lang: str = "de"
    expected_tgt_lang: str = "en"
    primary_threshold: float = 0.9
    secondary_threshold: float = 0.9

    def __post_init__(self):
        for name, t in (("primary_threshold", self.primary_threshold),
                        ("secondary_threshold", self.secondary_threshold)):
            if not 0 <= t <= 1:
                raise ValueError(f"{name} must be in [0, 1]")


@dataclass(frozen=True)
class LangDetection:
    lang: str
    confidence: float

    def __post_init__(self):
        if not 0 <= self.confidence <= 1:
            raise ValueError("confidence must be in [0, 1]")


@dataclass
class FilterStats:
    input_count: int = 0
    after_dedup: int = 0
    after_langid: int = 0
    drop_reasons: dict = field(default_factory=dict)

    def record_drop(self, reason: str):
        self.drop_reasons[reason] = self.drop_reasons.get(reason, 0) + 1

    def to_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "after_dedup": self.after_dedup,
            "after_langid": self.after_langid,
            "drop_reasons": dict(sorted(self.drop_reasons.items())),
        }


def _dedup_key(text: str) -> str:
    return unicodedata.normalize("NFC", text).strip()


def dedup(pairs: list) -> list:
    """Keep the first occurrence of each (src, tgt); preserve order."""
    seen = set()
    out = []
    for pair in pairs:
        key = (_dedup_key(pair.src), _dedup_key(pair.tgt))
        if key not in seen:
            seen.add(key)
            out.append(pair)
    return out


class TableDetector:
    """Deterministic table-driven detector: exact text -> (lang, confidence)."""

    def __init__(self, table: dict, default: LangDetection | None = None):
        self.table = {k: (v if isinstance(v, LangDetection) else LangDetection(*v))
                      for k, v in table.items()}
        self.default = default

    def detect(self, text: str) -> LangDetection:
        det = self.table.get(text, self.default)
        if det is None:
            raise KeyError(f"no detection for text {text!r}")
        return det


# Small function-word lists; enough to separate the pipeline's working
# languages deterministically without a real model.
_STOPWORDS = {
    "de": {"der", "die", "das", "und", "ist", "dem", "den", "für", "von", "nicht",
           "eine", "ein", "wurde", "dass", "sehr", "im", "mit"},
    "en": {"the", "and", "is", "of", "was", "for", "that", "very", "in", "by",
           "a", "an", "to", "said", "number"},
    "cs": {"a", "je", "ve", "na", "pro", "že", "byla", "velmi", "číslo", "zprávě"},
}


class StopwordDetector:
    """Heuristic deterministic detector based on scripts and function words.

    Han characters dominate -> zh.  Otherwise the language whose function
    words cover the most tokens wins; confidence grows with the margin.
    Ships as the offline stand-in for real language-ID models.
    """

    def __init__(self, confident: float = 0.99):
        self.confident = confident

    def detect(self, text: str) -> LangDetection:
        if not text.strip():
            return LangDetection("und", 0.0)
        han = sum(1 for ch in text if "一" <= ch <= "鿿")
        if han >= max(1, len(text) // 4):
            return LangDetection("zh", self.confident)
        tokens = [t.strip('.,;:!?"()«»').lower() for t in text.split()]
        tokens = [t for t in tokens if t]
        if not tokens:
            return LangDetection("und", 0.0)
        hits = {lang: sum(1 for t in tokens if t in words)
                for lang, words in _STOPWORDS.items()}
        # Czech diacritics are a strong signal English/German lack
        if any(ch in "ěščřžýáíéůú" for ch in text.lower()):
            hits["cs"] = hits.get("cs", 0) + 3
        best = max(hits, key=lambda l: (hits[l], l))
        if hits[best] == 0:
            return LangDetection("und", 0.1)
        ranked = sorted(hits.values(), reverse=True)
        margin = ranked[0] - (ranked[1] if len(ranked) > 1 else 0)
        confidence = self.confident if margin >= 1 else 0.5
        return LangDetection(best, confidence)


def _side_ok(text: str, expected: str, cfg: FilterConfig, det1, det2,
             stats: FilterStats | None, side: str) -> bool:
    for det, threshold, name in ((det1, cfg.primary_threshold, "primary"),
                                 (det2, cfg.secondary_threshold, "secondary")):
        try:
            d = det.detect(text)
        except Exception:
            if stats:
                stats.record_drop(f"{side}_{name}_detector_error")
            return False
        if d.lang != expected:
            if stats:
                stats.record_drop(f"{side}_{name}_wrong_lang")
            return False
        if d.confidence < threshold:
            if stats:
                stats.record_drop(f"{side}_{name}_low_confidence")
            return False
    return True


def passes_langid(pair, cfg: FilterConfig, det1, det2,
                  stats: FilterStats | None = None) -> bool:
    """True iff both sides pass both detectors at their thresholds (>=)."""
    return (_side_ok(pair.src, cfg.expected_src_lang, cfg, det1, det2, stats, "src")
            and _side_ok(pair.tgt, cfg.expected_tgt_lang, cfg, det1, det2, stats, "tgt"))


def filter_corpus(pairs: list, cfg: FilterConfig, det1, det2):
    """Dedup the whole corpus, then language-ID filter; returns (survivors, stats)."""
    stats = FilterStats(input_count=len(pairs))
    deduped = dedup(pairs)
    stats.after_dedup = len(deduped)
    dropped_dups = stats.input_count - stats.after_dedup
    if dropped_dups:
        stats.drop_reasons["duplicate"] = dropped_dups
    survivors = [p for p in deduped if passes_langid(p, cfg, det1, det2, stats)]
    stats.after_langid = len(survivors)
    return survivors, stats


def subset_head(pairs: list, k: int) -> list:
    """First k pairs; one of two subsetting modes for capping corpus size."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return pairs[:k]


def subset_random(pairs: list, k: int, seed: int) -> list:
    """Uniform sample of k pairs without replacement, in original order."""
    import random

    if not 0 <= k <= len(pairs):
        raise ValueError("k must be in [0, len(pairs)]")
    idx = sorted(random.Random(seed).sample(range(len(pairs)), k))
    return [pairs[i] for i in idx]
