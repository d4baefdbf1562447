"""Term-usage checking: does a translation contain its required terms?

Produces the Total/Used coverage counts per term set and the averaged
percentage used in the coverage tables.  The matching rule is configurable
(exact | boundary | substring); the default is case-insensitive matching
of the term's token sequence at word boundaries for space-delimited
languages, and case-insensitive substring search otherwise.  Morphological
variants do not count as matches.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from .languages import is_space_delimited
from .scoring import round_half_up

MATCH_MODES = ("exact", "boundary", "substring")


@dataclass
class CoverageCounts:
    total: int = 0
    used: int = 0
    skipped_records: int = 0  # records lacking the selected translation

    def __post_init__(self):
        if self.used > self.total:
            raise ValueError("used cannot exceed total")

    def pct(self) -> float:
        if self.total == 0:
            raise ZeroDivisionError("no required term instances")
        return 100.0 * self.used / self.total

    def to_dict(self) -> dict:
        return {"total": self.total, "used": self.used,
                "skipped_records": self.skipped_records}


def _norm(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def contains_term(translation: str, term: str, lang: str = "en",
                  mode: str | None = None) -> bool:
    """True if the translation contains the term under the matching rule."""
    if not term:
        raise ValueError("term must be non-empty")
    if mode is None:
        mode = "boundary" if is_space_delimited(lang) else "substring"
    if mode not in MATCH_MODES:
        raise ValueError(f"unknown match mode {mode!r}")
    hay, needle = _norm(translation), _norm(term)
    if mode != "exact":
        hay, needle = hay.casefold(), needle.casefold()
    if mode == "substring":
        return needle in hay
    # token-sequence match at word boundaries; internal whitespace is elastic
    tokens = needle.split()
    pattern = r"(?<!\w)" + r"\s+".join(re.escape(t) for t in tokens) + r"(?!\w)"
    return re.search(pattern, hay) is not None


def _selected_translation(record, which: str, label: str):
    if which == "mt":
        return record.mt
    if which == "ape":
        return record.ape.get(label)
    raise ValueError(f"which_translation must be 'mt' or 'ape', got {which!r}")


def coverage(records: list, which_translation: str, label: str,
             lang: str = "en", mode: str | None = None) -> CoverageCounts:
    """Count required term instances (total) and those present (used).

    Records lacking the selected translation are skipped and tallied.
    Duplicate entries in a set are distinct required instances.
    """
    counts = CoverageCounts()
    for record in records:
        entries = record.term_set(label).entries
        translation = _selected_translation(record, which_translation, label)
        if translation is None:
            if entries:
                counts.skipped_records += 1
            continue
        for entry in entries:
            counts.total += 1
            if contains_term(translation, entry.tgt_term, lang, mode):
                counts.used += 1
    return counts


@dataclass
class AvgPct:
    value: float
    flagged: bool = False  # True when one set had no required instances


def avg_pct_detail(c1: CoverageCounts, c2: CoverageCounts) -> AvgPct:
    """Mean of the two per-set percentages, half-up to 2 decimals.

    A set with zero total has no defined percentage; the other set is
    reported alone and the row flagged.  Both zero is an error.
    """
    pcts = [c.pct() for c in (c1, c2) if c.total > 0]
    if not pcts:
        raise ValueError("both term sets have zero required instances")
    return AvgPct(value=round_half_up(sum(pcts) / len(pcts)), flagged=len(pcts) < 2)


def avg_pct(c1: CoverageCounts, c2: CoverageCounts) -> float:
    return avg_pct_detail(c1, c2).value


def avg_pct_unrounded(c1: CoverageCounts, c2: CoverageCounts) -> float:
    """Unrounded per-row average, for feeding cross-pair system means."""
    pcts = [c.pct() for c in (c1, c2) if c.total > 0]
    if not pcts:
        raise ValueError("both term sets have zero required instances")
    return sum(pcts) / len(pcts)


def cross_pair_mean(row_values: list) -> float:
    """Unweighted mean of per-pair (unrounded) averages, half-up to 2 decimals."""
    if not row_values:
        raise ValueError("no rows to average")
    return round_half_up(sum(row_values) / len(row_values))
