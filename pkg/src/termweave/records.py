"""Core record types shared by all pipeline stages, plus JSONL persistence.

Corpora are exchanged as JSONL: one record per line, UTF-8, keys in a
stable order so that repeated runs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional


@dataclass(frozen=True)
class TermEntry:
    """A single source-term -> target-term mapping."""

    src_term: str
    tgt_term: str

    def __post_init__(self):
        for name, value in (("src_term", self.src_term), ("tgt_term", self.tgt_term)):
            if not value.strip():
                raise ValueError(f"{name} must be non-empty")
            if "\t" in value or "\n" in value:
                raise ValueError(f"{name} must not contain tabs or newlines")

    def to_dict(self) -> dict:
        return {"src": self.src_term, "tgt": self.tgt_term}

    @classmethod
    def from_dict(cls, d: dict) -> "TermEntry":
        return cls(src_term=d["src"], tgt_term=d["tgt"])


@dataclass
class BilingualPair:
    """One source/target sentence pair with provenance metadata."""

    src: str
    tgt: str
    origin: str = "synthetic"  # "synthetic" | "generic"
    seed_term: Optional[TermEntry] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.src or not self.tgt:
            raise ValueError("src and tgt must be non-empty")
        if self.origin not in ("synthetic", "generic"):
            raise ValueError(f"unknown origin {self.origin!r}")
        if self.origin == "synthetic" and self.seed_term is None:
            raise ValueError("synthetic pairs must carry a seed_term")

    def to_dict(self) -> dict:
        return {
            "src": self.src,
            "tgt": self.tgt,
            "seed_term": self.seed_term.to_dict() if self.seed_term else None,
            "origin": self.origin,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BilingualPair":
        seed = d.get("seed_term")
        return cls(
            src=d["src"],
            tgt=d["tgt"],
            origin=d.get("origin", "synthetic"),
            seed_term=TermEntry.from_dict(seed) if seed else None,
            meta=dict(d.get("meta") or {}),
        )


TERM_SET_LABELS = ("set1", "set2")


@dataclass
class TermSet:
    """The per-segment list of required term mappings; the task gives two."""

    entries: list  # list[TermEntry]; may be empty (some blind segments lack a set)
    label: str = "set1"

    def __post_init__(self):
        if self.label not in TERM_SET_LABELS:
            raise ValueError(f"label must be one of {TERM_SET_LABELS}")

    def to_list(self) -> list:
        return [e.to_dict() for e in self.entries]


@dataclass
class SegmentRecord:
    """A source segment with its term sets, MT output and post-edits.

    The unit flowing through translate -> termcheck -> ape -> eval.
    """

    id: str
    src: str
    term_sets: dict = field(default_factory=dict)  # label -> TermSet
    mt: Optional[str] = None
    ape: dict = field(default_factory=dict)  # label -> post-edited translation

    def __post_init__(self):
        for label in self.ape:
            if label not in TERM_SET_LABELS:
                raise ValueError(f"ape key {label!r} not a valid term-set label")

    def term_set(self, label: str) -> TermSet:
        ts = self.term_sets.get(label)
        if ts is None:
            return TermSet(entries=[], label=label)
        return ts

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "src": self.src,
            "term_sets": {label: ts.to_list() for label, ts in sorted(self.term_sets.items())},
            "mt": self.mt,
            "ape": dict(sorted(self.ape.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SegmentRecord":
        term_sets = {}
        for label, entries in (d.get("term_sets") or {}).items():
            term_sets[label] = TermSet(
                entries=[TermEntry.from_dict(e) for e in entries], label=label
            )
        return cls(
            id=str(d["id"]),
            src=d["src"],
            term_sets=term_sets,
            mt=d.get("mt"),
            ape=dict(d.get("ape") or {}),
        )


def write_jsonl(path, records: Iterable) -> int:
    """Write records (objects with to_dict, or plain dicts) to a JSONL file."""
    path = Path(path)
    n = 0
    with path.open("w", encoding="utf-8") as f:
        for rec in records:
            d = rec.to_dict() if hasattr(rec, "to_dict") else rec
            f.write(json.dumps(d, ensure_ascii=False, sort_keys=True))
            f.write("\n")
            n += 1
    return n


def read_jsonl(path) -> Iterator[dict]:
    with Path(path).open("r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                yield json.loads(line)


def read_pairs(path) -> list:
    return [BilingualPair.from_dict(d) for d in read_jsonl(path)]


def read_segments(path) -> list:
    return [SegmentRecord.from_dict(d) for d in read_jsonl(path)]


def read_terms_tsv(path) -> list:
    """Load a term dictionary from 2-column TSV (src_term TAB tgt_term)."""
    terms = []
    with Path(path).open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 tab-separated columns")
            terms.append(TermEntry(src_term=parts[0].strip(), tgt_term=parts[1].strip()))
    return terms
