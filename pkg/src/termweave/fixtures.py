"""Bundled offline demo fixture.

Writes a small German-English working set into a directory: a term
dictionary, segment records with two term sets each, a generic corpus,
line-aligned references and a ready-to-run TOML config wired to the mock
backends.  Everything is a pure function of the seed.
"""

from __future__ import annotations

import random
from pathlib import Path

from .records import BilingualPair, SegmentRecord, TermEntry, TermSet, write_jsonl

_TGT_HEADS = ["ministry", "committee", "directive", "framework", "registry",
              "protocol", "assessment", "inventory", "mandate", "charter"]
_TGT_MODS = ["federal science", "data protection", "climate research",
             "energy transition", "public health", "border control",
             "digital markets", "civil aviation", "food safety", "rail transport"]
_SRC_HEADS = ["ministerium", "ausschuss", "richtlinie", "rahmenwerk", "register",
              "protokoll", "bewertung", "verzeichnis", "mandat", "charta"]
_SRC_MODS = ["Bundeswissenschafts", "Datenschutz", "Klimaforschungs",
             "Energiewende", "Gesundheits", "Grenzkontroll",
             "Digitalmarkt", "Luftfahrt", "Lebensmittel", "Bahnverkehrs"]

_SRC_SENTENCES = [
    "Die Delegation hat {a} und {b} in der Sitzung ausführlich besprochen.",
    "Der Bericht über {a} wurde zusammen mit {b} von dem Ministerium veröffentlicht.",
    "Nach der Abstimmung ist {a} für die Region wichtiger als {b} geworden.",
]
_REF_SENTENCES = [
    "The delegation discussed the {a} and the {b} in detail during the session.",
    "The report on the {a} was published by the ministry together with the {b}.",
    "After the vote the {a} became more important for the region than the {b}.",
]
# variant embedding the English terms in the source, so the echo-translated
# output is already compliant and the post-editing stage has segments to skip
_SRC_COMPLIANT = "Das Gremium lobte {a} und {b} in dem offiziellen Bericht."
_REF_COMPLIANT = "The panel praised the {a} and the {b} in the official report."


def make_terms(n_terms: int, rng: random.Random) -> list:
    combos = [(i, j) for i in range(len(_TGT_MODS)) for j in range(len(_TGT_HEADS))]
    rng.shuffle(combos)
    terms = []
    for i, j in combos[:n_terms]:
        terms.append(TermEntry(
            src_term=_SRC_MODS[i] + _SRC_HEADS[j],
            tgt_term=f"{_TGT_MODS[i]} {_TGT_HEADS[j]}",
        ))
    return terms


def make_segments(terms: list, n_segments: int, rng: random.Random):
    segments, refs = [], []
    for k in range(n_segments):
        picks = rng.sample(terms, 4)
        set1 = TermSet(entries=picks[:2], label="set1")
        set2 = TermSet(entries=picks[2:], label="set2")
        compliant = rng.random() < 0.2
        if compliant:
            # embed the English terms so the echoed MT output contains them
            src = _SRC_COMPLIANT.format(a=picks[0].tgt_term, b=picks[1].tgt_term)
            ref = _REF_COMPLIANT.format(a=picks[0].tgt_term, b=picks[1].tgt_term)
        else:
            variant = rng.randrange(len(_SRC_SENTENCES))
            src = _SRC_SENTENCES[variant].format(a=picks[0].src_term,
                                                 b=picks[1].src_term)
            ref = _REF_SENTENCES[variant].format(a=picks[0].tgt_term,
                                                 b=picks[1].tgt_term)
        segments.append(SegmentRecord(
            id=f"seg{k:04d}", src=src,
            term_sets={"set1": set1, "set2": set2},
        ))
        refs.append(ref)
    return segments, refs


def make_generic(n_pairs: int, rng: random.Random) -> list:
    pairs = []
    for k in range(n_pairs):
        i = rng.randrange(len(_SRC_SENTENCES))
        a, b = rng.sample(_TGT_MODS, 2)
        pairs.append(BilingualPair(
            src=_SRC_SENTENCES[i].format(a=a, b=b) + f" ({k})",
            tgt=_REF_SENTENCES[i].format(a=a, b=b) + f" ({k})",
            origin="generic",
        ))
    return pairs


RUN_TOML = """\
[run]
src_lang = "de"
tgt_lang = "en"
seed = {seed}
work_dir = "{work_dir}"
offline = true

[backends]
llm = "mock"
mt = "mock"
scorer = "mock"

[datagen]
sentences_per_call = 5
temperatures = [0.0, 0.3]

[score]
sample_size = 100

[mixprep]
generic_sample_size = {generic_sample}

[ape]
temperatures = [0.0, 0.2]

[eval]
refs = "refs.txt"
"""


def make_fixture(out_dir, seed: int = 7, n_terms: int = 50,
                 n_segments: int = 200, n_generic: int = 300) -> Path:
    """Write the fixture files plus run.toml; returns the directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    terms = make_terms(n_terms, rng)
    with (out / "terms.tsv").open("w", encoding="utf-8") as f:
        for t in terms:
            f.write(f"{t.src_term}\t{t.tgt_term}\n")
    segments, refs = make_segments(terms, n_segments, rng)
    write_jsonl(out / "segments.jsonl", segments)
    (out / "refs.txt").write_text("\n".join(refs) + "\n", encoding="utf-8")
    write_jsonl(out / "generic.jsonl", make_generic(n_generic, rng))
    (out / "run.toml").write_text(
        RUN_TOML.format(seed=seed, work_dir=str(out).replace("\\", "/"),
                        generic_sample=min(200, n_generic)),
        encoding="utf-8",
    )
    return out
