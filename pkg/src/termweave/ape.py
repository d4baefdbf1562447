"""Terminology-constrained automatic post-editing.

For each segment and term set, translations that miss required terms are
sent to the chat LLM with an insertion prompt; candidates from the
temperature sweep are ranked by how many of the originally-missing terms
they fix, and the best one (or the untouched MT output) is kept.  Keeping
the MT output whenever nothing improves makes term coverage monotone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .backends import BackendError, ChatRequest
from .records import SegmentRecord, TermEntry
from .termcheck import contains_term

APE_PROMPT_HEAD = 'In the following {tgt_lang} translation, use the "{tgt_term}" to translate the {src_lang} term "{src_term}"'
APE_PROMPT_MORE = ', and the "{tgt_term}" to translate the {src_lang} term "{src_term}"'
APE_PROMPT_TAIL = ". Leave everything else the same.\n\n{src_lang}: {src}\n{tgt_lang}: {translation}"


@dataclass
class ApeConfig:
    temperatures: tuple = (0.0, 0.2)
    top_p: float = 1.0
    max_terms_per_prompt: int | None = None
    model_id: str = "gpt-3.5-turbo"
    # strict mode re-checks the whole term set and prefers candidates that
    # do not break previously-present terms; off by default
    strict: bool = False
    tgt_lang: str = "en"
    match_mode: str | None = None

    def __post_init__(self):
        if not self.temperatures:
            raise ValueError("temperatures must be non-empty")


@dataclass
class ApeOutcome:
    chosen: str
    candidates: list = field(default_factory=list)  # (temperature, text, fixed_count)
    skipped: bool = False
    improved: bool = False
    errors: list = field(default_factory=list)


@dataclass
class ApeStats:
    skipped: int = 0
    improved: int = 0
    unimproved: int = 0
    llm_calls: int = 0

    def to_dict(self) -> dict:
        return {"skipped": self.skipped, "improved": self.improved,
                "unimproved": self.unimproved, "llm_calls": self.llm_calls}


def missing_terms(record: SegmentRecord, label: str, translation: str,
                  tgt_lang: str = "en", mode: str | None = None) -> list:
    """Entries whose target term is absent from the translation, in set order."""
    return [e for e in record.term_set(label).entries
            if not contains_term(translation, e.tgt_term, tgt_lang, mode)]


def build_ape_prompt(record: SegmentRecord, missing: list, translation: str,
                     src_lang_name: str, tgt_lang_name: str) -> str:
    """Instantiate the insertion prompt for the segment's missing terms."""
    if not missing:
        raise ValueError("missing must be non-empty")
    head = APE_PROMPT_HEAD.format(
        tgt_lang=tgt_lang_name, tgt_term=missing[0].tgt_term,
        src_lang=src_lang_name, src_term=missing[0].src_term,
    )
    clauses = "".join(
        APE_PROMPT_MORE.format(tgt_term=t.tgt_term, src_lang=src_lang_name,
                               src_term=t.src_term)
        for t in missing[1:]
    )
    tail = APE_PROMPT_TAIL.format(
        src_lang=src_lang_name, src=record.src,
        tgt_lang=tgt_lang_name, translation=translation,
    )
    return head + clauses + tail


def _count_fixed(candidate: str, missing: list, tgt_lang: str, mode) -> int:
    return sum(1 for e in missing
               if contains_term(candidate, e.tgt_term, tgt_lang, mode))


def _regressions(candidate: str, record, label, originally_present: list,
                 tgt_lang: str, mode) -> int:
    return sum(1 for e in originally_present
               if not contains_term(candidate, e.tgt_term, tgt_lang, mode))


def post_edit_segment(record: SegmentRecord, label: str, cfg: ApeConfig, llm,
                      src_lang_name: str = "German", tgt_lang_name: str = "English",
                      chat=None, stats: ApeStats | None = None) -> ApeOutcome:
    """Post-edit one segment against one term set.

    Already-compliant segments are skipped without any LLM call.  Among the
    temperature sweep's candidates the one fixing the most originally-missing
    terms wins; ties go to the lower temperature; if nothing fixes anything,
    the original MT output is kept.
    """
    if record.mt is None:
        raise ValueError(f"segment {record.id}: no MT output to post-edit")
    call = chat if chat is not None else llm.chat
    missing = missing_terms(record, label, record.mt, cfg.tgt_lang, cfg.match_mode)
    if not missing:
        if stats:
            stats.skipped += 1
        return ApeOutcome(chosen=record.mt, skipped=True)

    present = [e for e in record.term_set(label).entries if e not in missing]
    chunks = [missing]
    if cfg.max_terms_per_prompt and len(missing) > cfg.max_terms_per_prompt:
        k = cfg.max_terms_per_prompt
        chunks = [missing[i:i + k] for i in range(0, len(missing), k)]

    outcome = ApeOutcome(chosen=record.mt)
    for temperature in cfg.temperatures:
        text = record.mt
        errored = False
        for chunk in chunks:
            prompt = build_ape_prompt(record, chunk, text, src_lang_name, tgt_lang_name)
            req = ChatRequest.user(cfg.model_id, prompt,
                                   temperature=float(temperature), top_p=cfg.top_p)
            try:
                if stats:
                    stats.llm_calls += 1
                text = call(req)
            except BackendError as err:
                outcome.errors.append(str(err))
                errored = True
                break
        if errored:
            continue
        fixed = _count_fixed(text, missing, cfg.tgt_lang, cfg.match_mode)
        outcome.candidates.append((float(temperature), text, fixed))

    def rank(cand):
        temperature, text, fixed = cand
        regressions = (_regressions(text, record, label, present,
                                    cfg.tgt_lang, cfg.match_mode)
                       if cfg.strict else 0)
        # max fixed, min regressions, then lower temperature wins ties
        return (-fixed, regressions, temperature)

    winners = sorted(outcome.candidates, key=rank)
    if winners and winners[0][2] > 0:
        outcome.chosen = winners[0][1]
        outcome.improved = True
        if stats:
            stats.improved += 1
    else:
        if stats:
            stats.unimproved += 1
    return outcome


def post_edit_corpus(records: list, label: str, cfg: ApeConfig, llm,
                     src_lang_name: str = "German", tgt_lang_name: str = "English",
                     chat=None):
    """Fill ape[label] for every record; per-segment failures degrade to the MT output."""
    stats = ApeStats()
    for record in records:
        if record.mt is None:
            raise ValueError(f"segment {record.id}: no MT output to post-edit")
    for record in records:
        outcome = post_edit_segment(record, label, cfg, llm,
                                    src_lang_name, tgt_lang_name,
                                    chat=chat, stats=stats)
        record.ape[label] = outcome.chosen
    return records, stats
