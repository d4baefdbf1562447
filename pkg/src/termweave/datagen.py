"""Terminology-seeded bilingual data generation.

Builds the generation prompt for each term, sweeps the configured
temperatures through the chat backend and parses replies into
BilingualPair records.  Parsing tolerates the reply shapes real LLMs
actually produce; malformed entries are dropped, never guessed.
"""

from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass, field
from typing import Optional

from .backends import BackendError, ChatRequest
from .languages import lang_code
from .records import BilingualPair, TermEntry

GEN_PROMPT_TEMPLATE = (
    'Please use the "{term}" to generate just {n} numbered sentences '
    "in {src}-{tgt} in one Python dictionary format."
)


@dataclass
class GenConfig:
    src_lang_name: str = "German"
    tgt_lang_name: str = "English"
    sentences_per_call: int = 20
    temperatures: tuple = (0.0, 0.3)
    top_p: float = 1.0
    model_id: str = "gpt-3.5-turbo"
    # seed prompts with the source term as well (helps when the target
    # language is not the shared term language); off by default
    seed_with_both_terms: bool = False
    lang_names_extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sentences_per_call < 1:
            raise ValueError("sentences_per_call must be >= 1")
        if not self.temperatures:
            raise ValueError("temperatures must be non-empty")
        if any(t < 0 for t in self.temperatures):
            raise ValueError("temperatures must be >= 0")

    @property
    def src_code(self) -> str:
        return lang_code(self.src_lang_name, self.lang_names_extra)

    @property
    def tgt_code(self) -> str:
        return lang_code(self.tgt_lang_name, self.lang_names_extra)


@dataclass
class ParseDiagnostics:
    """Counts of entries dropped by the reply parser, by reason."""

    dropped: int = 0
    reasons: dict = field(default_factory=dict)

    def drop(self, reason: str):
        self.dropped += 1
        self.reasons[reason] = self.reasons.get(reason, 0) + 1


class DatagenError(Exception):
    pass


def build_gen_prompt(term: TermEntry, cfg: GenConfig) -> str:
    """Render the generation prompt for one term; pure template substitution."""
    seed = term.tgt_term
    if cfg.seed_with_both_terms:
        seed = f"{term.src_term}" + '" and the "' + term.tgt_term
    return GEN_PROMPT_TEMPLATE.format(
        term=seed, n=cfg.sentences_per_call,
        src=cfg.src_lang_name, tgt=cfg.tgt_lang_name,
    )


_NUMBERED_LINE_RE = re.compile(r"^\s*(\d+)[.):]\s*(.*)$")
_SEPARATORS = ("||", "|", "\t", " - ")


def _match_lang_key(key: str, cfg: GenConfig) -> Optional[str]:
    """Classify a dict key as 'src' or 'tgt', or None if unidentifiable."""
    k = key.strip().lower()
    if k in (cfg.src_code, cfg.src_lang_name.lower()):
        return "src"
    if k in (cfg.tgt_code, cfg.tgt_lang_name.lower()):
        return "tgt"
    return None


def _pairs_from_obj(obj, cfg: GenConfig, diag: ParseDiagnostics) -> list:
    """Extract (src, tgt) pairs from a parsed dict/list reply."""
    if isinstance(obj, dict):
        # either {index: {lang: text, ...}} or a single {lang: text} entry
        if all(isinstance(v, str) for v in obj.values()):
            entries = [obj]
        else:
            def sort_key(kv):
                k = str(kv[0])
                return (0, int(k)) if k.isdigit() else (1, k)
            entries = [v for _k, v in sorted(obj.items(), key=sort_key)]
    elif isinstance(obj, list):
        entries = obj
    else:
        return []
    pairs = []
    for entry in entries:
        if not isinstance(entry, dict):
            diag.drop("entry_not_mapping")
            continue
        sides = {}
        for key, value in entry.items():
            side = _match_lang_key(str(key), cfg)
            if side and isinstance(value, str):
                sides[side] = value.strip()
        if sides.get("src") and sides.get("tgt"):
            pairs.append((sides["src"], sides["tgt"]))
        else:
            diag.drop("missing_side")
    return pairs


def _parse_dict_shape(raw: str, cfg: GenConfig, diag: ParseDiagnostics) -> list:
    text = raw.strip()
    # tolerate code fences around the dictionary
    fence = re.match(r"^```[a-zA-Z]*\n(.*)\n```$", text, re.DOTALL)
    if fence:
        text = fence.group(1).strip()
    start, end = text.find("{"), text.rfind("}")
    if start < 0 or end <= start:
        return []
    blob = text[start:end + 1]
    for parser in (json.loads, ast.literal_eval):
        try:
            obj = parser(blob)
        except (ValueError, SyntaxError):
            continue
        return _pairs_from_obj(obj, cfg, diag)
    return []


def _parse_separated_lines(raw: str, diag: ParseDiagnostics) -> list:
    pairs = []
    saw_numbered = False
    for line in raw.splitlines():
        m = _NUMBERED_LINE_RE.match(line)
        if not m:
            continue
        saw_numbered = True
        body = m.group(2)
        for sep in _SEPARATORS:
            if sep in body:
                src, _, tgt = body.partition(sep)
                src, tgt = src.strip(), tgt.strip()
                if src and tgt:
                    pairs.append((src, tgt))
                else:
                    diag.drop("empty_side")
                break
        else:
            if saw_numbered:
                diag.drop("no_separator")
    return pairs


def _parse_alternating_lines(raw: str, diag: ParseDiagnostics) -> list:
    """Numbered source line followed by an unnumbered (or labelled) target line."""
    pairs = []
    pending_src = None
    for line in raw.splitlines():
        line = line.strip()
        if not line:
            continue
        m = _NUMBERED_LINE_RE.match(line)
        if m:
            if pending_src is not None:
                diag.drop("missing_target_line")
            pending_src = m.group(2).strip() or None
        elif pending_src is not None:
            tgt = re.sub(r"^[A-Za-z]+\s*:\s*", "", line).strip()
            if tgt:
                pairs.append((pending_src, tgt))
            else:
                diag.drop("empty_side")
            pending_src = None
    if pending_src is not None:
        diag.drop("missing_target_line")
    return pairs


def parse_gen_response(raw: str, term: TermEntry, cfg: GenConfig,
                       diag: Optional[ParseDiagnostics] = None) -> list:
    """Parse an LLM generation reply into BilingualPair records.

    Reply shapes tried in order: a dictionary-like object keyed by index,
    numbered lines with a separator, and alternating numbered source /
    target lines.  Returns an empty list when nothing parses.
    """
    diag = diag if diag is not None else ParseDiagnostics()
    for parse in (
        lambda: _parse_dict_shape(raw, cfg, diag),
        lambda: _parse_separated_lines(raw, diag),
        lambda: _parse_alternating_lines(raw, diag),
    ):
        pairs = parse()
        if pairs:
            break
    else:
        pairs = []
    out = []
    for src, tgt in pairs[: cfg.sentences_per_call]:
        out.append(BilingualPair(src=src, tgt=tgt, origin="synthetic", seed_term=term))
    return out


def generate_for_terms(terms: list, cfg: GenConfig, llm, diag: Optional[ParseDiagnostics] = None,
                       chat=None) -> list:
    """Generate pairs for every term across the configured temperature sweep.

    chat, when given, replaces llm.chat (the CLI passes a cache-wrapped
    callable).  Per-call failures are tolerated; a term whose every call
    fails raises DatagenError naming it.
    """
    if not terms:
        raise DatagenError("no terms to generate for")
    call = chat if chat is not None else llm.chat
    diag = diag if diag is not None else ParseDiagnostics()
    out = []
    for term in terms:
        prompt = build_gen_prompt(term, cfg)
        term_pairs = []
        errors = []
        for temperature in cfg.temperatures:
            req = ChatRequest.user(cfg.model_id, prompt,
                                   temperature=float(temperature), top_p=cfg.top_p)
            try:
                raw = call(req)
            except BackendError as err:
                errors.append(err)
                continue
            for pair in parse_gen_response(raw, term, cfg, diag):
                pair.meta.update({
                    "model": cfg.model_id,
                    "temperature": repr(float(temperature)),
                    "call": req.digest()[:12],
                })
                term_pairs.append(pair)
        if errors and len(errors) == len(cfg.temperatures):
            raise DatagenError(
                f"all generation calls failed for term {term.tgt_term!r}: {errors[0]}"
            )
        out.extend(term_pairs)
    return out
