"""Corpus-level sentence-quality metrics: BLEU and chrF++.

BLEU uses modified n-gram precisions for n=1..4, their geometric mean and
the brevity penalty, with a moses/mteval-13a-compatible tokenizer selected
by id so tests can pin it.  chrF++ uses character n-grams 1..6 and word
n-grams 1..2 with beta=2, aggregated at corpus level and averaged across
all orders.  Both are reported x100.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

BLEU_MAX_ORDER = 4
CHRF_CHAR_ORDER = 6
CHRF_WORD_ORDER = 2
CHRF_BETA = 2.0
_CHRF_EPS = 1e-16

_PUNCTUATION = set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")


@dataclass
class MetricScore:
    name: str  # "bleu" | "chrf++"
    value: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in ("bleu", "chrf++"):
            raise ValueError(f"unknown metric {self.name!r}")

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "params": self.params}


# ---------------------------------------------------------------------------
# Tokenization


def tokenize_13a(line: str) -> list:
    """Minimal mteval-v13a-equivalent tokenization (WMT convention)."""
    norm = line.replace("<skipped>", "")
    norm = norm.replace("-\n", "").replace("\n", " ")
    norm = norm.replace("&quot;", '"').replace("&amp;", "&")
    norm = norm.replace("&lt;", "<").replace("&gt;", ">")
    norm = f" {norm} "
    norm = re.sub(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])", r" \1 ", norm)
    norm = re.sub(r"([^0-9])([\.,])", r"\1 \2 ", norm)
    norm = re.sub(r"([\.,])([^0-9])", r" \1 \2", norm)
    norm = re.sub(r"([0-9])(-)", r"\1 \2 ", norm)
    return norm.split()


def tokenize_none(line: str) -> list:
    return line.split()


TOKENIZERS = {"13a": tokenize_13a, "none": tokenize_none}


def _ngrams(tokens: list, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


# ---------------------------------------------------------------------------
# BLEU


def corpus_bleu(hyps: list, refs: list, tokenizer: str = "13a",
                smooth: bool = False) -> MetricScore:
    """Corpus BLEU over aligned hypothesis/reference lists (single reference).

    smooth=True applies add-one smoothing to zero precisions of order > 1;
    the default is the unsmoothed standard definition.
    """
    if len(hyps) != len(refs):
        raise ValueError(f"length mismatch: {len(hyps)} hyps vs {len(refs)} refs")
    if not hyps:
        raise ValueError("empty corpus")
    tok = TOKENIZERS[tokenizer]
    matches = [0] * BLEU_MAX_ORDER
    totals = [0] * BLEU_MAX_ORDER
    hyp_len = ref_len = 0
    for hyp, ref in zip(hyps, refs):
        h_tokens, r_tokens = tok(hyp), tok(ref)
        hyp_len += len(h_tokens)
        ref_len += len(r_tokens)
        for n in range(1, BLEU_MAX_ORDER + 1):
            h_counts = _ngrams(h_tokens, n)
            r_counts = _ngrams(r_tokens, n)
            totals[n - 1] += max(len(h_tokens) - n + 1, 0)
            matches[n - 1] += sum(min(c, r_counts[g]) for g, c in h_counts.items())

    precisions = []
    for n in range(BLEU_MAX_ORDER):
        if totals[n] == 0:
            precisions.append(0.0)
        elif matches[n] == 0:
            precisions.append(1.0 / (2 * totals[n]) if smooth and n > 0 else 0.0)
        else:
            precisions.append(matches[n] / totals[n])

    if min(precisions) > 0:
        geo_mean = math.exp(sum(math.log(p) for p in precisions) / BLEU_MAX_ORDER)
    else:
        geo_mean = 0.0
    bp = 1.0 if hyp_len >= ref_len else math.exp(1 - ref_len / max(hyp_len, 1))
    if hyp_len == 0:
        bp = 0.0
    return MetricScore(
        name="bleu",
        value=100.0 * bp * geo_mean,
        params={"max_order": BLEU_MAX_ORDER, "tokenizer": tokenizer,
                "smooth": smooth, "bp": bp,
                "precisions": [round(p, 6) for p in precisions]},
    )


# ---------------------------------------------------------------------------
# chrF++


def _chrf_words(sentence: str) -> list:
    """Whitespace tokens with leading/trailing punctuation split off."""
    out = []
    for word in sentence.strip().split():
        if len(word) > 1 and word[-1] in _PUNCTUATION:
            out.extend([word[:-1], word[-1]])
        elif len(word) > 1 and word[0] in _PUNCTUATION:
            out.extend([word[0], word[1:]])
        else:
            out.append(word)
    return out


def _chrf_chars(sentence: str) -> list:
    return list(sentence.strip().replace(" ", ""))


def chrf_pp(hyps: list, refs: list) -> MetricScore:
    """Corpus chrF++: per-order F-scores from summed statistics, averaged."""
    if len(hyps) != len(refs):
        raise ValueError(f"length mismatch: {len(hyps)} hyps vs {len(refs)} refs")
    if not hyps:
        raise ValueError("empty corpus")
    orders = CHRF_CHAR_ORDER + CHRF_WORD_ORDER
    ref_tot = [0] * orders
    hyp_tot = [0] * orders
    match_tot = [0] * orders

    def accumulate(h_units, r_units, n, slot):
        h_counts, r_counts = _ngrams(h_units, n), _ngrams(r_units, n)
        hyp_tot[slot] += sum(h_counts.values())
        ref_tot[slot] += sum(r_counts.values())
        match_tot[slot] += sum(min(c, r_counts[g]) for g, c in h_counts.items())

    for hyp, ref in zip(hyps, refs):
        h_chars, r_chars = _chrf_chars(hyp), _chrf_chars(ref)
        h_words, r_words = _chrf_words(hyp), _chrf_words(ref)
        for n in range(1, CHRF_CHAR_ORDER + 1):
            accumulate(h_chars, r_chars, n, n - 1)
        for n in range(1, CHRF_WORD_ORDER + 1):
            accumulate(h_words, r_words, n, CHRF_CHAR_ORDER + n - 1)

    total_f = 0.0
    for slot in range(orders):
        precision = match_tot[slot] / hyp_tot[slot] if hyp_tot[slot] > 0 else 0.0
        recall = match_tot[slot] / ref_tot[slot] if ref_tot[slot] > 0 else 0.0
        denom = max(CHRF_BETA ** 2 * precision + recall, _CHRF_EPS)
        total_f += (1 + CHRF_BETA ** 2) * precision * recall / denom
    return MetricScore(
        name="chrf++",
        value=100.0 * total_f / orders,
        params={"char_order": CHRF_CHAR_ORDER, "word_order": CHRF_WORD_ORDER,
                "beta": CHRF_BETA},
    )
