from hypothesis import given, settings
from hypothesis import strategies as st

from termweave.filtering import (
    FilterConfig,
    LangDetection,
    StopwordDetector,
    TableDetector,
    dedup,
    filter_corpus,
    passes_langid,
    subset_head,
    subset_random,
)
from termweave.records import BilingualPair, TermEntry

SEED_TERM = TermEntry(src_term="x", tgt_term="y")


def pair(src, tgt):
    return BilingualPair(src=src, tgt=tgt, origin="synthetic", seed_term=SEED_TERM)


def always(lang, conf=0.99):
    return TableDetector({}, default=LangDetection(lang, conf))


class SideDetector:
    """Detects de for German-looking text, en otherwise (table with fallback)."""

    def __init__(self, conf=0.99):
        self.conf = conf

    def detect(self, text):
        lang = "de" if text.startswith("DE:") else "en"
        return LangDetection(lang, self.conf)


CFG = FilterConfig(expected_src_lang="de", expected_tgt_lang="en")


def test_dedup_keeps_first_occurrence():
    pairs = [pair("a", "b"), pair("a", "b"), pair("a", "c")]
    out = dedup(pairs)
    assert [(p.src, p.tgt) for p in out] == [("a", "b"), ("a", "c")]
    assert out[0] is pairs[0]


def test_dedup_trailing_whitespace_is_normalised():
    # trimming is part of the duplicate key, so these collapse
    assert len(dedup([pair("a", "b"), pair("a", "b ")])) == 1
    # but interior differences survive
    assert len(dedup([pair("a", "b"), pair("a", "b c")])) == 2


def test_dedup_empty():
    assert dedup([]) == []


def test_langid_pass():
    p = pair("DE: guten Tag", "good day")
    assert passes_langid(p, CFG, SideDetector(), SideDetector(0.93))


def test_langid_threshold_boundary():
    p = pair("DE: text", "text")
    assert passes_langid(p, CFG, SideDetector(0.9), SideDetector())  # >= passes
    assert not passes_langid(p, CFG, SideDetector(0.89), SideDetector())


def test_langid_wrong_language():
    p = pair("english not german", "english")
    assert not passes_langid(p, CFG, always("en"), always("en"))


def test_langid_detector_failure_drops_pair():
    failing = TableDetector({})  # raises KeyError for unknown text
    p = pair("DE: x", "y")
    assert not passes_langid(p, CFG, failing, SideDetector())


def test_filter_corpus_all_duplicates():
    pairs = [pair("a", "b") for _ in range(10)]
    out, stats = filter_corpus(pairs, CFG, always("de"), always("de"))
    assert stats.after_dedup == 1


def test_filter_corpus_confident_detectors_keep_everything():
    pairs = [pair(f"DE: satz {i}", f"sentence {i}") for i in range(5)]
    out, stats = filter_corpus(pairs, CFG, SideDetector(), SideDetector())
    assert stats.after_langid == stats.after_dedup == 5


def test_stopword_detector():
    d = StopwordDetector()
    de = d.detect("Der Bericht wurde von dem Ministerium und der Kommission vorgestellt.")
    en = d.detect("The report was presented by the ministry and the commission.")
    zh = d.detect("委员会讨论了这个问题。")
    cs = d.detect("Výbor a komise projednaly zprávu ve velmi dlouhém zasedání.")
    assert (de.lang, en.lang, zh.lang, cs.lang) == ("de", "en", "zh", "cs")
    assert min(de.confidence, en.confidence, zh.confidence, cs.confidence) >= 0.9


pairs_strategy = st.lists(
    st.tuples(st.text(min_size=1, max_size=8), st.text(min_size=1, max_size=8)),
    max_size=30,
).map(lambda ps: [pair(s, t) for s, t in ps if s.strip() and t.strip()])


class HashDetector:
    """Deterministic per-text detector yielding a mix of accepts and rejects."""

    def detect(self, text):
        import hashlib

        h = hashlib.sha256(text.encode()).digest()[0]
        return LangDetection("de" if h % 3 == 0 else "en", (h % 11) / 10)


@given(pairs_strategy)
@settings(max_examples=500, deadline=None)
def test_filter_idempotent_and_subsequence(ps):
    det = HashDetector()
    out, _ = filter_corpus(ps, CFG, det, det)
    out2, _ = filter_corpus(out, CFG, det, det)
    assert [(p.src, p.tgt) for p in out] == [(p.src, p.tgt) for p in out2]
    # subsequence of the input, pairs unmutated
    it = iter(ps)
    assert all(any(q is p for q in it) for p in out)


@given(pairs_strategy)
@settings(max_examples=500, deadline=None)
def test_dedup_count_equals_distinct_pairs(ps):
    import unicodedata

    distinct = {(unicodedata.normalize("NFC", p.src).strip(),
                 unicodedata.normalize("NFC", p.tgt).strip()) for p in ps}
    _, stats = filter_corpus(ps, CFG, SideDetector(), SideDetector())
    assert stats.after_dedup == len(distinct)


@given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=500, deadline=None)
def test_threshold_boundary_is_geq(conf, threshold):
    cfg = FilterConfig(expected_src_lang="de", expected_tgt_lang="en",
                       primary_threshold=threshold, secondary_threshold=0.0)
    class D:
        def detect(self, text):
            lang = "de" if text == "s" else "en"
            return LangDetection(lang, conf)

    p = pair("s", "t")
    assert passes_langid(p, cfg, D(), D()) == (conf >= threshold)


def test_subsetting():
    ps = [pair(f"s{i}", f"t{i}") for i in range(10)]
    assert subset_head(ps, 3) == ps[:3]
    sub = subset_random(ps, 4, seed=1)
    assert len(sub) == 4
    assert sub == subset_random(ps, 4, seed=1)
    idx = [ps.index(p) for p in sub]
    assert idx == sorted(idx)
