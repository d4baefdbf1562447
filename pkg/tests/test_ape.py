import pytest

from termweave.backends import BackendError, MockChatBackend, ScriptedChatBackend
from termweave.ape import (
    ApeConfig,
    ApeStats,
    build_ape_prompt,
    missing_terms,
    post_edit_corpus,
    post_edit_segment,
)
from termweave.records import SegmentRecord, TermEntry, TermSet


def make_record(mt, set1, set2=(), rid="r0", src="Der Quellsatz."):
    return SegmentRecord(
        id=rid, src=src, mt=mt,
        term_sets={
            "set1": TermSet([TermEntry(src_term=s, tgt_term=t) for s, t in set1], "set1"),
            "set2": TermSet([TermEntry(src_term=s, tgt_term=t) for s, t in set2], "set2"),
        },
    )


REC = make_record(
    "The committee met yesterday.",
    [("Haushaltsausschuss", "budget committee"), ("Gremium", "committee")],
)


def test_prompt_single_term_reference_wording():
    record = make_record("Translated text here.", [("Datenschutz", "data privacy")],
                         src="Der Datenschutz ist wichtig.")
    missing = missing_terms(record, "set1", record.mt)
    prompt = build_ape_prompt(record, missing, record.mt, "German", "English")
    assert prompt == (
        'In the following English translation, use the "data privacy" to '
        'translate the German term "Datenschutz". Leave everything else the '
        "same.\n\nGerman: Der Datenschutz ist wichtig.\n"
        "English: Translated text here."
    )


def test_prompt_multi_term_clauses():
    record = make_record("text", [("A", "alpha"), ("B", "beta"), ("C", "gamma")],
                         src="src")
    prompt = build_ape_prompt(record, record.term_sets["set1"].entries,
                              record.mt, "German", "English")
    assert prompt.startswith(
        'In the following English translation, use the "alpha" to translate '
        'the German term "A", and the "beta" to translate the German term "B"'
        ', and the "gamma" to translate the German term "C". Leave everything '
        "else the same."
    )
    assert prompt.count(", and the ") == 2


def test_prompt_requires_missing_terms():
    with pytest.raises(ValueError):
        build_ape_prompt(REC, [], REC.mt, "German", "English")


def test_missing_terms_in_set_order():
    missing = missing_terms(REC, "set1", REC.mt)
    assert [e.tgt_term for e in missing] == ["budget committee"]


def test_compliant_segment_skipped_without_llm_call():
    record = make_record("The budget committee and the committee met.",
                         [("H", "budget committee"), ("G", "committee")])

    def chat(req):
        raise AssertionError("no LLM call expected for compliant segment")

    stats = ApeStats()
    outcome = post_edit_segment(record, "set1", ApeConfig(),
                                ScriptedChatBackend(chat), stats=stats)
    assert outcome.skipped and outcome.chosen == record.mt
    assert stats.llm_calls == 0 and stats.skipped == 1


def test_best_candidate_wins_and_tie_prefers_lower_temperature():
    def chat(req):
        if req.temperature == 0.0:
            return "The budget committee met yesterday."
        return "The budget committee also met yesterday."

    outcome = post_edit_segment(REC, "set1", ApeConfig(), ScriptedChatBackend(chat))
    assert outcome.improved
    assert outcome.chosen == "The budget committee met yesterday."


def test_higher_temperature_wins_when_it_fixes_more():
    record = make_record("nothing here", [("A", "alpha"), ("B", "beta")])

    def chat(req):
        if req.temperature == 0.0:
            return "alpha only"
        return "alpha and beta"

    outcome = post_edit_segment(record, "set1", ApeConfig(), ScriptedChatBackend(chat))
    assert outcome.chosen == "alpha and beta"


def test_unhelpful_candidates_fall_back_to_mt():
    def chat(req):
        return "Completely unrelated output."

    stats = ApeStats()
    outcome = post_edit_segment(REC, "set1", ApeConfig(), ScriptedChatBackend(chat),
                                stats=stats)
    assert not outcome.improved and outcome.chosen == REC.mt
    assert stats.unimproved == 1


def test_backend_failure_degrades_to_mt():
    def chat(req):
        raise BackendError("network", "down", retryable=False)

    outcome = post_edit_segment(REC, "set1", ApeConfig(), ScriptedChatBackend(chat))
    assert outcome.chosen == REC.mt and outcome.errors


def test_temperature_sweep_uses_configured_values():
    seen = []

    def chat(req):
        seen.append((req.temperature, req.top_p))
        return "no terms"

    post_edit_segment(REC, "set1", ApeConfig(), ScriptedChatBackend(chat))
    assert seen == [(0.0, 1.0), (0.2, 1.0)]


def test_chunking_respects_max_terms_per_prompt():
    record = make_record("none", [(f"s{i}", f"tgt{i}word") for i in range(5)])
    prompts = []

    def chat(req):
        prompts.append(req.messages[-1][1])
        return req.messages[-1][1]  # echo keeps the quoted terms in the text

    post_edit_segment(record, "set1", ApeConfig(max_terms_per_prompt=2),
                      ScriptedChatBackend(chat))
    # each temperature: ceil(5/2) = 3 chunked prompts
    assert len(prompts) == 6
    first = prompts[0]
    assert first.count("to translate the German term") == 2


def test_strict_mode_penalises_regressions():
    record = make_record("alpha is present", [("A", "alpha"), ("B", "beta")])

    def chat(req):
        if req.temperature == 0.0:
            return "beta replaced everything"   # fixes beta, loses alpha
        return "alpha stays and beta arrives"   # fixes beta, keeps alpha

    strict = post_edit_segment(record, "set1", ApeConfig(strict=True),
                               ScriptedChatBackend(chat))
    assert strict.chosen == "alpha stays and beta arrives"
    lax = post_edit_segment(record, "set1", ApeConfig(strict=False),
                            ScriptedChatBackend(chat))
    assert lax.chosen == "beta replaced everything"


def test_missing_mt_rejected():
    record = make_record(None, [("A", "alpha")])
    with pytest.raises(ValueError) as err:
        post_edit_segment(record, "set1", ApeConfig(), MockChatBackend(seed=0))
    assert "r0" in str(err.value)


def test_corpus_fills_ape_and_never_aborts():
    records = [
        make_record("The budget committee met.", [("H", "budget committee")], rid="a"),
        make_record("Nothing useful.", [("H", "budget committee")], rid="b"),
        make_record("Still nothing.", [("X", "zzz-not-fixable")], rid="c"),
    ]

    def chat(req):
        if "zzz" in req.messages[-1][1]:
            raise BackendError("network", "down", retryable=False)
        return "The budget committee met after post-editing."

    out, stats = post_edit_corpus(records, "set1", ApeConfig(), ScriptedChatBackend(chat))
    assert all(r.ape["set1"] for r in out)
    assert out[0].ape["set1"] == out[0].mt          # skipped
    assert "budget committee" in out[1].ape["set1"]  # improved
    assert out[2].ape["set1"] == out[2].mt          # backend failed
    assert stats.skipped == 1 and stats.improved == 1 and stats.unimproved == 1


def test_mock_backend_inserts_missing_terms():
    record = make_record("The plain translation.",
                         [("Haushaltsausschuss", "budget committee")])
    outcome = post_edit_segment(record, "set1", ApeConfig(), MockChatBackend(seed=3))
    assert outcome.improved
    assert "budget committee" in outcome.chosen


def test_coverage_monotone_under_post_edit():
    from termweave.termcheck import coverage

    records = [
        make_record("The budget committee met.", [("H", "budget committee")],
                    [("R", "annual report")], rid=f"m{i}")
        for i in range(3)
    ] + [
        make_record("No match here.", [("H", "budget committee")],
                    [("R", "annual report")], rid=f"n{i}")
        for i in range(3)
    ]
    before = coverage(records, "mt", "set1")
    post_edit_corpus(records, "set1", ApeConfig(), MockChatBackend(seed=9))
    after = coverage(records, "ape", "set1")
    assert after.used >= before.used
    assert after.total == before.total
