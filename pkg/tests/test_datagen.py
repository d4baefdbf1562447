import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from termweave.backends import BackendError, ChatRequest, MockChatBackend, ScriptedChatBackend
from termweave.datagen import (
    DatagenError,
    GenConfig,
    ParseDiagnostics,
    build_gen_prompt,
    generate_for_terms,
    parse_gen_response,
)
from termweave.records import TermEntry

TERM = TermEntry(src_term="Bundesministerium für Wissenschaft",
                 tgt_term="Federal Ministry of Science")
CFG = GenConfig()


def test_prompt_matches_reference_wording():
    assert build_gen_prompt(TERM, CFG) == (
        'Please use the "Federal Ministry of Science" to generate just 20 '
        "numbered sentences in German-English in one Python dictionary format."
    )


def test_prompt_is_literal_substitution():
    cfg = GenConfig(sentences_per_call=1)
    assert "just 1 numbered sentences" in build_gen_prompt(TERM, cfg)


def test_prompt_preserves_quotes_in_term():
    term = TermEntry(src_term="x", tgt_term='the "special" unit')
    assert '"the "special" unit"' in build_gen_prompt(term, CFG)


def test_parse_dict_shape():
    raw = '{"1": {"de": "Ein Satz.", "en": "A sentence."}, "2": {"de": "Zwei.", "en": "Two."}}'
    pairs = parse_gen_response(raw, TERM, CFG)
    assert [(p.src, p.tgt) for p in pairs] == [("Ein Satz.", "A sentence."), ("Zwei.", "Two.")]
    assert all(p.seed_term == TERM and p.origin == "synthetic" for p in pairs)


def test_parse_python_dict_shape():
    raw = "{'1': {'de': 'Ein Satz.', 'en': 'A sentence.'}}"
    assert len(parse_gen_response(raw, TERM, CFG)) == 1


def test_parse_numbered_separator_lines():
    raw = "\n".join(f"{i}. DE-Satz {i} | EN sentence {i}" for i in range(1, 21))
    pairs = parse_gen_response(raw, TERM, CFG)
    assert len(pairs) == 20
    assert pairs[0].src == "DE-Satz 1" and pairs[0].tgt == "EN sentence 1"


def test_parse_alternating_lines():
    raw = "1. Der erste Satz.\nThe first sentence.\n2. Der zweite Satz.\nThe second sentence.\n"
    pairs = parse_gen_response(raw, TERM, CFG)
    assert [(p.src, p.tgt) for p in pairs] == [
        ("Der erste Satz.", "The first sentence."),
        ("Der zweite Satz.", "The second sentence."),
    ]


def test_parse_records_drops():
    entries = {str(i): {"de": f"s{i}", "en": f"t{i}"} for i in range(1, 20)}
    entries["20"] = {"de": "nur eine Seite"}
    import json

    diag = ParseDiagnostics()
    pairs = parse_gen_response(json.dumps(entries), TERM, CFG, diag=diag)
    assert len(pairs) == 19
    assert diag.dropped == 1


def test_parse_garbage_returns_empty():
    assert parse_gen_response("no pairs here, sorry", TERM, CFG) == []


@given(st.text(max_size=300))
@settings(max_examples=200, deadline=None)
def test_parse_never_returns_empty_sides(raw):
    for pair in parse_gen_response(raw, TERM, CFG):
        assert pair.src and pair.tgt


def test_generate_counts_two_terms_two_temps():
    terms = [TERM, TermEntry(src_term="Datenschutzgesetz", tgt_term="data protection act")]
    mock = MockChatBackend(seed=5)
    pairs = generate_for_terms(terms, CFG, mock)
    assert len(pairs) == 2 * 2 * 20
    temps = {p.meta["temperature"] for p in pairs}
    assert temps == {"0.0", "0.3"}
    assert all(p.meta["model"] == CFG.model_id for p in pairs)


def test_generate_output_bounded():
    cfg = GenConfig(sentences_per_call=5, temperatures=(0.0,))
    pairs = generate_for_terms([TERM], cfg, MockChatBackend(seed=1))
    assert len(pairs) <= 1 * 1 * 5


def test_generate_fails_only_when_all_calls_fail():
    def chat(req: ChatRequest):
        raise BackendError("network", "down", retryable=False)

    with pytest.raises(DatagenError) as err:
        generate_for_terms([TERM], CFG, ScriptedChatBackend(chat))
    assert TERM.tgt_term in str(err.value)


def test_generate_tolerates_partial_failures():
    calls = {"n": 0}

    def chat(req: ChatRequest):
        calls["n"] += 1
        if req.temperature == 0.3:
            raise BackendError("network", "flaky", retryable=False)
        return '{"1": {"de": "Ein Satz.", "en": "A sentence."}}'

    pairs = generate_for_terms([TERM], CFG, ScriptedChatBackend(chat))
    assert len(pairs) == 1
