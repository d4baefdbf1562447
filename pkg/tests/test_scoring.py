import math

import pytest

from termweave.backends import ConstantScorer, CopyScorer, EchoTranslator, ScoreRequest
from termweave.records import BilingualPair, TermEntry
from termweave.scoring import (
    ScoreConfig,
    baseline_self_score,
    build_quality_report,
    mean_exp_score,
    round_half_up,
)

SEED = TermEntry(src_term="x", tgt_term="y")


def pairs(n):
    return [BilingualPair(src=f"s{i}", tgt=f"t{i}", origin="synthetic", seed_term=SEED)
            for i in range(n)]


class ListScorer:
    def __init__(self, scores):
        self.scores = list(scores)

    def score_pairs(self, req: ScoreRequest):
        assert len(req.pairs) == len(self.scores)
        return list(self.scores)


def test_zero_logprobs_give_one():
    assert mean_exp_score(pairs(3), ("de", "en"), ConstantScorer(0.0)) == 1.0


def test_constant_ln_059_roundtrips():
    value = mean_exp_score(pairs(5), ("de", "en"), ConstantScorer(math.log(0.59)))
    assert abs(value - 0.59) < 1e-12


def test_geometric_mean_of_two():
    scorer = ListScorer([math.log(0.4), math.log(0.9)])
    value = mean_exp_score(pairs(2), ("de", "en"), scorer)
    assert abs(value - 0.6) < 1e-12


def test_mean_exp_score_permutation_invariant():
    ps = pairs(4)
    scores = [-0.3, -1.2, -0.05, -2.0]
    table = {(p.src, p.tgt): s for p, s in zip(ps, scores)}

    class TableScorer:
        def score_pairs(self, req):
            return [table[pair] for pair in req.pairs]

    fwd = mean_exp_score(ps, ("de", "en"), TableScorer())
    rev = mean_exp_score(list(reversed(ps)), ("de", "en"), TableScorer())
    assert abs(fwd - rev) < 1e-12


def test_mean_exp_score_monotone():
    base = ListScorer([-0.5, -1.0, -0.2])
    raised = ListScorer([-0.4, -0.9, -0.1])
    ps = pairs(3)
    assert mean_exp_score(ps, ("de", "en"), raised) > mean_exp_score(ps, ("de", "en"), base)


def test_mean_exp_score_empty_rejected():
    with pytest.raises(ValueError):
        mean_exp_score([], ("de", "en"), ConstantScorer(0.0))


def test_baseline_self_score_copy_mocks():
    class CopyMT:
        def translate(self, req):
            return list(req.texts)

    value = baseline_self_score(["a", "b"], ("de", "en"), CopyMT(), CopyScorer())
    assert value == 1.0


def test_baseline_uses_configured_beam():
    seen = {}

    class SpyMT(EchoTranslator):
        def translate(self, req):
            seen["beam"] = req.beam_size
            return super().translate(req)

    baseline_self_score(["a"], ("de", "en"), SpyMT(), ConstantScorer(-0.1),
                        ScoreConfig(beam_size=4))
    assert seen["beam"] == 4


def test_round_half_up():
    assert round_half_up(0.575) == 0.58
    assert round_half_up(0.585) == 0.59
    assert round_half_up(0.5849) == 0.58


REFERENCE_DIRECTIONS = {
    "DE-EN": (0.59, 0.68),
    "EN-DE": (0.56, 0.64),
    "CS-EN": (0.58, 0.70),
    "EN-CS": (0.49, 0.58),
    "ZH-EN": (0.39, 0.56),
    "EN-ZH": (0.09, 0.34),
}


def rows_by_direction(report):
    out = {}
    current_pair = []
    for row in report.rows:
        if row["direction"] == "Avg.":
            out["Avg:" + "/".join(current_pair)] = row
            current_pair = []
        else:
            out[row["direction"]] = row
            current_pair.append(row["direction"])
    return out


def test_quality_report_reference_arithmetic():
    report = build_quality_report(REFERENCE_DIRECTIONS)
    rows = rows_by_direction(report)
    assert rows["DE-EN"]["diff"] == 0.09
    assert rows["EN-DE"]["diff"] == 0.08
    de_avg = rows["Avg:DE-EN/EN-DE"]
    assert (de_avg["candidate"], de_avg["baseline"], de_avg["diff"]) == (0.58, 0.66, 0.08)
    cs_avg = rows["Avg:CS-EN/EN-CS"]
    assert (cs_avg["candidate"], cs_avg["baseline"], cs_avg["diff"]) == (0.54, 0.64, 0.10)
    zh_avg = rows["Avg:ZH-EN/EN-ZH"]
    assert (zh_avg["candidate"], zh_avg["baseline"], zh_avg["diff"]) == (0.24, 0.45, 0.21)


def test_quality_report_identical_directions_average_to_same():
    report = build_quality_report({"DE-EN": (0.5, 0.7), "EN-DE": (0.5, 0.7)})
    avg = [r for r in report.rows if r["direction"] == "Avg."][0]
    assert avg["candidate"] == 0.5 and avg["baseline"] == 0.7


def test_quality_report_missing_direction():
    with pytest.raises(ValueError) as err:
        build_quality_report({"DE-EN": (0.5, 0.7)})
    assert "DE-EN" in str(err.value) or "de" in str(err.value).lower()


def test_fixture_diff_021():
    report = build_quality_report({"A-B": (0.24, 0.45), "B-A": (0.24, 0.45)})
    row = report.rows[0]
    assert row["diff"] == 0.21
