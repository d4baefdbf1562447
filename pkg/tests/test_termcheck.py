import pytest

from termweave.records import SegmentRecord, TermEntry, TermSet
from termweave.termcheck import (
    CoverageCounts,
    avg_pct,
    avg_pct_detail,
    avg_pct_unrounded,
    contains_term,
    coverage,
    cross_pair_mean,
)


def test_contains_exact_presence():
    assert contains_term("The Federal Ministry of Science announced a plan.",
                         "Federal Ministry of Science", "en")


def test_word_boundary_blocks_substrings():
    assert not contains_term("the ministerial decision", "minister", "en")
    assert contains_term("the minister decided", "minister", "en")


def test_case_insensitive():
    assert contains_term("federal ministry of science", "Federal Ministry of Science", "en")


def test_zh_substring_mode():
    assert contains_term("委员会讨论了数据保护法的问题", "数据保护法", "zh")
    assert not contains_term("委员会讨论了别的问题", "数据保护法", "zh")


def test_exact_mode_is_case_sensitive():
    assert not contains_term("federal ministry", "Federal Ministry", "en", mode="exact")
    assert contains_term("the Federal Ministry here", "Federal Ministry", "en", mode="exact")


def test_monotone_under_concatenation():
    base = "The data protection act passed."
    assert contains_term(base, "data protection act", "en")
    assert contains_term(base + " More text follows.", "data protection act", "en")


def seg(i, translation, set1_terms, set2_terms=()):
    return SegmentRecord(
        id=f"s{i}", src=f"src {i}", mt=translation,
        term_sets={
            "set1": TermSet([TermEntry(src_term=f"q{j}", tgt_term=t)
                             for j, t in enumerate(set1_terms)], "set1"),
            "set2": TermSet([TermEntry(src_term=f"r{j}", tgt_term=t)
                             for j, t in enumerate(set2_terms)], "set2"),
        },
    )


def brute_force_coverage(records, label):
    """Independent recount: enumerate every entry and substring-scan with
    a hand-rolled boundary check."""
    import re
    import unicodedata

    total = used = 0
    for r in records:
        if r.mt is None:
            continue
        hay = unicodedata.normalize("NFC", r.mt).casefold()
        for e in r.term_sets[label].entries:
            total += 1
            needle = unicodedata.normalize("NFC", e.tgt_term).casefold()
            for m in re.finditer(re.escape(needle), hay):
                before = hay[m.start() - 1] if m.start() > 0 else " "
                after = hay[m.end()] if m.end() < len(hay) else " "
                if not (before.isalnum() or before == "_") and \
                   not (after.isalnum() or after == "_"):
                    used += 1
                    break
    return total, used


FIXTURE = [
    seg(0, "The budget committee and the safety board met.",
        ["budget committee", "safety board"], ["annual report"]),
    seg(1, "Nothing relevant here.", ["data registry"], ["tax office"]),
    seg(2, "The tax office opened.", ["tax office"], []),
]


def test_coverage_fixture_matches_brute_force():
    c = coverage(FIXTURE, "mt", "set1")
    total, used = brute_force_coverage(FIXTURE, "set1")
    assert (c.total, c.used) == (total, used) == (4, 3)


def test_coverage_skips_missing_translation():
    records = FIXTURE + [SegmentRecord(
        id="s9", src="x", mt=None,
        term_sets={"set1": TermSet([TermEntry(src_term="a", tgt_term="b")], "set1")})]
    c = coverage(records, "mt", "set1")
    assert c.skipped_records == 1
    assert (c.total, c.used) == (4, 3)


def test_coverage_empty_term_sets():
    records = [seg(0, "whatever", [], [])]
    c = coverage(records, "mt", "set1")
    assert (c.total, c.used) == (0, 0)


def test_coverage_additive_over_partitions():
    c_all = coverage(FIXTURE, "mt", "set1")
    c_a = coverage(FIXTURE[:1], "mt", "set1")
    c_b = coverage(FIXTURE[1:], "mt", "set1")
    assert c_all.total == c_a.total + c_b.total
    assert c_all.used == c_a.used + c_b.used


def test_duplicate_entries_count_twice():
    r = seg(0, "the tax office called", ["tax office", "tax office"])
    c = coverage([r], "mt", "set1")
    assert (c.total, c.used) == (2, 2)


def test_coverage_counts_ape_translations():
    r = FIXTURE[1]
    r.ape["set1"] = "The data registry is open."
    c = coverage([r], "ape", "set1")
    assert (c.total, c.used) == (1, 1)


# Reference coverage rows: (total1, used1, total2, used2) -> expected Avg %
TEST_SET_ROWS = [
    ((432, 291, 317, 168), 60.18),   # first pair, baseline
    ((432, 302, 317, 165), 60.98),   # fine-tuned
    ((432, 397, 317, 239), 83.65),   # post-edited
    ((550, 221, 313, 139), 42.30),
    ((550, 135, 313, 108), 29.53),
    ((550, 466, 313, 283), 87.57),
    ((1779, 498, 1938, 491), 26.66),
    ((1779, 854, 1938, 570), 38.71),
    ((1779, 1137, 1938, 886), 54.81),
]
BLIND_SET_ROWS = [
    ((11357, 4120, 11202, 4623), 38.77),
    ((11357, 4130, 11202, 4621), 38.81),
    ((11357, 6257, 11202, 5893), 53.85),
    ((10626, 3964, 10563, 5122), 42.90),
    ((10626, 3397, 10563, 4412), 36.87),
    ((10626, 8727, 10563, 8681), 82.16),
    ((2892, 1375, 2908, 265), 28.33),
    ((2892, 1422, 2908, 970), 41.26),
    ((2892, 2471, 2908, 2322), 82.65),
]


@pytest.mark.parametrize("counts,expected", TEST_SET_ROWS + BLIND_SET_ROWS)
def test_avg_pct_reference_rows(counts, expected):
    t1, u1, t2, u2 = counts
    assert avg_pct(CoverageCounts(t1, u1), CoverageCounts(t2, u2)) == expected


def test_cross_pair_means():
    def unrounded(row):
        t1, u1, t2, u2 = row[0]
        return avg_pct_unrounded(CoverageCounts(t1, u1), CoverageCounts(t2, u2))

    test_by_system = {i: [unrounded(TEST_SET_ROWS[j]) for j in (i, i + 3, i + 6)]
                      for i in range(3)}
    assert cross_pair_mean(test_by_system[0]) == 43.05
    assert cross_pair_mean(test_by_system[1]) == 43.07
    assert cross_pair_mean(test_by_system[2]) == 75.34

    blind_by_system = {i: [unrounded(BLIND_SET_ROWS[j]) for j in (i, i + 3, i + 6)]
                       for i in range(3)}
    assert cross_pair_mean(blind_by_system[0]) == 36.67
    assert cross_pair_mean(blind_by_system[1]) == 38.98
    assert cross_pair_mean(blind_by_system[2]) == 72.88


def test_avg_pct_trivial_full_coverage():
    assert avg_pct(CoverageCounts(10, 10), CoverageCounts(10, 10)) == 100.00


def test_avg_pct_zero_total_flags_row():
    detail = avg_pct_detail(CoverageCounts(10, 5), CoverageCounts(0, 0))
    assert detail.value == 50.0 and detail.flagged
    with pytest.raises(ValueError):
        avg_pct_detail(CoverageCounts(0, 0), CoverageCounts(0, 0))


def test_coverage_counts_invariant():
    with pytest.raises(ValueError):
        CoverageCounts(total=1, used=2)
