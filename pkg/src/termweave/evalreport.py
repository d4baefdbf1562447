"""Report assembly: term-coverage tables and sentence-level metric tables.

Coverage tables have Total/Used columns per term set plus the averaged
percentage; metric tables have one row per system with post-edit rows for
each term set and their average.  Both render as aligned text and JSON.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

from .metrics import chrf_pp, corpus_bleu
from .scoring import decimal_mean, round_half_up
from .termcheck import avg_pct_detail, coverage


@dataclass
class EvalReport:
    rows: list = field(default_factory=list)  # dicts: system -> metric values
    segment_count: int = 0

    def to_dict(self) -> dict:
        return {"segment_count": self.segment_count, "rows": self.rows}

    def to_text(self) -> str:
        metrics = [k for k in (self.rows[0] if self.rows else {}) if k != "system"]
        header = f"{'System':<16}" + "".join(f"{m:>10}" for m in metrics)
        lines = [f"segments: {self.segment_count}", header, "-" * len(header)]
        for row in self.rows:
            lines.append(f"{row['system']:<16}"
                         + "".join(f"{row[m]:>10.2f}" for m in metrics))
        return "\n".join(lines)


def select_two_set_subset(records: list) -> list:
    """Keep only records where both labelled term sets are non-empty."""
    return [r for r in records
            if r.term_set("set1").entries and r.term_set("set2").entries]


@dataclass
class CoverageTable:
    rows: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"rows": self.rows}

    def to_text(self) -> str:
        header = (f"{'System':<16}{'Total [1]':>10}{'Used [1]':>10}"
                  f"{'Total [2]':>10}{'Used [2]':>10}{'Avg %':>8}")
        lines = [header, "-" * len(header)]
        for row in self.rows:
            flag = " *" if row.get("flagged") else ""
            lines.append(
                f"{row['system']:<16}{row['total1']:>10}{row['used1']:>10}"
                f"{row['total2']:>10}{row['used2']:>10}{row['avg_pct']:>8.2f}{flag}"
            )
        return "\n".join(lines)


def build_coverage_table(records: list, systems: list, lang: str = "en",
                         mode: str | None = None) -> CoverageTable:
    """One row per system name in systems ("baseline" and/or "term-ape").

    The baseline row counts both sets against the MT output; the term-ape
    row counts each set against that set's own post-edited translation.
    """
    table = CoverageTable()
    for system in systems:
        if system == "baseline":
            c1 = coverage(records, "mt", "set1", lang, mode)
            c2 = coverage(records, "mt", "set2", lang, mode)
        elif system == "term-ape":
            c1 = coverage(records, "ape", "set1", lang, mode)
            c2 = coverage(records, "ape", "set2", lang, mode)
        else:
            raise ValueError(f"unknown system {system!r}")
        detail = avg_pct_detail(c1, c2)
        table.rows.append({
            "system": system,
            "total1": c1.total, "used1": c1.used,
            "total2": c2.total, "used2": c2.used,
            "avg_pct": detail.value, "flagged": detail.flagged,
        })
    return table


def build_reports(records: list, hyps_per_system: dict, refs: list | None,
                  lang: str = "en", mode: str | None = None,
                  tokenizer: str = "13a"):
    """Build the coverage table and, when references exist, the metric table.

    hyps_per_system maps system name -> list of hypothesis strings aligned
    with records (and refs).  Systems with missing outputs are omitted with
    a warning.  refs=None selects coverage-only mode.
    """
    systems = []
    if any(r.mt is not None for r in records):
        systems.append("baseline")
    if any(r.ape for r in records):
        systems.append("term-ape")
    coverage_table = build_coverage_table(records, systems, lang, mode)

    if refs is None:
        return coverage_table, None

    report = EvalReport(segment_count=len(records))
    ape_rows = {}
    for system, hyps in hyps_per_system.items():
        if hyps is None or len(hyps) != len(refs):
            warnings.warn(f"system {system!r}: outputs missing or misaligned; row omitted")
            continue
        bleu = corpus_bleu(hyps, refs, tokenizer=tokenizer)
        chrf = chrf_pp(hyps, refs)
        row = {"system": system,
               "bleu": round_half_up(bleu.value),
               "chrf++": round_half_up(chrf.value)}
        report.rows.append(row)
        if system.startswith("ape["):
            ape_rows[system] = row
    if len(ape_rows) == 2:
        r1, r2 = ape_rows.get("ape[set1]"), ape_rows.get("ape[set2]")
        if r1 and r2:
            report.rows.append({
                "system": "ape-avg",
                "bleu": round_half_up(decimal_mean([r1["bleu"], r2["bleu"]])),
                "chrf++": round_half_up(decimal_mean([r1["chrf++"], r2["chrf++"]])),
            })
    return coverage_table, report


def save_reports(coverage_table: CoverageTable, report: EvalReport | None, out_dir):
    from pathlib import Path

    out_dir = Path(out_dir)
    (out_dir / "report.coverage.txt").write_text(coverage_table.to_text() + "\n",
                                                 encoding="utf-8")
    with (out_dir / "report.coverage.json").open("w", encoding="utf-8") as f:
        json.dump(coverage_table.to_dict(), f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    if report is not None:
        (out_dir / "report.metrics.txt").write_text(report.to_text() + "\n",
                                                    encoding="utf-8")
        with (out_dir / "report.metrics.json").open("w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")
