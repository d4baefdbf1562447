"""Pipeline orchestration: run configuration, stages, manifest and resume.

Each stage reads its declared inputs from the work directory, writes its
outputs atomically (write-temp-then-rename) and records input hashes, a
config hash and output hashes in the run manifest.  A stage whose inputs,
config and outputs all match the manifest is skipped on re-run, which makes
interrupted runs resumable.
"""

from __future__ import annotations

import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import ape as ape_mod
from . import backends as be
from . import datagen as dg
from . import evalreport, filtering, mixprep, scoring, termcheck
from .cache import ChatCache
from .languages import lang_name
from .records import (
    read_pairs,
    read_segments,
    read_terms_tsv,
    write_jsonl,
)

log = logging.getLogger(__name__)

STAGES = ("datagen", "filter", "score", "mixprep", "translate",
          "termcheck", "ape", "eval")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_STAGE = 2
EXIT_BACKEND = 3


class ConfigError(Exception):
    pass


class StageError(Exception):
    pass


@dataclass
class RunConfig:
    src_lang: str = "de"
    tgt_lang: str = "en"
    seed: int = 0
    work_dir: Path = Path("work")
    cache_dir: Path = Path("work/cache")
    offline: bool = False
    backends: dict = field(default_factory=dict)
    gen: dg.GenConfig = field(default_factory=dg.GenConfig)
    filter: filtering.FilterConfig = field(default_factory=filtering.FilterConfig)
    score: scoring.ScoreConfig = field(default_factory=scoring.ScoreConfig)
    finetune: mixprep.FinetuneConfig = field(default_factory=mixprep.FinetuneConfig)
    ape: ape_mod.ApeConfig = field(default_factory=ape_mod.ApeConfig)
    score_sample_size: int = 200
    generic_sample_size: int | None = None
    refs_file: str | None = None
    two_set_only: bool = False
    match_mode: str | None = None
    raw_toml: dict = field(default_factory=dict)

    @property
    def src_lang_name(self) -> str:
        return lang_name(self.src_lang)

    @property
    def tgt_lang_name(self) -> str:
        return lang_name(self.tgt_lang)

    def config_hash(self) -> str:
        blob = json.dumps(self.raw_toml, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Load a RunConfig from a TOML file; overrides win over file values."""
    try:
        with open(path, "rb") as f:
            doc = tomllib.load(f)
    except (OSError, tomllib.TOMLDecodeError) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    overrides = overrides or {}
    run = {**doc.get("run", {}), **overrides}
    cfg = RunConfig(raw_toml={**doc, "overrides": overrides})
    try:
        cfg.src_lang = run.get("src_lang", cfg.src_lang)
        cfg.tgt_lang = run.get("tgt_lang", cfg.tgt_lang)
        cfg.seed = int(run.get("seed", cfg.seed))
        cfg.work_dir = Path(run.get("work_dir", cfg.work_dir))
        cfg.cache_dir = Path(run.get("cache_dir", cfg.work_dir / "cache"))
        cfg.offline = bool(run.get("offline", cfg.offline))
        cfg.match_mode = run.get("match_mode")
        cfg.backends = doc.get("backends", {})

        d = doc.get("datagen", {})
        cfg.gen = dg.GenConfig(
            src_lang_name=d.get("src_lang_name", cfg.src_lang_name),
            tgt_lang_name=d.get("tgt_lang_name", cfg.tgt_lang_name),
            sentences_per_call=d.get("sentences_per_call", 20),
            temperatures=tuple(d.get("temperatures", (0.0, 0.3))),
            top_p=d.get("top_p", 1.0),
            model_id=d.get("model_id", "gpt-3.5-turbo"),
            seed_with_both_terms=d.get("seed_with_both_terms", False),
            lang_names_extra=d.get("lang_names_extra", {}),
        )
        f = doc.get("filter", {})
        cfg.filter = filtering.FilterConfig(
            expected_src_lang=f.get("expected_src_lang", cfg.src_lang),
            expected_tgt_lang=f.get("expected_tgt_lang", cfg.tgt_lang),
            primary_threshold=f.get("primary_threshold", 0.9),
            secondary_threshold=f.get("secondary_threshold", 0.9),
        )
        s = doc.get("score", {})
        cfg.score = scoring.ScoreConfig(
            beam_size=s.get("beam_size", 4),
            max_batch_tokens=s.get("max_batch_tokens", 2024),
        )
        cfg.score_sample_size = s.get("sample_size", 200)
        m = doc.get("mixprep", {})
        cfg.generic_sample_size = m.get("generic_sample_size")
        cfg.finetune = mixprep.FinetuneConfig(**doc.get("finetune", {}))
        a = doc.get("ape", {})
        cfg.ape = ape_mod.ApeConfig(
            temperatures=tuple(a.get("temperatures", (0.0, 0.2))),
            top_p=a.get("top_p", 1.0),
            max_terms_per_prompt=a.get("max_terms_per_prompt"),
            model_id=a.get("model_id", "gpt-3.5-turbo"),
            strict=a.get("strict", False),
            tgt_lang=cfg.tgt_lang,
            match_mode=cfg.match_mode,
        )
        cfg.refs_file = doc.get("eval", {}).get("refs")
        cfg.two_set_only = bool(doc.get("eval", {}).get("two_set_only", False))
    except (ValueError, TypeError, KeyError) as err:
        raise ConfigError(str(err)) from err
    return cfg


# ---------------------------------------------------------------------------
# Backend construction


def make_backends(cfg: RunConfig):
    chosen = cfg.backends
    seed = cfg.seed

    def backend(kind: str, default: str):
        value = chosen.get(kind, default)
        if value == "mock":
            if kind == "llm":
                return be.MockChatBackend(seed=seed,
                                          drop_rate=chosen.get("llm_drop_rate", 0.0))
            if kind == "mt":
                return be.EchoTranslator()
            return be.SeededScorer(seed=seed)
        if cfg.offline:
            raise ConfigError(f"--offline forbids the HTTP {kind} backend {value!r}")
        url = None if value == "env" else value
        if kind == "llm":
            return be.HttpChatClient(url=url)
        if kind == "mt":
            return be.HttpMTClient(url=url)
        return be.HttpScorerClient(url=url)

    return (backend("llm", "mock"), backend("mt", "mock"), backend("scorer", "mock"))


# ---------------------------------------------------------------------------
# Manifest


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class Manifest:
    def __init__(self, work_dir):
        self.path = Path(work_dir) / "manifest.json"
        self.data = {"stages": {}}
        if self.path.exists():
            try:
                self.data = json.loads(self.path.read_text(encoding="utf-8"))
            except ValueError:
                log.warning("corrupt manifest; starting fresh")
                self.data = {"stages": {}}

    def record(self, stage: str, inputs: dict, config_hash: str, outputs: dict):
        import time

        self.data["stages"][stage] = {
            "inputs": inputs,
            "config_hash": config_hash,
            "outputs": outputs,
            "completed_at": time.time(),
        }
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(json.dumps(self.data, indent=2, sort_keys=True), encoding="utf-8")
        tmp.replace(self.path)

    def is_current(self, stage: str, inputs: dict, config_hash: str) -> bool:
        entry = self.data["stages"].get(stage)
        if not entry:
            return False
        if entry["config_hash"] != config_hash or entry["inputs"] != inputs:
            return False
        for out_path, digest in entry["outputs"].items():
            p = Path(out_path)
            if not p.exists() or sha256_file(p) != digest:
                return False
        return True


def atomic_write_text(path, text: str):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def atomic_write_jsonl(path, records) -> int:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    n = write_jsonl(tmp, records)
    tmp.replace(path)
    return n


def atomic_write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, ensure_ascii=False, indent=2,
                                       sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Stages

STAGE_INPUTS = {
    "datagen": ("terms.tsv",),
    "filter": ("raw_pairs.jsonl",),
    "score": ("filtered_pairs.jsonl",),
    "mixprep": ("filtered_pairs.jsonl", "generic.jsonl"),
    "translate": ("segments.jsonl",),
    "termcheck": ("segments_mt.jsonl",),
    "ape": ("segments_mt.jsonl",),
    "eval": ("segments_ape.jsonl",),
}


class PipelineRunner:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.work = Path(cfg.work_dir)
        self.work.mkdir(parents=True, exist_ok=True)
        self.manifest = Manifest(self.work)
        self.llm, self.mt, self.scorer = make_backends(cfg)
        self.cache = ChatCache(cfg.cache_dir)
        self.chat = self.cache.wrap(self.llm.chat)

    # -- plumbing

    def _inputs(self, stage: str) -> dict:
        paths = [self.work / name for name in STAGE_INPUTS[stage]]
        if stage == "eval" and self.cfg.refs_file:
            paths.append(self.work / self.cfg.refs_file)
        missing = [str(p) for p in paths if not p.exists()]
        if missing:
            raise StageError(f"stage {stage}: missing input file(s): {', '.join(missing)}")
        return {str(p): sha256_file(p) for p in paths}

    def run_stage(self, stage: str) -> dict:
        """Run one stage; returns the mapping of output paths to hashes."""
        if stage not in STAGES:
            raise ConfigError(f"unknown stage {stage!r}; expected one of {STAGES}")
        inputs = self._inputs(stage)
        config_hash = self.cfg.config_hash()
        if self.manifest.is_current(stage, inputs, config_hash):
            log.info("stage %s: up to date, skipping", stage)
            return self.manifest.data["stages"][stage]["outputs"]
        out_paths = getattr(self, f"_stage_{stage}")()
        outputs = {str(p): sha256_file(p) for p in out_paths}
        self.manifest.record(stage, inputs, config_hash, outputs)
        return outputs

    def run_all(self):
        for stage in STAGES:
            self.run_stage(stage)

    # -- stage implementations

    def _stage_datagen(self):
        terms = read_terms_tsv(self.work / "terms.tsv")
        diag = dg.ParseDiagnostics()
        pairs = dg.generate_for_terms(terms, self.cfg.gen, self.llm,
                                      diag=diag, chat=self.chat)
        out = self.work / "raw_pairs.jsonl"
        atomic_write_jsonl(out, pairs)
        diag_path = self.work / "datagen_diag.json"
        atomic_write_json(diag_path, {"dropped": diag.dropped, "reasons": diag.reasons,
                                      "pairs": len(pairs)})
        return [out, diag_path]

    def _stage_filter(self):
        pairs = read_pairs(self.work / "raw_pairs.jsonl")
        det1 = det2 = filtering.StopwordDetector()
        kept, stats = filtering.filter_corpus(pairs, self.cfg.filter, det1, det2)
        out = self.work / "filtered_pairs.jsonl"
        atomic_write_jsonl(out, kept)
        stats_path = self.work / "filter_stats.json"
        atomic_write_json(stats_path, stats.to_dict())
        return [out, stats_path]

    def _stage_score(self):
        pairs = read_pairs(self.work / "filtered_pairs.jsonl")
        if not pairs:
            raise StageError("score: no filtered pairs to score")
        sample = pairs[: self.cfg.score_sample_size]
        src, tgt = self.cfg.src_lang, self.cfg.tgt_lang
        fwd = f"{src.upper()}-{tgt.upper()}"
        rev = f"{tgt.upper()}-{src.upper()}"
        swapped = [type(p)(src=p.tgt, tgt=p.src, origin=p.origin,
                           seed_term=p.seed_term, meta=p.meta) for p in sample]
        results = {
            fwd: (
                scoring.mean_exp_score(sample, (src, tgt), self.scorer, self.cfg.score),
                scoring.baseline_self_score([p.src for p in sample], (src, tgt),
                                            self.mt, self.scorer, self.cfg.score),
            ),
            rev: (
                scoring.mean_exp_score(swapped, (tgt, src), self.scorer, self.cfg.score),
                scoring.baseline_self_score([p.tgt for p in sample], (tgt, src),
                                            self.mt, self.scorer, self.cfg.score),
            ),
        }
        report = scoring.build_quality_report(results)
        json_path = self.work / "quality_report.json"
        txt_path = self.work / "quality_report.txt"
        atomic_write_json(json_path, report.to_dict())
        atomic_write_text(txt_path, report.to_text() + "\n")
        return [json_path, txt_path]

    def _stage_mixprep(self):
        synthetic = read_pairs(self.work / "filtered_pairs.jsonl")
        generic = read_pairs(self.work / "generic.jsonl")
        if not synthetic:
            raise StageError("mixprep: no synthetic pairs")
        k = self.cfg.generic_sample_size or len(generic)
        k = min(k, len(generic))
        sampled = mixprep.sample_generic(generic, k, self.cfg.seed)
        oversampled = mixprep.oversample_to(synthetic, len(sampled), self.cfg.seed)
        dataset = mixprep.mix_and_split(sampled, oversampled, self.cfg.finetune,
                                        self.cfg.seed)
        out_dir = self.work / "finetune"
        written = mixprep.emit_trainer_files(dataset, self.cfg.finetune, out_dir)
        counts_path = self.work / "mixprep_counts.json"
        atomic_write_json(counts_path, {
            "generic_count": dataset.generic_count,
            "synthetic_count_before": dataset.synthetic_count_before,
            "synthetic_count_after": dataset.synthetic_count_after,
            "train": len(dataset.train), "val": len(dataset.val),
        })
        return list(written.values()) + [counts_path]

    def _stage_translate(self):
        records = read_segments(self.work / "segments.jsonl")
        if not records:
            raise StageError("translate: no segments")
        req = be.TranslateRequest(
            source_lang=self.cfg.src_lang, target_lang=self.cfg.tgt_lang,
            texts=tuple(r.src for r in records), beam_size=self.cfg.score.beam_size,
        )
        translations = self.mt.translate(req)
        for record, mt_out in zip(records, translations):
            record.mt = mt_out
        out = self.work / "segments_mt.jsonl"
        atomic_write_jsonl(out, records)
        return [out]

    def _stage_termcheck(self):
        records = read_segments(self.work / "segments_mt.jsonl")
        table = evalreport.build_coverage_table(records, ["baseline"],
                                                lang=self.cfg.tgt_lang,
                                                mode=self.cfg.match_mode)
        out = self.work / "coverage_mt.json"
        atomic_write_json(out, table.to_dict())
        txt = self.work / "coverage_mt.txt"
        atomic_write_text(txt, table.to_text() + "\n")
        return [out, txt]

    def _stage_ape(self):
        records = read_segments(self.work / "segments_mt.jsonl")
        all_stats = {}
        for label in ("set1", "set2"):
            _, stats = ape_mod.post_edit_corpus(
                records, label, self.cfg.ape, self.llm,
                src_lang_name=self.cfg.src_lang_name,
                tgt_lang_name=self.cfg.tgt_lang_name,
                chat=self.chat,
            )
            all_stats[label] = stats.to_dict()
        out = self.work / "segments_ape.jsonl"
        atomic_write_jsonl(out, records)
        stats_path = self.work / "ape_stats.json"
        atomic_write_json(stats_path, all_stats)
        return [out, stats_path]

    def _stage_eval(self):
        records = read_segments(self.work / "segments_ape.jsonl")
        refs = None
        hyps_per_system = {}
        if self.cfg.refs_file:
            refs_path = self.work / self.cfg.refs_file
            refs = refs_path.read_text(encoding="utf-8").splitlines()
            if len(refs) != len(records):
                raise StageError(
                    f"eval: {len(refs)} references for {len(records)} segments")
        if self.cfg.two_set_only:
            keep = [bool(r.term_set("set1").entries and r.term_set("set2").entries)
                    for r in records]
            records = [r for r, k in zip(records, keep) if k]
            if refs is not None:
                refs = [x for x, k in zip(refs, keep) if k]
        if self.cfg.refs_file:
            hyps_per_system = {
                "baseline": [r.mt or "" for r in records],
                "ape[set1]": [r.ape.get("set1", r.mt or "") for r in records],
                "ape[set2]": [r.ape.get("set2", r.mt or "") for r in records],
            }
        coverage_table, report = evalreport.build_reports(
            records, hyps_per_system, refs,
            lang=self.cfg.tgt_lang, mode=self.cfg.match_mode,
        )
        evalreport.save_reports(coverage_table, report, self.work)
        out = [self.work / "report.coverage.txt", self.work / "report.coverage.json"]
        if report is not None:
            out += [self.work / "report.metrics.txt", self.work / "report.metrics.json"]
        return out
