"""Run-directory level operations: ingest, analyze, evaluate, ablate.

This is the layer both the HTTP service and the CLI drive. Everything here
works on filesystem paths and returns plain dicts ready for serialization.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Optional

from .config import (
    ABLATION_ROWS,
    CrcConfig,
    RunConfig,
    load_lexicon,
)
from .errors import ConfigError, IngestError
from .evaluation.crc import crc_report
from .evaluation.metrics import (
    MetricSummary,
    PredictionRecord,
    evaluate_predictions,
    load_predictions_csv,
    render_table,
)
from .knowledge.embedding import make_embedder
from .knowledge.store import index_corpus, load_manifest
from .reasoning.pipeline import PipelineEnv, run_pipeline
from .reasoning.report import StructuredReport
from .signal.ingest import load_trials
from .signal.panel import extract_panel
from .synthetic import gen_corpus, gen_trials, write_trials_jsonl


def ingest_kb(
    manifest_path: str,
    out_dir: str,
    embedder_kind: str = "hash",
    dimension: int = 64,
    seed: int = 0,
    embedder_url: str = "",
) -> dict:
    specs = load_manifest(manifest_path)
    embedder = make_embedder(embedder_kind, dimension=dimension, seed=seed, url=embedder_url)
    store = index_corpus(specs, embedder)
    store.save(out_dir)
    return {"out_dir": str(out_dir), "documents": len(specs), "chunks": len(store)}


def extract_features(trials_path: str, out_path: str, cfg: RunConfig,
                     pop_stats_out: str = "") -> dict:
    """Feature panels for every trial; optionally derive cohort population stats."""
    import numpy as np

    trials = load_trials(trials_path)
    panels = []
    failures = {}
    for t in trials:
        try:
            panels.append(extract_panel(t, cfg.features))
        except Exception as exc:  # per-trial isolation
            failures[t.key] = f"{type(exc).__name__}: {exc}"
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        for p in panels:
            fh.write(json.dumps(p.to_dict(), sort_keys=True) + "\n")
    result = {"n_trials": len(trials), "n_ok": len(panels),
              "n_failed": len(failures), "failures": failures, "out": str(out)}
    if pop_stats_out:
        stats = {}
        from .signal.panel import METRIC_ORDER

        for metric in METRIC_ORDER:
            vals = np.array([p.metrics()[metric] for p in panels], dtype=float)
            vals = vals[np.isfinite(vals)]
            if vals.size >= 2 and float(np.std(vals, ddof=1)) > 0:
                stats[metric] = {"mean": float(np.mean(vals)),
                                 "sd": float(np.std(vals, ddof=1))}
        Path(pop_stats_out).write_text(
            json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        result["pop_stats_out"] = pop_stats_out
    return result


def analyze(trials_path: str, out_dir: str, cfg: RunConfig) -> dict:
    cfg = dataclasses.replace(cfg, trials_path=trials_path, out_dir=str(out_dir))
    trials = load_trials(trials_path)
    env = PipelineEnv.from_config(cfg)
    return run_pipeline(trials, env, out_dir)


def _merge_gt(records: list[PredictionRecord], gt_csv: str) -> list[PredictionRecord]:
    gt_records = load_predictions_csv(gt_csv)
    gt_map = {r.key: r.gt for r in gt_records}
    merged = []
    for r in records:
        if r.key not in gt_map:
            raise IngestError(f"gt file missing trial {r.key}")
        merged.append(PredictionRecord(r.subject, r.trial, gt_map[r.key], r.pred))
    return merged


def _load_reports(run_dir: Path) -> list[StructuredReport]:
    reports = []
    for path in sorted(run_dir.glob("trials/*/report.json")):
        with open(path, "r", encoding="utf-8") as fh:
            reports.append(StructuredReport.from_dict(json.load(fh)))
    return reports


def evaluate(
    run_dir: str = "",
    predictions_csv: str = "",
    gt_csv: str = "",
    baseline_run: str = "",
    lexicon_path: str = "",
    t3_dimension: str = "valence",
    write_outputs: bool = True,
) -> dict:
    """Full metric suite over a run directory or a bare prediction CSV."""
    if not run_dir and not predictions_csv:
        raise ConfigError("evaluate needs a run_dir or a predictions CSV")
    rd = Path(run_dir) if run_dir else None
    pred_path = Path(predictions_csv) if predictions_csv else rd / "predictions.csv"
    records = load_predictions_csv(pred_path)
    if gt_csv:
        records = _merge_gt(records, gt_csv)

    reports = _load_reports(rd) if rd else None
    crc_results = None
    if reports:
        lex = load_lexicon(lexicon_path or None)
        crc_cfg = CrcConfig(lexicon=lex)
        crc_results = [crc_report(r, crc_cfg) for r in reports]

    baseline_records = None
    if baseline_run:
        baseline_records = load_predictions_csv(Path(baseline_run) / "predictions.csv")

    summary = evaluate_predictions(
        records,
        baseline_records=baseline_records,
        reports=reports,
        crc_results=crc_results,
        t3_dimension=t3_dimension,
    )
    table = render_table(summary)
    payload = summary.to_dict()
    if rd and write_outputs:
        (rd / "metrics.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        (rd / "metrics.txt").write_text(table + "\n", encoding="utf-8")
    return {"metrics": payload, "table": table}


def ablate(trials_path: str, out_root: str, base_cfg: RunConfig) -> dict:
    """All five ablation rows, then cross-run agreement against the full system."""
    root = Path(out_root)
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    run_dirs = {}
    for name, switches in ABLATION_ROWS:
        cfg = dataclasses.replace(base_cfg, **switches)
        run_dir = root / name
        summary = analyze(trials_path, str(run_dir), cfg)
        run_dirs[name] = run_dir
        rows.append({"name": name, **{k: v for k, v in summary.items() if k != "run_dir"}})

    full_records = load_predictions_csv(run_dirs["full"] / "predictions.csv")
    comparison = []
    for row in rows:
        name = row["name"]
        result = evaluate(run_dir=str(run_dirs[name]), write_outputs=True)
        metrics = result["metrics"]
        from .evaluation.metrics import agreement

        records = load_predictions_csv(run_dirs[name] / "predictions.csv")
        c1 = agreement(records, full_records)
        comparison.append({
            "name": name,
            "run_dir": str(run_dirs[name]),
            "T1": metrics.get("task", {}).get("T1"),
            "wad_mean": metrics.get("wad", {}).get("wad_mean"),
            "C1_vs_full": c1,
            "n_failed": row.get("n_failed", 0),
        })

    header = f"{'setting':<16}{'T1':>8}{'WAD':>8}{'C1 vs full':>12}"
    lines = [header]
    for c in comparison:
        t1 = f"{c['T1']:.1f}" if c["T1"] is not None else "-"
        wad_v = f"{c['wad_mean']:.2f}" if c["wad_mean"] is not None else "-"
        lines.append(f"{c['name']:<16}{t1:>8}{wad_v:>8}{c['C1_vs_full']:>12.1f}")
    table = "\n".join(lines)
    (root / "comparison.json").write_text(
        json.dumps(comparison, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (root / "comparison.txt").write_text(table + "\n", encoding="utf-8")
    return {"rows": comparison, "table": table, "out_root": str(root)}


def gen_synthetic(
    out_path: str,
    subjects: int = 2,
    trials_per_subject: int = 3,
    seed: int = 7,
    duration_s: float = 240.0,
    with_resp: str = "alternate",
    corpus_dir: str = "",
    artifact_trial: bool = False,
    short_trial: bool = False,
) -> dict:
    records = gen_trials(
        n_subjects=subjects,
        trials_per_subject=trials_per_subject,
        seed=seed,
        duration_s=duration_s,
        with_resp=with_resp,
        artifact_trial=artifact_trial,
        short_trial=short_trial,
    )
    path = write_trials_jsonl(records, out_path)
    out = {"trials_path": str(path), "n_trials": len(records)}
    if corpus_dir:
        manifest = gen_corpus(corpus_dir)
        out["corpus_manifest"] = str(manifest)
    return out
