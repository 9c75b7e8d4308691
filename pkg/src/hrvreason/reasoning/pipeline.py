"""Trial orchestration: features -> normalization -> guardrails -> retrieval
-> steps 1..8 -> validation -> persisted run directory.

Trials are independent units processed by a bounded worker pool; within a
trial the eight steps run strictly in order. Every artifact write is
atomic (temp file + rename) and every aggregate is sorted before writing,
so a run with a deterministic backend is byte-stable across executions.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from ..config import RunConfig, load_lexicon, load_population_stats
from ..errors import HrvReasonError
from ..evaluation.labels import construct_label
from ..guardrails import GuardrailSet, build_guardrails
from ..knowledge.embedding import make_embedder
from ..knowledge.governance import ScoredPassage, govern, retrieve
from ..knowledge.queries import build_queries
from ..knowledge.store import VectorStore
from ..normalization import BaselineProfile, build_baseline, normalize_panel
from ..signal.ingest import TrialRecord
from ..signal.panel import METRIC_ORDER, FeaturePanel, extract_panel
from .client import CompletionResponse, make_client
from .prompts import StepContext, assemble_prompt
from .report import StructuredReport, parse_report
from .textproc import truncate_repetition
from .validate import ValidationResult, detect_mapping_paradox, validate

# Which reasoning step owns each state query's metric domain.
_METRIC_STEP = {
    "MeanRR": 2, "SDNN": 2, "MeanHR": 2, "SDHR": 2, "RMSSD": 2,
    "NN50": 2, "pNN50": 2, "SDNN_index": 2,
    "ULF_ratio": 3, "LF_ratio": 3, "HF_ratio": 3, "LF_HF": 3,
    "SD1": 4, "SD2": 4, "SD1_SD2": 4, "SampEn": 4, "DFA_alpha": 4,
}

_STEP_METRICS = {
    2: ["MeanRR", "SDNN", "MeanHR", "SDHR", "RMSSD", "NN50", "pNN50", "SDNN_index"],
    3: ["ULF_ratio", "LF_ratio", "HF_ratio", "LF_HF"],
    4: ["SD1", "SD2", "SD1_SD2", "SampEn", "DFA_alpha"],
    5: ["RMSSD", "SDNN", "MeanHR", "SampEn", "DFA_alpha"],
    6: list(METRIC_ORDER),
    8: list(METRIC_ORDER),
}

PARADOX_DECISION_LINE = (
    "Your previous answer mapped the rationale to a contradictory arousal "
    "level. State one explicit decision line of the form 'Arousal: High' or "
    "'Arousal: Low' that matches your rationale, then restate the template "
    "with a consistent State."
)


@dataclass
class PipelineEnv:
    """Everything a run needs besides the trials themselves."""

    config: RunConfig
    store: Optional[VectorStore] = None
    client: object = None
    population: dict = field(default_factory=dict)
    lexicon: dict = field(default_factory=dict)
    embedder: object = None

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "PipelineEnv":
        store = None
        embedder = None
        if cfg.rag and cfg.store_dir:
            store = VectorStore.load(cfg.store_dir)
            embedder = make_embedder("hash", dimension=store.dimension, seed=cfg.seed)
        population = load_population_stats(cfg.population_stats or None)
        lexicon = load_lexicon(cfg.lexicon_path or None)
        return cls(
            config=cfg,
            store=store,
            client=make_client(cfg.model),
            population=population,
            lexicon=lexicon,
            embedder=embedder,
        )


@dataclass
class StepArtifact:
    step: int
    skipped: bool = False
    reason: str = ""
    request: Optional[dict] = None
    response_text: str = ""
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "skipped": self.skipped,
            "reason": self.reason,
            "request": self.request,
            "response_text": self.response_text,
            "truncated": self.truncated,
        }


@dataclass
class TrialResult:
    subject_id: str
    trial_id: str
    gt_label: str = ""
    pred_label: str = ""
    report: Optional[StructuredReport] = None
    validation: Optional[ValidationResult] = None
    steps: list = field(default_factory=list)
    features: Optional[FeaturePanel] = None
    normalized: Optional[dict] = None
    guardrails: Optional[GuardrailSet] = None
    error: str = ""
    log: list = field(default_factory=list)

    @property
    def key(self) -> str:
        return f"{self.subject_id}_{self.trial_id}"

    @property
    def ok(self) -> bool:
        return not self.error


def _row_dict(row) -> dict:
    d = row.to_dict()
    d.pop("metric", None)
    return {k: v for k, v in d.items() if v is not None and v is not False}


def _rows_for(panel_norm, metrics) -> dict:
    out = {}
    for m in metrics:
        row = panel_norm.row(m)
        if row is not None:
            out[m] = _row_dict(row)
    return out


def _conflict_lines(panel_norm, guardrails: GuardrailSet, delta_z_enabled: bool) -> list[str]:
    lines = []
    for m in METRIC_ORDER:
        row = panel_norm.row(m)
        if row is not None and row.conflict:
            lines.append(
                f"{m}: population z and within-subject delta z disagree in sign "
                f"(z_trad={row.z_trad:+.2f}, z_delta={row.z_delta:+.2f}); "
                f"follow the within-subject direction."
            )
    for flag in guardrails.contradictions:
        lines.append(f"{flag.pattern_id}: {flag.injected_query_topic}")
    # step-2 vs step-6 arousal disagreement: population HR context vs
    # within-subject HR shift pointing in opposite directions
    hr = panel_norm.row("MeanHR")
    if (
        delta_z_enabled
        and hr is not None
        and hr.z_trad is not None
        and hr.z_delta is not None
        and hr.z_trad * hr.z_delta < 0
    ):
        lines.append(
            "time-domain arousal reading (population context) disagrees with "
            "the within-subject heart-rate shift; within-subject evidence wins."
        )
    return lines


def _dedupe_passages(passages: Sequence[ScoredPassage], cap: int) -> list[ScoredPassage]:
    best: dict[int, ScoredPassage] = {}
    for p in passages:
        cur = best.get(p.chunk.chunk_id)
        if cur is None or p.s_adj > cur.s_adj:
            best[p.chunk.chunk_id] = p
    ordered = sorted(
        best.values(),
        key=lambda p: (
            -p.s_adj,
            p.chunk.source_file,
            p.chunk.page if p.chunk.page is not None else -1,
            p.chunk.chunk_id,
        ),
    )
    return ordered[:cap]


def run_trial(trial: TrialRecord, baseline: Optional[BaselineProfile], env: PipelineEnv) -> TrialResult:
    cfg = env.config
    result = TrialResult(subject_id=trial.subject_id, trial_id=trial.trial_id)
    if trial.valence is not None and trial.arousal is not None:
        result.gt_label = construct_label(trial.valence, trial.arousal).label

    features = extract_panel(trial, cfg.features)
    panel_norm = normalize_panel(
        features,
        baseline,
        population=env.population,
        pct_fallback=cfg.pct_fallback,
        use_delta_z=cfg.delta_z,
    )
    guards = build_guardrails(features, panel_norm)
    result.features = features
    result.normalized = panel_norm.to_dict()
    result.guardrails = guards

    # retrieval: state queries plus contradiction warning queries
    step_passages: dict[int, list[ScoredPassage]] = {k: [] for k in range(1, 9)}
    if cfg.rag and env.store is not None and len(env.store) > 0:
        queries = build_queries(panel_norm, guards.contradictions)
        for q in queries:
            governed = govern(retrieve(q, env.store, env.embedder, cfg.retrieval),
                              q.topics, cfg.retrieval)
            step_passages[8].extend(governed)
            if q.metric is not None:
                owner = _METRIC_STEP.get(q.metric)
                if owner:
                    step_passages[owner].extend(governed)
        for k in list(step_passages):
            step_passages[k] = _dedupe_passages(step_passages[k], cfg.retrieval.top_k)
        result.log.append(f"retrieval: {len(queries)} queries")

    guardrails_on = cfg.guardrails
    quality_directive = []
    if guardrails_on and guards.quality_gate != "pass":
        quality_directive = [d for d in guards.prompt_directives if "quality" in d.lower() or "valid rr" in d.lower()]

    conflicts = _conflict_lines(panel_norm, guards, cfg.delta_z)
    sampling = cfg.model.sampling
    markers = cfg.model.citation_markers

    def run_step(step: int, data: dict, directives: list, notes: list,
                 passages: list, step_conflicts: list, prior: dict) -> StepArtifact:
        ctx = StepContext(
            step_id=step,
            subject_id=trial.subject_id,
            trial_id=trial.trial_id,
            data=data,
            directives=directives if guardrails_on else [],
            notes=notes,
            passages=passages if cfg.rag else [],
            conflicts=step_conflicts,
            prior_reports=prior,
            citation_markers=markers,
            sampling=sampling,
        )
        req = assemble_prompt(ctx)
        resp: CompletionResponse = env.client.complete(req)
        text, truncated = truncate_repetition(resp.text)
        return StepArtifact(step=step, request=req.payload(),
                            response_text=text, truncated=truncated)

    quality_data = {
        "artifact_rate": features.artifact_rate,
        "valid_rr_ratio": features.valid_rr_ratio,
        "spectral_reliability_flag": features.spectral_reliability_flag,
        "nonlinear_stability_flag": features.nonlinear_stability_flag,
    }
    if guardrails_on:
        quality_data["quality_gate"] = guards.quality_gate

    metrics = features.metrics()
    prior: dict[int, str] = {}
    artifacts: list[StepArtifact] = []

    # Step 1: signal quality gate
    art = run_step(1, dict(quality_data), [], [], [], [], {})
    prior[1] = art.response_text
    artifacts.append(art)

    # Step 2: time domain
    data2 = {"rows": _rows_for(panel_norm, _STEP_METRICS[2])}
    art = run_step(2, data2, list(quality_directive), [], step_passages[2], [], {})
    prior[2] = art.response_text
    artifacts.append(art)

    # Step 3: frequency domain + RSA
    data3 = {
        "rows": _rows_for(panel_norm, _STEP_METRICS[3]),
        "rsa": guards.rsa.to_dict(),
        "f_resp": features.f_resp,
    }
    if features.freq:
        data3["band_powers"] = features.freq.band_powers
        data3["peaks"] = {
            "ULF": features.freq.peak_ulf,
            "LF": features.freq.peak_lf,
            "HF": features.freq.peak_hf,
        }
        data3["f_HF"] = features.freq.f_hf
    dir3 = [d for d in guards.prompt_directives
            if d not in quality_directive and "nonlinear" not in d.lower()]
    art = run_step(3, data3, dir3 + list(quality_directive),
                   list(guards.notes), step_passages[3], [], {})
    prior[3] = art.response_text
    artifacts.append(art)

    # Step 4: nonlinear + data-length guardrail
    data4 = {
        "rows": _rows_for(panel_norm, _STEP_METRICS[4]),
        "n_poincare": features.nonlin.n_poincare,
        "poincare_bounds": features.nonlin.poincare_bounds,
        "poincare_density_center": list(features.nonlin.poincare_density_center),
        "nonlinear_prohibited": guards.nonlinear_prohibited,
    }
    dir4 = [d for d in guards.prompt_directives if "nonlinear" in d.lower()]
    art = run_step(4, data4, dir4 + list(quality_directive), [], step_passages[4], [], {})
    prior[4] = art.response_text
    artifacts.append(art)

    # Step 5: baseline delta
    data5 = {
        "rows": _rows_for(panel_norm, _STEP_METRICS[5]),
        "baseline_available": panel_norm.baseline_available,
        "baseline_mode": panel_norm.baseline_mode,
    }
    art = run_step(5, data5, list(quality_directive), [], [], [], {})
    prior[5] = art.response_text
    artifacts.append(art)

    # Step 6: within-subject profile (primary evidence: delta z)
    data6 = {
        "rows": _rows_for(panel_norm, _STEP_METRICS[6]),
        "primary_evidence": "z_s6" if cfg.delta_z else "delta_pct",
        "baseline_available": panel_norm.baseline_available,
    }
    art = run_step(6, data6, list(quality_directive), [], [],
                   conflicts if guardrails_on else [], {})
    prior[6] = art.response_text
    artifacts.append(art)

    # Step 7: optional EEG hook
    if trial.eeg:
        art = run_step(7, {"eeg": trial.eeg}, list(quality_directive), [], [], [], {})
        prior[7] = art.response_text
    else:
        art = StepArtifact(step=7, skipped=True, reason="no EEG channel present")
        prior[7] = "Step 7 skipped: no EEG channel present."
    artifacts.append(art)

    # Step 8: integration
    data8 = {
        "rows": _rows_for(panel_norm, _STEP_METRICS[8]),
        "metrics": {m: metrics[m] for m in METRIC_ORDER if metrics[m] == metrics[m]},
        "artifact_rate": features.artifact_rate,
        "valid_rr_ratio": features.valid_rr_ratio,
        "n_poincare": features.nonlin.n_poincare,
        "citations": [
            [p.chunk.source_file, p.chunk.page if p.chunk.page is not None else 1]
            for p in step_passages[8]
        ] if markers else [],
        "contradictions": [f.pattern_id for f in guards.contradictions],
    }
    if features.freq:
        data8["band_powers"] = features.freq.band_powers
    if guardrails_on:
        data8["quality_gate"] = guards.quality_gate
    notes8 = list(guards.notes) if guardrails_on else []
    dir8 = list(guards.prompt_directives) if guardrails_on else []
    art8 = run_step(8, data8, dir8, notes8, step_passages[8],
                    conflicts if guardrails_on else [], prior)
    artifacts.append(art8)

    report = parse_report(art8.response_text)
    validation = validate(report, features, panel_norm, env.lexicon)
    validation.repetition_truncated = any(a.truncated for a in artifacts)

    # mapping paradox: one constrained regeneration, then downgrade
    if validation.mapping_paradox:
        ctx_extra = StepContext(
            step_id=8,
            subject_id=trial.subject_id,
            trial_id=trial.trial_id,
            data=data8,
            directives=dir8,
            notes=notes8,
            passages=step_passages[8] if cfg.rag else [],
            conflicts=conflicts if guardrails_on else [],
            prior_reports=prior,
            extra_instructions=[PARADOX_DECISION_LINE],
            citation_markers=markers,
            sampling=sampling,
        )
        req2 = assemble_prompt(ctx_extra)
        resp2 = env.client.complete(req2)
        text2, trunc2 = truncate_repetition(resp2.text)
        art_regen = StepArtifact(step=8, request=req2.payload(),
                                 response_text=text2, truncated=trunc2)
        artifacts.append(art_regen)
        report = parse_report(text2)
        validation = validate(report, features, panel_norm, env.lexicon)
        validation.repetition_truncated = any(a.truncated for a in artifacts)
        validation.actions_taken.append("regenerated_once_for_mapping_paradox")
        if detect_mapping_paradox(report, env.lexicon):
            validation.mapping_paradox = True
            downgrade = {"High": "Medium", "Medium": "Low", "Low": "Low"}
            report.confidence = downgrade[report.confidence]
            validation.actions_taken.append("confidence_downgraded_after_second_paradox")

    # quality gate caps final confidence at Medium
    if guardrails_on and guards.quality_gate == "gate" and report.confidence == "High":
        report.confidence = "Medium"
        validation.actions_taken.append("confidence_capped_medium_by_quality_gate")

    result.report = report
    result.validation = validation
    result.steps = artifacts
    result.pred_label = report.state
    result.log.append(f"state={report.state} confidence={report.confidence}")
    return result


def _atomic_write(path: Path, content: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _sanitize(obj):
    """Replace non-finite floats with None so artifacts stay strict JSON."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and (obj != obj or obj in (float("inf"), float("-inf"))):
        return None
    return obj


def write_trial_dir(run_dir: Path, result: TrialResult) -> None:
    tdir = run_dir / "trials" / result.key
    (tdir / "steps").mkdir(parents=True, exist_ok=True)
    seen8 = 0
    for art in result.steps:
        name = f"step{art.step}.json"
        if art.step == 8:
            seen8 += 1
            if seen8 > 1:
                name = f"step{art.step}_regen.json"
        _atomic_write(tdir / "steps" / name, _dump(_sanitize(art.to_dict())))
    if result.report is not None:
        _atomic_write(tdir / "report.json", _dump(_sanitize(result.report.to_dict())))
    if result.validation is not None:
        _atomic_write(tdir / "validation.json", _dump(_sanitize(result.validation.to_dict())))
    if result.features is not None:
        payload = {
            "features": result.features.to_dict(),
            "normalized": result.normalized,
            "guardrails": result.guardrails.to_dict() if result.guardrails else None,
        }
        _atomic_write(tdir / "features.json", _dump(_sanitize(payload)))
    if result.error:
        _atomic_write(tdir / "error.json", _dump({"error": result.error}))


def run_pipeline(trials: Sequence[TrialRecord], env: PipelineEnv, out_dir) -> dict:
    """Process every trial, isolate failures, and persist a run directory.

    Returns a summary dict: counts, failures, and the run directory path.
    """
    cfg = env.config
    run_dir = Path(out_dir)
    run_dir.mkdir(parents=True, exist_ok=True)

    # per-subject baselines
    by_subject: dict[str, list[TrialRecord]] = {}
    for t in trials:
        by_subject.setdefault(t.subject_id, []).append(t)

    panels: dict[str, FeaturePanel] = {}
    panel_errors: dict[str, str] = {}
    for t in trials:
        try:
            panels[t.key] = extract_panel(t, cfg.features)
        except HrvReasonError as exc:
            panel_errors[t.key] = f"{type(exc).__name__}: {exc}"

    baselines: dict[str, BaselineProfile] = {}
    for subject, subject_trials in by_subject.items():
        usable = [panels[t.key] for t in subject_trials if t.key in panels]
        baselines[subject] = build_baseline(usable, subject, mode="retrospective")

    def baseline_for(trial: TrialRecord) -> Optional[BaselineProfile]:
        if cfg.baseline_mode == "retrospective":
            return baselines.get(trial.subject_id)
        prior = []
        for t in by_subject[trial.subject_id]:
            if t.key == trial.key:
                break
            if t.key in panels:
                prior.append(panels[t.key])
        if not prior:
            return None
        return build_baseline(prior, trial.subject_id, mode="causal")

    def process(trial: TrialRecord) -> TrialResult:
        if trial.key in panel_errors:
            res = TrialResult(subject_id=trial.subject_id, trial_id=trial.trial_id,
                              error=panel_errors[trial.key])
            if trial.valence is not None and trial.arousal is not None:
                res.gt_label = construct_label(trial.valence, trial.arousal).label
            return res
        try:
            return run_trial(trial, baseline_for(trial), env)
        except HrvReasonError as exc:
            res = TrialResult(subject_id=trial.subject_id, trial_id=trial.trial_id,
                              error=f"{type(exc).__name__}: {exc}")
            if trial.valence is not None and trial.arousal is not None:
                res.gt_label = construct_label(trial.valence, trial.arousal).label
            return res

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(process, trials))
    else:
        results = [process(t) for t in trials]

    results.sort(key=lambda r: (r.subject_id, r.trial_id))

    for res in results:
        write_trial_dir(run_dir, res)

    for subject in sorted(baselines):
        bdir = run_dir / "baselines"
        bdir.mkdir(exist_ok=True)
        _atomic_write(bdir / f"{subject}.json", _dump(_sanitize(baselines[subject].to_dict())))

    lines = ["subject,trial,gt,pred"]
    for res in results:
        pred = res.pred_label or ("failed" if res.error else "Unknown")
        lines.append(f"{res.subject_id},{res.trial_id},{res.gt_label},{pred}")
    _atomic_write(run_dir / "predictions.csv", "\n".join(lines) + "\n")

    cfg_dict = cfg.to_dict()
    cfg_dict["out_dir"] = ""  # the directory this file sits in; keeps runs comparable
    run_meta = {
        "config": cfg_dict,
        "ablation": cfg.ablation_name(),
    }
    if not cfg.deterministic:
        run_meta["started_utc"] = datetime.now(timezone.utc).isoformat()
    _atomic_write(run_dir / "run.json", _dump(_sanitize(run_meta)))

    n_ok = sum(1 for r in results if r.ok)
    summary = {
        "n_trials": len(results),
        "n_ok": n_ok,
        "n_failed": len(results) - n_ok,
        "failures": {r.key: r.error for r in results if not r.ok},
        "ablation": cfg.ablation_name(),
    }
    _atomic_write(run_dir / "summary.json", _dump(summary))
    summary = dict(summary, run_dir=str(run_dir))

    log_lines = []
    for res in results:
        for entry in res.log:
            log_lines.append(f"{res.key}: {entry}")
        if res.error:
            log_lines.append(f"{res.key}: ERROR {res.error}")
    _atomic_write(run_dir / "run.log", "\n".join(sorted(log_lines)) + "\n")
    return summary
