"""Classification, quality, consistency, and affective-distance metrics.

Conventions: ground-truth neutral trials are excluded from task metrics,
F1, and distance; Unknown predictions count as errors in accuracy and F1
but are excluded (with their count reported) from the distance average.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from ..errors import EmptyEvaluationSet, TrialSetMismatch
from ..reasoning.report import StructuredReport
from .labels import AFFECT_COORDS, MAX_WAD, STATES, wad_distance


@dataclass(frozen=True)
class PredictionRecord:
    subject: str
    trial: str
    gt: str        # HVHA/HVLA/LVHA/LVLA/neutral or "" when unlabeled
    pred: str      # state label or Unknown/failed

    @property
    def key(self) -> tuple:
        return (self.subject, self.trial)


def load_predictions_csv(path) -> list[PredictionRecord]:
    p = Path(path)
    out = []
    with open(p, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"subject", "trial", "gt", "pred"}
        if not required.issubset(set(reader.fieldnames or [])):
            raise TrialSetMismatch(f"{p.name}: prediction CSV needs columns {sorted(required)}")
        for row in reader:
            out.append(PredictionRecord(
                subject=row["subject"], trial=row["trial"],
                gt=(row["gt"] or "").strip(), pred=(row["pred"] or "").strip(),
            ))
    return out


def _scorable(records: Sequence[PredictionRecord]) -> list[PredictionRecord]:
    return [r for r in records if r.gt in STATES]


def _valid_pred(pred: str) -> bool:
    return pred in STATES


def task_metrics(records: Sequence[PredictionRecord], t3_dimension: str = "valence") -> dict:
    """T1 exact 4-class accuracy, T2 arousal-dimension, T3 vagal/valence-dimension."""
    scorable = _scorable(records)
    if not scorable:
        raise EmptyEvaluationSet("no non-neutral labeled trials to score")
    n = len(scorable)
    exact = sum(1 for r in scorable if r.pred == r.gt)
    # label layout: <V-half>V<A-half>A, so index 0 is valence, index 2 is arousal
    arousal = sum(1 for r in scorable if _valid_pred(r.pred) and r.pred[2] == r.gt[2])
    valence = sum(1 for r in scorable if _valid_pred(r.pred) and r.pred[0] == r.gt[0])
    t3 = valence if t3_dimension == "valence" else arousal
    return {
        "T1": 100.0 * exact / n,
        "T2": 100.0 * arousal / n,
        "T3": 100.0 * t3 / n,
        "n_scored": n,
    }


def quality_metrics(reports: Sequence[StructuredReport]) -> dict:
    if not reports:
        return {"Q1": None, "Q2": None, "Q3": None, "Q4": None, "n_reports": 0}
    n = len(reports)
    return {
        "Q1": 100.0 * sum(1 for r in reports if r.state_field_present) / n,
        "Q2": 100.0 * sum(1 for r in reports if r.state in STATES) / n,
        "Q3": 100.0 * sum(1 for r in reports if r.rag_citations) / n,
        "Q4": 100.0 * sum(1 for r in reports if r.z_scores_cited) / n,
        "n_reports": n,
    }


def agreement(run_a: Sequence[PredictionRecord], run_b: Sequence[PredictionRecord]) -> float:
    """C1: fraction of trials with matching state labels, neutral included."""
    a = {r.key: r.pred for r in run_a}
    b = {r.key: r.pred for r in run_b}
    if set(a) != set(b):
        missing = sorted(set(a) - set(b))
        extra = sorted(set(b) - set(a))
        raise TrialSetMismatch(
            f"trial sets differ: {len(missing)} only in first ({missing[:5]}...), "
            f"{len(extra)} only in second ({extra[:5]}...)",
            missing=missing, extra=extra,
        )
    if not a:
        raise EmptyEvaluationSet("no trials to compare")
    matches = sum(1 for k in a if a[k] == b[k])
    return 100.0 * matches / len(a)


def wad(records: Sequence[PredictionRecord]) -> dict:
    """Mean affective distance with the error decomposition.

    Unknown/invalid predictions are excluded from the average; their count
    is reported alongside.
    """
    scorable = _scorable(records)
    if not scorable:
        raise EmptyEvaluationSet("no non-neutral labeled trials to score")
    used = [r for r in scorable if _valid_pred(r.pred)]
    excluded = len(scorable) - len(used)
    if not used:
        raise EmptyEvaluationSet("every prediction was Unknown/invalid")
    correct = val_err = aro_err = both_err = 0
    total = 0.0
    for r in used:
        d = wad_distance(r.gt, r.pred)
        total += d
        same_v = r.pred[0] == r.gt[0]
        same_a = r.pred[2] == r.gt[2]
        if same_v and same_a:
            correct += 1
        elif same_a:
            val_err += 1
        elif same_v:
            aro_err += 1
        else:
            both_err += 1
    mean = total / len(used)
    return {
        "wad_mean": mean,
        "wad_normalized": mean / MAX_WAD,
        "correct": correct,
        "valence_errors": val_err,
        "arousal_errors": aro_err,
        "both_errors": both_err,
        "total": len(used),
        "excluded_unknown": excluded,
    }


def f1_and_confusion(records: Sequence[PredictionRecord]) -> dict:
    """One-vs-rest F1 per class; Unknown is a fifth, never-correct prediction bin."""
    scorable = _scorable(records)
    if not scorable:
        raise EmptyEvaluationSet("no non-neutral labeled trials to score")
    pred_of = lambda r: r.pred if _valid_pred(r.pred) else "Unknown"
    cols = list(STATES) + ["Unknown"]
    confusion = {gt: {c: 0 for c in cols} for gt in STATES}
    for r in scorable:
        confusion[r.gt][pred_of(r)] += 1

    per_class = {}
    for cls in STATES:
        tp = confusion[cls][cls]
        fp = sum(confusion[other][cls] for other in STATES if other != cls)
        fn = sum(confusion[cls][c] for c in cols if c != cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[cls] = {
            "precision": precision, "recall": recall, "f1": f1,
            "support": sum(confusion[cls][c] for c in cols),
        }
    supports = {c: per_class[c]["support"] for c in STATES}
    n = sum(supports.values())
    macro = sum(per_class[c]["f1"] for c in STATES) / len(STATES)
    weighted = sum(per_class[c]["f1"] * supports[c] for c in STATES) / n if n else 0.0

    val_err = aro_err = both_err = 0
    for r in scorable:
        p = pred_of(r)
        if p == "Unknown" or p == r.gt:
            continue
        same_v = p[0] == r.gt[0]
        same_a = p[2] == r.gt[2]
        if same_a and not same_v:
            val_err += 1
        elif same_v and not same_a:
            aro_err += 1
        else:
            both_err += 1

    return {
        "macro_f1": macro,
        "weighted_f1": weighted,
        "per_class": per_class,
        "confusion": confusion,
        "dimension_errors": {"valence": val_err, "arousal": aro_err, "both": both_err},
    }


def mode_collapse(records: Sequence[PredictionRecord], threshold: float = 0.9) -> Optional[dict]:
    """Flag a prediction multiset with >= 90% mass on one class."""
    preds = [r.pred for r in records if r.pred]
    if not preds:
        return None
    counts: dict[str, int] = {}
    for p in preds:
        counts[p] = counts.get(p, 0) + 1
    top = max(sorted(counts), key=lambda k: counts[k])
    share = counts[top] / len(preds)
    if share >= threshold:
        return {"class": top, "share": share, "count": counts[top], "total": len(preds)}
    return None


@dataclass
class MetricSummary:
    task: Optional[dict] = None
    quality: Optional[dict] = None
    c1: Optional[float] = None
    f1: Optional[dict] = None
    wad: Optional[dict] = None
    crc: Optional[dict] = None
    mode_collapse: Optional[dict] = None
    n_records: int = 0

    def to_dict(self) -> dict:
        out: dict = {"n_records": self.n_records}
        for name in ("task", "quality", "f1", "wad", "crc", "mode_collapse"):
            val = getattr(self, name)
            if val is not None:
                out[name] = val
        if self.c1 is not None:
            out["c1"] = self.c1
        return out


def evaluate_predictions(
    records: Sequence[PredictionRecord],
    baseline_records: Optional[Sequence[PredictionRecord]] = None,
    reports: Optional[Sequence[StructuredReport]] = None,
    crc_results=None,
    t3_dimension: str = "valence",
) -> MetricSummary:
    from .crc import crc_corpus

    summary = MetricSummary(n_records=len(records))
    summary.task = task_metrics(records, t3_dimension)
    summary.f1 = f1_and_confusion(records)
    summary.wad = wad(records)
    summary.mode_collapse = mode_collapse(records)
    if reports is not None:
        summary.quality = quality_metrics(reports)
    if baseline_records is not None:
        summary.c1 = agreement(records, baseline_records)
    if crc_results is not None:
        summary.crc = crc_corpus(crc_results)
    return summary


def render_table(summary: MetricSummary) -> str:
    """Aligned two-column text table of the headline numbers."""
    rows: list[tuple[str, str]] = []

    def pct(v):
        return f"{v:.1f}%" if v is not None else "-"

    if summary.task:
        rows += [("T1 exact accuracy", pct(summary.task["T1"])),
                 ("T2 arousal accuracy", pct(summary.task["T2"])),
                 ("T3 vagal accuracy", pct(summary.task["T3"])),
                 ("scored trials", str(summary.task["n_scored"]))]
    if summary.quality:
        rows += [(f"Q{i} {name}", pct(summary.quality[f"Q{i}"]))
                 for i, name in ((1, "state fill"), (2, "valid label"),
                                 (3, "citation rate"), (4, "z-score rate"))]
    if summary.c1 is not None:
        rows.append(("C1 state agreement", pct(summary.c1)))
    if summary.f1:
        rows += [("macro F1", f"{summary.f1['macro_f1']:.3f}"),
                 ("weighted F1", f"{summary.f1['weighted_f1']:.3f}")]
    if summary.wad:
        w = summary.wad
        rows += [("mean WAD", f"{w['wad_mean']:.3f}"),
                 ("normalized WAD", f"{w['wad_normalized']:.3f}"),
                 ("decomposition c/v/a/b",
                  f"{w['correct']}/{w['valence_errors']}/{w['arousal_errors']}/{w['both_errors']}"),
                 ("excluded unknown", str(w["excluded_unknown"]))]
    if summary.crc:
        crc_mean = summary.crc.get("crc_mean")
        rows.append(("CRC (report mean)", f"{crc_mean:.3f}" if crc_mean is not None else "-"))
        cw = summary.crc.get("crc_check_weighted")
        rows.append(("CRC (check weighted)", f"{cw:.3f}" if cw is not None else "-"))
    if summary.mode_collapse:
        mc = summary.mode_collapse
        rows.append(("mode collapse", f"{mc['class']} at {100 * mc['share']:.1f}%"))

    width = max(len(k) for k, _ in rows) if rows else 0
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)
