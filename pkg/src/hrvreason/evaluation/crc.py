"""Reasoning-consistency scoring: do cited z-score directions agree with the
clinical keywords used in the same report?

For every metric whose z-score the report cites with magnitude above the
directional threshold, positive and negative keyword hits are counted
(presence per keyword, not occurrences) and the metric is classified as
consistent, inconsistent, neutral, or no-keywords. A report's score is the
consistent fraction of its decidable checks; reports with no decidable
checks contribute nothing to the corpus mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..config import CrcConfig
from ..reasoning.report import StructuredReport

CRC_METRICS = ["RMSSD", "SDNN", "pNN50", "MeanHR", "LF_HF", "SampEn", "DFA_alpha"]


def keyword_hits(text: str, keywords: Sequence[str]) -> int:
    """Number of keywords present at least once (case-insensitive substring)."""
    norm = " ".join(text.lower().split())
    return sum(1 for k in keywords if k.lower() in norm)


def classify_check(z: float, n_pos: int, n_neg: int, tau: float) -> str:
    """One metric's consistency class.

    Neutral covers both a sub-threshold z and balanced nonzero keyword
    evidence (no direction either way); only a strict keyword majority in
    the z direction is consistent, the opposite majority is inconsistent.
    """
    if abs(z) <= tau:
        return "neutral"
    if n_pos == 0 and n_neg == 0:
        return "no_keywords"
    if n_pos == n_neg:
        return "neutral"
    majority_positive = n_pos > n_neg
    return "consistent" if majority_positive == (z > tau) else "inconsistent"


@dataclass
class CrcReportResult:
    per_metric: dict = field(default_factory=dict)   # metric -> class
    n_consistent: int = 0
    n_inconsistent: int = 0
    n_neutral: int = 0
    n_no_keywords: int = 0
    crc: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "per_metric": dict(self.per_metric),
            "n_consistent": self.n_consistent,
            "n_inconsistent": self.n_inconsistent,
            "n_neutral": self.n_neutral,
            "n_no_keywords": self.n_no_keywords,
            "crc": self.crc,
        }


def crc_report(report: StructuredReport, cfg: CrcConfig) -> CrcReportResult:
    out = CrcReportResult()
    text = report.raw_text
    for metric in CRC_METRICS:
        if metric not in report.z_scores_cited:
            continue
        entry = cfg.lexicon.get(metric)
        if entry is None:
            continue
        z = report.z_scores_cited[metric]
        n_pos = keyword_hits(text, entry.get("positive", []))
        n_neg = keyword_hits(text, entry.get("negative", []))
        cls = classify_check(z, n_pos, n_neg, cfg.tau)
        out.per_metric[metric] = cls
        if cls == "consistent":
            out.n_consistent += 1
        elif cls == "inconsistent":
            out.n_inconsistent += 1
        elif cls == "neutral":
            out.n_neutral += 1
        else:
            out.n_no_keywords += 1
    decidable = out.n_consistent + out.n_inconsistent
    out.crc = out.n_consistent / decidable if decidable else None
    return out


def crc_corpus(results: Sequence[CrcReportResult]) -> dict:
    """Aggregate CRC: report-weighted mean plus a check-weighted figure."""
    scored = [r.crc for r in results if r.crc is not None]
    total_cons = sum(r.n_consistent for r in results)
    total_incons = sum(r.n_inconsistent for r in results)
    return {
        "crc_mean": sum(scored) / len(scored) if scored else None,
        "crc_check_weighted": (
            total_cons / (total_cons + total_incons) if (total_cons + total_incons) else None
        ),
        "reports_scored": len(scored),
        "reports_without_checks": len(results) - len(scored),
        "checks": {
            "consistent": total_cons,
            "inconsistent": total_incons,
            "neutral": sum(r.n_neutral for r in results),
            "no_keywords": sum(r.n_no_keywords for r in results),
        },
    }
