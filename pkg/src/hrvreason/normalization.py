"""Dual z-score normalization against population and subject baselines.

Each metric gets a population z-score, a within-subject delta z-score (the
primary evidence for within-subject reasoning), a change-state grade, and a
sign-conflict flag raised when the two z-scores disagree in direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULT_PCT_FALLBACK
from .errors import BaselineZero, InsufficientHistory, ZeroSigma
from .signal.panel import METRIC_ORDER, FeaturePanel

CHANGE_STATES = ("marked", "moderate", "mild", "baseline")


def traditional_z(x: float, mu_pop: float, sigma_pop: float) -> float:
    if sigma_pop <= 0:
        raise ZeroSigma(f"population sigma must be > 0, got {sigma_pop}")
    return (x - mu_pop) / sigma_pop


def delta_z(
    x_stim: float,
    x_baseline: float,
    sigma_delta: float,
    mu_delta: float = 0.0,
) -> tuple[float, Optional[float], float]:
    """(delta, delta_pct, z_delta). delta_pct is None for a zero baseline."""
    if sigma_delta <= 0:
        raise ZeroSigma(f"delta sigma must be > 0, got {sigma_delta}")
    delta = x_stim - x_baseline
    pct = 100.0 * delta / x_baseline if x_baseline != 0 else None
    return delta, pct, (delta - mu_delta) / sigma_delta


def classify_state(z: float) -> str:
    a = abs(z)
    if a >= 2.0:
        return "marked"
    if a >= 1.0:
        return "moderate"
    if a >= 0.5:
        return "mild"
    return "baseline"


def classify_state_from_pct(pct: Optional[float],
                            thresholds: tuple = DEFAULT_PCT_FALLBACK) -> str:
    """Fallback grading on |percent change| when z-scores are unavailable."""
    if pct is None or not math.isfinite(pct):
        return "baseline"
    marked, moderate, mild = thresholds
    a = abs(pct)
    if a >= marked:
        return "marked"
    if a >= moderate:
        return "moderate"
    if a >= mild:
        return "mild"
    return "baseline"


def detect_conflict(z_trad: Optional[float], z_delta_: Optional[float]) -> bool:
    """True only for a strict sign disagreement; zero agrees with everything."""
    if z_trad is None or z_delta_ is None:
        return False
    if not (math.isfinite(z_trad) and math.isfinite(z_delta_)):
        return False
    return z_trad * z_delta_ < 0


@dataclass
class BaselineProfile:
    subject_id: str
    mode: str                              # retrospective | causal
    mean: dict = field(default_factory=dict)   # metric -> mu_baseline
    sd: dict = field(default_factory=dict)     # metric -> sigma_baseline
    trial_count: int = 0

    @property
    def available(self) -> bool:
        return self.trial_count >= 2

    def to_dict(self) -> dict:
        return {
            "subject_id": self.subject_id,
            "mode": self.mode,
            "trial_count": self.trial_count,
            "mean": {k: _num(v) for k, v in self.mean.items()},
            "sd": {k: _num(v) for k, v in self.sd.items()},
        }


def _num(v):
    return None if v is None or not math.isfinite(v) else float(v)


def build_baseline(
    panels: Sequence[FeaturePanel],
    subject_id: str,
    mode: str = "retrospective",
) -> BaselineProfile:
    """Per-metric mean and sample SD over a subject's trials.

    Caller selects the trial set: all trials for retrospective mode, only
    preceding trials for causal mode. Zero prior trials in causal mode is an
    error; a single trial yields a profile with no usable sigma.
    """
    if mode == "causal" and len(panels) == 0:
        raise InsufficientHistory(f"{subject_id}: causal baseline needs at least one prior trial")
    prof = BaselineProfile(subject_id=subject_id, mode=mode, trial_count=len(panels))
    if not panels:
        return prof
    for metric in METRIC_ORDER:
        vals = np.array([p.metrics()[metric] for p in panels], dtype=float)
        vals = vals[np.isfinite(vals)]
        if vals.size == 0:
            continue
        prof.mean[metric] = float(np.mean(vals))
        prof.sd[metric] = float(np.std(vals, ddof=1)) if vals.size >= 2 else float("nan")
    return prof


@dataclass
class MetricNorm:
    metric: str
    x_stim: float
    delta: Optional[float] = None
    delta_pct: Optional[float] = None
    z_trad: Optional[float] = None
    z_delta: Optional[float] = None
    change_state: str = "baseline"
    conflict: bool = False
    reduced_confidence: bool = False

    @property
    def z_s6(self) -> Optional[float]:
        # Step-6 evidence is the delta z-score by construction.
        return self.z_delta

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "x_stim": _num(self.x_stim),
            "delta": _num(self.delta) if self.delta is not None else None,
            "delta_pct": _num(self.delta_pct) if self.delta_pct is not None else None,
            "z_trad": _num(self.z_trad) if self.z_trad is not None else None,
            "z_delta": _num(self.z_delta) if self.z_delta is not None else None,
            "z_s6": _num(self.z_s6) if self.z_s6 is not None else None,
            "change_state": self.change_state,
            "conflict": self.conflict,
            "reduced_confidence": self.reduced_confidence,
        }


@dataclass
class NormalizedPanel:
    subject_id: str
    trial_id: str
    rows: dict = field(default_factory=dict)   # metric -> MetricNorm
    baseline_available: bool = True
    baseline_mode: str = "retrospective"

    def row(self, metric: str) -> Optional[MetricNorm]:
        return self.rows.get(metric)

    def to_dict(self) -> dict:
        return {
            "subject_id": self.subject_id,
            "trial_id": self.trial_id,
            "baseline_available": self.baseline_available,
            "baseline_mode": self.baseline_mode,
            "rows": {m: self.rows[m].to_dict() for m in METRIC_ORDER if m in self.rows},
        }


def normalize_panel(
    panel: FeaturePanel,
    baseline: Optional[BaselineProfile],
    population: Optional[dict] = None,
    pct_fallback: tuple = DEFAULT_PCT_FALLBACK,
    use_delta_z: bool = True,
) -> NormalizedPanel:
    """Build the full dual z-score table for one trial.

    Metrics whose baseline sigma is unusable (fewer than two trials, or zero
    variance across them) fall back to percent-change grading with the
    reduced-confidence flag set instead of failing mid-pipeline. Disabling
    use_delta_z (the ablation switch) routes every metric through that same
    fallback so no delta z-scores exist anywhere downstream.
    """
    population = population or {}
    out = NormalizedPanel(
        subject_id=panel.subject_id,
        trial_id=panel.trial_id,
        baseline_available=bool(baseline and baseline.available),
        baseline_mode=baseline.mode if baseline else "none",
    )
    for metric, x in panel.metrics().items():
        row = MetricNorm(metric=metric, x_stim=x)
        if not math.isfinite(x):
            out.rows[metric] = row
            continue
        stats = population.get(metric)
        if stats and stats.get("sd", 0) > 0:
            row.z_trad = traditional_z(x, stats["mean"], stats["sd"])
        mu_b = baseline.mean.get(metric) if baseline else None
        sd_b = baseline.sd.get(metric) if baseline else None
        if mu_b is not None:
            row.delta = x - mu_b
            row.delta_pct = 100.0 * row.delta / mu_b if mu_b != 0 else None
        usable_sigma = sd_b is not None and math.isfinite(sd_b) and sd_b > 0
        if use_delta_z and mu_b is not None and usable_sigma:
            _, _, row.z_delta = delta_z(x, mu_b, sigma_delta=sd_b)
            row.change_state = classify_state(row.z_delta)
        else:
            row.change_state = classify_state_from_pct(row.delta_pct, pct_fallback)
            row.reduced_confidence = True
        row.conflict = detect_conflict(row.z_trad, row.z_delta)
        out.rows[metric] = row
    return out
