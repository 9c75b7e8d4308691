"""Deterministic guardrail rules that gate and rewrite downstream reasoning.

Pure, total functions: the same quantitative inputs always yield the same
decisions and byte-identical directive strings. Guardrails never modify
feature values; they only shape what the reasoning steps are told.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .normalization import NormalizedPanel
from .signal.panel import FeaturePanel

RSA_LEVELS = ("severe", "moderate", "mild", "none", "unknown")

# Step-3 prompt rewrites, keyed by severity.
RSA_SEVERE_DIRECTIVES = [
    "Do not interpret high HF power as strong parasympathetic activity: the "
    "respiratory frequency coincides with the HF peak, so HF power is "
    "respiration-driven.",
    "Do not use the LF/HF ratio for sympathovagal balance assessment.",
    "Base autonomic conclusions on time-domain metrics (RMSSD, SDNN) as the "
    "primary evidence for this step.",
]
RSA_MODERATE_DIRECTIVE = (
    "Respiratory frequency lies close to the HF peak: interpret "
    "frequency-domain indices with caution and acknowledge possible "
    "respiratory influence (guarded interpretation)."
)
RSA_MILD_NOTE = (
    "Respiration sits near the upper HF neighbourhood; frequency-domain "
    "readings are acceptable but note the proximity."
)
RSA_UNKNOWN_NOTE = (
    "No respiration channel was available, so respiratory contamination of "
    "the HF band could not be assessed; disclose this data limitation."
)

NONLINEAR_DIRECTIVE = (
    "Nonlinear metrics (SampEn, DFA) are unreliable at this data length; "
    "rely on time-domain features only."
)
ULF_DIRECTIVE = (
    "ULF power dominates the spectrum; treat all frequency-domain ratios as "
    "unreliable for this recording."
)
QUALITY_GATE_DIRECTIVE = (
    "Signal quality gate triggered (artifact rate above 0.2): treat every "
    "downstream finding as low-trust and cap the final confidence at Medium."
)
QUALITY_WARN_DIRECTIVE = (
    "Valid RR ratio below 0.8: a substantial share of beats was corrected; "
    "interpret with caution."
)


@dataclass(frozen=True)
class RsaSeverity:
    level: str
    delta_hz: Optional[float] = None

    def to_dict(self) -> dict:
        return {"level": self.level, "delta_hz": self.delta_hz}


def grade_rsa(f_resp: Optional[float], f_hf: float) -> RsaSeverity:
    """Four-level severity from |f_resp - f_HF|; unknown when f_resp is absent."""
    if f_resp is None:
        return RsaSeverity(level="unknown", delta_hz=None)
    d = abs(f_resp - f_hf)
    if d < 0.05:
        level = "severe"
    elif d < 0.08:
        level = "moderate"
    elif d < 0.12:
        level = "mild"
    else:
        level = "none"
    return RsaSeverity(level=level, delta_hz=d)


def rsa_directives(sev: RsaSeverity) -> list[str]:
    """Prompt directives for Step 3; informational notes travel separately."""
    if sev.level == "severe":
        return list(RSA_SEVERE_DIRECTIVES)
    if sev.level == "moderate":
        return [RSA_MODERATE_DIRECTIVE]
    return []


def rsa_note(sev: RsaSeverity) -> Optional[str]:
    """Non-directive annotation for mild/unknown severities."""
    if sev.level == "mild":
        return RSA_MILD_NOTE
    if sev.level == "unknown":
        return RSA_UNKNOWN_NOTE
    return None


def check_nonlinear(n_poincare: int) -> bool:
    """Nonlinear interpretation prohibited below 100 scatter points."""
    return n_poincare < 100


def check_ulf(ulf_ratio: float) -> bool:
    """Frequency-unreliability warning above a strict 0.5 ULF share."""
    return ulf_ratio > 0.5


def gate_quality(artifact_rate: float, valid_rr_ratio: float) -> str:
    """pass | warn | gate per the Step-1 quality rule."""
    if artifact_rate > 0.2:
        return "gate"
    if valid_rr_ratio < 0.8:
        return "warn"
    return "pass"


# Contradiction rules in fixed table order; each maps to one injected query.
CONTRADICTION_TOPICS = {
    "coactivation": "sympathetic-parasympathetic coactivation",
    "lfhf_unreliable": "LF/HF unreliability, respiratory confound",
    "dfa_not_autonomic": "DFA not a direct autonomic measure",
    "geometry_vs_complexity": "geometric vs complexity construct difference",
    "extreme_ratio": "extreme ratio, respiratory artifact",
}
CONTRADICTION_ORDER = [
    "coactivation", "lfhf_unreliable", "dfa_not_autonomic",
    "geometry_vs_complexity", "extreme_ratio",
]


@dataclass(frozen=True)
class ContradictionFlag:
    pattern_id: str
    evidence: tuple
    injected_query_topic: str

    def to_dict(self) -> dict:
        return {
            "pattern_id": self.pattern_id,
            "evidence": list(self.evidence),
            "injected_query_topic": self.injected_query_topic,
        }


def _direction(panel: NormalizedPanel, metric: str) -> int:
    """+1/-1 when the metric moved at least mildly in that direction, else 0."""
    row = panel.row(metric)
    if row is None or row.change_state == "baseline":
        return 0
    z = row.z_delta
    if z is not None:
        return 1 if z > 0 else -1
    if row.delta_pct is not None:
        return 1 if row.delta_pct > 0 else -1
    return 0


def detect_contradictions(panel: NormalizedPanel, features: FeaturePanel) -> list[ContradictionFlag]:
    """Evaluate every contradiction rule; output follows table order, no duplicates."""
    up = lambda m: _direction(panel, m) > 0
    down = lambda m: _direction(panel, m) < 0
    lf_hf = features.metrics()["LF_HF"]

    hits = []
    if up("RMSSD") and up("LF_HF"):
        hits.append(("coactivation", ("RMSSD up", "LF_HF up")))
    if up("MeanHR") and down("SampEn") and down("LF_HF"):
        hits.append(("lfhf_unreliable", ("MeanHR up", "SampEn down", "LF_HF down")))
    if up("DFA_alpha") and down("RMSSD"):
        hits.append(("dfa_not_autonomic", ("DFA_alpha up", "RMSSD down")))
    if down("SD1_SD2") and down("SampEn"):
        hits.append(("geometry_vs_complexity", ("SD1_SD2 down", "SampEn down")))
    if math.isfinite(lf_hf) and (lf_hf > 3.0 or lf_hf < 0.3):
        hits.append(("extreme_ratio", (f"LF_HF = {lf_hf:.3g}",)))

    return [
        ContradictionFlag(pattern_id=pid, evidence=ev,
                          injected_query_topic=CONTRADICTION_TOPICS[pid])
        for pid, ev in hits
    ]


@dataclass
class GuardrailSet:
    rsa: RsaSeverity
    nonlinear_prohibited: bool
    ulf_warning: bool
    quality_gate: str
    contradictions: list = field(default_factory=list)
    prompt_directives: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rsa": self.rsa.to_dict(),
            "nonlinear_prohibited": self.nonlinear_prohibited,
            "ulf_warning": self.ulf_warning,
            "quality_gate": self.quality_gate,
            "contradictions": [c.to_dict() for c in self.contradictions],
            "prompt_directives": list(self.prompt_directives),
            "notes": list(self.notes),
        }


def build_guardrails(features: FeaturePanel, panel: NormalizedPanel) -> GuardrailSet:
    """Evaluate every guardrail for one trial."""
    f_hf = features.freq.f_hf if features.freq else float("nan")
    if math.isfinite(f_hf):
        rsa = grade_rsa(features.f_resp, f_hf)
    else:
        # no usable HF peak at all: respiratory overlap cannot be assessed
        rsa = RsaSeverity(level="unknown", delta_hz=None)
    ulf = features.freq.ulf_ratio if features.freq else 0.0
    ulf_warning = check_ulf(ulf) if math.isfinite(ulf) else False

    gs = GuardrailSet(
        rsa=rsa,
        nonlinear_prohibited=check_nonlinear(features.nonlin.n_poincare),
        ulf_warning=ulf_warning,
        quality_gate=gate_quality(features.artifact_rate, features.valid_rr_ratio),
        contradictions=detect_contradictions(panel, features),
    )
    gs.prompt_directives.extend(rsa_directives(rsa))
    if gs.nonlinear_prohibited:
        gs.prompt_directives.append(NONLINEAR_DIRECTIVE)
    if gs.ulf_warning:
        gs.prompt_directives.append(ULF_DIRECTIVE)
    if gs.quality_gate == "gate":
        gs.prompt_directives.append(QUALITY_GATE_DIRECTIVE)
    elif gs.quality_gate == "warn":
        gs.prompt_directives.append(QUALITY_WARN_DIRECTIVE)
    note = rsa_note(rsa)
    if note:
        gs.notes.append(note)
    return gs
