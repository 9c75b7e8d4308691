"""Post-generation validation of structured reports.

Validation is read-only with respect to the state label: it flags numeric
hallucinations, cross-checks claimed quantitative-plot numbers against the
computed features, flags z-citations whose sign contradicts the panel, and
detects the text-versus-label arousal paradox. Acting on the paradox
(regeneration, confidence downgrade) is the pipeline's job.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from ..normalization import NormalizedPanel
from ..signal.panel import FeaturePanel
from .report import METRIC_ALIASES, StructuredReport, extract_z_citations

# Plausibility ranges for numeric claims; MeanHR and RMSSD are the anchor
# checks, the rest are conservative physiological envelopes.
DEFAULT_METRIC_RANGES = {
    "MeanHR": (40.0, 200.0),
    "RMSSD": (0.0, 500.0),
    "MeanRR": (300.0, 2000.0),
    "SDNN": (0.0, 500.0),
    "SDHR": (0.0, 100.0),
    "pNN50": (0.0, 100.0),
    "SDNN_index": (0.0, 500.0),
    "ULF_ratio": (0.0, 1.0),
    "LF_ratio": (0.0, 1.0),
    "HF_ratio": (0.0, 1.0),
    "LF_HF": (0.0, 50.0),
    "SD1": (0.0, 500.0),
    "SD2": (0.0, 500.0),
    "SD1_SD2": (0.0, 10.0),
    "SampEn": (0.0, 3.0),
    "DFA_alpha": (0.0, 2.0),
}

_POINCARE_CLAIM = re.compile(r"poincar\w*[^\d\n]{0,30}?(\d+)", re.IGNORECASE)
_BAND_POWER_CLAIM = re.compile(
    r"\b(ULF|LF|HF)\s*(?:band\s*)?power[^\d\n]{0,12}?([+-]?\d+(?:\.\d+)?)",
    re.IGNORECASE,
)
_SEPARATOR = r"\s{0,3}(?:=|:|of|is|was|at|reads|measured)?\s*"


@dataclass
class ValidationResult:
    numeric_hallucinations: list = field(default_factory=list)
    repetition_truncated: bool = False
    z_delta_conflicts_flagged: list = field(default_factory=list)
    plot_crosscheck_failures: list = field(default_factory=list)
    mapping_paradox: bool = False
    unicode_substitutions: list = field(default_factory=list)
    actions_taken: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "numeric_hallucinations": [list(x) for x in self.numeric_hallucinations],
            "repetition_truncated": self.repetition_truncated,
            "z_delta_conflicts_flagged": [list(x) for x in self.z_delta_conflicts_flagged],
            "plot_crosscheck_failures": [list(x) for x in self.plot_crosscheck_failures],
            "mapping_paradox": self.mapping_paradox,
            "unicode_substitutions": list(self.unicode_substitutions),
            "actions_taken": list(self.actions_taken),
        }


def _masked(text: str, spans: list[tuple[int, int]]) -> str:
    chars = list(text)
    for lo, hi in spans:
        for i in range(lo, hi):
            chars[i] = "\x00"
    return "".join(chars)


def extract_value_claims(text: str) -> list[tuple[str, float]]:
    """(metric, claimed value) pairs for plain numeric claims in the text.

    z-score citations are masked out first so "RMSSD (z = -1.25)" is never
    read as a claimed RMSSD of -1.25 ms. Overlapping alias matches keep the
    longest, earliest match.
    """
    _, z_spans = extract_z_citations(text)
    lower = _masked(text, z_spans).lower()

    candidates = []
    for metric, aliases in METRIC_ALIASES.items():
        for alias in aliases:
            pattern = re.compile(re.escape(alias) + _SEPARATOR + r"([+-]?\d+(?:\.\d+)?)")
            for m in pattern.finditer(lower):
                candidates.append((m.start(), -(m.end() - m.start()), metric, float(m.group(1)), m.end()))
    candidates.sort()
    taken: list[tuple[int, int]] = []
    claims = []
    for start, _neg_len, metric, value, end in candidates:
        if any(s < end and start < e for s, e in taken):
            continue
        taken.append((start, end))
        claims.append((metric, value))
    return claims


def check_numeric_ranges(text: str, ranges: Optional[dict] = None) -> list[tuple[str, float, tuple]]:
    ranges = ranges or DEFAULT_METRIC_RANGES
    out = []
    for metric, value in extract_value_claims(text):
        lo_hi = ranges.get(metric)
        if lo_hi and not (lo_hi[0] <= value <= lo_hi[1]):
            out.append((metric, value, lo_hi))
    return out


def _rel_mismatch(claimed: float, actual: float, tol: float = 0.05) -> bool:
    if actual == 0:
        return claimed != 0
    return abs(claimed - actual) / abs(actual) > tol


def crosscheck_plot_claims(text: str, features: FeaturePanel) -> list[tuple]:
    """Compare claimed Poincare counts and band powers against the panel."""
    failures = []
    actual_n = features.nonlin.n_poincare
    for m in _POINCARE_CLAIM.finditer(text):
        claimed = int(m.group(1))
        if _rel_mismatch(float(claimed), float(actual_n)):
            failures.append(("N_poincare", claimed, actual_n))
    if features.freq:
        for m in _BAND_POWER_CLAIM.finditer(text):
            band = m.group(1).upper()
            claimed = float(m.group(2))
            actual = features.freq.band_powers.get(band)
            if actual is not None and _rel_mismatch(claimed, actual):
                failures.append((f"{band}_power", claimed, actual))
    return failures


def z_sign_conflicts(report: StructuredReport, panel: NormalizedPanel) -> list[tuple]:
    out = []
    for metric, cited in report.z_scores_cited.items():
        row = panel.row(metric)
        if row is None or row.z_delta is None:
            continue
        if cited * row.z_delta < 0:
            out.append((metric, cited, row.z_delta))
    return out


def _keyword_presence(text: str, keywords: list[str]) -> int:
    """Number of keywords present at least once (indicator, not occurrences)."""
    norm = " ".join(text.lower().split())
    return sum(1 for k in keywords if k.lower() in norm)


def detect_mapping_paradox(report: StructuredReport, lexicon: dict) -> bool:
    """True when rationale arousal-keyword polarity contradicts the label's arousal half.

    Uses the `arousal` entry of the consistency lexicon. No keywords or a
    tie is insufficient evidence; Unknown labels are never flagged.
    """
    if report.state not in ("HVHA", "HVLA", "LVHA", "LVLA"):
        return False
    entry = lexicon.get("arousal")
    if not entry:
        return False
    text = report.rationale or report.raw_text
    pos = _keyword_presence(text, entry.get("positive", []))
    neg = _keyword_presence(text, entry.get("negative", []))
    if pos == neg:
        return False
    high_arousal_label = report.state in ("HVHA", "LVHA")
    text_says_high = pos > neg
    return text_says_high != high_arousal_label


def validate(
    report: StructuredReport,
    features: FeaturePanel,
    panel: NormalizedPanel,
    lexicon: Optional[dict] = None,
    ranges: Optional[dict] = None,
) -> ValidationResult:
    from .textproc import find_unicode_substitutions

    text = report.raw_text
    return ValidationResult(
        numeric_hallucinations=check_numeric_ranges(text, ranges),
        z_delta_conflicts_flagged=z_sign_conflicts(report, panel),
        plot_crosscheck_failures=crosscheck_plot_claims(text, features),
        mapping_paradox=detect_mapping_paradox(report, lexicon or {}),
        unicode_substitutions=find_unicode_substitutions(text),
    )
