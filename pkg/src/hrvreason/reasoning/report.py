"""Parsing of the final structured report.

The parser is total: whatever the backend returned, it yields a
StructuredReport; missing or malformed fields degrade to Unknown/empty
rather than raising.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

STATES = ("HVHA", "HVLA", "LVHA", "LVLA")

# Aliases recognized in free text, longest first per metric.
METRIC_ALIASES = {
    "SDNN_index": ["sdnn index", "sdnn_index"],
    "MeanRR": ["mean rr interval", "mean rr", "meanrr"],
    "MeanHR": ["mean heart rate", "mean hr", "meanhr", "heart rate"],
    "SDHR": ["sdhr"],
    "RMSSD": ["rmssd"],
    "SDNN": ["sdnn"],
    "NN50": ["nn50"],
    "pNN50": ["pnn50"],
    "ULF_ratio": ["ulf ratio", "ulf_ratio"],
    "LF_ratio": ["lf ratio", "lf_ratio"],
    "HF_ratio": ["hf ratio", "hf_ratio"],
    "LF_HF": ["lf/hf ratio", "lf/hf", "lf_hf", "lf-hf"],
    "SD1_SD2": ["sd1/sd2", "sd1_sd2", "sd1-sd2"],
    "SD1": ["sd1"],
    "SD2": ["sd2"],
    "SampEn": ["sample entropy", "sampen"],
    "DFA_alpha": ["dfa alpha", "dfa_alpha", "dfa scaling exponent", "dfa"],
}

_Z_PATTERN = re.compile(r"\bz\s*[=:]\s*([+-]?\d+(?:\.\d+)?)", re.IGNORECASE)
_RAG_PATTERN = re.compile(r"\[RAG:\s*([^,\]]+?)\s*,\s*p\.?\s*(\d+)\s*\]")
_FIELD_LABELS = ("state", "confidence", "rationale", "limitations")


@dataclass
class StructuredReport:
    state: str = "Unknown"
    confidence: str = "Low"
    rationale: str = ""
    limitations: str = ""
    z_scores_cited: dict = field(default_factory=dict)
    rag_citations: list = field(default_factory=list)
    raw_text: str = ""
    state_field_present: bool = False

    def to_dict(self) -> dict:
        return {
            "state": self.state,
            "confidence": self.confidence,
            "rationale": self.rationale,
            "limitations": self.limitations,
            "z_scores_cited": dict(self.z_scores_cited),
            "rag_citations": [list(c) for c in self.rag_citations],
            "state_field_present": self.state_field_present,
            "raw_text": self.raw_text,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StructuredReport":
        out = cls(**{k: d[k] for k in (
            "state", "confidence", "rationale", "limitations", "raw_text",
            "state_field_present") if k in d})
        out.z_scores_cited = dict(d.get("z_scores_cited", {}))
        out.rag_citations = [tuple(c) for c in d.get("rag_citations", [])]
        return out


def metric_before(text: str, pos: int, window: int = 40) -> Optional[str]:
    """Metric alias ending closest before `pos`, searched within `window` chars."""
    ctx = text[max(0, pos - window) : pos].lower()
    best = None
    best_end = -1
    best_len = 0
    for metric, aliases in METRIC_ALIASES.items():
        for alias in aliases:
            idx = ctx.rfind(alias)
            if idx < 0:
                continue
            end = idx + len(alias)
            if end > best_end or (end == best_end and len(alias) > best_len):
                best, best_end, best_len = metric, end, len(alias)
    return best


def extract_z_citations(text: str) -> tuple[dict, list[tuple[int, int]]]:
    """(metric -> first cited z value, spans of the matched z patterns)."""
    cited: dict[str, float] = {}
    spans = []
    for m in _Z_PATTERN.finditer(text):
        spans.append(m.span())
        metric = metric_before(text, m.start())
        if metric and metric not in cited:
            cited[metric] = float(m.group(1))
    return cited, spans


def _extract_field(text: str, label: str) -> Optional[str]:
    """Value of a `Label:` line, running until the next known label line."""
    pattern = re.compile(
        rf"^[ \t]*{label}[ \t]*[:\-][ \t]*(.*?)$", re.IGNORECASE | re.MULTILINE
    )
    m = pattern.search(text)
    if not m:
        return None
    lines = [m.group(1).strip()]
    rest = text[m.end():].splitlines()
    stop = re.compile(
        rf"^[ \t]*({'|'.join(l for l in _FIELD_LABELS if l != label)})[ \t]*[:\-]",
        re.IGNORECASE,
    )
    for line in rest:
        if stop.match(line):
            break
        lines.append(line.strip())
    return "\n".join(lines).strip()


def parse_report(text: str) -> StructuredReport:
    report = StructuredReport(raw_text=text)

    state_raw = _extract_field(text, "state")
    if state_raw is not None:
        report.state_field_present = True
        token = state_raw.split()[0].upper().strip(".,;") if state_raw.split() else ""
        report.state = token if token in STATES else "Unknown"

    conf_raw = _extract_field(text, "confidence")
    if conf_raw:
        token = conf_raw.split()[0].capitalize().strip(".,;")
        if token in ("High", "Medium", "Low"):
            report.confidence = token

    report.rationale = _extract_field(text, "rationale") or ""
    report.limitations = _extract_field(text, "limitations") or ""

    cited, _ = extract_z_citations(text)
    report.z_scores_cited = {k: v for k, v in cited.items() if _finite(v)}
    report.rag_citations = [(f.strip(), int(p)) for f, p in _RAG_PATTERN.findall(text)]
    return report


def _finite(v: float) -> bool:
    return v == v and abs(v) != float("inf")
