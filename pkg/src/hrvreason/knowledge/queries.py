"""State-aware retrieval query construction.

Every non-baseline metric produces one query whose phrasing depends on the
direction and magnitude of its change; every contradiction flag injects one
targeted warning query. Queries are deterministic template instantiations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..guardrails import ContradictionFlag
from ..normalization import NormalizedPanel
from ..signal.panel import METRIC_ORDER

_INTENSITY = {"marked": "markedly", "moderate": "moderately", "mild": "mildly"}

# metric -> (up phrasing, down phrasing, topic tags)
_STATE_TEMPLATES = {
    "RMSSD": (
        "RMSSD {adv} increased elevated vagal tone parasympathetic activity",
        "RMSSD {adv} decreased reduced vagal tone parasympathetic withdrawal",
        ["rmssd", "vagal", "time-domain"],
    ),
    "SDNN": (
        "SDNN {adv} increased overall heart rate variability",
        "SDNN {adv} decreased reduced total variability",
        ["sdnn", "variability", "time-domain"],
    ),
    "pNN50": (
        "pNN50 {adv} increased parasympathetic beat-to-beat variability",
        "pNN50 {adv} decreased reduced beat-to-beat variability",
        ["pnn50", "vagal", "time-domain"],
    ),
    "MeanHR": (
        "mean heart rate {adv} elevated sympathetic arousal",
        "mean heart rate {adv} lowered rest parasympathetic dominance",
        ["heart-rate", "arousal"],
    ),
    "LF_HF": (
        "LF/HF ratio {adv} elevated sympathovagal balance interpretation reliability",
        "LF/HF ratio {adv} reduced sympathovagal balance interpretation reliability",
        ["lf-hf", "frequency-domain"],
    ),
    "SampEn": (
        "sample entropy {adv} increased signal complexity irregularity",
        "sample entropy {adv} decreased reduced complexity regularity",
        ["entropy", "nonlinear"],
    ),
    "DFA_alpha": (
        "DFA scaling exponent {adv} increased correlated fractal dynamics",
        "DFA scaling exponent {adv} decreased uncorrelated dynamics",
        ["dfa", "nonlinear"],
    ),
    "SD1_SD2": (
        "Poincare SD1/SD2 ratio {adv} increased short-term variability geometry",
        "Poincare SD1/SD2 ratio {adv} decreased long-term variability geometry",
        ["poincare", "nonlinear"],
    ),
}

_WARNING_TOPIC_TAGS = {
    "coactivation": ["coactivation", "autonomic", "rmssd", "lf-hf"],
    "lfhf_unreliable": ["lf-hf", "respiratory", "frequency-domain"],
    "dfa_not_autonomic": ["dfa", "nonlinear"],
    "geometry_vs_complexity": ["poincare", "entropy", "nonlinear"],
    "extreme_ratio": ["lf-hf", "respiratory", "frequency-domain"],
}


@dataclass(frozen=True)
class Query:
    text: str
    topics: tuple
    metric: Optional[str] = None
    kind: str = "state"         # state | warning

    def to_dict(self) -> dict:
        return {"text": self.text, "topics": list(self.topics),
                "metric": self.metric, "kind": self.kind}


def build_queries(
    panel: NormalizedPanel,
    contradictions: Sequence[ContradictionFlag] = (),
) -> list[Query]:
    queries: list[Query] = []
    for metric in METRIC_ORDER:
        if metric not in _STATE_TEMPLATES:
            continue
        row = panel.row(metric)
        if row is None or row.change_state == "baseline":
            continue
        z = row.z_delta
        direction = None
        if z is not None and z != 0:
            direction = z > 0
        elif row.delta_pct is not None and row.delta_pct != 0:
            direction = row.delta_pct > 0
        if direction is None:
            continue
        up_tpl, down_tpl, tags = _STATE_TEMPLATES[metric]
        adv = _INTENSITY[row.change_state]
        text = (up_tpl if direction else down_tpl).format(adv=adv)
        queries.append(Query(text=text, topics=tuple(tags), metric=metric, kind="state"))

    for flag in contradictions:
        tags = _WARNING_TOPIC_TAGS.get(flag.pattern_id, [])
        queries.append(
            Query(
                text=f"warning {flag.injected_query_topic}",
                topics=tuple(tags),
                metric=None,
                kind="warning",
            )
        )
    return queries
