"""Seeded synthetic data: RR trials with controllable affect signatures and
a small knowledge corpus, so the full pipeline and evaluation run with no
external dataset or model.

The generator encodes the affect signature the interpretation pipeline
looks for: arousal shortens the mean RR interval (higher heart rate),
valence scales the respiratory-frequency oscillation amplitude (vagal
modulation). Ratings use the 1-5 scale with 3 meaning neutral.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

# (valence, arousal) cycle covering all quadrants plus one neutral trial.
_RATING_CYCLE = [(4, 4), (2, 2), (4, 2), (2, 4), (5, 5), (3, 4), (1, 5), (5, 1)]


def gen_trial_rr(
    rng: np.random.Generator,
    mean_rr_ms: float,
    hf_amp_ms: float,
    resp_hz: float,
    duration_s: float,
    lf_amp_ms: float = 14.0,
    noise_ms: float = 6.0,
) -> np.ndarray:
    """RR series with LF and respiratory-band oscillations plus noise."""
    beats = []
    t = 0.0
    phase = rng.uniform(0.0, 2.0 * np.pi)
    while t < duration_s:
        rr = (
            mean_rr_ms
            + hf_amp_ms * np.sin(2.0 * np.pi * resp_hz * t)
            + lf_amp_ms * np.sin(2.0 * np.pi * 0.1 * t + phase)
            + noise_ms * rng.standard_normal()
        )
        rr = float(np.clip(rr, 420.0, 1800.0))
        beats.append(round(rr, 2))
        t += rr / 1000.0
    return np.asarray(beats)


def gen_trials(
    n_subjects: int = 2,
    trials_per_subject: int = 3,
    seed: int = 7,
    duration_s: float = 240.0,
    with_resp: str = "alternate",      # all | none | alternate (odd subjects only)
    artifact_trial: bool = False,
    short_trial: bool = False,
) -> list[dict]:
    """Trial records ready for JSONL serialization."""
    rng = np.random.default_rng(seed)
    records = []
    cycle_idx = 0
    for s in range(1, n_subjects + 1):
        subject = f"S{s:02d}"
        base_rr = float(rng.uniform(760.0, 940.0))
        resp_hz = float(np.round(rng.uniform(0.20, 0.30), 3))
        for t in range(1, trials_per_subject + 1):
            valence, arousal = _RATING_CYCLE[cycle_idx % len(_RATING_CYCLE)]
            cycle_idx += 1
            mean_rr = base_rr * (1.0 - 0.05 * (arousal - 3))
            hf_amp = 20.0 * (1.0 + 0.25 * (valence - 3))
            dur = duration_s
            if short_trial and s == n_subjects and t == trials_per_subject:
                dur = 45.0
            rr = gen_trial_rr(rng, mean_rr, hf_amp, resp_hz, dur)
            if artifact_trial and s == 1 and t == 1:
                idx = rng.choice(rr.size, size=max(1, rr.size // 4), replace=False)
                rr = rr.copy()
                rr[idx] = 3500.0
            record = {
                "subject_id": subject,
                "trial_id": f"T{t:02d}",
                "rr_ms": [float(v) for v in rr],
                "valence": valence,
                "arousal": arousal,
            }
            include_resp = with_resp == "all" or (with_resp == "alternate" and s % 2 == 1)
            if include_resp:
                tgrid = np.arange(0.0, dur, 0.25)
                resp = np.sin(2.0 * np.pi * resp_hz * tgrid) + 0.05 * rng.standard_normal(tgrid.size)
                record["resp"] = {
                    "signal": [float(np.round(v, 4)) for v in resp],
                    "rate_hz": 4.0,
                }
            records.append(record)
    return records


def write_trials_jsonl(records: list[dict], path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return p


_CORPUS_DOCS = [
    {
        "name": "rmssd_reliability.txt",
        "study_design": "rct",
        "topics": ["rmssd", "vagal", "time-domain"],
        "primary_metric": "RMSSD",
        "text": (
            "A randomized crossover protocol compared short-term RMSSD readings "
            "across posture and paced-breathing conditions. RMSSD tracked vagal "
            "modulation robustly across repeated sessions, and within-subject "
            "changes were more repeatable than absolute levels. Interpreting a "
            "change against the person's own baseline avoided the misclassification "
            "seen when individuals with naturally high variability were compared "
            "against group norms. Elevated vagal tone appeared as a consistent "
            "RMSSD increase relative to baseline regardless of resting level. "
            "Reduced vagal tone after sympathetic challenge appeared as a "
            "proportional RMSSD decrease. "
        ) * 3,
    },
    {
        "name": "lfhf_critique.txt",
        "study_design": "opinion",
        "topics": ["lf-hf", "frequency-domain", "respiratory"],
        "primary_metric": "LF_HF",
        "text": (
            "The ratio of low-frequency to high-frequency power is widely quoted "
            "as a sympathovagal balance index, yet its physiological basis is "
            "contested. Respiratory rate and depth move high-frequency power "
            "independently of autonomic state, so a breathing shift alone can "
            "halve or double the ratio. Short recordings, nonstationarity, and "
            "posture changes distort the ratio further. Any reading of the ratio "
            "should be guarded when the respiratory frequency sits near the "
            "high-frequency peak, and balance claims should defer to time-domain "
            "evidence in ambiguous recordings. "
        ) * 3,
    },
    {
        "name": "sampen_parameters.txt",
        "study_design": "observational",
        "topics": ["entropy", "nonlinear"],
        "primary_metric": "SampEn",
        "text": (
            "Sample entropy estimates depend jointly on the template length, the "
            "tolerance, and the number of beats available. In cohort recordings, "
            "estimates from segments under one hundred beats were unstable and "
            "systematically biased, while segments of several hundred beats gave "
            "reproducible values. Tolerance set as a fraction of the segment "
            "standard deviation kept estimates comparable across subjects. "
            "Reduced complexity readings from very short segments should be "
            "treated as unreliable rather than as evidence of autonomic change. "
        ) * 3,
    },
    {
        "name": "coactivation_evidence.txt",
        "study_design": "controlled",
        "topics": ["coactivation", "autonomic", "rmssd", "lf-hf"],
        "primary_metric": "RMSSD",
        "text": (
            "Simultaneous sympathetic and parasympathetic activation produces "
            "nonlinear cardiovascular responses that single-branch models miss. "
            "In controlled stimulation experiments, markers of vagal modulation "
            "rose together with indices usually read as sympathetic, a pattern "
            "that would look contradictory under a single-axis interpretation. "
            "When vagally mediated variability and the spectral balance index "
            "rise together, dual activation should be considered before "
            "concluding measurement error. "
        ) * 3,
    },
    {
        "name": "dfa_interpretation.txt",
        "study_design": "observational",
        "topics": ["dfa", "nonlinear"],
        "primary_metric": "DFA_alpha",
        "text": (
            "The detrended fluctuation scaling exponent summarizes fractal "
            "correlation structure, not autonomic outflow. Local scaling "
            "estimates over a handful of beat scales are sensitive to the "
            "fitting range, and short segments blur the crossover between "
            "short-range and long-range regimes. An exponent rise with falling "
            "vagal markers signals a construct difference, not a contradiction: "
            "correlation structure and autonomic level are distinct quantities. "
        ) * 3,
    },
    {
        "name": "normative_tables.txt",
        "study_design": "observational",
        "topics": ["time-domain", "thresholds"],
        "primary_metric": "SDNN",
        "text": (
            "Reference tables list resting norms such as RMSSD > 40 ms, "
            "SDNN > 50 ms, and a resting heart rate under 100 bpm for healthy "
            "adults, with variability above 20 % between laboratories. Values "
            "like SDNN < 30 ms or a ratio above 3.0 % of total power are often "
            "quoted as cutoffs. Such absolute thresholds ignore age, heart "
            "rate, and recording length, and should give way to individualized "
            "baselines whenever history is available. "
        ) * 3,
    },
]


def gen_corpus(out_dir) -> Path:
    """Write the bundled demo corpus and its manifest; returns the manifest path."""
    d = Path(out_dir)
    docs_dir = d / "docs"
    docs_dir.mkdir(parents=True, exist_ok=True)
    manifest_lines = []
    for doc in _CORPUS_DOCS:
        (docs_dir / doc["name"]).write_text(doc["text"], encoding="utf-8")
        manifest_lines.append(
            json.dumps(
                {
                    "path": f"docs/{doc['name']}",
                    "study_design": doc["study_design"],
                    "topics": doc["topics"],
                    "primary_metric": doc["primary_metric"],
                },
                sort_keys=True,
            )
        )
    manifest = d / "manifest.jsonl"
    manifest.write_text("\n".join(manifest_lines) + "\n", encoding="utf-8")
    return manifest
