"""Assembly of the per-trial feature panel."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..config import FeatureConfig
from ..errors import SpectrumUnavailable
from .frequency import FrequencyFeatures, frequency_domain, respiratory_frequency
from .ingest import TrialRecord
from .nonlinear import NonlinearFeatures, nonlinear
from .preprocess import CleanRRSeries, RRSeries, preprocess
from .timedomain import TimeDomainFeatures, time_domain

# Canonical metric names; every dict keyed by metric iterates in this order.
METRIC_ORDER = [
    "MeanRR", "SDNN", "MeanHR", "SDHR", "RMSSD", "NN50", "pNN50", "SDNN_index",
    "ULF_ratio", "LF_ratio", "HF_ratio", "LF_HF",
    "SD1", "SD2", "SD1_SD2", "SampEn", "DFA_alpha",
]


@dataclass
class FeaturePanel:
    subject_id: str
    trial_id: str
    time: TimeDomainFeatures
    freq: Optional[FrequencyFeatures]
    nonlin: NonlinearFeatures
    f_resp: Optional[float]
    artifact_rate: float
    valid_rr_ratio: float
    spectral_reliability_flag: bool
    nonlinear_stability_flag: bool
    valence: Optional[int] = None
    arousal: Optional[int] = None
    eeg: Optional[dict] = None

    def metrics(self) -> dict:
        """Scalar metric values keyed by canonical name (nan where unavailable)."""
        t, f, n = self.time, self.freq, self.nonlin
        nan = float("nan")
        vals = {
            "MeanRR": t.mean_rr, "SDNN": t.sdnn, "MeanHR": t.mean_hr, "SDHR": t.sdhr,
            "RMSSD": t.rmssd, "NN50": float(t.nn50), "pNN50": t.pnn50,
            "SDNN_index": t.sdnn_index,
            "ULF_ratio": f.ulf_ratio if f else nan,
            "LF_ratio": f.lf_ratio if f else nan,
            "HF_ratio": f.hf_ratio if f else nan,
            "LF_HF": f.lf_hf if f else nan,
            "SD1": n.sd1, "SD2": n.sd2, "SD1_SD2": n.sd1_sd2,
            "SampEn": n.sampen, "DFA_alpha": n.dfa_alpha,
        }
        return {k: vals[k] for k in METRIC_ORDER}

    def to_dict(self) -> dict:
        f = self.freq
        return {
            "subject_id": self.subject_id,
            "trial_id": self.trial_id,
            "metrics": {k: _jsonable(v) for k, v in self.metrics().items()},
            "quant_plot": {
                "N_poincare": self.nonlin.n_poincare,
                "poincare_bounds": self.nonlin.poincare_bounds,
                "poincare_density_center": list(self.nonlin.poincare_density_center),
                "psd_band_powers": {k: _jsonable(v) for k, v in (f.band_powers if f else {}).items()},
                "total_power": _jsonable(f.total_power) if f else None,
                "f_HF": _jsonable(f.f_hf) if f else None,
                "f_resp": _jsonable(self.f_resp) if self.f_resp is not None else None,
            },
            "quality": {
                "artifact_rate": self.artifact_rate,
                "valid_rr_ratio": self.valid_rr_ratio,
                "spectral_reliability_flag": self.spectral_reliability_flag,
                "nonlinear_stability_flag": self.nonlinear_stability_flag,
            },
            "valence": self.valence,
            "arousal": self.arousal,
        }


def _jsonable(v):
    if v is None:
        return None
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def extract_panel(trial: TrialRecord, cfg: FeatureConfig = FeatureConfig()) -> FeaturePanel:
    """Run the full feature chain for one trial."""
    raw = RRSeries(intervals_ms=trial.rr_ms, subject_id=trial.subject_id, trial_id=trial.trial_id)
    clean = preprocess(raw, cfg)
    t = time_domain(clean, cfg)
    try:
        f = frequency_domain(clean, cfg)
        spectral_flag = f.spectral_reliability_flag
    except SpectrumUnavailable:
        f = None
        spectral_flag = True
    n = nonlinear(clean, cfg)
    f_resp = respiratory_frequency(trial.resp_signal, trial.resp_rate_hz, cfg)

    return FeaturePanel(
        subject_id=trial.subject_id,
        trial_id=trial.trial_id,
        time=t,
        freq=f,
        nonlin=n,
        f_resp=f_resp,
        artifact_rate=clean.artifact_rate,
        valid_rr_ratio=clean.valid_rr_ratio,
        spectral_reliability_flag=spectral_flag,
        nonlinear_stability_flag=n.nonlinear_stability_flag,
        valence=trial.valence,
        arousal=trial.arousal,
        eeg=trial.eeg,
    )
