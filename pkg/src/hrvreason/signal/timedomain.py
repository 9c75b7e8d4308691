"""Time-domain HRV metrics over a cleaned RR series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import FeatureConfig
from ..errors import TooShort
from .preprocess import CleanRRSeries


@dataclass(frozen=True)
class TimeDomainFeatures:
    mean_rr: float       # ms
    sdnn: float          # ms
    mean_hr: float       # bpm, 60000 / mean_rr
    sdhr: float          # bpm, SD of per-beat HR
    rmssd: float         # ms
    nn50: int
    pnn50: float         # percent of successive diffs
    sdnn_index: float    # ms, mean SD over sub-windows


def sdnn_index(rr_ms: np.ndarray, window_s: float) -> float:
    """Mean of per-window SDNN over non-overlapping windows on the beat-time axis.

    Windows with fewer than two beats are skipped; returns nan when no window
    qualifies (e.g. trial shorter than one window).
    """
    t = np.cumsum(rr_ms) / 1000.0
    edges = np.arange(t[0], t[-1] + window_s, window_s)
    sds = []
    for lo, hi in zip(edges, edges[1:]):
        sel = rr_ms[(t >= lo) & (t < hi)]
        if sel.size >= 2:
            sds.append(np.std(sel, ddof=1))
    return float(np.mean(sds)) if sds else float("nan")


def time_domain(clean: CleanRRSeries, cfg: FeatureConfig = FeatureConfig()) -> TimeDomainFeatures:
    rr = np.asarray(clean.intervals_ms, dtype=float)
    if rr.size < 2:
        raise TooShort(f"time-domain metrics need >= 2 intervals, got {rr.size}")

    mean_rr = float(np.mean(rr))
    hr = 60000.0 / rr
    diff = np.diff(rr)
    nn50 = int(np.sum(np.abs(diff) > 50.0))

    return TimeDomainFeatures(
        mean_rr=mean_rr,
        sdnn=float(np.std(rr, ddof=1)),
        mean_hr=60000.0 / mean_rr,
        sdhr=float(np.std(hr, ddof=1)),
        rmssd=float(np.sqrt(np.mean(diff ** 2))),
        nn50=nn50,
        pnn50=100.0 * nn50 / diff.size,
        sdnn_index=sdnn_index(rr, cfg.sdnn_index_window_s),
    )
