"""Spectral HRV metrics from the detrended uniform tachogram.

The estimator is an averaged periodogram (Hann window, 50% overlap). Series
shorter than one full segment fall back to a single full-length periodogram
and carry a reliability flag rather than failing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import signal as sps

from ..config import FeatureConfig
from ..errors import SpectrumUnavailable
from .preprocess import CleanRRSeries


@dataclass(frozen=True)
class FrequencyFeatures:
    peak_ulf: float
    peak_lf: float
    peak_hf: float
    ulf_ratio: float
    lf_ratio: float
    hf_ratio: float
    lf_hf: float
    band_powers: dict          # ms^2 per band, rectangle-integrated
    total_power: float         # ms^2 over the whole spectrum
    f_hf: float                # Hz, same estimate as peak_hf
    spectral_reliability_flag: bool


def estimate_psd(x: np.ndarray, fs: float, nperseg: int) -> tuple[np.ndarray, np.ndarray, bool]:
    """(freqs, psd, fallback_used). Input is assumed already detrended."""
    x = np.asarray(x, dtype=float)
    fallback = x.size < nperseg
    seg = x.size if fallback else nperseg
    freqs, psd = sps.welch(
        x, fs=fs, window="hann", nperseg=seg, noverlap=seg // 2, detrend=False
    )
    return freqs, psd, fallback


def band_power_and_peak(freqs: np.ndarray, psd: np.ndarray, lo: float, hi: float) -> tuple[float, float]:
    """Rectangle-integrated power and peak frequency over [lo, hi)."""
    m = (freqs >= lo) & (freqs < hi)
    if not m.any():
        return 0.0, float("nan")
    df = freqs[1] - freqs[0]
    power = float(np.sum(psd[m]) * df)
    peak = float(freqs[m][np.argmax(psd[m])])
    return power, peak


def frequency_domain(clean: CleanRRSeries, cfg: FeatureConfig = FeatureConfig()) -> FrequencyFeatures:
    x = np.asarray(clean.detrended, dtype=float)
    if x.size < cfg.min_tachogram_samples:
        raise SpectrumUnavailable(
            f"tachogram has {x.size} samples, need >= {cfg.min_tachogram_samples}"
        )
    freqs, psd, fallback = estimate_psd(x, 1.0 / clean.sample_interval_s, cfg.welch_nperseg)

    powers = {}
    peaks = {}
    for name, (lo, hi) in cfg.bands.items():
        powers[name], peaks[name] = band_power_and_peak(freqs, psd, lo, hi)

    df = freqs[1] - freqs[0]
    total = float(np.sum(psd) * df)
    in_band_total = sum(powers.values())

    def ratio(p: float) -> float:
        return p / in_band_total if in_band_total > 0 else float("nan")

    hf = powers["HF"]
    return FrequencyFeatures(
        peak_ulf=peaks["ULF"],
        peak_lf=peaks["LF"],
        peak_hf=peaks["HF"],
        ulf_ratio=ratio(powers["ULF"]),
        lf_ratio=ratio(powers["LF"]),
        hf_ratio=ratio(powers["HF"]),
        lf_hf=powers["LF"] / hf if hf > 0 else float("nan"),
        band_powers=powers,
        total_power=total,
        f_hf=peaks["HF"],
        spectral_reliability_flag=fallback,
    )


def respiratory_frequency(
    resp_signal: Optional[np.ndarray],
    sample_rate_hz: float = 4.0,
    cfg: FeatureConfig = FeatureConfig(),
) -> Optional[float]:
    """PSD peak of the respiration waveform inside the breathing band.

    Absent or too-short input yields None; the RSA guardrail then reports
    unknown instead of guessing.
    """
    if resp_signal is None:
        return None
    x = np.asarray(resp_signal, dtype=float)
    if x.size / sample_rate_hz < 30.0:
        return None
    x = x - np.mean(x)
    nperseg = min(x.size, int(64 * sample_rate_hz))
    freqs, psd = sps.welch(
        x, fs=sample_rate_hz, window="hann", nperseg=nperseg, noverlap=nperseg // 2, detrend=False
    )
    lo, hi = cfg.resp_band
    m = (freqs >= lo) & (freqs <= hi)
    if not m.any():
        return None
    return float(freqs[m][np.argmax(psd[m])])
