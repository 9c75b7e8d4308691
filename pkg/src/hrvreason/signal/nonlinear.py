"""Nonlinear HRV metrics: Poincare geometry, sample entropy, DFA."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..config import FeatureConfig
from ..errors import TooShort
from .preprocess import CleanRRSeries


@dataclass(frozen=True)
class NonlinearFeatures:
    sd1: float
    sd2: float
    sd1_sd2: float
    sampen: float
    dfa_alpha: float
    n_poincare: int
    poincare_bounds: dict      # min/max per axis, ms
    poincare_density_center: tuple
    nonlinear_stability_flag: bool


def chebyshev_window_distances(x: np.ndarray, length: int) -> np.ndarray:
    """Pairwise Chebyshev distances between all windows of `length` samples."""
    n = x.size
    d = np.abs(x[:, None] - x[None, :])
    out = d[: n - length + 1, : n - length + 1].copy()
    for k in range(1, length):
        np.maximum(out, d[k : n - length + 1 + k, k : n - length + 1 + k], out=out)
    return out


def sample_entropy_counts(x: np.ndarray, m: int, r: float) -> tuple[int, int]:
    """(A, B): template pairs matching at length m+1 and at length m.

    Both counts run over the N-m templates that have an (m+1)-point
    extension, pairs i<j, self-matches excluded.
    """
    x = np.asarray(x, dtype=float)
    nt = x.size - m
    if nt < 2:
        return 0, 0
    dm = chebyshev_window_distances(x, m)[:nt, :nt]
    dm1 = chebyshev_window_distances(x, m + 1)
    iu = np.triu_indices(nt, k=1)
    b = int(np.sum(dm[iu] <= r))
    a = int(np.sum(dm1[iu] <= r))
    return a, b


def sample_entropy(x: np.ndarray, m: int = 2, r: float | None = None,
                   r_factor: float = 0.2) -> float:
    """SampEn = -ln(A/B); nan when no matches exist at either length.

    Tolerance defaults to r_factor times the sample SD of the series.
    """
    x = np.asarray(x, dtype=float)
    if x.size < m + 2:
        return float("nan")
    if r is None:
        r = r_factor * float(np.std(x, ddof=1))
    a, b = sample_entropy_counts(x, m, r)
    if a == 0 or b == 0:
        return float("nan")
    return float(-np.log(a / b))


_WHITE_EXPECTATION_CACHE: dict[int, float] = {}


def _dfa_white_expectation(s: int) -> float:
    """Exact E[F^2(s)] of first-order DFA on unit-variance uncorrelated noise.

    Window residuals are (I - H) y with H the linear-fit hat matrix and y a
    random-walk segment (cov min(i, j)); the expectation is the trace of the
    projected covariance. Used to cancel the small-scale estimator bias.
    """
    if s not in _WHITE_EXPECTATION_CACHE:
        t = np.arange(s, dtype=float)
        design = np.vstack([t, np.ones(s)]).T
        hat = design @ np.linalg.inv(design.T @ design) @ design.T
        m = np.eye(s) - hat
        idx = np.arange(1, s + 1)
        cov = np.minimum(idx[:, None], idx[None, :]).astype(float)
        _WHITE_EXPECTATION_CACHE[s] = float(np.trace(m @ cov @ m.T) / s)
    return _WHITE_EXPECTATION_CACHE[s]


def dfa_alpha(x: np.ndarray, scale_min: int = 4, scale_max: int = 16) -> float:
    """Detrended fluctuation scaling exponent over beat scales [scale_min, scale_max].

    First-order DFA: integrate the mean-removed series, split into
    non-overlapping windows per scale, remove the per-window linear trend,
    and fit log F(s) against log s. F(s) carries the analytic small-scale
    bias correction (fluctuations are rescaled by the exact white-noise
    expectation) so uncorrelated noise reads 0.5 even at short scales.
    """
    x = np.asarray(x, dtype=float)
    profile = np.cumsum(x - np.mean(x))
    scales, flucts = [], []
    for s in range(scale_min, scale_max + 1):
        nwin = profile.size // s
        if nwin < 2:
            continue
        segs = profile[: nwin * s].reshape(nwin, s).T
        design = np.vstack([np.arange(s), np.ones(s)]).T
        coef, *_ = np.linalg.lstsq(design, segs, rcond=None)
        resid = segs - design @ coef
        f = np.sqrt(np.mean(resid ** 2))
        f *= np.sqrt(s / _dfa_white_expectation(s))
        if f > 0:
            scales.append(s)
            flucts.append(f)
    if len(scales) < 2:
        return float("nan")
    slope = np.polyfit(np.log(scales), np.log(flucts), 1)[0]
    return float(slope)


def nonlinear(clean: CleanRRSeries, cfg: FeatureConfig = FeatureConfig()) -> NonlinearFeatures:
    rr = np.asarray(clean.intervals_ms, dtype=float)
    if rr.size < 5:
        raise TooShort(f"nonlinear metrics need >= 5 intervals, got {rr.size}")

    xn, yn = rr[:-1], rr[1:]
    diff = np.diff(rr)
    sd1 = float(np.std(diff, ddof=1) / np.sqrt(2.0))
    sdnn = float(np.std(rr, ddof=1))
    sd2 = float(np.sqrt(max(0.0, 2.0 * sdnn ** 2 - sd1 ** 2)))

    degenerate = np.std(rr, ddof=1) == 0.0
    if degenerate:
        sampen = 0.0
        alpha = float("nan")
    else:
        sampen = sample_entropy(rr, m=cfg.sampen_m, r_factor=cfg.sampen_r_factor)
        alpha = dfa_alpha(rr, cfg.dfa_scale_min, cfg.dfa_scale_max)

    unstable = degenerate or not np.isfinite(sampen) or not np.isfinite(alpha)
    if not np.isfinite(sampen) and not degenerate:
        sampen = float("nan")

    return NonlinearFeatures(
        sd1=sd1,
        sd2=sd2,
        sd1_sd2=sd1 / sd2 if sd2 > 0 else float("nan"),
        sampen=sampen,
        dfa_alpha=alpha,
        n_poincare=int(rr.size - 1),
        poincare_bounds={
            "x_min": float(xn.min()), "x_max": float(xn.max()),
            "y_min": float(yn.min()), "y_max": float(yn.max()),
        },
        poincare_density_center=(float(np.median(xn)), float(np.median(yn))),
        nonlinear_stability_flag=bool(unstable),
    )
