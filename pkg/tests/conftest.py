import numpy as np
import pytest

from hrvreason.normalization import MetricNorm, NormalizedPanel, classify_state
from hrvreason.signal.preprocess import CleanRRSeries


def make_clean(rr, resampled=None, detrended=None, artifact_rate=0.0, valid=1.0):
    """CleanRRSeries straight from intervals, bypassing the cleaning chain."""
    rr = np.asarray(rr, dtype=float)
    return CleanRRSeries(
        intervals_ms=rr,
        artifact_rate=artifact_rate,
        valid_rr_ratio=valid,
        resampled_4hz=resampled if resampled is not None else rr.copy(),
        detrended=detrended if detrended is not None else rr - rr.mean(),
        artifact_mask=np.zeros(rr.size, dtype=bool),
    )


class FakePanel:
    """Duck-typed feature panel: just a metrics() dict."""

    def __init__(self, metrics, subject_id="s", trial_id="t"):
        self._metrics = metrics
        self.subject_id = subject_id
        self.trial_id = trial_id

    def metrics(self):
        return dict(self._metrics)


def make_norm_panel(z_map, subject_id="s", trial_id="t", pct_map=None):
    """NormalizedPanel whose rows carry the given delta z-scores."""
    panel = NormalizedPanel(subject_id=subject_id, trial_id=trial_id)
    for metric, z in z_map.items():
        row = MetricNorm(metric=metric, x_stim=0.0, z_delta=z,
                         change_state=classify_state(z))
        if pct_map and metric in pct_map:
            row.delta_pct = pct_map[metric]
        panel.rows[metric] = row
    return panel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
