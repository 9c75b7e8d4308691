import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hrvreason.errors import InsufficientHistory, ZeroSigma
from hrvreason.normalization import (
    build_baseline,
    classify_state,
    classify_state_from_pct,
    delta_z,
    detect_conflict,
    normalize_panel,
    traditional_z,
)

from conftest import FakePanel


def test_traditional_z_cases():
    assert traditional_z(40.0, 40.0, 10.0) == 0.0
    assert traditional_z(50.0, 40.0, 10.0) == 1.0
    assert traditional_z(65.0, 40.0, 10.0) == 2.5
    with pytest.raises(ZeroSigma):
        traditional_z(1.0, 0.0, 0.0)


def test_delta_z_cases():
    d, pct, z = delta_z(40.0, 40.0, 4.0)
    assert (d, pct, z) == (0.0, 0.0, 0.0)
    d, pct, z = delta_z(42.0, 40.0, 4.0)
    assert d == 2.0 and pct == pytest.approx(5.0) and z == pytest.approx(0.5)
    d, pct, z = delta_z(38.0, 40.0, 4.0)
    assert z == pytest.approx(-0.5)
    assert (z > 0) == (d > 0) or d <= 0
    with pytest.raises(ZeroSigma):
        delta_z(1.0, 2.0, 0.0)


def test_delta_pct_absent_for_zero_baseline():
    d, pct, z = delta_z(2.0, 0.0, 4.0)
    assert pct is None and d == 2.0


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-50, max_value=50), st.floats(min_value=0.1, max_value=10))
def test_delta_sign_consistency(delta, sigma):
    # with the default mu_delta = 0, z and the realized delta always share a sign
    d, _, z = delta_z(100.0 + delta, 100.0, sigma)
    if d != 0:
        assert (z > 0) == (d > 0)


def test_classify_state_boundaries():
    assert classify_state(2.0) == "marked"
    assert classify_state(-2.5) == "marked"
    assert classify_state(-1.5) == "moderate"
    assert classify_state(1.0) == "moderate"
    assert classify_state(0.5) == "mild"
    assert classify_state(0.49) == "baseline"
    assert classify_state(0.0) == "baseline"


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-10, max_value=10))
def test_classify_state_sign_symmetric(z):
    assert classify_state(z) == classify_state(-z)


def test_classify_from_pct_fallback_thresholds():
    assert classify_state_from_pct(25.0) == "marked"
    assert classify_state_from_pct(-16.0) == "moderate"
    assert classify_state_from_pct(7.5) == "mild"
    assert classify_state_from_pct(7.4) == "baseline"
    assert classify_state_from_pct(None) == "baseline"


def test_detect_conflict():
    assert detect_conflict(0.5, -0.3) is True
    assert detect_conflict(0.5, 0.1) is False
    assert detect_conflict(0.0, -2.0) is False
    assert detect_conflict(-1.0, 2.0) == detect_conflict(2.0, -1.0)
    assert detect_conflict(None, 1.0) is False


def panels_with_rmssd(values):
    return [FakePanel({m: float("nan") for m in ["MeanRR"]} | {"RMSSD": v}) for v in values]


def _full_metrics(**overrides):
    from hrvreason.signal.panel import METRIC_ORDER

    base = {m: 10.0 for m in METRIC_ORDER}
    base.update(overrides)
    return base


def test_build_baseline_mean_and_sample_sd():
    panels = [FakePanel(_full_metrics(RMSSD=v)) for v in (30.0, 40.0, 50.0)]
    prof = build_baseline(panels, "s1", mode="retrospective")
    assert prof.mean["RMSSD"] == pytest.approx(40.0)
    assert prof.sd["RMSSD"] == pytest.approx(10.0)  # ddof=1
    assert prof.trial_count == 3 and prof.available


def test_build_baseline_permutation_invariant():
    vals = [31.0, 47.0, 38.5, 44.0]
    a = build_baseline([FakePanel(_full_metrics(RMSSD=v)) for v in vals], "s")
    b = build_baseline([FakePanel(_full_metrics(RMSSD=v)) for v in reversed(vals)], "s")
    assert a.mean["RMSSD"] == pytest.approx(b.mean["RMSSD"])
    assert a.sd["RMSSD"] == pytest.approx(b.sd["RMSSD"])


def test_causal_baseline_requires_history():
    with pytest.raises(InsufficientHistory):
        build_baseline([], "s1", mode="causal")


def test_single_trial_baseline_not_available():
    prof = build_baseline([FakePanel(_full_metrics())], "s1")
    assert not prof.available
    assert math.isnan(prof.sd["RMSSD"])


def test_identical_trials_zero_sigma_propagates():
    panels = [FakePanel(_full_metrics(RMSSD=40.0)) for _ in range(3)]
    prof = build_baseline(panels, "s1")
    assert prof.sd["RMSSD"] == 0.0
    with pytest.raises(ZeroSigma):
        delta_z(41.0, prof.mean["RMSSD"], prof.sd["RMSSD"])


def _real_panel(rmssd=55.0):
    from hrvreason.config import FeatureConfig
    from hrvreason.signal.panel import FeaturePanel  # noqa: F401 - type reference

    return FakePanel(_full_metrics(RMSSD=rmssd, MeanHR=70.0))


def test_normalize_panel_z_s6_equals_z_delta():
    baseline_panels = [FakePanel(_full_metrics(RMSSD=v)) for v in (30.0, 40.0, 50.0)]
    prof = build_baseline(baseline_panels, "s1")
    trial = FakePanel(_full_metrics(RMSSD=45.0))
    trial.subject_id, trial.trial_id = "s1", "t1"
    out = normalize_panel(trial, prof, population={"RMSSD": {"mean": 42.0, "sd": 15.0}})
    row = out.row("RMSSD")
    assert row.z_delta == pytest.approx((45.0 - 40.0) / 10.0)
    assert row.z_s6 == row.z_delta
    assert row.z_trad == pytest.approx((45.0 - 42.0) / 15.0)
    assert row.conflict is False
    assert row.change_state == "mild"


def test_normalize_panel_conflict_flag():
    prof = build_baseline([FakePanel(_full_metrics(RMSSD=v)) for v in (50.0, 60.0, 70.0)], "s1")
    trial = FakePanel(_full_metrics(RMSSD=55.0))  # below subject mean, above population mean
    out = normalize_panel(trial, prof, population={"RMSSD": {"mean": 42.0, "sd": 10.0}})
    row = out.row("RMSSD")
    assert row.z_trad > 0 and row.z_delta < 0
    assert row.conflict is True


def test_normalize_panel_fallback_reduced_confidence():
    # zero baseline sigma: grading falls back to percent change
    prof = build_baseline([FakePanel(_full_metrics(RMSSD=40.0)) for _ in range(3)], "s1")
    trial = FakePanel(_full_metrics(RMSSD=52.0))  # +30%
    out = normalize_panel(trial, prof)
    row = out.row("RMSSD")
    assert row.z_delta is None
    assert row.reduced_confidence
    assert row.change_state == "marked"
