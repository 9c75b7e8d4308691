import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hrvreason.config import FeatureConfig
from hrvreason.errors import TooShort
from hrvreason.signal.timedomain import sdnn_index, time_domain

from conftest import make_clean

CFG = FeatureConfig()


def test_constant_series():
    t = time_domain(make_clean([800.0, 800.0, 800.0]), CFG)
    assert t.sdnn == 0.0
    assert t.rmssd == 0.0
    assert t.mean_hr == pytest.approx(75.0)
    assert t.nn50 == 0
    assert t.pnn50 == 0.0


def test_rmssd_hand_computed():
    # diffs are +10 and -20: RMSSD = sqrt((100 + 400) / 2) = sqrt(250)
    t = time_domain(make_clean([800.0, 810.0, 790.0]), CFG)
    assert t.mean_rr == pytest.approx(800.0)
    assert t.rmssd == pytest.approx(np.sqrt(250.0), rel=1e-12)
    assert t.sdnn == pytest.approx(10.0, rel=1e-12)


def test_nn50_counts_strict_50ms_exceedances():
    # both successive diffs are 60 ms
    t = time_domain(make_clean([1000.0, 1060.0, 1000.0]), CFG)
    assert t.nn50 == 2
    assert t.pnn50 == pytest.approx(100.0)
    # exactly 50 ms does not count
    t2 = time_domain(make_clean([1000.0, 1050.0, 1000.0]), CFG)
    assert t2.nn50 == 0


def test_mean_hr_is_60000_over_mean_rr(rng):
    rr = rng.uniform(600.0, 1000.0, 50)
    t = time_domain(make_clean(rr), CFG)
    assert t.mean_hr == pytest.approx(60000.0 / rr.mean(), rel=1e-12)
    assert t.sdhr == pytest.approx(np.std(60000.0 / rr, ddof=1), rel=1e-12)


def test_too_short():
    with pytest.raises(TooShort):
        time_domain(make_clean([800.0]), CFG)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=400.0, max_value=1500.0), min_size=3, max_size=60))
def test_time_reversal_invariance(values):
    fwd = time_domain(make_clean(values), CFG)
    rev = time_domain(make_clean(values[::-1]), CFG)
    assert fwd.rmssd == pytest.approx(rev.rmssd, rel=1e-9, abs=1e-12)
    assert fwd.sdnn == pytest.approx(rev.sdnn, rel=1e-9, abs=1e-12)


def test_sdnn_index_against_reference_loop(rng):
    rr = rng.uniform(650.0, 950.0, 150)
    got = sdnn_index(rr, 30.0)
    # independent re-computation with an explicit window walk
    t = np.cumsum(rr) / 1000.0
    sds, lo = [], t[0]
    while lo < t[-1]:
        sel = rr[(t >= lo) & (t < lo + 30.0)]
        if sel.size >= 2:
            sds.append(np.std(sel, ddof=1))
        lo += 30.0
    assert got == pytest.approx(np.mean(sds), rel=1e-12)


def test_sdnn_index_constant_series_is_zero():
    assert sdnn_index(np.full(80, 750.0), 30.0) == 0.0
