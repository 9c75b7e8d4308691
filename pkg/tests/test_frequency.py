import numpy as np
import pytest

from hrvreason.config import FeatureConfig
from hrvreason.errors import SpectrumUnavailable
from hrvreason.signal.frequency import frequency_domain, respiratory_frequency

from conftest import make_clean

CFG = FeatureConfig()
FS = 4.0
BIN = FS / CFG.welch_nperseg  # 0.015625 Hz at the full segment length


def tachogram_clean(x):
    return make_clean(np.full(8, 800.0), resampled=x, detrended=np.asarray(x, float))


def sine(freq, n, amp=30.0):
    t = np.arange(n) / FS
    return amp * np.sin(2 * np.pi * freq * t)


def dft_peak(x, lo, hi):
    """Independent peak locator: plain rFFT magnitude argmax within a band."""
    freqs = np.fft.rfftfreq(len(x), d=1 / FS)
    mag = np.abs(np.fft.rfft(x)) ** 2
    m = (freqs >= lo) & (freqs < hi)
    return freqs[m][np.argmax(mag[m])]


def test_hf_sinusoid_peak_and_ratio():
    x = sine(0.25, 512)
    f = frequency_domain(tachogram_clean(x), CFG)
    assert abs(f.peak_hf - 0.25) <= BIN
    assert f.hf_ratio > 0.9
    assert f.f_hf == f.peak_hf
    assert not f.spectral_reliability_flag
    # agrees with the direct-DFT oracle within one bin
    assert abs(f.peak_hf - dft_peak(x, 0.15, 0.40)) <= BIN


def test_lf_sinusoid_peak_and_ratio():
    x = sine(0.10, 512)
    f = frequency_domain(tachogram_clean(x), CFG)
    assert abs(f.peak_lf - 0.10) <= BIN
    assert f.lf_ratio > 0.9
    assert abs(f.peak_lf - dft_peak(x, 0.04, 0.15)) <= BIN


def test_band_limited_noise_parseval(rng):
    # white noise confined below 0.4 Hz: in-band powers must account for the variance
    n = 4096
    spec = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, d=1 / FS)
    spec[freqs >= 0.39] = 0.0
    spec[0] = 0.0
    x = np.fft.irfft(spec, n)
    f = frequency_domain(tachogram_clean(x), CFG)
    total_band = sum(f.band_powers.values())
    assert total_band == pytest.approx(np.var(x), rel=0.10)


def test_total_power_matches_variance_on_white_noise(rng):
    x = rng.standard_normal(4096)
    x -= x.mean()
    f = frequency_domain(tachogram_clean(x), CFG)
    assert f.total_power == pytest.approx(np.var(x), rel=0.10)


def test_ratios_sum_to_at_most_one(rng):
    x = rng.standard_normal(1024)
    f = frequency_domain(tachogram_clean(x), CFG)
    assert 0.0 <= f.ulf_ratio <= 1.0
    assert 0.0 <= f.lf_ratio <= 1.0
    assert 0.0 <= f.hf_ratio <= 1.0
    assert f.ulf_ratio + f.lf_ratio + f.hf_ratio <= 1.0 + 1e-9


def test_short_series_falls_back_with_flag():
    x = sine(0.25, 128)  # shorter than one Welch segment but above the floor
    f = frequency_domain(tachogram_clean(x), CFG)
    assert f.spectral_reliability_flag
    assert abs(f.peak_hf - 0.25) <= FS / 128


def test_below_floor_raises():
    with pytest.raises(SpectrumUnavailable):
        frequency_domain(tachogram_clean(sine(0.25, 32)), CFG)


def test_respiratory_frequency_quarter_hz():
    t = np.arange(64 * 4) / 4.0
    resp = np.sin(2 * np.pi * 0.25 * t)
    f = respiratory_frequency(resp, 4.0, CFG)
    assert f == pytest.approx(0.25, abs=BIN)


def test_respiratory_frequency_15_breaths_per_minute():
    # 15 breaths/min = 0.25 Hz
    t = np.arange(64 * 4) / 4.0
    resp = np.sin(2 * np.pi * (15.0 / 60.0) * t)
    f = respiratory_frequency(resp, 4.0, CFG)
    assert f == pytest.approx(0.25, abs=BIN)


def test_respiratory_frequency_absent_or_short():
    assert respiratory_frequency(None, 4.0, CFG) is None
    short = np.sin(np.arange(20) / 4.0)
    assert respiratory_frequency(short, 4.0, CFG) is None
