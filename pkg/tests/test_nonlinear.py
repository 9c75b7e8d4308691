import numpy as np
import pytest

from hrvreason.config import FeatureConfig
from hrvreason.errors import TooShort
from hrvreason.signal.nonlinear import (
    dfa_alpha,
    nonlinear,
    sample_entropy,
    sample_entropy_counts,
)

from conftest import make_clean

CFG = FeatureConfig()


def sampen_counts_oracle(x, m, r):
    """Direct O(N^2) pair count over the N-m extendable templates."""
    n = len(x)
    nt = n - m
    a = b = 0
    for i in range(nt):
        for j in range(i + 1, nt):
            dm = max(abs(x[i + k] - x[j + k]) for k in range(m))
            if dm <= r:
                b += 1
            if max(dm, abs(x[i + m] - x[j + m])) <= r:
                a += 1
    return a, b


def pink_noise(n, rng):
    """Spectral synthesis of 1/f noise: amplitude ~ f^-1/2, random phase."""
    freqs = np.fft.rfftfreq(n)
    amp = np.zeros_like(freqs)
    amp[1:] = 1.0 / np.sqrt(freqs[1:])
    phases = rng.uniform(0.0, 2.0 * np.pi, freqs.size)
    spec = amp * np.exp(1j * phases)
    spec[0] = 0.0
    return np.fft.irfft(spec, n)


def test_constant_series_degenerates_cleanly():
    out = nonlinear(make_clean(np.full(12, 800.0)), CFG)
    assert out.sd1 == 0.0
    assert out.sd2 == 0.0
    assert out.sampen == 0.0
    assert out.n_poincare == 11
    assert out.nonlinear_stability_flag


def test_sd1_identity(rng):
    rr = rng.uniform(600.0, 1000.0, 300)
    out = nonlinear(make_clean(rr), CFG)
    diff_var = np.std(np.diff(rr), ddof=1) ** 2
    assert out.sd1 ** 2 == pytest.approx(diff_var / 2.0, rel=1e-9)


def test_sd2_relation_to_sdnn(rng):
    rr = rng.uniform(600.0, 1000.0, 300)
    out = nonlinear(make_clean(rr), CFG)
    sdnn = np.std(rr, ddof=1)
    assert out.sd1 ** 2 + out.sd2 ** 2 == pytest.approx(2.0 * sdnn ** 2, rel=1e-9)


def test_sampen_matches_bruteforce_oracle(rng):
    x = rng.uniform(0.0, 1.0, 200)
    r = 0.2 * np.std(x, ddof=1)
    a_impl, b_impl = sample_entropy_counts(x, 2, r)
    a_ref, b_ref = sampen_counts_oracle(x.tolist(), 2, r)
    assert (a_impl, b_impl) == (a_ref, b_ref)
    assert sample_entropy(x, m=2, r=r) == pytest.approx(-np.log(a_ref / b_ref), abs=1e-12)


def test_sampen_offset_invariance(rng):
    x = rng.uniform(700.0, 900.0, 150)
    assert sample_entropy(x) == sample_entropy(x + 500.0)


def test_sampen_too_short_is_nan():
    assert np.isnan(sample_entropy(np.array([1.0, 2.0, 3.0]), m=2))


def test_dfa_white_noise_single_seed():
    rng = np.random.default_rng(7)
    alpha = dfa_alpha(rng.standard_normal(1000), 4, 16)
    assert 0.4 <= alpha <= 0.6


def test_dfa_white_noise_seed_mean():
    vals = [dfa_alpha(np.random.default_rng(s).standard_normal(1000), 4, 16) for s in range(20)]
    assert 0.45 <= np.mean(vals) <= 0.55


def test_dfa_pink_noise_seed_mean():
    vals = [dfa_alpha(pink_noise(1000, np.random.default_rng(100 + s)), 4, 16) for s in range(20)]
    assert 0.9 <= np.mean(vals) <= 1.1


def test_poincare_geometry_hand_case():
    out = nonlinear(make_clean([800.0, 900.0, 700.0, 800.0, 820.0]), CFG)
    assert out.n_poincare == 4
    assert out.poincare_bounds == {
        "x_min": 700.0, "x_max": 900.0, "y_min": 700.0, "y_max": 900.0,
    }
    assert out.poincare_density_center == (800.0, 810.0)


def test_too_short_raises():
    with pytest.raises(TooShort):
        nonlinear(make_clean([800.0, 810.0, 790.0, 805.0]), CFG)
