import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capwave.campaigns import Check, bound_ratios, measure_frequency, spectral_slope, _rough_unit
from capwave.spectral import make_grid


def test_check_relations():
    assert Check("1", "x", 0.5, 1.0).passed
    assert not Check("1", "x", 1.5, 1.0).passed
    assert Check("1", "x", 2.0, 1.0, ">=").passed
    assert not Check("1", "x", float("nan"), 1.0).passed
    assert not Check("1", "x", float("nan"), 1.0, ">=").passed
    with pytest.raises(ValueError):
        Check("1", "x", 0.0, 1.0, "<")


def test_check_roundtrip_and_null_measurement():
    c = Check("5", "gain", 0.3, 0.2, ">=", {"rows": [1, 2]})
    assert Check.from_dict(c.to_dict()) == c
    d = c.to_dict() | {"measured": None}
    assert not Check.from_dict(d).passed
    assert c.line().startswith("PASS [5] gain")


@given(st.floats(0.05, 2.5), st.floats(0.0, 2 * np.pi), st.floats(1e-8, 1e3), st.integers(6, 64))
def test_measure_frequency_recovers_sinusoids(w_dt, phase, amp, count):
    dt = 0.1
    j = np.arange(count)
    x = amp * np.cos(w_dt * j + phase)
    if np.dot(x[1:-1], x[1:-1]) < 1e-12 * amp**2 * count:
        return
    assert measure_frequency(x, dt) == pytest.approx(w_dt / dt, rel=1e-8)


def test_measure_frequency_needs_three_samples():
    with pytest.raises(ValueError):
        measure_frequency([1.0, 0.5], 0.1)


@pytest.mark.parametrize("p", [1.0, 2.5, 4.0])
def test_spectral_slope_of_a_power_law(p):
    n = 1024
    m = np.arange(n // 2 + 1)
    fh = np.zeros(n // 2 + 1, complex)
    fh[1:] = m[1:] ** (-p)
    f = np.fft.irfft(fh, n)
    # shell sums over m modes add 1/2 to the per-mode rate
    assert spectral_slope(f, 8, 256) == pytest.approx(-p + 0.5, abs=0.1)


def test_rough_draw_is_nested_across_resolutions():
    coarse, fine = make_grid(128), make_grid(512)
    fc = _rough_unit(coarse, np.random.default_rng(5))
    ff = _rough_unit(fine, np.random.default_rng(5))
    hc = np.fft.rfft(fc) / 128
    hf = np.fft.rfft(ff) / 512
    # same low-mode shape up to the unit normalization
    scale = hf[1] / hc[1]
    assert np.allclose(hf[1:33], hc[1:33] * scale.real, rtol=1e-10)


def test_bound_ratios_single_draw():
    c, d, s = bound_ratios(128, 3)
    assert 0 < c < 10
    assert d <= 1e-12
    assert s >= 0
