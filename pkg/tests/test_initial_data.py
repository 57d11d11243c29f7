import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capwave.campaigns import spectral_slope
from capwave.initial_data import (
    flat_gamma,
    gaussian_packet,
    gaussian_packet_modes,
    multi_mode,
    random_bandlimited,
    rough_tail,
    rough_tail_modes,
    single_mode,
    traveling_mode,
)
from capwave.linear import omega
from capwave.spectral import derivative, make_grid

seeds = st.integers(0, 2**31 - 1)


def test_flat_and_single_mode():
    g = make_grid(32)
    th, ga = flat_gamma(g, 2.0)
    assert np.all(th == 0) and np.all(ga == 2.0)
    th, ga = single_mode(g, 2, 0.1, gamma0=0.5)
    assert np.allclose(th, 0.1 * np.cos(2 * g.nodes))
    assert np.all(ga == 0.5)


def test_traveling_mode_relation():
    g = make_grid(32, 4 * np.pi)
    th, ga = traveling_mode(g, 3, 1e-3)
    k = 2 * np.pi * 3 / g.period
    assert np.allclose(ga, 2 * omega(k) / k * 1e-3 * np.sin(k * g.nodes))


@given(seeds)
def test_seeded_generators_are_reproducible(seed):
    g = make_grid(64)
    a1, b1 = multi_mode(g, 0.1, (1, 2, 5), seed)
    a2, b2 = multi_mode(g, 0.1, (1, 2, 5), seed)
    assert np.array_equal(a1, a2) and np.array_equal(b1, b2)
    r = random_bandlimited(g, 10, seed)
    assert np.array_equal(r, random_bandlimited(g, 10, seed))
    assert abs(r.mean()) < 1e-12
    assert np.max(np.abs(np.fft.rfft(r)[11:])) < 1e-10


def test_gaussian_packet_matches_samples():
    g = make_grid(1024, 80.0)
    th, ka = gaussian_packet(g, 0.5, 1.5, carrier=2.0, center=3.0)
    a = g.nodes
    direct = 0.5 * np.exp(-((a - 3.0) ** 2) / (2 * 1.5**2)) * np.cos(2.0 * (a - 3.0))
    assert np.allclose(th, direct, atol=1e-12)
    assert np.allclose(ka, derivative(g, direct), atol=1e-10)
    assert abs(ka.mean()) < 1e-14


def test_gaussian_modes_are_hermitian():
    g = make_grid(256, 30.0)
    for order in (0, 1, 2):
        kh = gaussian_packet_modes(g, 1.0, 1.0, order=order)
        assert np.allclose(kh, np.conj(np.roll(kh[::-1], 1)), atol=1e-12)


def test_rough_tail_is_nested_across_resolutions():
    coarse, fine = make_grid(512, 16 * np.pi), make_grid(1024, 16 * np.pi)
    kc = rough_tail_modes(coarse, 4.5, seed=3) / 512
    kf = rough_tail_modes(fine, 4.5, seed=3) / 1024
    # modes far below the coarse Nyquist mode are unaffected by the new fine modes
    assert np.allclose(kc[:150], kf[:150], atol=1e-14, rtol=1e-10)


@pytest.mark.parametrize("s", [2.5, 4.5])
def test_rough_tail_decay_rate(s):
    g = make_grid(4096, 16 * np.pi)
    f = rough_tail(g, s, seed=11, tail_amplitude=1.0, envelope_width=2.0)
    assert abs(f.mean()) < 1e-14
    # mode number m has wavenumber m / 8, so modes 200..1600 sit at |k| in [25, 200]
    slope = spectral_slope(f, 200, 1600)
    # shell sums over a band of m modes add m^(1/2) to the per-mode rate -s - 1/2
    assert slope == pytest.approx(-s, abs=0.3)
