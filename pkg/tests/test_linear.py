import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capwave import linear as lin
from capwave.campaigns import localized_packet
from capwave.initial_data import random_bandlimited
from capwave.spectral import make_grid

seeds = st.integers(0, 2**31 - 1)


@pytest.fixture(scope="module")
def packet():
    return localized_packet(n=2048, period=100 * np.pi, window=(120.0, 20.0))


@pytest.fixture(scope="module")
def gravity_packet():
    return localized_packet(n=2048, period=100 * np.pi, inv_We=0.0, g=1.0, window=(120.0, 20.0))


def test_omega_values():
    assert lin.omega(1.0) == pytest.approx(1.0)
    assert lin.omega(2.0, inv_We=2.0, g=0.0) == pytest.approx(np.sqrt(8.0))
    assert lin.omega(4.0, inv_We=0.0, g=1.0) == pytest.approx(2.0)
    assert np.allclose(lin.omega(np.array([-3.0, 3.0])), np.sqrt(27.0))


def test_solution_rejects_complex_fields_and_bad_physics():
    g = make_grid(16)
    bad = np.zeros(16, complex)
    bad[1] = 1.0  # no conjugate partner
    with pytest.raises(ValueError, match="Hermitian"):
        lin.LinearSolution(g, bad, np.zeros(16))
    with pytest.raises(ValueError):
        lin.LinearSolution.from_fields(g, np.zeros(16), inv_We=0.0, g=0.0)


def test_window_mask_shape():
    g = make_grid(512, 40.0)
    w = lin.WindowSpec(10.0, 5.0)
    m = w.mask(g)
    assert np.all((m >= 0) & (m <= 1))
    assert np.all(m[np.abs(g.nodes) <= 10.0] == 1)
    assert np.all(m[np.abs(g.nodes) >= 15.0] == 0)
    with pytest.raises(ValueError):
        lin.WindowSpec(18.0, 5.0).check(g)
    with pytest.raises(ValueError):
        lin.WindowSpec(0.0, 1.0)


def test_propagation_is_exact_for_a_single_mode():
    g = make_grid(64, 2 * np.pi)
    x = g.nodes
    sol = lin.LinearSolution.from_fields(g, np.cos(3 * x))
    w = lin.omega(3.0)
    k, kt = lin.propagate(sol, 0.7)
    assert np.allclose(k, np.cos(3 * x) * np.cos(w * 0.7), atol=1e-13)
    assert np.allclose(kt, -w * np.cos(3 * x) * np.sin(w * 0.7), atol=1e-12)


@given(seeds, st.floats(0.0, 100.0))
def test_linear_energy_is_conserved(seed, t):
    g = make_grid(128)
    k0 = random_bandlimited(g, 20, seed, decay=1.0)
    k1 = random_bandlimited(g, 20, seed + 1, decay=2.0)
    sol = lin.LinearSolution.from_fields(g, k0, k1, inv_We=2.0, g=0.5)
    e0, e1 = lin.energy_linear(sol, 0.0), lin.energy_linear(sol, t)
    assert abs(e1 - e0) <= 1e-12 * e0


def test_energy_gamma2_starts_at_closed_form(packet):
    assert lin.energy_gamma2(packet, 0.0) == pytest.approx(lin.energy_gamma2_initial(packet), rel=1e-10)


def test_energy_gamma2_is_conserved_inside_window(packet):
    e = [lin.energy_gamma2(packet, t) for t in (0.0, 5.0, 10.0, 20.0)]
    assert max(abs(v - e[0]) for v in e) <= 1e-6 * e[0]


def test_gamma_energies_refuse_the_wrong_physics(packet, gravity_packet):
    with pytest.raises(ValueError):
        lin.energy_gamma_g(packet, 1.0)
    with pytest.raises(ValueError):
        lin.energy_gamma2(gravity_packet, 1.0)
    e = [lin.energy_gamma_g(gravity_packet, t) for t in (0.0, 1.0, 2.0)]
    assert max(abs(v - e[0]) for v in e) <= 1e-6 * e[0]


def test_window_violation_is_raised_when_mass_leaves(packet):
    # capillary group velocity is unbounded; the high modes reach the edge quickly
    late = 2000.0
    assert lin.window_mass_ratio(packet, late) > lin.WINDOW_MASS_TOL
    with pytest.raises(lin.WindowViolation) as err:
        lin.energy_gamma2(packet, late)
    assert err.value.value > lin.WINDOW_MASS_TOL


def test_invariance_residual_small_in_window(packet):
    res = lin.invariance_residual(packet, 3.0)
    inside = np.abs(packet.grid.nodes) < 60
    g2 = lin.gamma2_apply(packet, 3.0)
    assert np.max(np.abs(res[inside])) <= 1e-6 * max(1.0, np.max(np.abs(g2)))


def test_gain_norms(packet):
    assert lin.weighted_gain_norm(packet, 0.0, 1) == 0.0
    w = lin.weighted_gain_norm(packet, 1.0, 1)
    u = lin.unweighted_gain_norm(packet, 1.0, 1)
    assert 0 < w and 0 < u
    with pytest.raises(ValueError):
        lin.weighted_gain_norm(packet, 1.0, 0)


def test_gain_operator_symbol():
    g = make_grid(16)
    sym = lin.gain_operator(g, 1)
    k = g.wavenumbers
    assert np.allclose(sym[1:8], np.abs(k[1:8]) * (1j * k[1:8]) ** 4)
    # order k + 3 derivative: even for k = 1 (real at Nyquist), odd for k = 2 (dropped there)
    assert sym[8].imag == 0 and sym[8].real > 0
    assert lin.gain_operator(g, 2)[8] == 0
