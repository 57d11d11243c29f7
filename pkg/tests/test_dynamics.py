import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capwave import dynamics as dyn
from capwave.initial_data import flat_gamma, multi_mode, near_contact, single_mode, traveling_mode
from capwave.spectral import make_grid

seeds = st.integers(0, 2**31 - 1)


def flat_state(n=32, gamma0=1.0):
    g = make_grid(n)
    return dyn.make_state(g, *flat_gamma(g, gamma0))


# ------------------------------------------------------------ construction

def test_make_state_closes_the_curve():
    g = make_grid(64)
    th, ga = multi_mode(g, 0.2, seed=4)
    s = dyn.make_state(g, th + 0.3, ga)
    assert dyn.closure_residual(g, s.theta, s.sigma) < 1e-14
    z = dyn.reconstruct_curve(g, s.theta, s.sigma)
    assert abs(np.mean(z.imag)) < 1e-14


def test_state_and_config_validation():
    g = make_grid(16)
    with pytest.raises(ValueError):
        dyn.SurfaceState(g, 0.0, np.zeros(8), np.zeros(16), 1.0)
    with pytest.raises(ValueError):
        dyn.SurfaceState(g, 0.0, np.zeros(16), np.zeros(16), -1.0)
    with pytest.raises(ValueError):
        dyn.StepperConfig(dt=0.0)
    with pytest.raises(ValueError):
        dyn.StepperConfig(dt=0.1, gamma_t_tol=1e-16)
    with pytest.raises(ValueError):
        dyn.Physics(inv_We=0.0)


def test_stepper_defaults():
    cfg = dyn.StepperConfig(dt=0.01)
    assert cfg.cutoff_fraction == pytest.approx(2 / 3)
    assert cfg.floor == 1e-13
    assert cfg.Q_min == 0.5


# -------------------------------------------------------------- validation

def test_flat_state_diagnostics():
    info = dyn.validate_state(flat_state())
    assert info["chord_arc"] == pytest.approx(1.0)
    assert info["kappa_inf"] == 0.0
    assert info["closure_residual"] < 1e-15


def test_nan_state_aborts():
    g = make_grid(16)
    th = np.zeros(16)
    th[2] = np.nan
    s = dyn.SurfaceState(g, 0.0, th, np.zeros(16), 1.0)
    with pytest.raises(dyn.NanAbort) as err:
        dyn.validate_state(s)
    assert err.value.reason == "nan-abort"


def test_open_curve_aborts_with_residual():
    g = make_grid(16)
    s = dyn.SurfaceState(g, 0.0, np.full(16, 0.5), np.zeros(16), 1.0)
    with pytest.raises(dyn.ClosureError) as err:
        dyn.validate_state(s)
    assert err.value.value > 0.1


def test_near_contact_aborts_with_ratio():
    g = make_grid(128)
    s = dyn.make_state(g, *near_contact(g, 1.8))
    with pytest.raises(dyn.ChordArcAbort) as err:
        dyn.validate_state(s, Q_min=0.5)
    assert err.value.reason == "chord-arc-abort"
    assert 0.3 < err.value.value < 0.5
    assert err.value.state is s


def test_large_curvature_aborts():
    g = make_grid(32)
    s = dyn.make_state(g, *single_mode(g, 1, 0.5))
    with pytest.raises(dyn.CurvatureAbort) as err:
        dyn.validate_state(s, kappa_max=0.25)
    assert err.value.value > 0.25


# ----------------------------------------------------------------- stepping

def test_flat_equilibrium_is_exact():
    s0 = flat_state(64)
    cfg = dyn.StepperConfig(dt=0.01)
    s = s0
    for _ in range(50):
        s = dyn.step(s, cfg)
    assert s.t == pytest.approx(0.5)
    assert np.max(np.abs(s.theta - s0.theta)) <= 1e-13
    assert np.max(np.abs(s.gamma - s0.gamma)) <= 1e-13
    assert abs(s.sigma - s0.sigma) <= 1e-13


def test_step_reports_diagnostics():
    g = make_grid(64)
    s = dyn.make_state(g, *traveling_mode(g, 1, 1e-3))
    info = {}
    dyn.step(s, dyn.StepperConfig(dt=0.01), info)
    assert set(info) >= {"closure_residual", "chord_arc", "kappa_inf", "gamma_t_iterations"}
    assert info["gamma_t_iterations"] >= 1


def test_step_abort_carries_last_good_state():
    g = make_grid(32)
    s = dyn.make_state(g, *single_mode(g, 1, 0.2))
    # an oversized step leaves the admissible set; which check trips first is incidental
    with pytest.raises(dyn.DynamicsError) as err:
        dyn.step(s, dyn.StepperConfig(dt=0.5, kappa_max=0.2 + 1e-9))
    assert err.value.state is s
    assert err.value.reason in {"closure-abort", "curvature-abort"}


@given(seeds, st.floats(1e-4, 5e-2))
def test_small_steps_keep_the_curve_closed(seed, amplitude):
    g = make_grid(32)
    s = dyn.make_state(g, *multi_mode(g, amplitude, (1, 2), seed))
    cfg = dyn.StepperConfig(dt=0.01)
    for _ in range(3):
        s = dyn.step(s, cfg)
    assert dyn.closure_residual(g, s.theta, s.sigma) < 1e-10
    assert s.finite and s.sigma > 0


def test_small_wave_energy_is_steady_over_a_few_steps():
    g = make_grid(64)
    s = dyn.make_state(g, *traveling_mode(g, 1, 1e-3))
    cfg = dyn.StepperConfig(dt=0.05)
    energies = []
    for _ in range(6):
        energies.append(dyn.energy_E0k(s, dyn.derive_fields(s, cfg), 2))
        s = dyn.step(s, cfg)
    assert max(energies) / min(energies) < 1 + 1e-3


def test_derive_fields_fills_everything():
    g = make_grid(64)
    s = dyn.make_state(g, *traveling_mode(g, 2, 1e-2))
    f = dyn.derive_fields(s)
    for name in ("theta_t", "gamma_t", "u", "kappa", "phi", "p", "r_kappa", "r_u", "r_p"):
        arr = getattr(f, name)
        assert arr is not None and arr.shape == (64,) and np.all(np.isfinite(arr))
    partial = dyn.derive_fields(s, full=False)
    assert partial.p is None
    assert np.allclose(partial.gamma_t, f.gamma_t)


def test_energy_requires_full_fields_and_positive_order():
    g = make_grid(32)
    s = dyn.make_state(g, *traveling_mode(g, 1, 1e-3))
    with pytest.raises(ValueError):
        dyn.energy_E0k(s, dyn.derive_fields(s, full=False), 2)
    with pytest.raises(ValueError):
        dyn.energy_E0k(s, dyn.derive_fields(s), 0)


# -------------------------------------------------------- linear propagator

@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0), st.floats(0.8, 1.2), st.floats(0.0, 3.0))
def test_propagator_is_a_symplectic_flow(t1, t2, sigma, g):
    grid = make_grid(32, 5.0)
    phys = dyn.Physics(inv_We=1.5, g=g)
    c, sa, sb = dyn.linear_propagator(grid, sigma, phys, t1)
    # unit determinant
    assert np.allclose(c * c + sa * sb, 1.0, atol=1e-12)
    # composition
    c1, a1, b1 = c, sa, sb
    c2, a2, b2 = dyn.linear_propagator(grid, sigma, phys, t2)
    c12, a12, b12 = dyn.linear_propagator(grid, sigma, phys, t1 + t2)
    assert np.allclose(c2 * c1 - a2 * b1, c12, atol=1e-10)
    assert np.allclose(c2 * a1 + a2 * c1, a12, atol=1e-10)


# ----------------------------------------------------------------- scaling

def test_scaling_transform_rules():
    g = make_grid(32)
    s = dyn.make_state(g, *traveling_mode(g, 1, 1e-3))
    same = dyn.scaling_transform(s, 1.0)
    assert np.array_equal(same.theta, s.theta) and same.theta is not s.theta
    half = dyn.scaling_transform(s.evolve(t=0.8), 4.0)
    assert half.grid.period == pytest.approx(g.period / 4)
    assert half.t == pytest.approx(0.1)
    assert np.allclose(half.gamma, 2 * s.gamma)
    with pytest.raises(ValueError):
        dyn.scaling_transform(s, 0.0)
    heavy = dyn.make_state(g, *traveling_mode(g, 1, 1e-3), physics=dyn.Physics(2.0, 1.0))
    with pytest.raises(ValueError, match="gravity"):
        dyn.scaling_transform(heavy, 2.0)
