import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capwave.spectral import (
    DENSE_MAX,
    DomainError,
    antiderivative,
    derivative,
    filter_field,
    hilbert,
    integrate,
    l2_norm,
    lambda_pow,
    make_grid,
    sobolev_norm,
)

SIZES = [16, 64, DENSE_MAX, 256]


def trig_poly(grid, seed, top=6, mean=0.0):
    """Random real trigonometric polynomial with modes 1..top plus a constant."""
    rng = np.random.default_rng(seed)
    a = 2 * np.pi * grid.nodes / grid.period
    f = np.full(grid.n_points, mean)
    for m in range(1, top + 1):
        f += rng.normal() * np.cos(m * a) + rng.normal() * np.sin(m * a)
    return f


# ------------------------------------------------------------- exact cases

@pytest.mark.parametrize("n", SIZES)
def test_derivative_of_trig_functions(n):
    g = make_grid(n)
    x = g.nodes
    assert np.allclose(derivative(g, np.sin(3 * x)), 3 * np.cos(3 * x), atol=1e-12)
    assert np.allclose(derivative(g, np.cos(2 * x), 2), -4 * np.cos(2 * x), atol=1e-11)
    assert np.array_equal(derivative(g, np.full(n, 2.5)), np.zeros(n))


def test_derivative_on_a_long_box():
    g = make_grid(128, 40.0)
    k = 2 * np.pi * 3 / 40.0
    assert np.allclose(derivative(g, np.sin(k * g.nodes)), k * np.cos(k * g.nodes), atol=1e-12)


@pytest.mark.parametrize("n", SIZES)
def test_hilbert_maps_cos_to_sin(n):
    g = make_grid(n)
    x = g.nodes
    assert np.allclose(hilbert(g, np.cos(2 * x)), np.sin(2 * x), atol=1e-13)
    assert np.allclose(hilbert(g, np.sin(2 * x)), -np.cos(2 * x), atol=1e-13)
    assert np.allclose(hilbert(g, np.ones(n)), 0.0, atol=1e-15)


def test_lambda_is_abs_of_wavenumber():
    g = make_grid(64)
    x = g.nodes
    assert np.allclose(lambda_pow(g, np.cos(5 * x), 1.0), 5 * np.cos(5 * x), atol=1e-12)
    assert np.allclose(lambda_pow(g, np.cos(4 * x), 0.5), 2 * np.cos(4 * x), atol=1e-12)
    assert np.allclose(lambda_pow(g, np.cos(4 * x), -1.0), 0.25 * np.cos(4 * x), atol=1e-13)


def test_complex_input_goes_through_both_paths():
    for n in (32, 256):
        g = make_grid(n)
        z = np.exp(1j * 2 * g.nodes)
        assert np.allclose(derivative(g, z), 2j * z, atol=1e-12)


def test_filter_removes_high_modes_and_keeps_low():
    g = make_grid(64)
    x = g.nodes
    low, high = np.cos(3 * x), 1e-3 * np.cos(30 * x)
    assert np.allclose(filter_field(g, low + high), low, atol=1e-14)
    # relative floor drops the tiny mode
    tiny = low + 1e-15 * np.cos(5 * x)
    out = filter_field(g, tiny, 1.0, 1e-13)
    # the input carried 3.2e-14 in mode 5; what is left is transform roundoff
    assert abs(np.fft.rfft(out)[5]) < 3e-15
    assert abs(np.fft.rfft(out)[3]) == pytest.approx(32, rel=1e-14)


def test_integrate_and_norms():
    g = make_grid(64)
    x = g.nodes
    assert integrate(g, np.cos(x) ** 2) == pytest.approx(np.pi, rel=1e-14)
    assert l2_norm(g, np.cos(x)) == pytest.approx(np.sqrt(np.pi), rel=1e-14)
    assert sobolev_norm(g, np.cos(2 * x), 1.0) == pytest.approx(np.sqrt(5 * np.pi), rel=1e-13)


# ------------------------------------------------------------------ errors

def test_invalid_grids_and_inputs():
    with pytest.raises(ValueError):
        make_grid(7)
    with pytest.raises(ValueError):
        make_grid(64, -1.0)
    g = make_grid(16)
    with pytest.raises(ValueError, match="shape"):
        derivative(g, np.zeros(8))
    bad = np.zeros(16)
    bad[3] = np.nan
    with pytest.raises(ValueError, match="NaN"):
        hilbert(g, bad)
    with pytest.raises(ValueError):
        derivative(g, np.zeros(16), -1)
    with pytest.raises(ValueError):
        sobolev_norm(g, np.zeros(16), -1.0)


def test_domain_errors_for_nonzero_mean():
    g = make_grid(32)
    with pytest.raises(DomainError):
        lambda_pow(g, np.ones(32), -0.5)
    with pytest.raises(DomainError):
        antiderivative(g, 1.0 + np.cos(g.nodes))


# -------------------------------------------------------------- properties

seeds = st.integers(0, 2**31 - 1)


@given(seeds, st.sampled_from(SIZES))
def test_hilbert_squares_to_minus_identity_on_mean_free(seed, n):
    g = make_grid(n)
    f = trig_poly(g, seed)
    assert np.allclose(hilbert(g, hilbert(g, f)), -f, atol=1e-11)


@given(seeds, seeds, st.sampled_from(SIZES))
def test_hilbert_is_antisymmetric(s1, s2, n):
    g = make_grid(n)
    f, h = trig_poly(g, s1, mean=0.3), trig_poly(g, s2, mean=-1.0)
    lhs = integrate(g, hilbert(g, f) * h)
    rhs = -integrate(g, f * hilbert(g, h))
    assert lhs == pytest.approx(rhs, abs=1e-10)


@given(seeds, st.sampled_from(SIZES))
def test_antiderivative_inverts_derivative(seed, n):
    g = make_grid(n)
    f = trig_poly(g, seed, mean=2.0)
    back = antiderivative(g, derivative(g, f))
    assert np.allclose(back, f - f.mean(), atol=1e-11)


@given(seeds, st.floats(0.1, 2.0), st.floats(0.1, 2.0))
def test_lambda_powers_compose(seed, s, t):
    g = make_grid(64)
    f = trig_poly(g, seed)
    lhs = lambda_pow(g, lambda_pow(g, f, s), t)
    assert np.allclose(lhs, lambda_pow(g, f, s + t), atol=1e-9 * np.max(np.abs(lhs)))
    # Lambda = H d
    assert np.allclose(lambda_pow(g, f, 1.0), hilbert(g, derivative(g, f)), atol=1e-11)


@given(seeds)
def test_dense_and_fft_paths_agree(seed):
    coarse, fine = make_grid(DENSE_MAX), make_grid(2 * DENSE_MAX)
    fc, ff = trig_poly(coarse, seed, mean=0.7), trig_poly(fine, seed, mean=0.7)
    for op in (lambda g, f: derivative(g, f, 3), hilbert, lambda g, f: lambda_pow(g, f, 1.5)):
        assert np.allclose(op(coarse, fc), op(fine, ff)[::2], atol=1e-9)


@given(seeds, st.sampled_from(SIZES), st.floats(-3, 3))
def test_constants_pass_exactly(seed, n, c):
    g = make_grid(n)
    f = trig_poly(g, seed)
    assert np.allclose(derivative(g, f + c), derivative(g, f), atol=1e-12)
