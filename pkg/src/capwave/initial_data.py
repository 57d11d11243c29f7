"""Named initial-data generators.

Nonlinear generators return ``(theta, gamma)`` samples; the caller closes the
curve with ``dynamics.make_state``.  Linear generators return curvature
fields.  Every random generator takes an explicit seed.
"""

from __future__ import annotations

import numpy as np

from .linear import omega
from .spectral import SpectralGrid, derivative

__all__ = [
    "flat_gamma",
    "single_mode",
    "traveling_mode",
    "multi_mode",
    "near_contact",
    "gaussian_packet",
    "gaussian_packet_modes",
    "rough_tail",
    "rough_tail_modes",
    "random_bandlimited",
]


def _wavenumber(grid: SpectralGrid, mode: int) -> float:
    return 2 * np.pi * mode / grid.period


def flat_gamma(grid: SpectralGrid, gamma0: float = 0.0):
    return np.zeros(grid.n_points), np.full(grid.n_points, float(gamma0))


def single_mode(grid: SpectralGrid, mode: int, amplitude: float, gamma0: float = 0.0):
    """Standing wave ``theta = eps cos(k alpha)`` at rest (``gamma`` constant)."""
    k = _wavenumber(grid, mode)
    return amplitude * np.cos(k * grid.nodes), np.full(grid.n_points, float(gamma0))


def traveling_mode(grid: SpectralGrid, mode: int, amplitude: float, inv_We: float = 2.0, g: float = 0.0):
    """Linear traveling wave: ``theta = eps cos(k alpha)``, ``gamma = (2 omega / k) eps sin(k alpha)``."""
    k = _wavenumber(grid, mode)
    w = omega(k, inv_We, g)
    a = grid.nodes
    return amplitude * np.cos(k * a), 2 * w / k * amplitude * np.sin(k * a)


def multi_mode(grid: SpectralGrid, amplitude: float, modes=(1, 2, 3), seed: int = 0):
    """Sum of a few modes with seeded phases and ``1/m`` amplitudes, in both fields."""
    rng = np.random.default_rng(seed)
    a = grid.nodes
    theta = np.zeros(grid.n_points)
    gamma = np.zeros(grid.n_points)
    for m in modes:
        k = _wavenumber(grid, m)
        p1, p2 = rng.uniform(0, 2 * np.pi, 2)
        theta += amplitude / m * np.cos(k * a + p1)
        gamma += amplitude / m * np.cos(k * a + p2)
    return theta, gamma


def near_contact(grid: SpectralGrid, amplitude: float = 1.8):
    """Steep profile ``theta = A sin(2 pi alpha / period)``.

    Its flanks approach each other as ``A`` grows: on the unit box the
    chord-arc ratio is about 0.51 at ``A = 1.5``, 0.34 at 1.8 and 0.18 at 2.
    """
    return amplitude * np.sin(2 * np.pi * grid.nodes / grid.period), np.zeros(grid.n_points)


def _to_fft_order(grid: SpectralGrid, coeffs):
    """Map Fourier-series coefficients ``c_k`` (``f = sum c_k e^{i k alpha}``) to ``numpy.fft`` output.

    Nodes start at ``-period/2``, which contributes the sign ``(-1)^m``.
    """
    m = np.fft.fftfreq(grid.n_points, d=1.0 / grid.n_points)
    return grid.n_points * np.asarray(coeffs) * np.where(m % 2, -1.0, 1.0)


def gaussian_packet_modes(
    grid: SpectralGrid, amplitude: float = 1.0, width: float = 1.0, carrier: float = 0.0, center: float = 0.0, order: int = 1
) -> np.ndarray:
    """``numpy.fft`` coefficients of ``d^order/dalpha^order`` of the tangent angle
    ``A exp(-(a - a0)^2 / (2 w^2)) cos(k0 (a - a0))``.

    Built from the analytic Fourier transform, so high modes carry no
    sampling roundoff (which high-order multipliers would otherwise amplify).
    """
    k = grid.wavenumbers
    ft = 0.5 * amplitude * width * np.sqrt(2 * np.pi) * (
        np.exp(-0.5 * ((k - carrier) * width) ** 2) + np.exp(-0.5 * ((k + carrier) * width) ** 2)
    )
    c = ft / grid.period * np.exp(-1j * k * center) * (1j * k) ** order
    if order % 2:
        c[grid.nyquist] = 0.0
    return _to_fft_order(grid, c)


def gaussian_packet(grid: SpectralGrid, amplitude: float = 1.0, width: float = 1.0, carrier: float = 0.0, center: float = 0.0):
    """Tangent angle ``A exp(-(a - a0)^2 / (2 w^2)) cos(k0 (a - a0))`` and its curvature.

    Returns ``(theta, kappa)``; ``kappa = theta_alpha`` has zero mean.
    """
    th = np.fft.ifft(gaussian_packet_modes(grid, amplitude, width, carrier, center, order=0)).real
    ka = np.fft.ifft(gaussian_packet_modes(grid, amplitude, width, carrier, center, order=1)).real
    return th, ka


def rough_tail_modes(
    grid: SpectralGrid,
    s: float,
    seed: int,
    tail_amplitude: float = 1.0,
    k_min: float = 1.0,
    envelope_width: float = 2.0,
    master_modes: int = 1 << 16,
) -> np.ndarray:
    """``numpy.fft`` coefficients of a seeded field with Fourier tail ``|k|^{-s-1/2}``.

    The field lies in ``H^{s'}`` for every ``s' < s`` and no better.  Random
    phases come from a master sequence indexed by mode number, so a finer
    grid on the same box sees the same coefficients plus new ones.  The
    carrier series is localized by a Gaussian envelope of the given width,
    applied as a convolution in Fourier space (the envelope's spectrum is
    narrow, so the power-law tail survives).  The mean is removed by
    subtracting a multiple of the envelope.
    """
    n = grid.n_points
    if n // 2 > master_modes:
        raise ValueError("grid finer than the master sequence")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0, 2 * np.pi, master_modes)
    dk = 2 * np.pi / grid.period
    m = np.arange(1, n // 2)
    k = dk * m
    amp = np.where(k >= k_min, k ** (-s - 0.5), 0.0)
    # centered coefficient array for modes -n/2 .. n/2 - 1
    cen = np.zeros(n, dtype=complex)
    cen[n // 2 + m] = amp * np.exp(1j * phases[m - 1])
    cen[n // 2 - m] = np.conj(cen[n // 2 + m])
    # Fourier coefficients of the envelope exp(-a^2 / (2 w^2)) on the box
    half = int(np.ceil(12.0 / (envelope_width * dk)))
    j = np.arange(-half, half + 1)
    env = envelope_width * np.sqrt(2 * np.pi) / grid.period * np.exp(-0.5 * (j * dk * envelope_width) ** 2)
    conv = np.convolve(cen, env, mode="same") * tail_amplitude
    # subtract a multiple of the envelope itself so the mean vanishes and the field stays localized
    conv[n // 2 - half : n // 2 + half + 1] -= conv[n // 2] / env[half] * env
    conv[0] = 0.0  # Nyquist has no Hermitian partner
    return _to_fft_order(grid, np.fft.ifftshift(conv))


def rough_tail(grid: SpectralGrid, s: float, seed: int, **kwargs) -> np.ndarray:
    """Physical samples of ``rough_tail_modes``."""
    return np.fft.ifft(rough_tail_modes(grid, s, seed, **kwargs)).real


def random_bandlimited(grid: SpectralGrid, max_mode: int, seed: int, decay: float = 0.0) -> np.ndarray:
    """Real field with modes ``1..max_mode``, Gaussian coefficients scaled by ``m^{-decay}``."""
    rng = np.random.default_rng(seed)
    m = np.arange(1, max_mode + 1)
    coef = (rng.standard_normal(max_mode) + 1j * rng.standard_normal(max_mode)) * m ** (-float(decay))
    fh = np.zeros(grid.n_points, dtype=complex)
    fh[m] = coef
    fh[-m] = np.conj(coef)
    return np.fft.ifft(fh).real * grid.n_points / 2
