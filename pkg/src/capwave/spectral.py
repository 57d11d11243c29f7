"""Periodic pseudospectral toolbox on a uniform grid.

The real line is modelled by a periodic box of length ``period``.  Every
operator here is a Fourier multiplier applied with ``numpy.fft``; the mean
(k = 0) mode of the Hilbert transform and of fractional powers of
``Lambda = |d/dalpha|`` is mapped to zero, and the Nyquist mode is dropped by
odd-order derivatives and by the Hilbert transform so real input gives real
output.

Norm convention: ``||f||_{L^2}^2 = int |f|^2 dalpha`` over one period, so
norms stay comparable when the grid is refined.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

__all__ = [
    "DomainError",
    "SpectralGrid",
    "make_grid",
    "fft",
    "ifft",
    "derivative",
    "hilbert",
    "lambda_pow",
    "antiderivative",
    "filter_field",
    "sobolev_norm",
    "l2_norm",
    "integrate",
    "mean",
]


class DomainError(ValueError):
    """Input lies outside the domain of a spectral operator."""


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic sampling of the parameter with its wavenumber ladder.

    Nodes are ``-period/2 + j*spacing`` for ``j = 0..n-1``.  Wavenumbers are
    stored in FFT order, ``2*pi*m/period`` for ``m = 0..n/2-1, -n/2..-1``.
    """

    n_points: int
    period: float

    def __post_init__(self):
        n = self.n_points
        if int(n) != n or n < 8 or n % 2:
            raise ValueError(f"n_points must be an even integer >= 8, got {n}")
        if not (self.period > 0 and np.isfinite(self.period)):
            raise ValueError(f"period must be positive, got {self.period}")

    @property
    def spacing(self) -> float:
        return self.period / self.n_points

    @property
    def length_scale(self) -> float:
        """``period / 2pi``: the box is ``2pi * length_scale`` long."""
        return self.period / (2 * np.pi)

    @cached_property
    def nodes(self) -> np.ndarray:
        return -0.5 * self.period + self.spacing * np.arange(self.n_points)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)

    @cached_property
    def k_max(self) -> float:
        return np.pi * self.n_points / self.period

    @cached_property
    def nyquist(self) -> np.ndarray:
        mask = np.zeros(self.n_points, dtype=bool)
        mask[self.n_points // 2] = True
        return mask

    @cached_property
    def _odd_multiplier_mask(self) -> np.ndarray:
        return np.where(self.nyquist, 0.0, 1.0)

    def zeros(self, dtype=float) -> np.ndarray:
        return np.zeros(self.n_points, dtype=dtype)


def make_grid(n: int, period: float = 2 * np.pi) -> SpectralGrid:
    """Grid with ``n`` nodes (even, at least 8) on a box of length ``period``."""
    return SpectralGrid(n, float(period))


def _check(grid: SpectralGrid, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f)
    if f.shape != (grid.n_points,):
        raise ValueError(f"field has shape {f.shape}, grid expects ({grid.n_points},)")
    # a sum is finite iff every entry is (barring overflow of huge values)
    if not np.isfinite(f.sum()):
        raise ValueError("field contains NaN or Inf")
    return f


def fft(f):
    return np.fft.fft(f)


def ifft(fh, real: bool):
    out = np.fft.ifft(fh)
    return out.real if real else out


# Below this size a cached dense operator matrix beats the FFT call overhead.
DENSE_MAX = 128


@lru_cache(maxsize=64)
def _symbol(grid: SpectralGrid, key: tuple) -> np.ndarray:
    """Multiplier for ``("d", m)`` (derivative), ``("H",)`` (Hilbert), ``("A",)``
    (antiderivative) or ``("L", s)`` (Lambda power)."""
    k = grid.wavenumbers
    if key[0] == "d":
        m = key[1]
        symbol = (1j * k) ** m
        if m % 2:
            symbol = symbol * grid._odd_multiplier_mask
    elif key[0] == "H":
        symbol = -1j * np.sign(k) * grid._odd_multiplier_mask
    elif key[0] == "A":
        symbol = np.zeros(grid.n_points, dtype=complex)
        nz = k != 0
        symbol[nz] = 1.0 / (1j * k[nz])
        symbol *= grid._odd_multiplier_mask
    elif key[0] == "L":
        ak = np.abs(k)
        symbol = np.zeros(grid.n_points, dtype=complex)
        symbol[ak > 0] = ak[ak > 0] ** key[1]
    else:
        raise KeyError(key)
    symbol = np.asarray(symbol, dtype=complex)
    symbol.setflags(write=False)
    return symbol


@lru_cache(maxsize=64)
def _dense_operator(grid: SpectralGrid, key: tuple) -> np.ndarray:
    """Real matrix of the multiplier; valid because every symbol here has ``s(-k) = conj(s(k))``."""
    n = grid.n_points
    symbol = _symbol(grid, key)
    mat = np.fft.irfft(symbol[: n // 2 + 1, None] * np.fft.rfft(np.eye(n), axis=0), n, axis=0)
    mat.setflags(write=False)
    return mat


def _apply(grid: SpectralGrid, f, key: tuple) -> np.ndarray:
    f = np.asarray(f)
    n = grid.n_points
    if f.shape != (n,):
        raise ValueError(f"field has shape {f.shape}, grid expects ({n},)")
    total = f.sum()
    if not np.isfinite(total):
        raise ValueError("field contains NaN or Inf")
    real = f.dtype.kind != "c"
    if n <= DENSE_MAX:
        mat = _dense_operator(grid, key)
        # every symbol vanishes at k = 0; removing the mean first keeps constants exact
        f = f - total / n
        if real:
            return mat @ f
        f = np.ascontiguousarray(f, dtype=np.complex128)
        # interleaved (re, im) pairs as an (n, 2) real array: one real matmul
        return (mat @ f.view(np.float64).reshape(n, 2)).view(np.complex128).ravel()
    symbol = _symbol(grid, key)
    if real:
        return np.fft.irfft(symbol[: n // 2 + 1] * np.fft.rfft(f), n)
    return np.fft.ifft(symbol * np.fft.fft(f))


def derivative(grid: SpectralGrid, f, m: int = 1) -> np.ndarray:
    """``m``-th derivative by Fourier differentiation."""
    if m < 0 or int(m) != m:
        raise ValueError(f"derivative order must be a non-negative integer, got {m}")
    if m == 0:
        return np.array(_check(grid, f), copy=True)
    return _apply(grid, f, ("d", int(m)))


def hilbert(grid: SpectralGrid, f) -> np.ndarray:
    """Periodic Hilbert transform, multiplier ``-i sgn(k)``."""
    return _apply(grid, f, ("H",))


def mean(grid: SpectralGrid, f):
    return np.mean(_check(grid, f))


def lambda_pow(grid: SpectralGrid, f, s: float) -> np.ndarray:
    """Fractional power ``Lambda**s`` with multiplier ``|k|**s``.

    Negative powers need a zero-mean input; the mean mode always maps to 0.
    """
    f = _check(grid, f)
    if s < 0 and abs(np.mean(f)) > 1e-13:
        raise DomainError("negative power of Lambda applied to a field with nonzero mean")
    return _apply(grid, f, ("L", float(s)))


def antiderivative(grid: SpectralGrid, f) -> np.ndarray:
    """Zero-mean antiderivative of a zero-mean periodic field."""
    f = _check(grid, f)
    if abs(np.mean(f)) > 1e-12 * np.max(np.abs(f)):
        raise DomainError("antiderivative of a field with nonzero mean is not periodic")
    return _apply(grid, f, ("A",))


def filter_field(grid: SpectralGrid, f, cutoff_fraction: float = 2 / 3, floor: float = 0.0) -> np.ndarray:
    """Sharp spectral cutoff plus Krasny floor.

    Modes with ``|k| > cutoff_fraction * k_max`` are removed, then modes whose
    magnitude is below ``floor`` times the largest mode magnitude.
    """
    if not 0 < cutoff_fraction <= 1:
        raise ValueError("cutoff_fraction must lie in (0, 1]")
    if floor < 0:
        raise ValueError("floor must be non-negative")
    f = _check(grid, f)
    if cutoff_fraction == 1 and floor == 0:
        return np.array(f, copy=True)
    fh = np.fft.fft(f)
    fh[np.abs(grid.wavenumbers) > cutoff_fraction * grid.k_max * (1 + 1e-12)] = 0.0
    if floor > 0:
        mag = np.abs(fh)
        fh[mag < floor * mag.max()] = 0.0
    return ifft(fh, real=np.isrealobj(f))


def integrate(grid: SpectralGrid, f):
    """Trapezoid rule over one period (spectrally accurate for smooth fields)."""
    return np.sum(_check(grid, f)) * grid.spacing


def sobolev_norm(grid: SpectralGrid, f, s: float = 0.0) -> float:
    """``(sum_k (1 + k^2)^s |f_k|^2 * period)^(1/2)`` with ``f_k`` the Fourier
    coefficients normalised so that ``f = sum_k f_k exp(i k alpha)``."""
    if s < 0:
        raise ValueError("Sobolev order must be non-negative")
    f = _check(grid, f)
    ck = np.fft.fft(f) / grid.n_points
    weight = (1.0 + grid.wavenumbers**2) ** s
    return float(np.sqrt(np.sum(weight * np.abs(ck) ** 2) * grid.period))


def l2_norm(grid: SpectralGrid, f) -> float:
    return sobolev_norm(grid, f, 0.0)
