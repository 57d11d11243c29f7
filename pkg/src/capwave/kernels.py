"""Kernel operators along a periodic curve.

Periodic kernels replace the line kernels: ``1/(alpha - beta)`` becomes
``K(alpha - beta)`` and ``1/(z(alpha) - z(beta))`` becomes
``K(z(alpha) - z(beta))`` with ``K(w) = (pi/P) cot(pi w / P)``, the sum of
``1/(w + m P)`` over all images.  Removable singularities on the diagonal
are filled with their analytic limits so the trapezoid rule stays
spectrally accurate.

Conventions: ``W`` is the complex velocity ``u + i v``; the Birkhoff-Rott
integral gives its conjugate ``conj(W) = (1/2 pi i) PV int gamma / (z - z')``.
The vortex-sheet strength ``gamma`` is a density per unit parameter.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .spectral import SpectralGrid, derivative, hilbert

__all__ = [
    "SingularKernelError",
    "KernelMatrix",
    "periodic_cot",
    "divided_difference",
    "remainder_kernel",
    "chord_arc_ratio",
    "CurveOperators",
    "apply_W",
    "birkhoff_rott",
    "pv_oracle",
    "commutator_hilbert",
    "apply_B",
    "apply_J",
    "m_field",
]


class SingularKernelError(ValueError):
    """The curve has (nearly) coincident points or a degenerate tangent."""


@dataclass(frozen=True)
class KernelMatrix:
    grid: SpectralGrid
    entries: np.ndarray
    diagonal_rule: str = "limit-value"

    def __post_init__(self):
        if self.diagonal_rule not in ("limit-value", "zero", "excluded"):
            raise ValueError(f"unknown diagonal rule {self.diagonal_rule!r}")
        n = self.grid.n_points
        if self.entries.shape != (n, n):
            raise ValueError("kernel shape does not match grid")

    def quadrature(self, f) -> np.ndarray:
        """Trapezoid rule ``h * sum_j K_ij f_j``."""
        return self.grid.spacing * (self.entries @ f)


def periodic_cot(grid: SpectralGrid, w):
    """``K(w) = (pi/P) cot(pi w/P)``; the diagonal of ``w`` must be handled by the caller."""
    c = np.pi / grid.period
    with np.errstate(divide="ignore", invalid="ignore"):
        return c / np.tan(c * w)


def _pairwise(v):
    return v[:, None] - v[None, :]


@lru_cache(maxsize=8)
def _node_tables(n: int, period: float):
    """``sin``/``cos`` of ``pi (alpha_i - alpha_j) / P`` and the parameter kernel."""
    grid = SpectralGrid(n, period)
    c = np.pi / period
    d = c * _pairwise(grid.nodes)
    s, co = np.sin(d), np.cos(d)
    safe = s.copy()
    np.fill_diagonal(safe, 1.0)
    k = c * co / safe
    np.fill_diagonal(k, 0.0)
    for arr in (s, co, k):
        arr.setflags(write=False)
    return s, co, k


def _param_kernel(grid: SpectralGrid) -> np.ndarray:
    return _node_tables(grid.n_points, grid.period)[2]


def _curve_tables(grid: SpectralGrid, z):
    """``sin`` and ``cos`` of ``pi (z_i - z_j) / P``.

    Built from the exact node tables and the small periodic displacement
    ``z - alpha`` with angle-addition formulas, which avoids O(N^2) complex
    transcendental calls and is exact on the flat curve.
    """
    sa, ca, _ = _node_tables(grid.n_points, grid.period)
    c = np.pi / grid.period
    zeta = c * (np.asarray(z, dtype=complex) - grid.nodes)
    if not np.any(zeta):
        return sa, ca
    s, k = np.sin(zeta), np.cos(zeta)
    sin_d = np.outer(s, k) - np.outer(k, s)
    cos_d = np.outer(k, k) + np.outer(s, s)
    return sa * cos_d + ca * sin_d, ca * cos_d - sa * sin_d


def _chord_ratio_from(grid: SpectralGrid, sin_z, sigma: float) -> float:
    sa = _node_tables(grid.n_points, grid.period)[0]
    num = np.abs(sin_z)
    den = sigma * np.abs(sa)
    np.fill_diagonal(num, np.inf)
    np.fill_diagonal(den, 1.0)
    return float((num / den).min())


def divided_difference(grid: SpectralGrid, a) -> KernelMatrix:
    """Periodic divided difference ``(a(alpha) - a(beta)) K(alpha - beta)``.

    The diagonal carries the limit ``a'(alpha)``.
    """
    a = np.asarray(a)
    q = _pairwise(a) * _param_kernel(grid)
    np.fill_diagonal(q, derivative(grid, a, 1))
    return KernelMatrix(grid, q)


def chord_arc_ratio(grid: SpectralGrid, z, sigma: float = 1.0) -> float:
    """Smallest ratio of periodic chord lengths ``|sin(pi dz/P)| / (sigma |sin(pi dalpha/P)|)``.

    Equal to one on the flat curve ``z = alpha``; near zero when two distant
    points of the curve nearly touch.
    """
    sin_z, _ = _curve_tables(grid, z)
    return _chord_ratio_from(grid, sin_z, sigma)


def _z_cot(grid: SpectralGrid, sin_z, cos_z) -> np.ndarray:
    safe = sin_z.copy()
    np.fill_diagonal(safe, 1.0)
    k = (np.pi / grid.period) * cos_z / safe
    np.fill_diagonal(k, 0.0)
    return k


def remainder_kernel(grid: SpectralGrid, z, z_alpha=None, z_alpha2=None, tables=None, z_cot=None) -> KernelMatrix:
    """Smooth kernel ``K(z(a) - z(b)) - K(a - b) / z_b(b)`` with diagonal ``-z_aa/(2 z_a^2)``."""
    z = np.asarray(z, dtype=complex)
    if z_alpha is None:
        z_alpha = _curve_derivative(grid, z, 1)
    if z_alpha2 is None:
        z_alpha2 = derivative(grid, z_alpha, 1)
    if np.min(np.abs(z_alpha)) < 1e-12:
        raise SingularKernelError("degenerate tangent: |z_alpha| vanishes")
    sin_z, cos_z = tables if tables is not None else _curve_tables(grid, z)
    ratio = _chord_ratio_from(grid, sin_z, 1.0)
    if not ratio > 1e-10:
        raise SingularKernelError(f"coincident curve points (chord-arc ratio {ratio:.3e})")
    if z_cot is None:
        z_cot = _z_cot(grid, sin_z, cos_z)
    ker = z_cot - _param_kernel(grid) / z_alpha[None, :]
    np.fill_diagonal(ker, -z_alpha2 / (2 * z_alpha**2))
    return KernelMatrix(grid, ker)


def _curve_derivative(grid: SpectralGrid, z, m: int):
    # z(alpha) - alpha is periodic; only that part is differentiated spectrally.
    zp = derivative(grid, z - grid.nodes, m)
    if m == 1:
        zp = zp + 1.0
    return zp


class CurveOperators:
    """Operators attached to one curve ``z``; kernels are built once and reused.

    ``z`` must satisfy ``z(alpha + P) = z(alpha) + P`` (closed up to one period).
    """

    def __init__(self, grid: SpectralGrid, z, z_alpha=None):
        self.grid = grid
        self.z = np.asarray(z, dtype=complex)
        self.z_alpha = _curve_derivative(grid, self.z, 1) if z_alpha is None else np.asarray(z_alpha, dtype=complex)
        self.z_alpha2 = derivative(grid, self.z_alpha, 1)

    @cached_property
    def _tables(self):
        return _curve_tables(self.grid, self.z)

    @cached_property
    def w_kernel(self) -> KernelMatrix:
        return remainder_kernel(self.grid, self.z, self.z_alpha, self.z_alpha2, tables=self._tables, z_cot=self._z_cot)

    @cached_property
    def _z_cot(self) -> np.ndarray:
        return _z_cot(self.grid, *self._tables)

    def chord_arc(self, sigma: float = 1.0) -> float:
        return _chord_ratio_from(self.grid, self._tables[0], sigma)

    def W(self, f) -> np.ndarray:
        """Smooth remainder operator: ``(1/2 pi i) int kernel(a, b) f(b) db``."""
        return self.w_kernel.quadrature(np.asarray(f, dtype=complex)) / (2j * np.pi)

    def commutator(self, a, g, method: str = "spectral") -> np.ndarray:
        return commutator_hilbert(self.grid, a, g, method=method)

    def birkhoff_rott_conj(self, gamma) -> np.ndarray:
        """``conj(W) = (1/2i) H(gamma / z_a) + W gamma``."""
        gamma = np.asarray(gamma, dtype=float)
        return hilbert(self.grid, gamma / self.z_alpha) / 2j + self.W(gamma)

    def B(self, z_t, f) -> np.ndarray:
        """``(1/2 pi i) int K(z(a) - z(b)) (z_t(a) - z_t(b)) d/db (f / z_b) db``."""
        z_t = np.asarray(z_t, dtype=complex)
        ker = _pairwise(z_t) * self._z_cot
        np.fill_diagonal(ker, derivative(self.grid, z_t, 1) / self.z_alpha)
        g = derivative(self.grid, np.asarray(f, dtype=complex) / self.z_alpha, 1)
        return self.grid.spacing * (ker @ g) / (2j * np.pi)

    def J(self, f) -> np.ndarray:
        """``Re(z_a W f + (z_a / 2i) [H, 1/z_a] f)``: the part of ``W_t . z_a``
        that is linear in ``gamma_t``."""
        f = np.asarray(f, dtype=float)
        za = self.z_alpha
        comm = hilbert(self.grid, f / za) - hilbert(self.grid, f) / za
        return np.real(za * self.W(f) + za / 2j * comm)

    def m_conj(self, gamma) -> np.ndarray:
        gamma = np.asarray(gamma, dtype=float)
        za, zaa = self.z_alpha, self.z_alpha2
        g_a = derivative(self.grid, gamma, 1)
        inner = g_a - gamma * zaa / za
        comm = hilbert(self.grid, inner / za**2) - hilbert(self.grid, inner) / za**2
        return za * self.W(inner / za) + za / 2j * comm


def apply_W(grid: SpectralGrid, z, f) -> np.ndarray:
    return CurveOperators(grid, z).W(f)


def _check_uniform_speed(ops: CurveOperators, sigma: float, tol: float = 1e-8):
    speed = np.abs(ops.z_alpha)
    dev = np.max(np.abs(speed - sigma)) / sigma
    if dev > tol:
        raise ValueError(f"|z_alpha| departs from sigma={sigma} by {dev:.2e} (relative)")


def birkhoff_rott(grid: SpectralGrid, z, gamma, sigma: float = 1.0, ops: CurveOperators | None = None) -> np.ndarray:
    """Complex velocity ``W`` induced on the curve by the sheet ``gamma``."""
    ops = ops or CurveOperators(grid, z)
    _check_uniform_speed(ops, sigma)
    ratio = ops.chord_arc(sigma)
    if not ratio > 1e-10:
        raise SingularKernelError(f"chord-arc condition violated (ratio {ratio:.3e})")
    return np.conj(ops.birkhoff_rott_conj(gamma))


def pv_oracle(grid: SpectralGrid, z, gamma) -> np.ndarray:
    """Reference ``W`` by the alternating-point trapezoid rule on the cot kernel.

    For each target node only source nodes of opposite parity are used, with
    weight ``2h``.  O(N^2); intended for tests.
    """
    z = np.asarray(z, dtype=complex)
    gamma = np.asarray(gamma, dtype=float)
    n = grid.n_points
    idx = np.arange(n)
    odd = (idx[:, None] - idx[None, :]) % 2 == 1
    dz = _pairwise(z)
    dz[~odd] = 1.0
    k = periodic_cot(grid, dz)
    k[~odd] = 0.0
    wbar = 2 * grid.spacing * (k @ gamma) / (2j * np.pi)
    return np.conj(wbar)


def commutator_hilbert(grid: SpectralGrid, a, g, method: str = "spectral") -> np.ndarray:
    """``[H, a] g = H(a g) - a H(g)``.

    ``method="kernel"`` evaluates ``-(1/pi) int Qa(alpha, beta) g(beta) dbeta``
    with the periodic divided difference; with ``g = f_alpha`` this is the
    commutator ``[H, a] d/dalpha`` applied to ``f``.
    """
    if method == "spectral":
        return hilbert(grid, np.asarray(a) * g) - np.asarray(a) * hilbert(grid, g)
    if method == "kernel":
        q = divided_difference(grid, a)
        out = -q.quadrature(g) / np.pi
        if np.isrealobj(a) and np.isrealobj(g):
            out = np.real(out)
        return out
    raise ValueError(f"unknown method {method!r}")


def apply_B(grid: SpectralGrid, z, z_t, f) -> np.ndarray:
    return CurveOperators(grid, z).B(z_t, f)


def apply_J(grid: SpectralGrid, z, f) -> np.ndarray:
    return CurveOperators(grid, z).J(f)


def m_field(grid: SpectralGrid, z, gamma) -> np.ndarray:
    """The smooth vector field ``m`` (returned as ``u + i v``) with
    ``conj(W)_alpha = conj(m) + H(gamma_a - gamma z_aa / z_a) / (2 i z_a)``."""
    return np.conj(CurveOperators(grid, z).m_conj(gamma))
