"""Exact linear theory on a large periodic box.

The linearized curvature obeys ``kappa_tt = -omega(k)^2 kappa`` per mode with
``omega(k)^2 = (inv_We/2)|k|^3 + g|k|``.  Everything here is evaluated from the
modal data in closed form, so there is no time stepping.

Invariant vector fields:

* capillary (``g = 0``): ``Gamma_2 = t/2 d_t + alpha/3 d_alpha`` satisfies
  ``[L, Gamma_2] = L`` for ``L = d_t^2 + c Lambda^3``,
* gravity (``inv_We = 0``): ``Gamma_g = t/2 d_t + alpha d_alpha`` with
  ``L = d_t^2 + g Lambda``.

Both use the centered box coordinate ``alpha``, which breaks periodicity.
Results are meaningful only while the solution stays inside a window around
the origin; ``WindowSpec`` enforces that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralGrid

__all__ = [
    "WindowViolation",
    "WindowSpec",
    "LinearSolution",
    "omega",
    "propagate",
    "window_mass_ratio",
    "gamma2_apply",
    "gamma2_dt",
    "gamma_g_apply",
    "energy_linear",
    "energy_gamma2",
    "energy_gamma2_initial",
    "energy_gamma_g",
    "invariance_residual",
    "gain_operator",
    "weighted_gain_norm",
    "unweighted_gain_norm",
    "smoothing_commutator",
]

WINDOW_MASS_TOL = 1e-10


class WindowViolation(RuntimeError):
    """The solution has spread past the localization window."""

    reason = "window-violation"

    def __init__(self, message: str, value: float):
        super().__init__(message)
        self.value = value


@dataclass(frozen=True)
class WindowSpec:
    """Region ``|alpha| <= support_radius`` with a smooth taper of width ``taper_width``."""

    support_radius: float
    taper_width: float

    def __post_init__(self):
        if self.support_radius <= 0 or self.taper_width <= 0:
            raise ValueError("window radius and taper must be positive")

    def check(self, grid: SpectralGrid):
        if self.support_radius + self.taper_width >= grid.period / 2:
            raise ValueError("window does not fit inside the box")

    def mask(self, grid: SpectralGrid) -> np.ndarray:
        """1 inside the support, 0 beyond the taper, smooth (C-infinity) in between."""
        self.check(grid)
        r = (np.abs(grid.nodes) - self.support_radius) / self.taper_width
        out = np.ones(grid.n_points)
        mid = (r > 0) & (r < 1)
        x = r[mid]
        a = np.exp(-1.0 / x)
        b = np.exp(-1.0 / (1.0 - x))
        out[mid] = b / (a + b)
        out[r >= 1] = 0.0
        return out


def omega(k, inv_We: float = 2.0, g: float = 0.0):
    """Linear frequency ``sqrt(inv_We |k|^3 / 2 + g |k|)``."""
    ak = np.abs(np.asarray(k, dtype=float))
    w = np.sqrt(0.5 * inv_We * ak**3 + g * ak)
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True, eq=False)
class LinearSolution:
    """Modal data of ``kappa(., 0)`` and ``kappa_t(., 0)`` (``numpy.fft`` order, unnormalized)."""

    grid: SpectralGrid
    kappa0_hat: np.ndarray
    kappa1_hat: np.ndarray
    inv_We: float = 2.0
    g: float = 0.0
    window: WindowSpec | None = None

    def __post_init__(self):
        n = self.grid.n_points
        for name in ("kappa0_hat", "kappa1_hat"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != (n,) or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be {n} finite modal coefficients")
            mirrored = np.conj(np.roll(arr[::-1], 1))
            if np.max(np.abs(arr - mirrored), initial=0.0) > 1e-9 * max(1.0, np.max(np.abs(arr))):
                raise ValueError(f"{name} is not Hermitian (kappa must be real)")
            object.__setattr__(self, name, arr)
        if self.inv_We < 0 or self.g < 0 or (self.inv_We == 0 and self.g == 0):
            raise ValueError("need inv_We >= 0, g >= 0, not both zero")
        if self.window is not None:
            self.window.check(self.grid)

    @classmethod
    def from_fields(cls, grid, kappa0, kappa1=None, inv_We=2.0, g=0.0, window=None):
        kappa0 = np.asarray(kappa0, dtype=float)
        kappa1 = np.zeros_like(kappa0) if kappa1 is None else np.asarray(kappa1, dtype=float)
        return cls(grid, np.fft.fft(kappa0), np.fft.fft(kappa1), inv_We, g, window)

    @property
    def frequencies(self) -> np.ndarray:
        return omega(self.grid.wavenumbers, self.inv_We, self.g)

    def modes(self, t: float, order: int = 1):
        """Modal ``d_t^j kappa`` at time ``t`` for ``j = 0..order``."""
        w = self.frequencies
        c, s = np.cos(w * t), np.sin(w * t)
        sinc = t * np.sinc(w * t / np.pi)  # sin(wt)/w, equal to t at w = 0
        out = [c * self.kappa0_hat + sinc * self.kappa1_hat]
        if order >= 1:
            out.append(-w * s * self.kappa0_hat + c * self.kappa1_hat)
        for _ in range(2, order + 1):
            out.append(-(w**2) * out[-2])
        return out


def _real(fh):
    return np.fft.ifft(fh).real


def _mult(grid, fh, symbol):
    return _real(symbol * fh)


def _lam(grid, s):
    k = np.abs(grid.wavenumbers)
    out = np.zeros_like(k)
    out[k > 0] = k[k > 0] ** s
    return out


def _norm2(grid, f) -> float:
    return float(np.sum(f * f) * grid.spacing)


def propagate(sol: LinearSolution, t: float):
    """Exact ``(kappa, kappa_t)`` at time ``t``."""
    kh, kth = sol.modes(t)
    return _real(kh), _real(kth)


def window_mass_ratio(sol: LinearSolution, t: float) -> float:
    """Largest fraction of ``int kappa^2`` or ``int kappa_t^2`` outside the window."""
    if sol.window is None:
        raise ValueError("solution has no window")
    chi = sol.window.mask(sol.grid)
    worst = 0.0
    for f in propagate(sol, t):
        tot = np.sum(f * f)
        if tot > 0:
            worst = max(worst, float(np.sum((1 - chi) * f * f) / tot))
    return worst


def _require_window(sol: LinearSolution, t: float):
    if sol.window is None:
        return
    ratio = window_mass_ratio(sol, t)
    if ratio > WINDOW_MASS_TOL:
        raise WindowViolation(f"mass fraction {ratio:.3e} outside window at t={t}", value=ratio)


def _vector_field(sol: LinearSolution, t: float, spatial: float, check: bool):
    """``(G kappa, d_t G kappa)`` for ``G = t/2 d_t + spatial * alpha d_alpha``."""
    if check:
        _require_window(sol, t)
    grid = sol.grid
    alpha, ik = grid.nodes, 1j * grid.wavenumbers
    kh, kth, ktth = sol.modes(t, order=2)
    kappa_t, kappa_tt = _real(kth), _real(ktth)
    gk = 0.5 * t * kappa_t + spatial * alpha * _real(ik * kh)
    # [d_t, G] = d_t / 2
    gk_t = 0.5 * kappa_t + 0.5 * t * kappa_tt + spatial * alpha * _real(ik * kth)
    return gk, gk_t


def gamma2_apply(sol: LinearSolution, t: float, check_window: bool = True) -> np.ndarray:
    """``(t/2 d_t + alpha/3 d_alpha) kappa`` at time ``t``."""
    return _vector_field(sol, t, 1.0 / 3.0, check_window)[0]


def gamma2_dt(sol: LinearSolution, t: float, check_window: bool = True) -> np.ndarray:
    return _vector_field(sol, t, 1.0 / 3.0, check_window)[1]


def gamma_g_apply(sol: LinearSolution, t: float, check_window: bool = True) -> np.ndarray:
    """``(t/2 d_t + alpha d_alpha) kappa`` at time ``t``."""
    return _vector_field(sol, t, 1.0, check_window)[0]


def _energy(sol, f, f_t) -> float:
    grid = sol.grid
    fh = np.fft.fft(f)
    k = grid.wavenumbers
    pot = 0.0
    if sol.inv_We:
        pot += 0.5 * sol.inv_We * _norm2(grid, _mult(grid, fh, _lam(grid, 0.5) * 1j * k))
    if sol.g:
        pot += sol.g * _norm2(grid, _mult(grid, fh, _lam(grid, 0.5)))
    return pot + _norm2(grid, f_t)


def energy_linear(sol: LinearSolution, t: float) -> float:
    """``c ||Lambda^{1/2} kappa_a||^2 + g ||Lambda^{1/2} kappa||^2 + ||kappa_t||^2``, ``c = inv_We/2``.

    Computed directly in modal form (Parseval), so it is conserved to roundoff.
    """
    grid = sol.grid
    kh, kth = sol.modes(t)
    ak = np.abs(grid.wavenumbers)
    weight = 0.5 * sol.inv_We * ak**3 + sol.g * ak
    scale = grid.period / grid.n_points**2
    return float(scale * np.sum(weight * np.abs(kh) ** 2 + np.abs(kth) ** 2))


def energy_gamma2(sol: LinearSolution, t: float, check_window: bool = True) -> float:
    """Linear energy of ``Gamma_2 kappa``: ``c ||Lambda^{1/2} d_a G||^2 + ||d_t G||^2``."""
    if sol.g:
        raise ValueError("Gamma_2 is an invariance of the capillary equation only (g = 0)")
    gk, gk_t = _vector_field(sol, t, 1.0 / 3.0, check_window)
    return _energy(sol, gk, gk_t)


def energy_gamma2_initial(sol: LinearSolution) -> float:
    """Value of ``energy_gamma2`` at ``t = 0`` from the data alone.

    Uses ``Lambda^{1/2}(alpha f_a) = alpha Lambda^{1/2} f_a + 1/2 Lambda^{1/2} f``
    to move the weight outside the multiplier:
    ``c ||alpha/3 Lambda^{1/2} k_aa + 1/2 Lambda^{1/2} k_a||^2 + ||k1/2 + alpha/3 k1_a||^2``.
    """
    grid = sol.grid
    alpha, ik = grid.nodes, 1j * grid.wavenumbers
    half = _lam(grid, 0.5)
    k0, k1 = sol.kappa0_hat, sol.kappa1_hat
    pot = alpha / 3 * _real(half * ik**2 * k0) + 0.5 * _real(half * ik * k0)
    kin = 0.5 * _real(k1) + alpha / 3 * _real(ik * k1)
    return 0.5 * sol.inv_We * _norm2(grid, pot) + _norm2(grid, kin)


def energy_gamma_g(sol: LinearSolution, t: float, check_window: bool = True) -> float:
    """Linear energy of ``Gamma_g kappa``: ``g ||Lambda^{1/2} G||^2 + ||d_t G||^2``."""
    if sol.inv_We:
        raise ValueError("Gamma_g is an invariance of the gravity equation only (inv_We = 0)")
    gk, gk_t = _vector_field(sol, t, 1.0, check_window)
    return _energy(sol, gk, gk_t)


def invariance_residual(sol: LinearSolution, t: float) -> np.ndarray:
    """``(d_t^2 + c Lambda^3) Gamma_2 kappa`` with modal-exact time derivatives.

    Vanishes for exact capillary solutions.
    """
    grid = sol.grid
    alpha, ik = grid.nodes, 1j * grid.wavenumbers
    kh, kth, ktth, kttth = sol.modes(t, order=3)
    g2 = 0.5 * t * _real(kth) + alpha / 3 * _real(ik * kh)
    # d_t^2 (t/2 kappa_t) = kappa_tt + t/2 kappa_ttt
    g2_tt = _real(ktth) + 0.5 * t * _real(kttth) + alpha / 3 * _real(ik * ktth)
    return g2_tt + 0.5 * sol.inv_We * _mult(grid, np.fft.fft(g2), _lam(grid, 3.0))


def gain_operator(grid: SpectralGrid, k: int) -> np.ndarray:
    """Symbol of ``Lambda^{k/2 + 1/2} d_a^{k+3}``."""
    wn = grid.wavenumbers
    sym = _lam(grid, 0.5 * k + 0.5) * (1j * wn) ** (k + 3)
    if (k + 3) % 2:
        sym[grid.nyquist] = 0.0
    return sym


def unweighted_gain_norm(sol: LinearSolution, t: float, k: int) -> float:
    """``||Lambda^{k/2+1/2} d^{k+3} kappa(t)||`` with no weight and no ``t^k``."""
    kh = sol.modes(t, order=0)[0]
    return float(np.sqrt(_norm2(sol.grid, _real(gain_operator(sol.grid, k) * kh))))


def weighted_gain_norm(sol: LinearSolution, t: float, k: int, check_window: bool = True) -> float:
    """``t^k ||<alpha>^{-k} Lambda^{k/2+1/2} d^{k+3} kappa(t)||``, ``<alpha> = sqrt(1 + alpha^2)``."""
    if k < 1 or int(k) != k:
        raise ValueError("k must be a positive integer")
    if t == 0:
        return 0.0
    if check_window:
        _require_window(sol, t)
    grid = sol.grid
    kh = sol.modes(t, order=0)[0]
    f = _real(gain_operator(grid, k) * kh) * (1 + grid.nodes**2) ** (-0.5 * k)
    return float(abs(t) ** k * np.sqrt(_norm2(grid, f)))


def smoothing_commutator(sol: LinearSolution, t: float, K: int, rho: float, check_window: bool = True) -> float:
    """``int <alpha>^{1-2 rho} (d^K k H d^K k_t - d^K k_t H d^K k) dalpha``."""
    if rho <= 0.5:
        raise ValueError("rho must exceed 1/2")
    if check_window:
        _require_window(sol, t)
    grid = sol.grid
    wn = grid.wavenumbers
    kh, kth = sol.modes(t)
    dk = (1j * wn) ** K
    hil = -1j * np.sign(wn)
    if K % 2:
        dk = dk * grid._odd_multiplier_mask
    hil = hil * grid._odd_multiplier_mask
    a, at = _real(dk * kh), _real(dk * kth)
    ha, hat = _real(hil * dk * kh), _real(hil * dk * kth)
    w = (1 + grid.nodes**2) ** (0.5 - rho)
    return float(np.sum(w * (a * hat - at * ha)) * grid.spacing)
