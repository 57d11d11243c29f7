"""Nonlinear capillary(-gravity) vortex-sheet evolution on a periodic box.

The interface is ``z(alpha, t)`` with ``z_alpha = sigma(t) exp(i theta)``:
the parametrization stays uniform in arclength, and the common density
``sigma`` evolves so that this remains true.  Fluid occupies the region
below the curve.  ``gamma`` is the sheet strength per unit parameter, so the
physical (per arclength) strength is ``gamma / sigma``.

Arclength derivatives are written ``d_s = d_alpha / sigma``.  The gauge
constant ``mu = mean(theta_s U_perp) = -sigma_t / sigma`` is what separates
the periodic frame from the constant-speed frame on the line; every
diagnostic identity below carries it explicitly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .kernels import CurveOperators, SingularKernelError, chord_arc_ratio
from .spectral import (
    SpectralGrid,
    antiderivative,
    derivative,
    filter_field,
    hilbert,
    lambda_pow,
)

__all__ = [
    "Physics",
    "SurfaceState",
    "DerivedFields",
    "StepperConfig",
    "DynamicsError",
    "ClosureError",
    "ChordArcAbort",
    "GammaTNonconvergence",
    "NanAbort",
    "CurvatureAbort",
    "closure_residual",
    "close_curve",
    "make_state",
    "reconstruct_curve",
    "kinematic_fields",
    "theta_rhs",
    "solve_gamma_t",
    "material_fields",
    "pressure_field",
    "remainder_fields",
    "derive_fields",
    "rhs",
    "linear_propagator",
    "step",
    "chord_arc_ratio",
    "residual_kappa_u",
    "second_order_residual",
    "energy_E0k",
    "scaling_transform",
    "validate_state",
]

CLOSURE_TOL = 1e-6
KAPPA_MAX = 0.25


class DynamicsError(RuntimeError):
    """Base class for aborts; ``value`` is the offending diagnostic."""

    reason = "error"

    def __init__(self, message: str, value: float | None = None, state: "SurfaceState | None" = None):
        super().__init__(message)
        self.value = value
        self.state = state


class ClosureError(DynamicsError, ValueError):
    reason = "closure-abort"


class ChordArcAbort(DynamicsError):
    reason = "chord-arc-abort"


class GammaTNonconvergence(DynamicsError):
    reason = "gamma-t-nonconvergence"


class NanAbort(DynamicsError):
    reason = "nan-abort"


class CurvatureAbort(DynamicsError):
    reason = "curvature-abort"


@dataclass(frozen=True)
class Physics:
    inv_We: float = 2.0
    g: float = 0.0

    def __post_init__(self):
        if not self.inv_We > 0:
            raise ValueError("inv_We must be positive")
        if not self.g >= 0:
            raise ValueError("g must be non-negative")


@dataclass(frozen=True, eq=False)
class SurfaceState:
    grid: SpectralGrid
    t: float
    theta: np.ndarray
    gamma: np.ndarray
    sigma: float
    physics: Physics = field(default_factory=Physics)
    # curve and kernel tables, built once per state; arrays are treated as immutable
    _curve: dict = field(init=False, default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = self.grid.n_points
        for name in ("theta", "gamma"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({n},)")
            object.__setattr__(self, name, arr)
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")

    def evolve(self, **changes) -> "SurfaceState":
        return replace(self, **changes)

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.theta)) and np.all(np.isfinite(self.gamma)))


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    cutoff_fraction: float = 2 / 3
    floor: float = 1e-13
    gamma_t_tol: float = 1e-12
    gamma_t_max_iter: int = 200
    Q_min: float = 0.5
    kappa_max: float = KAPPA_MAX

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 < self.cutoff_fraction <= 1:
            raise ValueError("cutoff_fraction must lie in (0, 1]")
        if self.floor < 0:
            raise ValueError("floor must be non-negative")
        if not self.gamma_t_tol >= 1e-14:
            raise ValueError("gamma_t_tol must be at least 1e-14")
        if self.gamma_t_max_iter < 1:
            raise ValueError("gamma_t_max_iter must be positive")
        if not self.Q_min > 0:
            raise ValueError("Q_min must be positive")


@dataclass
class DerivedFields:
    """Everything computed from one state.  Velocities are complex ``u + i v``."""

    z: np.ndarray
    z_alpha: np.ndarray
    W: np.ndarray
    U_perp: np.ndarray
    U_par: np.ndarray
    sigma_t: float
    theta_t: np.ndarray | None = None
    z_t: np.ndarray | None = None
    m: np.ndarray | None = None
    Wa_dot_za: np.ndarray | None = None
    Wa_dot_iza: np.ndarray | None = None
    gamma_rhs: np.ndarray | None = None
    gamma_t: np.ndarray | None = None
    gamma_t_iterations: int = 0
    gamma_t_residual: float = 0.0
    W_t: np.ndarray | None = None
    q: np.ndarray | None = None
    u: np.ndarray | None = None
    kappa: np.ndarray | None = None
    mu: float = 0.0
    nu: float = 0.0
    Dt_theta: np.ndarray | None = None
    phi: np.ndarray | None = None
    p: np.ndarray | None = None
    r_kappa: np.ndarray | None = None
    r_u: np.ndarray | None = None
    r_p: np.ndarray | None = None
    ops: CurveOperators | None = field(default=None, repr=False)


# ----------------------------------------------------------------- geometry

def closure_residual(grid: SpectralGrid, theta, sigma: float) -> float:
    """``|int sigma exp(i theta) dalpha - period| / period``."""
    return float(abs(sigma * np.mean(np.exp(1j * np.asarray(theta))) - 1.0))


def close_curve(theta) -> tuple[np.ndarray, float]:
    """Rotate ``theta`` by a constant and pick ``sigma`` so the curve closes.

    Returns ``(theta - c, sigma)`` with ``mean(sin) = 0`` and
    ``sigma * mean(cos) = 1``.
    """
    theta = np.asarray(theta, dtype=float)
    avg = np.mean(np.exp(1j * theta))
    if abs(avg) < 1e-8:
        raise ClosureError("tangent angle averages to zero; curve cannot close", value=abs(avg))
    c = np.angle(avg)
    rotated = theta - c
    return rotated, float(1.0 / np.mean(np.cos(rotated)))


def make_state(grid: SpectralGrid, theta, gamma, physics: Physics | None = None, t: float = 0.0) -> SurfaceState:
    """State with ``theta`` adjusted by a constant rotation so the curve closes."""
    theta, sigma = close_curve(theta)
    return SurfaceState(grid, t, theta, np.asarray(gamma, dtype=float), sigma, physics or Physics())


def _expm1_i(theta):
    # exp(i theta) - 1 without cancellation near theta = 0
    return -2.0 * np.sin(0.5 * theta) ** 2 + 1j * np.sin(theta)


def reconstruct_curve(grid: SpectralGrid, theta, sigma: float, tol: float = CLOSURE_TOL) -> np.ndarray:
    """Curve with tangent ``sigma exp(i theta)``, ``z(alpha + P) = z(alpha) + P`` and zero mean height."""
    theta = np.asarray(theta, dtype=float)
    res = closure_residual(grid, theta, sigma)
    if res > tol:
        raise ClosureError(f"closure residual {res:.3e} exceeds {tol:.1e}", value=res)
    w = sigma * _expm1_i(theta)
    w = w - np.mean(w)
    z = grid.nodes + antiderivative(grid, w)
    return z - 1j * np.mean(z.imag)


def _curve_operators(state: SurfaceState) -> CurveOperators:
    """Reconstructed curve with its kernel operators, cached on the state."""
    ops = state._curve.get("ops")
    if ops is None:
        z = reconstruct_curve(state.grid, state.theta, state.sigma)
        ops = CurveOperators(state.grid, z, z_alpha=state.sigma * np.exp(1j * state.theta))
        state._curve["ops"] = ops
    return ops


def validate_state(state: SurfaceState, Q_min: float = 0.0, kappa_max: float | None = None) -> dict:
    """Check state invariants; raise the matching abort, else return the diagnostics."""
    if not state.finite:
        raise NanAbort("non-finite entries in theta or gamma", value=float("nan"), state=state)
    grid = state.grid
    res = closure_residual(grid, state.theta, state.sigma)
    if res > CLOSURE_TOL:
        raise ClosureError(f"closure residual {res:.3e}", value=res, state=state)
    ratio = _curve_operators(state).chord_arc(state.sigma)
    if ratio < Q_min:
        raise ChordArcAbort(f"chord-arc ratio {ratio:.4g} below {Q_min}", value=ratio, state=state)
    kinf = float(np.max(np.abs(derivative(grid, state.theta)))) / state.sigma
    if kappa_max is not None and kinf > kappa_max:
        raise CurvatureAbort(f"max curvature {kinf:.4g} exceeds {kappa_max}", value=kinf, state=state)
    return {"closure_residual": res, "chord_arc": ratio, "kappa_inf": kinf}


# --------------------------------------------------------------- kinematics

def kinematic_fields(state: SurfaceState) -> DerivedFields:
    """Velocity ``W`` and its normal/tangential split in the uniform frame.

    ``U_par`` is the zero-mean antiderivative of ``theta_alpha U_perp`` minus
    its mean, which keeps ``|z_alpha|`` independent of ``alpha``; that mean is
    ``-sigma_t``.  Means are plain averages over one period.
    """
    grid, theta = state.grid, state.theta
    ops = _curve_operators(state)
    z, z_alpha = ops.z, ops.z_alpha
    e = np.exp(1j * theta)
    try:
        wbar = ops.birkhoff_rott_conj(state.gamma)
    except SingularKernelError as exc:
        raise ChordArcAbort(str(exc), value=0.0, state=state) from exc
    U_perp = np.real(wbar * 1j * e)
    f = derivative(grid, theta) * U_perp
    fm = float(np.mean(f))
    U_par = antiderivative(grid, f - fm)
    return DerivedFields(z=z, z_alpha=z_alpha, W=np.conj(wbar), U_perp=U_perp, U_par=U_par, sigma_t=-fm, ops=ops)


def theta_rhs(state: SurfaceState, fields: DerivedFields) -> np.ndarray:
    grid = state.grid
    theta_t = (derivative(grid, fields.U_perp) + fields.U_par * derivative(grid, state.theta)) / state.sigma
    fields.theta_t = theta_t
    fields.z_t = (fields.U_par + 1j * fields.U_perp) * np.exp(1j * state.theta)
    return theta_t


def _velocity_gradients(state: SurfaceState, fields: DerivedFields):
    """``W_alpha . z_alpha`` and ``W_alpha . i z_alpha`` through the smooth field ``m``."""
    grid, gamma = state.grid, state.gamma
    ops = fields.ops
    mbar = ops.m_conj(gamma)
    za = fields.z_alpha
    fields.m = np.conj(mbar)
    fields.Wa_dot_za = -0.5 * hilbert(grid, gamma * derivative(grid, state.theta)) + np.real(mbar * za)
    fields.Wa_dot_iza = 0.5 * hilbert(grid, derivative(grid, gamma)) + np.real(mbar * 1j * za)


def _tangential_W(fields: DerivedFields, sigma: float) -> np.ndarray:
    return np.real(np.conj(fields.W) * fields.z_alpha) / sigma


def _W_t_known_part(state: SurfaceState, fields: DerivedFields) -> np.ndarray:
    """``conj(W)_t`` minus the part linear in ``gamma_t``."""
    grid, gamma, sigma = state.grid, state.gamma, state.sigma
    ops = fields.ops
    za = fields.z_alpha
    za_t = za * (fields.sigma_t / sigma + 1j * fields.theta_t)
    t2 = -hilbert(grid, gamma * za_t / za**2) / 2j - ops.W(gamma * za_t / za)
    return t2 + ops.B(fields.z_t, gamma)


def solve_gamma_t(state: SurfaceState, fields: DerivedFields, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Fixed-point solve of ``(1 + 2J) gamma_t = RHS``.

    The right-hand side follows from Bernoulli's law on the interface written
    for a sheet strength per unit parameter in the uniform frame.
    """
    grid, gamma, theta, sigma = state.grid, state.gamma, state.theta, state.sigma
    phys = state.physics
    if fields.theta_t is None:
        theta_rhs(state, fields)
    if fields.Wa_dot_za is None:
        _velocity_gradients(state, fields)
    ops = fields.ops
    V = fields.U_par - _tangential_W(fields, sigma)
    gamma_a = derivative(grid, gamma)
    known = _W_t_known_part(state, fields)
    rhs_val = (
        phys.inv_We * derivative(grid, theta, 2) / sigma
        + derivative(grid, V * gamma / sigma)
        - gamma * gamma_a / (2 * sigma**2)
        + 2 * V * fields.Wa_dot_za / sigma
        - 2 * np.real(known * fields.z_alpha)
    )
    if phys.g:
        rhs_val = rhs_val - 2 * phys.g * sigma * np.sin(theta)
    fields.gamma_rhs = rhs_val
    norm_rhs = np.linalg.norm(rhs_val)
    gt = rhs_val.copy()
    iterations = 0
    if norm_rhs > 0:
        for iterations in range(1, max_iter + 1):
            new = rhs_val - 2 * ops.J(gt)
            delta = np.linalg.norm(new - gt)
            gt = new
            if not np.isfinite(delta):
                raise NanAbort("gamma_t iteration produced non-finite values", value=float("nan"), state=state)
            if delta <= tol * norm_rhs:
                break
        else:
            raise GammaTNonconvergence(
                f"gamma_t iteration did not converge in {max_iter} steps (last update {delta / norm_rhs:.3e})",
                value=float(delta / norm_rhs),
                state=state,
            )
        res = np.linalg.norm(gt + 2 * ops.J(gt) - rhs_val) / norm_rhs
    else:
        res = 0.0
    fields.gamma_t = gt
    fields.gamma_t_iterations = iterations
    fields.gamma_t_residual = float(res)
    wbar_t = hilbert(grid, gt / fields.z_alpha) / 2j + ops.W(gt) + known
    fields.W_t = np.conj(wbar_t)
    return gt


def material_fields(state: SurfaceState, fields: DerivedFields):
    """Lagrangian tangential speed ``q``, its arclength derivative ``u`` and curvature ``kappa``.

    ``q`` is the arclength speed of fluid particles relative to the
    parametrization.  ``u = q_s`` is assembled from the sheet strength and the
    velocity gradient; it differs from the line-frame expression by the gauge
    constant ``mu``.
    """
    grid, gamma, sigma = state.grid, state.gamma, state.sigma
    if fields.Wa_dot_za is None:
        _velocity_gradients(state, fields)
    V = fields.U_par - _tangential_W(fields, sigma)
    q = 0.5 * gamma / sigma - V
    mu = -fields.sigma_t / sigma
    u = (0.5 * derivative(grid, gamma) + fields.Wa_dot_za) / sigma**2 + mu
    kappa = derivative(grid, state.theta) / sigma
    fields.q, fields.u, fields.kappa, fields.mu = q, u, kappa, mu
    return q, u, kappa


def _remainder_kappa(state: SurfaceState, fields: DerivedFields) -> np.ndarray:
    grid, sigma = state.grid, state.sigma
    mbar = np.conj(fields.m)
    za = fields.z_alpha
    return (-hilbert(grid, np.real(mbar * za)) + np.real(mbar * 1j * za)) / sigma**2


def pressure_field(state: SurfaceState, fields: DerivedFields) -> np.ndarray:
    """Normal-derivative pressure variable ``p``.

    ``p = W_t . i z_s + q W_s . i z_s + (gamma/2 sigma) D_t theta`` with the
    material derivative ``D_t = d_t + (q / sigma) d_alpha``.
    """
    grid, sigma = state.grid, state.sigma
    if fields.gamma_t is None:
        solve_gamma_t(state, fields)
    if fields.q is None:
        material_fields(state, fields)
    za = fields.z_alpha
    Dt_theta = fields.theta_t + fields.q / sigma * derivative(grid, state.theta)
    fields.Dt_theta = Dt_theta
    p = (
        np.real(np.conj(fields.W_t) * 1j * za) / sigma
        + fields.q * fields.Wa_dot_iza / sigma**2
        + 0.5 * state.gamma / sigma * Dt_theta
    )
    fields.p = p
    return p


def remainder_fields(state: SurfaceState, fields: DerivedFields):
    """``r_kappa``, ``r_u`` and ``r_p`` (the last by subtraction from ``p_s``)."""
    grid, sigma = state.grid, state.sigma
    phys = state.physics
    if fields.p is None:
        pressure_field(state, fields)
    r_kappa = _remainder_kappa(state, fields)
    fields.nu = float(np.mean(state.gamma * derivative(grid, state.theta))) / (2 * sigma**2)
    Hu = hilbert(grid, fields.u)
    r_u = -((fields.u - fields.mu) ** 2) + (Hu + r_kappa + fields.nu) ** 2
    kappa_ss = derivative(grid, fields.kappa, 2) / sigma**2
    r_p = derivative(grid, fields.p) / sigma - 0.5 * phys.inv_We * hilbert(grid, kappa_ss)
    if phys.g:
        r_p = r_p + phys.g * hilbert(grid, fields.kappa)
    fields.r_kappa, fields.r_u, fields.r_p = r_kappa, r_u, r_p
    kappa_t = (derivative(grid, fields.theta_t) - fields.kappa * fields.sigma_t) / sigma
    fields.phi = kappa_t + fields.q / sigma * derivative(grid, fields.kappa)
    return r_kappa, r_u, r_p


def derive_fields(state: SurfaceState, cfg: StepperConfig | None = None, full: bool = True) -> DerivedFields:
    """Run the whole pipeline; ``full=False`` stops once ``gamma_t`` is known."""
    tol = cfg.gamma_t_tol if cfg else 1e-12
    max_iter = cfg.gamma_t_max_iter if cfg else 200
    fields = kinematic_fields(state)
    theta_rhs(state, fields)
    solve_gamma_t(state, fields, tol=tol, max_iter=max_iter)
    if full:
        material_fields(state, fields)
        pressure_field(state, fields)
        remainder_fields(state, fields)
    return fields


def rhs(state: SurfaceState, cfg: StepperConfig | None = None) -> tuple[np.ndarray, np.ndarray, float]:
    """``(theta_t, gamma_t, sigma_t)``."""
    f = derive_fields(state, cfg, full=False)
    return f.theta_t, f.gamma_t, f.sigma_t


# ------------------------------------------------------------------ stepper

def _linear_coefficients(grid: SpectralGrid, sigma: float, physics: Physics):
    k = np.abs(grid.wavenumbers)
    a = k / (2 * sigma**2)
    b = physics.inv_We * k**2 / sigma + 2 * physics.g * sigma
    return a, b


def linear_propagator(grid: SpectralGrid, sigma: float, physics: Physics, tau: float):
    """Per-mode matrix exponential of ``theta_t = a gamma``, ``gamma_t = -b theta``.

    ``a = |k| / (2 sigma^2)``, ``b = inv_We k^2 / sigma + 2 g sigma``; returns
    ``(c, sa, sb)`` so that ``theta -> c theta + sa gamma`` and
    ``gamma -> -sb theta + c gamma``.
    """
    a, b = _linear_coefficients(grid, sigma, physics)
    w = np.sqrt(a * b)
    c = np.cos(w * tau)
    sinc = tau * np.sinc(w * tau / np.pi)  # sin(w tau)/w, finite at w = 0
    return c, a * sinc, b * sinc


class _Propagator:
    def __init__(self, grid, sigma, physics):
        self.grid, self.sigma, self.physics = grid, sigma, physics
        self.a, self.b = _linear_coefficients(grid, sigma, physics)
        self._cache = {}

    def linear(self, th, ga):
        return self.a * ga, -self.b * th

    def apply(self, tau, th_hat, ga_hat):
        if tau not in self._cache:
            self._cache[tau] = linear_propagator(self.grid, self.sigma, self.physics, tau)
        c, sa, sb = self._cache[tau]
        return c * th_hat + sa * ga_hat, -sb * th_hat + c * ga_hat


def _nonlinear(state: SurfaceState, th_hat, ga_hat, sigma, prop: _Propagator, cfg, at_start: bool = False):
    """Fourier coefficients of (full rhs - frozen linear part), plus sigma_t and iteration count.

    ``at_start`` evaluates at ``state`` itself, reusing its cached curve.
    """
    if at_start:
        s = state
    else:
        s = state.evolve(theta=np.fft.ifft(th_hat).real, gamma=np.fft.ifft(ga_hat).real, sigma=sigma)
    f = derive_fields(s, cfg, full=False)
    lin_th, lin_ga = prop.linear(th_hat, ga_hat)
    return np.fft.fft(f.theta_t) - lin_th, np.fft.fft(f.gamma_t) - lin_ga, f.sigma_t, f.gamma_t_iterations


def step(state: SurfaceState, cfg: StepperConfig, info: dict | None = None) -> SurfaceState:
    """One integrating-factor RK4 step (Lawson form).

    The stiff linear part with frequency ``omega(k)`` is integrated exactly per
    mode with ``sigma`` frozen at its value at the start of the step; the
    remainder is advanced explicitly.  The filter is applied once at the end,
    then the invariants are re-checked.  On failure the raised abort carries
    the last good state.
    """
    h = cfg.dt
    prop = _Propagator(state.grid, state.sigma, state.physics)
    th0, ga0 = np.fft.fft(state.theta), np.fft.fft(state.gamma)
    sig0 = state.sigma
    E = prop.apply
    iters = 0
    try:
        a_th, a_ga, a_s, it = _nonlinear(state, th0, ga0, sig0, prop, cfg, at_start=True)
        iters = max(iters, it)
        v = E(h / 2, th0 + h / 2 * a_th, ga0 + h / 2 * a_ga)
        b_th, b_ga, b_s, it = _nonlinear(state, *v, sig0 + h / 2 * a_s, prop, cfg)
        iters = max(iters, it)
        e_half = E(h / 2, th0, ga0)
        v = (e_half[0] + h / 2 * b_th, e_half[1] + h / 2 * b_ga)
        c_th, c_ga, c_s, it = _nonlinear(state, *v, sig0 + h / 2 * b_s, prop, cfg)
        iters = max(iters, it)
        e_full = E(h, th0, ga0)
        ec = E(h / 2, c_th, c_ga)
        v = (e_full[0] + h * ec[0], e_full[1] + h * ec[1])
        d_th, d_ga, d_s, it = _nonlinear(state, *v, sig0 + h * c_s, prop, cfg)
        iters = max(iters, it)
    except DynamicsError as exc:
        exc.state = state
        raise
    ea = E(h, a_th, a_ga)
    ebc = E(h / 2, b_th + c_th, b_ga + c_ga)
    th1 = e_full[0] + h / 6 * (ea[0] + 2 * ebc[0] + d_th)
    ga1 = e_full[1] + h / 6 * (ea[1] + 2 * ebc[1] + d_ga)
    sig1 = sig0 + h / 6 * (a_s + 2 * b_s + 2 * c_s + d_s)
    theta = np.fft.ifft(th1).real
    gamma = np.fft.ifft(ga1).real
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(gamma)) and np.isfinite(sig1) and sig1 > 0):
        raise NanAbort("non-finite state after step", value=float("nan"), state=state)
    theta = filter_field(state.grid, theta, cfg.cutoff_fraction, cfg.floor)
    gamma = filter_field(state.grid, gamma, cfg.cutoff_fraction, cfg.floor)
    new = SurfaceState(state.grid, state.t + h, theta, gamma, float(sig1), state.physics)
    try:
        diag = validate_state(new, cfg.Q_min, cfg.kappa_max)
    except DynamicsError as exc:
        exc.state = state
        raise
    if info is not None:
        info.update(diag)
        info["gamma_t_iterations"] = iters
    return new


# -------------------------------------------------------------- diagnostics

def _centered(prev, nxt, dt):
    return (nxt - prev) / (2 * dt)


def residual_kappa_u(history, dt: float):
    """Residuals of the first-order curvature/velocity system at the middle state.

    ``history`` holds three ``(state, fields)`` pairs equally spaced by
    ``dt``; time derivatives are centered differences.  Returns
    ``(res_kappa, res_u)`` where

    * ``res_kappa = D_t kappa - (H d_s u - (u - mu) kappa + d_s r_kappa)``
    * ``res_u = D_t u - (inv_We/2 kappa_ss - p kappa + r_u + mu_t - g cos(theta) kappa)``
    """
    (s0, f0), (s1, f1), (s2, f2) = history
    grid = s1.grid
    for s in (s0, s2):
        if s.grid != grid:
            raise ValueError("states live on different grids")
    if abs((s1.t - s0.t) - dt) > 1e-9 * max(1.0, dt) or abs((s2.t - s1.t) - dt) > 1e-9 * max(1.0, dt):
        raise ValueError("states are not equally spaced by dt")
    for f in (f0, f1, f2):
        if f.r_u is None:
            raise ValueError("fields must come from derive_fields(..., full=True)")
    sigma, phys = s1.sigma, s1.physics
    adv = f1.q / sigma
    ds = lambda x: derivative(grid, x) / sigma  # noqa: E731
    Dt_kappa = _centered(f0.kappa, f2.kappa, dt) + adv * derivative(grid, f1.kappa)
    Dt_u = _centered(f0.u, f2.u, dt) + adv * derivative(grid, f1.u)
    mu_t = _centered(f0.mu, f2.mu, dt)
    res_k = Dt_kappa - (hilbert(grid, ds(f1.u)) - (f1.u - f1.mu) * f1.kappa + ds(f1.r_kappa))
    rhs_u = 0.5 * phys.inv_We * ds(ds(f1.kappa)) - f1.p * f1.kappa + f1.r_u + mu_t
    if phys.g:
        rhs_u = rhs_u - phys.g * np.cos(s1.theta) * f1.kappa
    return res_k, Dt_u - rhs_u


def second_order_residual(history, dt: float) -> np.ndarray:
    """``D_t^2 kappa - (inv_We/2) H d_s^3 kappa - inv_We kappa kappa_ss + g H d_s kappa`` at the middle state.

    ``D_t^2`` is taken as the centered time difference of ``phi = D_t kappa``
    plus advection; the field should be smoother than ``kappa_ss``.
    """
    (s0, f0), (s1, f1), (s2, f2) = history
    grid, sigma, phys = s1.grid, s1.sigma, s1.physics
    ds = lambda x: derivative(grid, x) / sigma  # noqa: E731
    Dt2 = _centered(f0.phi, f2.phi, dt) + f1.q / sigma * derivative(grid, f1.phi)
    kss = ds(ds(f1.kappa))
    out = Dt2 - 0.5 * phys.inv_We * hilbert(grid, ds(kss)) - phys.inv_We * f1.kappa * kss
    if phys.g:
        out = out + phys.g * hilbert(grid, ds(f1.kappa))
    return out


def energy_E0k(state: SurfaceState, fields: DerivedFields, k: int) -> float:
    """Energy norm ``E0_k = sum_{j<=k} e_j + ||u||^2 + ||gamma||^2``.

    ``e_0 = ||kappa||^2 + ||phi||^2`` and for ``j >= 1``
    ``e_j = 1/2 int (c d^{j+1}kappa Lambda d^{j+1}kappa + (d^j phi)^2 + 2 c kappa (d^{j+1}kappa)^2)``
    with ``c = inv_We/2``, ``d = d_s`` and ``phi = D_t kappa``.  Integrals are
    over one period in arclength.
    """
    if k < 1 or int(k) != k:
        raise ValueError("k must be a positive integer")
    if fields.phi is None:
        raise ValueError("fields must come from derive_fields(..., full=True)")
    grid, sigma = state.grid, state.sigma
    c = 0.5 * state.physics.inv_We
    h = grid.spacing * sigma
    ds = lambda x, m=1: derivative(grid, x, m) / sigma**m  # noqa: E731
    kappa, phi = fields.kappa, fields.phi
    kinf = float(np.max(np.abs(kappa)))
    if kinf >= KAPPA_MAX:
        warnings.warn(f"max curvature {kinf:.3g} >= 1/4: kappa-weighted energy term may be negative", stacklevel=2)
    total = h * np.sum(kappa**2 + phi**2)
    for j in range(1, k + 1):
        dk = ds(kappa, j + 1)
        lam = lambda_pow(grid, dk, 1.0) / sigma
        total += 0.5 * h * np.sum(c * dk * lam + ds(phi, j) ** 2 + 2 * c * kappa * dk**2)
    total += h * np.sum(fields.u**2) + grid.spacing * np.sum(state.gamma**2)
    return float(total)


def scaling_transform(state: SurfaceState, lam: float) -> SurfaceState:
    """Image under ``kappa -> lam kappa(lam alpha, lam^{3/2} t)``, ``gamma -> lam^{1/2} gamma(...)``.

    The samples of ``theta`` are kept; the box shrinks to ``period / lam`` and
    time rescales to ``t / lam^{3/2}``.  Requires zero gravity when ``lam != 1``.
    """
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"scale factor must be positive and finite, got {lam}")
    if lam == 1:
        return state.evolve(theta=state.theta.copy(), gamma=state.gamma.copy())
    if state.physics.g:
        raise ValueError("gravity breaks the scaling symmetry")
    grid = SpectralGrid(state.grid.n_points, state.grid.period / lam)
    return SurfaceState(grid, state.t / lam**1.5, state.theta.copy(), np.sqrt(lam) * state.gamma, state.sigma, state.physics)
