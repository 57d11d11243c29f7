"""Execute a ``RunConfig`` and write its artifacts.

A run directory holds ``manifest.json``, ``timeseries.csv`` and, for the
evolution modes, a ``snapshots/`` folder of columnar text files.  The CSV
holds only quantities computed from the solution, so identical configs give
byte-identical CSV files.  Wall times live in the manifest.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import campaigns
from . import dynamics as dyn
from . import linear as lin
from .campaigns import Check, measure_frequency, spectral_slope
from .config import RunConfig, config_to_dict
from .initial_data import (
    flat_gamma,
    gaussian_packet_modes,
    multi_mode,
    near_contact,
    random_bandlimited,
    rough_tail_modes,
    single_mode,
    traveling_mode,
)
from .spectral import SpectralGrid, derivative, make_grid, sobolev_norm

__all__ = [
    "ENV_OUTPUT_ROOT",
    "EXIT_OK",
    "EXIT_CHECK_FAILED",
    "EXIT_USAGE",
    "EXIT_ABORTED",
    "RunResult",
    "output_root",
    "columns_for",
    "initial_state",
    "initial_linear",
    "run",
]

ENV_OUTPUT_ROOT = "CAPWAVE_OUTPUT_ROOT"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_ABORTED = 3

SNAPSHOT_COLUMNS = ("alpha", "theta", "gamma", "kappa", "u", "p", "r_kappa", "r_u", "r_p")
LINEAR_SNAPSHOT_COLUMNS = ("alpha", "kappa", "kappa_t")
CHECK_COLUMNS = ("criterion", "name", "measured", "tolerance", "relation", "passed")


@dataclass
class RunResult:
    directory: Path
    manifest: dict
    checks: list = field(default_factory=list)

    @property
    def termination(self) -> str:
        return self.manifest["termination"]["reason"]

    @property
    def exit_code(self) -> int:
        return self.manifest["exit_code"]


def output_root(explicit=None) -> Path:
    """``explicit`` if given, else ``$CAPWAVE_OUTPUT_ROOT``, else the working directory."""
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get(ENV_OUTPUT_ROOT)
    return Path(env) if env else Path.cwd()


def columns_for(cfg: RunConfig) -> list[str]:
    """Time-series column order for a config."""
    d = cfg.diagnostics
    if cfg.mode == "nonlinear":
        return (
            ["step", "t", "sigma", "closure_residual", "chord_arc", "kappa_inf"]
            + [f"kappa_h{s}" for s in d.sobolev_orders]
            + [f"u_h{s}" for s in d.sobolev_orders]
            + [f"E0_{d.energy_k}", "gamma_t_iterations", "gamma_t_residual", "mode_amplitude",
               "slope_kappa", "slope_r_kappa", "slope_p", "slope_r_p", "theta_drift", "gamma_drift", "sigma_drift"]
        )
    if cfg.mode in ("linear-capillary", "linear-gravity"):
        return (
            ["step", "t", "energy_linear", "energy_invariant", "window_mass", "kappa_inf"]
            + [f"kappa_h{s}" for s in d.sobolev_orders]
            + [f"gain_k{k}" for k in d.gain_k]
            + [f"unweighted_gain_k{k}" for k in d.gain_k]
        )
    return list(CHECK_COLUMNS)


# ------------------------------------------------------------------ data

def _physics(cfg: RunConfig) -> dyn.Physics:
    return dyn.Physics(cfg.physics.inv_We, cfg.physics.g)


def initial_state(cfg: RunConfig) -> dyn.SurfaceState:
    """Closed nonlinear state built from ``cfg.initial``."""
    grid = make_grid(cfg.grid.n, cfg.grid.period)
    ini, phys = cfg.initial, cfg.physics
    kind = ini.kind
    if kind == "flat":
        th, ga = flat_gamma(grid, ini.gamma0)
    elif kind == "single-mode":
        th, ga = single_mode(grid, ini.mode, ini.amplitude, ini.gamma0)
    elif kind == "traveling-mode":
        th, ga = traveling_mode(grid, ini.mode, ini.amplitude, phys.inv_We, phys.g)
    elif kind == "multi-mode":
        th, ga = multi_mode(grid, ini.amplitude, ini.modes, cfg.seed)
    elif kind == "two-mode":
        th, ga = campaigns.two_mode(grid, ini.amplitude)
    elif kind == "analytic-traveling":
        th, ga = campaigns.analytic_traveling(grid, ini.amplitude, ini.rho, phys.inv_We)
    elif kind == "near-contact":
        th, ga = near_contact(grid, ini.amplitude)
    else:
        raise ValueError(f"{kind!r} is not a nonlinear initial-data kind")
    return dyn.make_state(grid, th, ga, _physics(cfg))


def initial_linear(cfg: RunConfig) -> lin.LinearSolution:
    """Linear solution released from rest with curvature from ``cfg.initial``."""
    grid = make_grid(cfg.grid.n, cfg.grid.period)
    ini = cfg.initial
    window = lin.WindowSpec(cfg.linear.window_radius, cfg.linear.taper_width)
    if ini.kind == "gaussian-packet":
        kh = gaussian_packet_modes(grid, ini.amplitude, ini.width, ini.carrier, ini.center, order=1)
    elif ini.kind == "rough-tail":
        kh = gaussian_packet_modes(grid, ini.amplitude, ini.width, order=1) + rough_tail_modes(
            grid, ini.exponent, seed=cfg.seed, tail_amplitude=ini.tail_amplitude,
            envelope_width=ini.envelope_width, k_min=ini.k_min,
        )
    elif ini.kind == "random-bandlimited":
        kh = np.fft.fft(random_bandlimited(grid, ini.max_mode, cfg.seed, ini.decay))
        window = None
    else:
        raise ValueError(f"{ini.kind!r} is not a linear initial-data kind")
    return lin.LinearSolution(grid, kh, np.zeros(grid.n_points), cfg.physics.inv_We, cfg.physics.g, window)


# ------------------------------------------------------------------ writers

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c, math.nan)) for c in columns])
    path.write_text(buf.getvalue())


def _write_snapshot(path: Path, t: float, columns, data):
    header = f"t = {t!r}\n" + " ".join(columns)
    np.savetxt(path, np.column_stack(data), fmt="%.17g", header=header)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def strict_json(v):
    """Replace non-finite floats so the manifest is strict JSON."""
    if isinstance(v, dict):
        return {k: strict_json(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [strict_json(x) for x in v]
    if isinstance(v, (float, np.floating)) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


# --------------------------------------------------------------- nonlinear

def _record(state, start, cfg, step_no, info, fields) -> dict:
    d = cfg.diagnostics
    grid = state.grid
    kappa = derivative(grid, state.theta) / state.sigma
    row = {
        "step": step_no,
        "t": state.t,
        "sigma": state.sigma,
        "closure_residual": info.get("closure_residual", dyn.closure_residual(grid, state.theta, state.sigma)),
        "chord_arc": info["chord_arc"],
        "kappa_inf": info["kappa_inf"],
        "gamma_t_iterations": info.get("gamma_t_iterations", 0),
        "theta_drift": float(np.max(np.abs(state.theta - start.theta))),
        "gamma_drift": float(np.max(np.abs(state.gamma - start.gamma))),
        "sigma_drift": abs(state.sigma - start.sigma),
    }
    for s in d.sobolev_orders:
        row[f"kappa_h{s}"] = sobolev_norm(grid, kappa, s)
    if d.track_mode:
        row["mode_amplitude"] = float(np.fft.rfft(state.theta)[d.track_mode].real * 2 / grid.n_points)
    if fields is not None:
        row["gamma_t_residual"] = fields.gamma_t_residual
        for s in d.sobolev_orders:
            row[f"u_h{s}"] = sobolev_norm(grid, fields.u, s)
        row[f"E0_{d.energy_k}"] = dyn.energy_E0k(state, fields, d.energy_k)
        lo, hi = d.slope_band
        if hi < grid.n_points // 2:
            for col, f in (("slope_kappa", fields.kappa), ("slope_r_kappa", fields.r_kappa),
                           ("slope_p", fields.p), ("slope_r_p", fields.r_p)):
                # a field with no content in the band has no slope
                row[col] = spectral_slope(f, lo, hi) if np.any(np.abs(np.fft.rfft(f)[lo:hi]) > 0) else math.nan
    return row


def _snapshot_nonlinear(path, state, fields):
    grid = state.grid
    kappa = derivative(grid, state.theta) / state.sigma
    nan = np.full(grid.n_points, np.nan)
    pick = (lambda a: nan if fields is None or a is None else a)  # noqa: E731
    data = [grid.nodes, state.theta, state.gamma, kappa]
    if fields is not None:
        data += [pick(fields.u), pick(fields.p), pick(fields.r_kappa), pick(fields.r_u), pick(fields.r_p)]
    else:
        data += [nan] * 5
    _write_snapshot(path, state.t, SNAPSHOT_COLUMNS, data)


def _run_nonlinear(cfg: RunConfig, out: Path):
    st = cfg.stepper
    scfg = dyn.StepperConfig(st.dt, st.cutoff_fraction, st.floor, st.gamma_t_tol, st.gamma_t_max_iter, st.Q_min, st.kappa_max)
    d = cfg.diagnostics
    snaps = out / "snapshots"
    snaps.mkdir(exist_ok=True)
    rows, termination = [], {"reason": "completed", "value": None, "message": ""}

    def fields_of(state):
        if not d.full_fields:
            return None
        try:
            return dyn.derive_fields(state, scfg)
        except dyn.DynamicsError:
            return None

    def snapshot(state, k, fields):
        _snapshot_nonlinear(snaps / f"snapshot_{k:06d}.txt", state, fields)

    state = None
    try:
        state = initial_state(cfg)
        info = dyn.validate_state(state, st.Q_min, st.kappa_max)
    except dyn.DynamicsError as exc:
        termination = {"reason": exc.reason, "value": exc.value, "message": str(exc)}
        if exc.state is not None:
            snapshot(exc.state, 0, None)
        return rows, termination, exc.state or state, 0
    start = state
    f0 = fields_of(state)
    rows.append(_record(state, start, cfg, 0, info, f0))
    snapshot(state, 0, f0)
    done = 0
    for k in range(1, st.steps + 1):
        info = {}
        try:
            state = dyn.step(state, scfg, info)
        except dyn.DynamicsError as exc:
            termination = {"reason": exc.reason, "value": exc.value, "message": str(exc)}
            snapshot(exc.state if exc.state is not None else state, done, None)
            break
        done = k
        last = k == st.steps
        want_snap = last or (cfg.output.snapshot_every and k % cfg.output.snapshot_every == 0)
        if last or k % d.record_every == 0 or want_snap:
            fields = fields_of(state)
            if last or k % d.record_every == 0:
                rows.append(_record(state, start, cfg, k, info, fields))
            if want_snap:
                snapshot(state, k, fields)
    return rows, termination, state, done


def _nonlinear_checks(cfg: RunConfig, rows) -> list[Check]:
    c = cfg.checks
    out = []
    if not rows:
        return out
    col = lambda name: np.array([r.get(name, math.nan) for r in rows], dtype=float)  # noqa: E731
    if c.max_drift is not None:
        drift = max(np.nanmax(col(n)) for n in ("theta_drift", "gamma_drift", "sigma_drift"))
        out.append(Check("6", "max drift of theta, gamma, sigma", drift, c.max_drift))
    if c.e0_ratio is not None:
        e = col(f"E0_{cfg.diagnostics.energy_k}")
        out.append(Check("11", f"E0_{cfg.diagnostics.energy_k} max/min", np.nanmax(e) / np.nanmin(e), c.e0_ratio))
    if c.energy_drift is not None:
        e = col(f"E0_{cfg.diagnostics.energy_k}")
        out.append(Check("11", f"E0_{cfg.diagnostics.energy_k} relative drift", np.nanmax(np.abs(e - e[0])) / e[0], c.energy_drift))
    if c.frequency_rel_tol is not None:
        m = cfg.diagnostics.track_mode
        if not m:
            raise ValueError("checks.frequency_rel_tol needs diagnostics.track_mode")
        # the final row may fall off the uniform sampling grid
        keep = col("step") % cfg.diagnostics.record_every == 0
        amp = col("mode_amplitude")[keep]
        w = measure_frequency(amp, cfg.stepper.dt * cfg.diagnostics.record_every)
        w_exact = lin.omega(2 * np.pi * m / cfg.grid.period, cfg.physics.inv_We, cfg.physics.g)
        rel = abs(w - w_exact) / w_exact
        out.append(Check("1", f"dispersion k={m} relative frequency error", rel, c.frequency_rel_tol,
                         detail={"k": m, "measured_omega": w, "omega": w_exact, "rel_err": rel}))
    return out


def _nonlinear_final(rows, state, done) -> dict:
    if not rows:
        return {"steps_completed": done}
    last = rows[-1]
    keys = ("t", "sigma", "closure_residual", "chord_arc", "kappa_inf", "theta_drift", "gamma_drift", "sigma_drift")
    out = {k: last[k] for k in keys if k in last}
    out["steps_completed"] = done
    out["max_closure_residual"] = max(r["closure_residual"] for r in rows)
    out["min_chord_arc"] = min(r["chord_arc"] for r in rows)
    out["max_kappa_inf"] = max(r["kappa_inf"] for r in rows)
    return out


# ------------------------------------------------------------------ linear

def _run_linear(cfg: RunConfig, out: Path):
    sol = initial_linear(cfg)
    grid = sol.grid
    d = cfg.diagnostics
    capillary = cfg.mode == "linear-capillary"
    ts = np.linspace(0.0, cfg.linear.t_end, cfg.linear.samples)
    snaps = out / "snapshots"
    snaps.mkdir(exist_ok=True)
    rows, termination = [], {"reason": "completed", "value": None, "message": ""}
    snap_every = cfg.output.snapshot_every
    for j, t in enumerate(ts):
        kappa, kappa_t = lin.propagate(sol, t)
        row = {"step": j, "t": float(t), "energy_linear": lin.energy_linear(sol, t),
               "kappa_inf": float(np.max(np.abs(kappa)))}
        for s in d.sobolev_orders:
            row[f"kappa_h{s}"] = sobolev_norm(grid, kappa, s)
        for k in d.gain_k:
            row[f"gain_k{k}"] = lin.weighted_gain_norm(sol, t, k, check_window=False)
            row[f"unweighted_gain_k{k}"] = lin.unweighted_gain_norm(sol, t, k)
        if sol.window is not None:
            mass = lin.window_mass_ratio(sol, t)
            row["window_mass"] = mass
            if mass > lin.WINDOW_MASS_TOL:
                termination = {"reason": "window-exit", "value": mass,
                               "message": f"mass fraction {mass:.3e} outside window at t={t!r}"}
                _write_snapshot(snaps / f"snapshot_{j:06d}.txt", float(t), LINEAR_SNAPSHOT_COLUMNS, [grid.nodes, kappa, kappa_t])
                break
            row["energy_invariant"] = (lin.energy_gamma2 if capillary else lin.energy_gamma_g)(sol, t, check_window=False)
        rows.append(row)
        if j in (0, len(ts) - 1) or (snap_every and j % snap_every == 0):
            _write_snapshot(snaps / f"snapshot_{j:06d}.txt", float(t), LINEAR_SNAPSHOT_COLUMNS, [grid.nodes, kappa, kappa_t])
    return rows, termination


def _rel_drift(values) -> float:
    v = np.array(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0 or v[0] == 0:
        return math.nan
    return float(np.max(np.abs(v - v[0])) / abs(v[0]))


def _linear_final(rows) -> dict:
    if not rows:
        return {}
    return {
        "t": rows[-1]["t"],
        "energy_linear_drift": _rel_drift([r["energy_linear"] for r in rows]),
        "energy_invariant_drift": _rel_drift([r.get("energy_invariant", math.nan) for r in rows]),
        "max_window_mass": max((r.get("window_mass", 0.0) for r in rows), default=0.0),
    }


def _linear_checks(cfg: RunConfig, rows) -> list[Check]:
    out = []
    if cfg.checks.energy_drift is not None and rows:
        crit = "2" if cfg.initial.kind == "random-bandlimited" else ("3" if cfg.mode == "linear-capillary" else "4")
        out.append(Check(crit, "linear energy relative drift", _rel_drift([r["energy_linear"] for r in rows]),
                         cfg.checks.energy_drift))
        if "energy_invariant" in rows[0]:
            name = "Gamma_2" if cfg.mode == "linear-capillary" else "Gamma_g"
            out.append(Check(crit, f"{name} energy relative drift",
                             _rel_drift([r.get("energy_invariant", math.nan) for r in rows]), cfg.checks.energy_drift))
    return out


# ------------------------------------------------------------------ driver

def run(cfg: RunConfig, root=None) -> RunResult:
    """Execute ``cfg`` and write its run directory under the output root."""
    out = output_root(root) / cfg.output.directory
    out.mkdir(parents=True, exist_ok=True)
    started = _dt.datetime.now(_dt.timezone.utc)
    t0 = time.perf_counter()
    final: dict = {}
    termination = {"reason": "completed", "value": None, "message": ""}
    if cfg.mode == "nonlinear":
        rows, termination, state, done = _run_nonlinear(cfg, out)
        checks = _nonlinear_checks(cfg, rows)
        final = _nonlinear_final(rows, state, done)
    elif cfg.mode in ("linear-capillary", "linear-gravity"):
        rows, termination = _run_linear(cfg, out)
        checks = _linear_checks(cfg, rows)
        final = _linear_final(rows)
    else:
        bound_seeds = range(cfg.seed + 1, cfg.seed + 101)
        checks = campaigns.operator_oracles(seed=cfg.seed) + campaigns.operator_bounds(seeds=bound_seeds)
        rows = [{k: v for k, v in c.to_dict().items() if k in CHECK_COLUMNS} for c in checks]
        final = {"checks_passed": sum(c.passed for c in checks), "checks_total": len(checks)}
    columns = columns_for(cfg)
    _write_csv(out / "timeseries.csv", columns, rows)
    wall = time.perf_counter() - t0
    if termination["reason"] != "completed":
        code = EXIT_ABORTED
    elif not all(c.passed for c in checks):
        code = EXIT_CHECK_FAILED
    else:
        code = EXIT_OK
    manifest = {
        "code_version": __version__,
        "config": config_to_dict(cfg),
        "started": started.isoformat(),
        "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "wall_seconds": wall,
        "termination": termination,
        "final": final,
        "checks": [c.to_dict() for c in checks],
        "columns": columns,
        "files": {"timeseries": "timeseries.csv",
                  "snapshots": "snapshots" if (out / "snapshots").is_dir() else None},
        "exit_code": code,
    }
    (out / "manifest.json").write_text(json.dumps(strict_json(manifest), indent=2, default=_json_default) + "\n")
    return RunResult(out, manifest, checks)
