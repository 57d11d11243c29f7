"""Run configuration: YAML schema, defaults, validation and round-trip emission.

The schema is a fixed set of sections, each with a fixed set of keys.
Unknown keys are errors.  Errors name the offending dotted key and, when
the value came from a file, its line number.  ``docs/config.md`` lists every
key with its default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

__all__ = [
    "ConfigError",
    "GridSpec",
    "PhysicsSpec",
    "InitialSpec",
    "StepperSpec",
    "LinearSpec",
    "DiagnosticsSpec",
    "ChecksSpec",
    "OutputSpec",
    "RunConfig",
    "MODES",
    "INITIAL_KINDS",
    "load_config",
    "parse_config",
    "config_from_dict",
    "config_to_dict",
    "emit_config",
]

MODES = ("nonlinear", "linear-capillary", "linear-gravity", "operators-test")

# initial-data generators and the parameters each one accepts
INITIAL_KINDS = {
    "flat": ("gamma0",),
    "single-mode": ("mode", "amplitude", "gamma0"),
    "traveling-mode": ("mode", "amplitude"),
    "multi-mode": ("amplitude", "modes"),
    "two-mode": ("amplitude",),
    "analytic-traveling": ("amplitude", "rho"),
    "near-contact": ("amplitude",),
    "gaussian-packet": ("amplitude", "width", "carrier", "center"),
    "rough-tail": ("amplitude", "width", "exponent", "tail_amplitude", "envelope_width", "k_min"),
    "random-bandlimited": ("max_mode", "decay"),
}
# per-kind overrides of the InitialSpec defaults
KIND_DEFAULTS = {
    "near-contact": {"amplitude": 1.8},
    "gaussian-packet": {"amplitude": 1.0},
    "rough-tail": {"amplitude": 1.0},
    "random-bandlimited": {},
}
NONLINEAR_KINDS = ("flat", "single-mode", "traveling-mode", "multi-mode", "two-mode", "analytic-traveling", "near-contact")
LINEAR_KINDS = ("gaussian-packet", "rough-tail", "random-bandlimited")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted field name, ``line`` is 1-based."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = ""
        if key:
            where += f"{key}: "
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(where + message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class GridSpec:
    n: int = 256
    period: float = 2 * math.pi


@dataclass(frozen=True)
class PhysicsSpec:
    inv_We: float = 2.0
    g: float = 0.0


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "flat"
    gamma0: float = 0.0
    mode: int = 1
    amplitude: float = 1e-3
    modes: tuple = (1, 2, 3)
    rho: float = 0.5
    width: float = 1.0
    carrier: float = 0.0
    center: float = 0.0
    exponent: float = 4.5
    tail_amplitude: float = 0.3
    envelope_width: float = 2.0
    k_min: float = 1.0
    max_mode: int = 16
    decay: float = 1.0


@dataclass(frozen=True)
class StepperSpec:
    dt: float | None = None
    steps: int = 100
    cutoff_fraction: float = 2 / 3
    floor: float = 1e-13
    gamma_t_tol: float = 1e-12
    gamma_t_max_iter: int = 200
    Q_min: float = 0.5
    kappa_max: float = 0.25


@dataclass(frozen=True)
class LinearSpec:
    t_end: float = 1.0
    samples: int = 11
    window_radius: float = 250.0
    taper_width: float = 30.0


@dataclass(frozen=True)
class DiagnosticsSpec:
    record_every: int = 10
    sobolev_orders: tuple = (0, 1, 2)
    energy_k: int = 2
    full_fields: bool = True
    slope_band: tuple = (8, 40)
    gain_k: tuple = (1, 2)
    track_mode: int = 0


@dataclass(frozen=True)
class ChecksSpec:
    max_drift: float | None = None
    energy_drift: float | None = None
    e0_ratio: float | None = None
    frequency_rel_tol: float | None = None


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "run"
    snapshot_every: int = 0


@dataclass(frozen=True)
class RunConfig:
    mode: str = "nonlinear"
    seed: int = 0
    grid: GridSpec = field(default_factory=GridSpec)
    physics: PhysicsSpec = field(default_factory=PhysicsSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    stepper: StepperSpec = field(default_factory=StepperSpec)
    linear: LinearSpec = field(default_factory=LinearSpec)
    diagnostics: DiagnosticsSpec = field(default_factory=DiagnosticsSpec)
    checks: ChecksSpec = field(default_factory=ChecksSpec)
    output: OutputSpec = field(default_factory=OutputSpec)


SECTIONS = {
    "grid": GridSpec,
    "physics": PhysicsSpec,
    "initial": InitialSpec,
    "stepper": StepperSpec,
    "linear": LinearSpec,
    "diagnostics": DiagnosticsSpec,
    "checks": ChecksSpec,
    "output": OutputSpec,
}
TOP_SCALARS = ("mode", "seed")

# expected scalar type of every key; tuples hold element types
_INT_KEYS = {"n", "seed", "mode", "steps", "gamma_t_max_iter", "samples", "record_every", "energy_k",
             "track_mode", "snapshot_every", "max_mode"}
_INT_TUPLES = {"modes", "sobolev_orders", "slope_band", "gain_k"}
_BOOL_KEYS = {"full_fields"}
_STR_KEYS = {"kind", "directory"}


# ------------------------------------------------------------------ parsing

def _line_map(node, prefix="", out=None) -> dict:
    """Dotted key -> 1-based line number, from a composed YAML node tree."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = f"{prefix}.{k.value}" if prefix else str(k.value)
            out[key] = k.start_mark.line + 1
            _line_map(v, key, out)
    return out


def _coerce(key: str, leaf: str, value, lines: dict):
    line = lines.get(key)
    if leaf in _BOOL_KEYS:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", key, line)
        return value
    if leaf in _STR_KEYS:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", key, line)
        return value
    if leaf in _INT_TUPLES:
        if not isinstance(value, (list, tuple)) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"expected a list of integers, got {value!r}", key, line)
        return tuple(value)
    if leaf == "mode" and key == "mode":
        if value not in MODES:
            raise ConfigError(f"unknown mode {value!r}; expected one of {', '.join(MODES)}", key, line)
        return value
    if value is None:
        return None
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}", key, line)
    if leaf in _INT_KEYS:
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", key, line)
        return value
    # floats; YAML 1.1 reads "1e-5" (no dot) as a string
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"expected a number, got {value!r}", key, line) from None
    if not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", key, line)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {value!r}", key, line)
    return value


def config_from_dict(data: dict, lines: dict | None = None) -> RunConfig:
    """Validate a plain mapping (as parsed from YAML) into a ``RunConfig``."""
    lines = lines or {}
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping")
    top = {}
    for key, value in data.items():
        if key in TOP_SCALARS:
            top[key] = _coerce(key, key, value, lines)
        elif key in SECTIONS:
            if value is None:
                value = {}
            if not isinstance(value, dict):
                raise ConfigError("expected a mapping", key, lines.get(key))
            cls = SECTIONS[key]
            names = {f.name for f in fields(cls)}
            section = {}
            for sub, v in value.items():
                dotted = f"{key}.{sub}"
                if sub not in names:
                    raise ConfigError(f"unknown key {sub!r}", dotted, lines.get(dotted))
                section[sub] = _coerce(dotted, sub, v, lines)
            if key == "initial":
                kind = section.get("kind", InitialSpec.kind)
                if kind not in INITIAL_KINDS:
                    raise ConfigError(f"unknown initial-data kind {kind!r}", "initial.kind", lines.get("initial.kind"))
                for sub in section:
                    if sub != "kind" and sub not in INITIAL_KINDS[kind]:
                        raise ConfigError(f"key {sub!r} does not apply to initial kind {kind!r}", f"initial.{sub}",
                                          lines.get(f"initial.{sub}"))
                for sub, v in KIND_DEFAULTS.get(kind, {}).items():
                    section.setdefault(sub, v)
            top[key] = cls(**section)
        else:
            raise ConfigError(f"unknown key {key!r}", key, lines.get(key))
    cfg = RunConfig(**top)
    _validate(cfg, lines)
    return cfg


def _positive(cfg_value, key, lines, allow_zero=False):
    if cfg_value is None:
        return
    if not (cfg_value > 0 or (allow_zero and cfg_value == 0)):
        bound = "non-negative" if allow_zero else "positive"
        raise ConfigError(f"must be {bound}, got {cfg_value!r}", key, lines.get(key))


def _validate(cfg: RunConfig, lines: dict):
    g = cfg.grid
    if g.n < 8 or g.n % 2:
        raise ConfigError(f"must be an even integer >= 8, got {g.n}", "grid.n", lines.get("grid.n"))
    _positive(g.period, "grid.period", lines)
    _positive(cfg.physics.inv_We, "physics.inv_We", lines, allow_zero=True)
    _positive(cfg.physics.g, "physics.g", lines, allow_zero=True)
    st = cfg.stepper
    for name in ("dt", "floor", "gamma_t_tol", "Q_min", "kappa_max", "cutoff_fraction"):
        _positive(getattr(st, name), f"stepper.{name}", lines, allow_zero=(name == "floor"))
    if st.cutoff_fraction > 1:
        raise ConfigError("must lie in (0, 1]", "stepper.cutoff_fraction", lines.get("stepper.cutoff_fraction"))
    if st.gamma_t_tol < 1e-14:
        raise ConfigError("must be at least 1e-14", "stepper.gamma_t_tol", lines.get("stepper.gamma_t_tol"))
    for name in ("steps", "gamma_t_max_iter"):
        _positive(getattr(st, name), f"stepper.{name}", lines)
    lin = cfg.linear
    _positive(lin.t_end, "linear.t_end", lines, allow_zero=True)
    _positive(lin.samples, "linear.samples", lines)
    _positive(lin.window_radius, "linear.window_radius", lines)
    _positive(lin.taper_width, "linear.taper_width", lines)
    d = cfg.diagnostics
    _positive(d.record_every, "diagnostics.record_every", lines)
    _positive(d.energy_k, "diagnostics.energy_k", lines)
    _positive(d.track_mode, "diagnostics.track_mode", lines, allow_zero=True)
    if len(d.slope_band) != 2 or not 0 < d.slope_band[0] < d.slope_band[1]:
        raise ConfigError("expected [lo, hi] with 0 < lo < hi", "diagnostics.slope_band", lines.get("diagnostics.slope_band"))
    if any(s < 0 for s in d.sobolev_orders):
        raise ConfigError("orders must be non-negative", "diagnostics.sobolev_orders", lines.get("diagnostics.sobolev_orders"))
    if any(k not in (1, 2) for k in d.gain_k):
        raise ConfigError("gain orders must be 1 or 2", "diagnostics.gain_k", lines.get("diagnostics.gain_k"))
    for f in fields(ChecksSpec):
        _positive(getattr(cfg.checks, f.name), f"checks.{f.name}", lines)
    _positive(cfg.output.snapshot_every, "output.snapshot_every", lines, allow_zero=True)
    if not cfg.output.directory:
        raise ConfigError("must not be empty", "output.directory", lines.get("output.directory"))

    kind = cfg.initial.kind
    if cfg.mode == "nonlinear":
        if st.dt is None:
            raise ConfigError("required in nonlinear mode", "stepper.dt", lines.get("stepper"))
        if kind not in NONLINEAR_KINDS:
            raise ConfigError(f"kind {kind!r} is not a nonlinear generator", "initial.kind", lines.get("initial.kind"))
        _positive(cfg.physics.inv_We, "physics.inv_We", lines)
    elif cfg.mode in ("linear-capillary", "linear-gravity"):
        if kind not in LINEAR_KINDS:
            raise ConfigError(f"kind {kind!r} is not a linear generator", "initial.kind", lines.get("initial.kind"))
        if cfg.mode == "linear-capillary" and (cfg.physics.inv_We <= 0 or cfg.physics.g != 0):
            raise ConfigError("linear-capillary needs inv_We > 0 and g = 0", "physics", lines.get("physics"))
        if cfg.mode == "linear-gravity" and (cfg.physics.g <= 0 or cfg.physics.inv_We != 0):
            raise ConfigError("linear-gravity needs g > 0 and inv_We = 0", "physics", lines.get("physics"))
        # periodic data has no window
        if kind != "random-bandlimited" and lin.window_radius + lin.taper_width >= g.period / 2:
            raise ConfigError("window does not fit inside the box", "linear.window_radius", lines.get("linear.window_radius"))


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{source}: YAML parse error: {problem}", line=line) from exc
    lines = _line_map(node) if node is not None else {}
    return config_from_dict(data, lines)


def load_config(path) -> RunConfig:
    """Read, validate and default a YAML run configuration."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, str(path))


def config_to_dict(cfg: RunConfig) -> dict:
    """Plain mapping with every key; initial-data keys limited to the chosen kind."""
    out = {"mode": cfg.mode, "seed": cfg.seed}
    for name in SECTIONS:
        spec = getattr(cfg, name)
        section = {}
        for f in fields(spec):
            if name == "initial" and f.name != "kind" and f.name not in INITIAL_KINDS[spec.kind]:
                continue
            v = getattr(spec, f.name)
            section[f.name] = list(v) if isinstance(v, tuple) else v
        out[name] = section
    return out


def emit_config(cfg: RunConfig) -> str:
    """YAML text that ``parse_config`` maps back to an equal ``RunConfig``."""
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=None)


def with_changes(cfg: RunConfig, **sections) -> RunConfig:
    """Copy of ``cfg`` with whole sections or top-level scalars replaced."""
    return replace(cfg, **sections)
