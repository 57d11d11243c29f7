"""Command-line entry point: ``capwave <command> ...``.

Exit codes: 0 every check passed, 1 a check failed, 2 bad usage or config,
3 a run aborted.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, campaigns
from .config import ChecksSpec, ConfigError, DiagnosticsSpec, GridSpec, InitialSpec, OutputSpec, RunConfig, StepperSpec, load_config
from .linear import omega
from .report import ReportError, write_report
from .runner import ENV_OUTPUT_ROOT, EXIT_OK, EXIT_USAGE, output_root, run, strict_json

__all__ = ["main", "build_parser", "dispersion_config"]


def _print_checks(checks):
    for c in checks:
        print(c.line())


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    res = run(cfg, args.output_root)
    term = res.manifest["termination"]
    value = "" if term["value"] is None else f" ({term['value']:.6g})"
    print(f"{res.directory}: {term['reason']}{value}")
    _print_checks(res.checks)
    return res.exit_code


def _cmd_report(args) -> int:
    out = Path(args.out) if args.out else output_root(args.output_root) / "report"
    try:
        rep, files = write_report(args.manifests, out)
    except ReportError as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(rep.text())
    print(f"wrote {files['json']}, {files['text']} and {len(files['figures'])} figure(s)")
    return rep.exit_code


def dispersion_config(k: int, n: int = 256, amplitude: float = 1e-5, steps_per_period: int = 16,
                      rel_tol: float = 1e-3) -> RunConfig:
    """One period of a small standing wave in mode ``k``, sampled every step."""
    dt = 2 * 3.141592653589793 / omega(k) / steps_per_period
    return RunConfig(
        mode="nonlinear",
        grid=GridSpec(n=n),
        initial=InitialSpec(kind="single-mode", mode=k, amplitude=amplitude),
        stepper=StepperSpec(dt=dt, steps=steps_per_period),
        diagnostics=DiagnosticsSpec(record_every=1, track_mode=k, full_fields=False),
        checks=ChecksSpec(frequency_rel_tol=rel_tol),
        output=OutputSpec(directory=f"dispersion-k{k}"),
    )


def _cmd_dispersion(args) -> int:
    if args.kmax < 1:
        print("--kmax must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    root = output_root(args.output_root)
    manifests, worst = [], EXIT_OK
    for k in range(1, args.kmax + 1):
        res = run(dispersion_config(k, n=args.n), root)
        manifests.append(res.directory / "manifest.json")
        worst = max(worst, res.exit_code)
    rep, files = write_report(manifests, root / "dispersion-report")
    sys.stdout.write(rep.text())
    return max(worst, rep.exit_code)


def _cmd_operators(args) -> int:
    cfg = RunConfig(mode="operators-test", seed=args.seed, output=OutputSpec(directory=f"operators-seed{args.seed}"))
    res = run(cfg, args.output_root)
    _print_checks(res.checks)
    return res.exit_code


def _campaign_manifest(directory: Path, name: str, checks) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "code_version": __version__,
        "mode": "campaign",
        "campaign": name,
        "termination": {"reason": "completed", "value": None, "message": ""},
        "checks": [c.to_dict() for c in checks],
        "exit_code": 0 if all(c.passed for c in checks) else 1,
    }
    path = directory / "manifest.json"
    path.write_text(json.dumps(strict_json(manifest), indent=2) + "\n")
    return path


def _cmd_gain(args) -> int:
    checks = campaigns.gain_dichotomy(args.k)
    root = output_root(args.output_root)
    path = _campaign_manifest(root / f"gain-k{args.k}", f"gain k={args.k}", checks)
    _print_checks(checks)
    for row in checks[0].detail["rows"]:
        print(f"  n={row['n']:5d}  unweighted={row['unweighted']:.6e}  weighted(t=1)={row['weighted']:.6e}")
    print(f"wrote {path}")
    return 0 if all(c.passed for c in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="capwave", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--output-root", default=None,
                   help=f"directory for run outputs (default: ${ENV_OUTPUT_ROOT}, else the working directory)")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute a YAML run configuration")
    r.add_argument("config")
    r.set_defaults(func=_cmd_run)

    rep = sub.add_parser("report", help="aggregate manifests into a pass/fail report with figures")
    rep.add_argument("manifests", nargs="*", help="manifest files or run directories")
    rep.add_argument("--out", default=None, help="report directory (default: <output root>/report)")
    rep.set_defaults(func=_cmd_report)

    d = sub.add_parser("dispersion", help="measure small-amplitude frequencies of modes 1..kmax")
    d.add_argument("--kmax", type=int, required=True)
    d.add_argument("--n", type=int, default=256)
    d.set_defaults(func=_cmd_dispersion)

    o = sub.add_parser("operators-test", help="operator oracles for SEED and bound ratios over seeds SEED+1..SEED+100")
    o.add_argument("--seed", type=int, required=True)
    o.set_defaults(func=_cmd_operators)

    g = sub.add_parser("gain", help="rough-data norm divergence against weighted-norm convergence")
    g.add_argument("--k", type=int, choices=(1, 2), required=True)
    g.set_defaults(func=_cmd_gain)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
