"""Aggregate run manifests into a pass/fail report with figures."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .campaigns import Check  # noqa: E402
from .runner import strict_json  # noqa: E402

__all__ = ["ReportError", "Report", "load_manifest", "build_report", "write_report", "DISPERSION_KEYS"]

DISPERSION_KEYS = ("k", "measured_omega", "omega", "rel_err")

# time-series columns worth plotting, in preference order
PLOT_COLUMNS = (
    "kappa_inf", "chord_arc", "E0_1", "E0_2", "E0_3", "theta_drift", "gamma_drift",
    "energy_linear", "energy_invariant", "window_mass", "gain_k1", "gain_k2",
)


class ReportError(ValueError):
    pass


@dataclass
class Report:
    runs: list
    checks: list
    dispersion: list

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks) and all(r["termination"] == "completed" for r in self.runs)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_dict(self) -> dict:
        return {"passed": self.passed, "runs": self.runs, "checks": self.checks, "dispersion": self.dispersion}

    def text(self) -> str:
        lines = []
        for r in self.runs:
            value = "" if r["termination_value"] is None else f" ({_num(r['termination_value'])})"
            lines.append(f"run {r['run']}: mode={r['mode']} termination={r['termination']}{value}")
        lines.append("")
        width = max((len(c["name"]) for c in self.checks), default=4)
        lines.append(f"{'result':6}  {'crit':4}  {'check':{width}}  {'measured':>12}  rel  {'tolerance':>12}  run")
        for c in self.checks:
            verdict = "PASS" if c["passed"] else "FAIL"
            lines.append(
                f"{verdict:6}  {c['criterion']:4}  {c['name']:{width}}  {_num(c['measured']):>12}  "
                f"{c['relation']:3}  {_num(c['tolerance']):>12}  {c['run']}"
            )
        if self.dispersion:
            lines += ["", f"{'k':>4}  {'measured omega':>16}  {'omega(k)':>16}  {'rel err':>10}"]
            for row in self.dispersion:
                lines.append(f"{row['k']:>4}  {row['measured_omega']:>16.10g}  {row['omega']:>16.10g}  {row['rel_err']:>10.3e}")
        lines += ["", "OVERALL: " + ("PASS" if self.passed else "FAIL")]
        return "\n".join(lines) + "\n"


def _num(v) -> str:
    if isinstance(v, str):
        return v
    return "nan" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.6g}"


def load_manifest(path) -> tuple[Path, dict]:
    """Accept a manifest file or a run directory containing ``manifest.json``."""
    p = Path(path)
    if p.is_dir():
        p = p / "manifest.json"
    try:
        data = json.loads(p.read_text())
    except FileNotFoundError:
        raise ReportError(f"no manifest at {p}") from None
    except json.JSONDecodeError as exc:
        raise ReportError(f"{p}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    for key in ("termination", "checks"):
        if key not in data:
            raise ReportError(f"{p}: missing key {key!r}")
    return p, data


def build_report(paths) -> Report:
    paths = list(paths)
    if not paths:
        raise ReportError("no manifests given")
    runs, checks, dispersion = [], [], []
    for path in paths:
        p, m = load_manifest(path)
        name = p.parent.name
        term = m["termination"]
        runs.append({
            "run": name,
            "manifest": str(p),
            "mode": m.get("config", {}).get("mode", m.get("mode", "campaign")),
            "termination": term["reason"],
            "termination_value": term.get("value"),
        })
        for d in m["checks"]:
            c = Check.from_dict(d)
            entry = c.to_dict()
            entry["run"] = name
            entry.pop("detail", None)
            checks.append(entry)
            if all(k in c.detail for k in DISPERSION_KEYS):
                dispersion.append({k: c.detail[k] for k in DISPERSION_KEYS})
    dispersion.sort(key=lambda r: r["k"])
    return Report(runs, checks, dispersion)


def _read_series(csv_path: Path) -> dict:
    with csv_path.open() as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return {}
    out = {}
    for col in rows[0]:
        try:
            out[col] = [float(r[col]) for r in rows]
        except ValueError:
            continue
    return out


def _plot_run(manifest_path: Path, out: Path) -> Path | None:
    csv_path = manifest_path.parent / "timeseries.csv"
    if not csv_path.is_file():
        return None
    series = _read_series(csv_path)
    if "t" not in series:
        return None
    cols = [c for c in PLOT_COLUMNS if c in series and any(math.isfinite(v) for v in series[c])]
    if not cols:
        return None
    fig, axes = plt.subplots(len(cols), 1, figsize=(6, 1.8 * len(cols)), sharex=True, squeeze=False)
    for ax, col in zip(axes[:, 0], cols):
        ax.plot(series["t"], series[col], lw=1)
        ax.set_ylabel(col, fontsize=8)
        ax.tick_params(labelsize=7)
    axes[-1, 0].set_xlabel("t")
    fig.suptitle(manifest_path.parent.name, fontsize=9)
    fig.tight_layout()
    path = out / f"{manifest_path.parent.name}.png"
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def _plot_dispersion(rows, out: Path) -> Path:
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    k = [r["k"] for r in rows]
    ax.plot(k, [r["omega"] for r in rows], "-", label="omega(k)")
    ax.plot(k, [r["measured_omega"] for r in rows], "o", label="measured")
    ax.set_xlabel("k")
    ax.set_ylabel("frequency")
    ax.legend()
    fig.tight_layout()
    path = out / "dispersion.png"
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def _plot_checks(checks, out: Path) -> Path:
    """Margin of every check: measured over tolerance (or the inverse for lower bounds)."""
    fig, ax = plt.subplots(figsize=(6, max(2.0, 0.25 * len(checks) + 1)))
    margins, labels, colors = [], [], []
    for c in checks:
        m, tol = c["measured"], c["tolerance"]
        if m is None or not tol:
            r = math.nan
        elif c["relation"] == "<=":
            r = m / tol
        else:
            r = tol / m if m else math.inf
        margins.append(max(r, 1e-17) if math.isfinite(r) else 1e3)
        labels.append(f"[{c['criterion']}] {c['name']}"[:60])
        colors.append("tab:green" if c["passed"] else "tab:red")
    y = range(len(checks))
    ax.barh(list(y), margins, color=colors, log=True)
    ax.axvline(1.0, color="k", lw=0.8)
    ax.set_yticks(list(y))
    ax.set_yticklabels(labels, fontsize=6)
    ax.invert_yaxis()
    ax.set_xlabel("measured / bound (pass < 1)")
    fig.tight_layout()
    path = out / "checks.png"
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def write_report(paths, out_dir) -> tuple[Report, dict]:
    """Build the report and write ``report.json``, ``report.txt`` and ``figures/*.png``."""
    rep = build_report(paths)
    out = Path(out_dir)
    figs = out / "figures"
    figs.mkdir(parents=True, exist_ok=True)
    written = []
    for r in rep.runs:
        p = _plot_run(Path(r["manifest"]), figs)
        if p:
            written.append(p)
    if rep.dispersion:
        written.append(_plot_dispersion(rep.dispersion, figs))
    if rep.checks:
        written.append(_plot_checks(rep.checks, figs))
    data = rep.to_dict()
    data["figures"] = [str(p) for p in written]
    (out / "report.json").write_text(json.dumps(strict_json(data), indent=2) + "\n")
    (out / "report.txt").write_text(rep.text())
    return rep, {"json": out / "report.json", "text": out / "report.txt", "figures": written}
