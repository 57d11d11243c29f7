import json

import pytest

from capwave.campaigns import Check
from capwave.config import parse_config
from capwave.report import ReportError, build_report, load_manifest, write_report
from capwave.runner import run

SMALL = """
mode: nonlinear
grid: {n: 64}
initial: {kind: traveling-mode, mode: 1, amplitude: 1.0e-3}
stepper: {dt: 0.02, steps: 6}
diagnostics: {record_every: 2}
output: {directory: %s}
"""


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    good = run(parse_config(SMALL % "good" + "checks: {max_drift: 1.0}\n"), root)
    bad = run(parse_config(SMALL % "bad" + "checks: {max_drift: 1.0e-30}\n"), root)
    return good.directory, bad.directory


def strict(path):
    def reject(token):
        raise ValueError(token)
    return json.loads(path.read_text(), parse_constant=reject)


def test_empty_and_missing_inputs(tmp_path):
    with pytest.raises(ReportError, match="no manifests"):
        build_report([])
    with pytest.raises(ReportError, match="no manifest"):
        load_manifest(tmp_path)
    (tmp_path / "manifest.json").write_text("{")
    with pytest.raises(ReportError, match="invalid JSON"):
        load_manifest(tmp_path)
    (tmp_path / "manifest.json").write_text("{}")
    with pytest.raises(ReportError, match="missing key"):
        load_manifest(tmp_path)


def test_passing_run_gives_exit_zero(runs):
    rep = build_report([runs[0]])
    assert rep.passed and rep.exit_code == 0
    assert rep.runs[0]["run"] == "good"
    assert "OVERALL: PASS" in rep.text()


def test_any_failed_check_fails_the_report(runs):
    rep = build_report(list(runs))
    assert not rep.passed and rep.exit_code == 1
    assert [c["run"] for c in rep.checks if not c["passed"]] == ["bad"]
    assert "OVERALL: FAIL" in rep.text()


def test_aborted_run_fails_the_report(tmp_path, configs_dir):
    from capwave.config import load_config

    res = run(load_config(configs_dir / "near_contact.yaml"), tmp_path)
    rep = build_report([res.directory / "manifest.json"])
    assert rep.runs[0]["termination"] == "chord-arc-abort"
    assert rep.exit_code == 1


def test_dispersion_rows_are_collected_and_sorted(tmp_path):
    checks = [
        Check("1", f"dispersion k={k}", 1e-9, 1e-3, detail={"k": k, "measured_omega": 1.0, "omega": 1.0, "rel_err": 1e-9})
        for k in (3, 1)
    ]
    m = {"termination": {"reason": "completed"}, "checks": [c.to_dict() for c in checks]}
    (tmp_path / "manifest.json").write_text(json.dumps(m))
    rep = build_report([tmp_path])
    assert [r["k"] for r in rep.dispersion] == [1, 3]
    assert "measured omega" in rep.text()


def test_written_report_has_figures_and_strict_json(runs, tmp_path):
    rep, files = write_report(list(runs), tmp_path / "rep")
    data = strict(files["json"])
    assert data["passed"] is False
    assert files["text"].read_text() == rep.text()
    names = {p.name for p in files["figures"]}
    assert "checks.png" in names
    assert len(files["figures"]) >= 3
    for p in files["figures"]:
        assert p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
