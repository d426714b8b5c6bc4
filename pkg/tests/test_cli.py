import json
from pathlib import Path

import pytest

from sasakian_tw import cli, report

GOLDEN = Path(__file__).parent / "golden"


def run(args, tmp_path, name="r.json"):
    out = tmp_path / name
    code = cli.main([*args, "--json-out", str(out), "--quiet"])
    return code, json.loads(out.read_text())


def test_constants_matches_golden(tmp_path):
    code, rep = run(["constants", "--m", "1"], tmp_path)
    assert code == 0
    assert report.validate(rep) == []
    golden = json.loads((GOLDEN / "constants_m1.json").read_text())
    assert report.without_timestamp(rep) == golden
    assert rep["sections"]["constants"]["corollary_bound"] == pytest.approx(0.2)


def test_fixture_report_matches_golden(tmp_path):
    code, rep = run(["pseudohopf", "--fixtures"], tmp_path)
    assert code == 0
    assert report.validate(rep) == []
    golden = json.loads((GOLDEN / "pseudohopf_fixtures.json").read_text())
    assert [r["check"] for r in rep["checks"]] == [r["check"] for r in golden["checks"]]
    assert rep["sections"] == golden["sections"]


def test_axioms_pass_and_fault_injection(tmp_path):
    code, rep = run(["axioms", "--samples", "5"], tmp_path)
    assert code == 0 and rep["status"] == "pass"
    assert rep["deta_convention"]["factor"] == 0.5
    code, rep = run(["axioms", "--samples", "5", "--inject-fault", "phi-sign"], tmp_path)
    assert code == 1
    failed = {r["check"] for r in rep["checks"] if not r["passed"]}
    assert "phi_pairing" in failed and "k_contact" in failed


def test_axioms_m2(tmp_path):
    code, _ = run(["axioms", "--m", "2", "--samples", "3"], tmp_path)
    assert code == 0


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps({"m": 0, "bogus": True}))
    assert cli.main(["axioms", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "/m" in err and "bogus" in err
    assert cli.main(["surface"]) == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["axioms", "--strategy", "symbolic"])
    assert info.value.code == 2


def test_rejection_breakdown_exit_3(tmp_path):
    # most box points cannot be projected onto a tiny sphere around an off-box centre
    code, rep = run(["surface", "--f", "(x-40)^2 + y^2 + z^2", "--level", "1", "--samples", "4"], tmp_path)
    assert code == 3 and rep["status"] == "breakdown"


def test_surface_plane_report(tmp_path):
    cfg = tmp_path / "plane.json"
    cfg.write_text(json.dumps({"m": 1, "f": "x+z", "level": 0, "samples": 8}))
    code, rep = run(["surface", "--config", str(cfg)], tmp_path)
    assert code == 0
    names = {r["check"]: r for r in rep["checks"]}
    assert names["example_shape_operator"]["passed"] and names["example_minimal"]["passed"]
    assert rep["verdicts"]["xi_tangent"] is False
    assert rep["config"]["f"] == "x+z"


def test_exploratory_surface_is_report_only(tmp_path):
    code, rep = run(["surface", "--f", "y", "--level", "0", "--samples", "5"], tmp_path)
    assert "example_minimal" not in {r["check"] for r in rep["checks"]}
    assert code in (0, 1)


def test_tolerance_override_reaches_report(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"m": 1, "samples": 2, "tolerances": {"geometry": 1e-11}}))
    _, rep = run(["axioms", "--config", str(cfg)], tmp_path)
    assert rep["config"]["tolerances"]["geometry"] == 1e-11
    assert all(r["tolerance"] == 1e-11 for r in rep["checks"])


def test_reports_are_deterministic(tmp_path):
    args = ["biharmonic", "--f", "x^2 + 1.3*y^2", "--level", "1", "--samples", "4"]
    _, a = run(args, tmp_path, "a.json")
    _, b = run(args, tmp_path, "b.json")
    assert report.dumps(report.without_timestamp(a)) == report.dumps(report.without_timestamp(b))
    assert report.validate(a) == []
