import json
import math
import os
import subprocess
from fractions import Fraction

import pytest

import doobdynkin as dd

SCHEMAS = os.environ.get("DOOBDYNKIN_SCHEMAS")
CLI = os.environ.get("DOOBDYNKIN_CLI")

# Two hypotheses, two symmetric signals: posterior means 1/4 and 3/4, every risk 3/16.
BINARY_MODEL = {
    "thetas": [0, 1],
    "prior": ["1/2", "1/2"],
    "ys": ["a", "b"],
    "likelihood": [["3/4", "1/4"], ["1/4", "3/4"]],
    "psi": [0, 1],
}


def test_factorize_reports_phi_and_witness():
    ok = dd.factorize(["1", "2", "3"], [1, 1, 1], [5, 5, 7], ["a", "a", "b"])
    assert ok["status"] == "measurable"
    assert ok["phi"] == {"a": 5, "b": 7}
    bad = dd.factorize(["1", "2"], [1, 1], [1, 2], ["c", "c"])
    assert bad["status"] == "not_measurable"
    assert set(bad["witness"]) == {"1", "2"}


def test_condexp_is_exact():
    rows = dd.condexp(["1", "2", "3"], [1, 1, 2], [1, 2, 3], ["u", "u", "v"])
    table = {y: (phi, mass) for y, phi, mass in rows}
    assert table["u"] == (Fraction(3, 2), 2)
    assert table["v"] == (3, 2)
    assert isinstance(table["u"][0], Fraction)


def test_condexp_zero_mass_fiber_is_undefined():
    rows = dd.condexp(["1", "2"], [1, 0], [4, 9], ["u", "w"])
    assert ("w", None, 0) in rows


def test_project_recovers_affine_target():
    ys = [i / 10 for i in range(-20, 21)]
    fit = dd.project(ys, [1 + 2 * y for y in ys], [{"kind": "constant"}, {"kind": "power", "degree": 1}], ridge=0.0)
    assert fit["coefficients"] == pytest.approx([1.0, 2.0], abs=1e-10)
    assert fit["residual_risk"] == pytest.approx(0.0, abs=1e-18)


def test_project_rejects_degenerate_basis():
    with pytest.raises(dd.DegenerateBasis):
        dd.project([1.0, 1.0, 1.0], [0.0, 1.0, 2.0], [{"kind": "constant"}, {"kind": "power", "degree": 1}], ridge=0.0)


def test_fiducial_normal_closed_form():
    out = dd.fiducial(2.5, n=20000)
    assert out["estimate"] == 2.5
    assert out["posterior_risk"] == 1.0
    value, stderr = out["estimate_mc"]
    assert abs(value - 2.5) <= 4 * stderr
    assert len(out["samples"]) == 20000


def test_divergence_grows_with_truncation():
    out = dd.divergence([1.0, 10.0, 100.0], n=20000)
    risks = [p["bayes_risk"] for p in out["curve"]]
    assert risks == sorted(risks)
    assert out["diverged"]
    for p in out["curve"]:
        assert abs(p["posterior_risk"] - 1.0) <= 5 * p["posterior_stderr"]


def test_finite_risk_is_exact_and_consistent():
    out = dd.finite_risk(BINARY_MODEL)
    assert out["bayes_risk"] == Fraction(3, 16)
    assert out["optimal_action"] == {"a": Fraction(1, 4), "b": Fraction(3, 4)}
    assert out["posterior_risk"] == {"a": Fraction(3, 16), "b": Fraction(3, 16)}
    assert out["frequentist_risk"] == {0: Fraction(3, 16), 1: Fraction(3, 16)}
    assert out["discrepancy"] == 0


def test_riccati_matches_tanh():
    times, s = dd.riccati(tmax=2.0, dt=1e-3)
    worst = max(abs(v - math.tanh(t)) for t, v in zip(times, s))
    assert worst < 1e-9


def test_cli_exit_codes():
    assert dd.cli(["--help"])[0] == 0
    code, _, err = dd.cli(["no-such-command"])
    assert code == 2 and err
    code, _, err = dd.cli(["factorize", "--space", "/nonexistent.json", "--x", "X", "--y", "Y"])
    assert code == 1 and err.startswith("error:")


@pytest.fixture
def inputs(tmp_path):
    space = tmp_path / "space.json"
    space.write_text(json.dumps({"atoms": ["1", "2"], "weights": [1, 1],
                                 "maps": {"X": [1, 2], "Y": ["c", "c"], "G": ["1/3", 2], "Z": ["a", "b"]}}))
    model = tmp_path / "model.json"
    model.write_text(json.dumps(BINARY_MODEL))
    location = tmp_path / "location.json"
    location.write_text(json.dumps({"kind": "location", "noise": "normal", "psi": "identity"}))
    phi = tmp_path / "phi.json"
    phi.write_text(json.dumps({"kind": "optimal"}))
    samples = tmp_path / "samples.csv"
    samples.write_text("y,gamma\n" + "".join(f"{y / 10},{1 + 2 * y / 10 + (-1) ** y * 0.01}\n" for y in range(-30, 31)))
    basis = tmp_path / "basis.json"
    basis.write_text(json.dumps({"features": [{"kind": "constant"}, {"kind": "power", "degree": 1}]}))
    return {k: str(v) for k, v in locals().items() if k != "tmp_path"}


def run_cli(args):
    if CLI:
        p = subprocess.run([CLI, *args], capture_output=True, text=True, check=False)
        return p.returncode, p.stdout, p.stderr
    return dd.cli(args)


def validate(report, name):
    if not SCHEMAS:
        pytest.skip("DOOBDYNKIN_SCHEMAS not set")
    jsonschema = pytest.importorskip("jsonschema")
    with open(os.path.join(SCHEMAS, name)) as f:
        jsonschema.validate(report, json.load(f))


def test_cli_reports_match_schemas(inputs):
    cases = [
        (["factorize", "--space", inputs["space"], "--x", "X", "--y", "Y"], "factorize.schema.json"),
        (["factorize", "--space", inputs["space"], "--x", "X", "--y", "Z"], "factorize.schema.json"),
        (["risk", "--model", inputs["model"], "--phi", inputs["phi"]], "risk.schema.json"),
        (["risk", "--model", inputs["location"], "--phi", inputs["phi"], "--truncations", "1,10",
          "--samples", "20000"], "risk.schema.json"),
        (["fiducial-demo", "--y", "0.5", "--n", "20000", "--truncations", "1,10"], "fiducial.schema.json"),
        (["project", "--samples", inputs["samples"], "--basis", inputs["basis"]], "fit.schema.json"),
    ]
    for args, schema in cases:
        code, out, err = run_cli(args)
        assert code == 0, err
        validate(json.loads(out), schema)


def test_cli_finite_risk_report_is_exact(inputs):
    code, out, err = run_cli(["risk", "--model", inputs["model"], "--phi", inputs["phi"]])
    assert code == 0, err
    report = json.loads(out)
    assert report["bayes_risk"] == "3/16"
    assert report["decomposition"]["discrepancy"] == 0


def test_cli_condexp_csv(inputs):
    code, out, err = run_cli(["condexp", "--space", inputs["space"], "--gamma", "G", "--y", "Z"])
    assert code == 0, err
    assert out.splitlines() == ["y,phi,mass", "a,1/3,1", "b,2,1"]
