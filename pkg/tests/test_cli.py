import json
from pathlib import Path

import pytest

from pfaffgeom import acceptance, cli
from pfaffgeom.errors import ConfigError

FIXTURES = Path(__file__).parent / "fixtures"

SPHERE = {
    "space": {"dimension": 3, "metric": "euclidean"},
    "form": {"catalog": "exact_sphere"},
    "task": "integrate",
    "integrate": {"kind": "normal_curve", "x0": [1, 0, 0], "v0": [0, 1, 0], "step": 0.01, "steps": 10},
}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def run(tmp_path, cfg, out="out"):
    return cli.main(["--config", write(tmp_path, cfg), "--out-dir", str(tmp_path / out)])


def last_error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_integrate_writes_csv_and_report(tmp_path):
    assert run(tmp_path, SPHERE) == 0
    csv = (tmp_path / "out" / "trajectory.csv").read_bytes()
    assert b"\r" not in csv
    lines = csv.decode().splitlines()
    assert len(lines) == 12
    assert lines[0] == "s,x0,x1,x2,v0,v1,v2,lambda,drift,speed"
    assert all(len(line.split(",")) == 10 for line in lines)
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["samples"] == 11
    assert report["drift_ok"] is True
    assert report["normality"]["is_normal"] is True


def test_reruns_are_byte_identical(tmp_path):
    assert run(tmp_path, SPHERE, "a") == 0
    assert run(tmp_path, SPHERE, "b") == 0
    for name in ("trajectory.csv", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_custom_output_names(tmp_path):
    cfg = dict(SPHERE, output={"trajectory_csv": "t/run.csv", "report_json": "r.json"})
    assert run(tmp_path, cfg) == 0
    assert (tmp_path / "out" / "t" / "run.csv").exists()
    assert (tmp_path / "out" / "r.json").exists()


@pytest.mark.parametrize("patch,path", [
    ({"task": "dance"}, "task"),
    ({"space": {"dimension": 3, "metric": "hyperbolic"}}, "space.metric"),
    ({"space": {"metric": "euclidean"}}, "space.dimension"),
    ({"form": {}}, "form"),
    ({"form": {"catalog": "nope"}}, "form.catalog"),
    ({"integrate": dict(SPHERE["integrate"], v0=[0, 1])}, "integrate.v0"),
    ({"integrate": dict(SPHERE["integrate"], step=-1)}, "integrate.step"),
    ({"integrate": dict(SPHERE["integrate"], kind="lorentz")}, "integrate.kind"),
    ({"tolerances": {"drift": -1}}, "tolerances.drift"),
    ({"tolerances": {"bogus": 1}}, "tolerances.bogus"),
    ({"output": {"log": "x"}}, "output.log"),
])
def test_config_errors_carry_paths(patch, path):
    with pytest.raises(ConfigError) as err:
        cli.parse_config(dict(SPHERE, **patch))
    assert err.value.path == path


def test_config_error_exit_code(tmp_path, capsys):
    assert run(tmp_path, dict(SPHERE, task="dance")) == 1
    diag = last_error(capsys)
    assert diag["error"] == "ConfigError" and diag["path"] == "task" and diag["exit_code"] == 1


def test_missing_and_invalid_files(tmp_path, capsys):
    assert cli.main(["--config", str(tmp_path / "none.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert cli.main(["--config", str(bad)]) == 1
    assert cli.main([]) == 1


def test_constraint_violation_exit_code(tmp_path, capsys):
    cfg = dict(SPHERE, integrate=dict(SPHERE["integrate"], v0=[1, 0, 0]))
    assert run(tmp_path, cfg) == 1
    assert last_error(capsys)["error"] == "ConstraintViolation"


def test_null_potential_exits_2(tmp_path, capsys):
    code = cli.main(["--config", str(FIXTURES / "em_null_potential.json"), "--out-dir", str(tmp_path)])
    assert code == 2
    diag = last_error(capsys)
    assert diag["error"] == "NullNormal"
    assert diag["point"] == [0.0, 0.0, 0.0, 0.0, 0.0]


def test_zero_form_in_curvature_exits_2(tmp_path, capsys):
    cfg = {"space": {"dimension": 3}, "form": {"catalog": "exact_sphere"}, "task": "curvature",
           "grid": {"center": [0, 0, 0], "half_width": 1.0, "samples_per_axis": 3}}
    assert run(tmp_path, cfg) == 2
    assert last_error(capsys)["error"] == "ZeroForm"


def test_classify_task(tmp_path):
    cfg = {"space": {"dimension": 3}, "form": {"catalog": "contact"}, "task": "classify",
           "grid": {"center": [0, 0, 0], "half_width": 1.0, "samples_per_axis": 2}}
    assert run(tmp_path, cfg) == 0
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["region"]["histogram"] == {"1": 8}


def test_polynomial_form(tmp_path):
    one = {"coeff": 1.0, "exponents": [0, 0, 0]}
    cfg = {"space": {"dimension": 3}, "task": "curvature",
           "form": {"polynomial": [[], [], [one]]},
           "grid": {"center": [0, 0, 0], "half_width": 0.0, "samples_per_axis": 1}}
    assert run(tmp_path, cfg) == 0
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep[0]["classification"] == "flat"


def test_task_override(tmp_path):
    p = write(tmp_path, dict(SPHERE, task="classify"))
    assert cli.main(["--config", p, "--task", "integrate", "--out-dir", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "trajectory.csv").exists()


def test_every_shipped_scenario_parses():
    names = acceptance.scenario_names()
    assert len(names) >= 8
    for name in names:
        cli.parse_config(acceptance.load_scenario(name), name)


def _fake_results(passed):
    return [{"id": 1, "name": "one", "passed": True, "measured": {"x": 1.0}},
            {"id": 2, "name": "two", "passed": passed, "measured": {"x": float("nan")}}]


@pytest.mark.parametrize("passed,code", [(True, 0), (False, 3)])
def test_verify_exit_codes(tmp_path, monkeypatch, capsys, passed, code):
    monkeypatch.setattr(acceptance, "run_all", lambda: _fake_results(passed))
    assert cli.main(["--task", "verify", "--out-dir", str(tmp_path)]) == code
    out = capsys.readouterr().out.splitlines()
    assert out[1].startswith("[PASS]" if passed else "[FAIL]")
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["criteria"][1]["measured"]["x"] is None
