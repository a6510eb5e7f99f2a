import json
import math

import jsonschema
import pytest

from dyndet.cli import (
    COMMANDS,
    DEFAULTS,
    EXIT_INVALID,
    EXIT_OK,
    EXIT_UNCONVERGED,
    RESULT_SCHEMAS,
    ConfigError,
    main,
    parse_config,
)

SINE = {
    "schema_version": 1,
    "family": {"degree": 2, "sin": [["0", "0.15915494309189533577"]], "tau_domain": ["-0.1", "0.1"]},
    "observable": {"cos": [1]},
}
DOUBLING_ZERO = {
    "schema_version": 1,
    "family": {"degree": 2},
    "weight": {"kind": "potential", "potential": {}},
}
HARMONIC2 = {
    "schema_version": 1,
    "family": {"degree": 2, "sin": [[0], ["0", "0.079577471545947667884"]], "tau_domain": [-0.1, 0.1]},
    "observable": {"cos": [1]},
}
FAST = ["--bins", "4096", "--n-max", "8"]


def write(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def invoke(tmp_path, command, doc, *extra, out="out"):
    out_dir = tmp_path / out
    code = main([command, "--config", write(tmp_path, doc), "--out", str(out_dir), *extra])
    return code, out_dir


def test_pressure_zero_weight(tmp_path):
    code, out = invoke(tmp_path, "pressure", DOUBLING_ZERO)
    assert code == EXIT_OK
    doc = json.loads((out / "pressure.json").read_text())
    assert doc["z_star"] == pytest.approx(0.5, abs=1e-12)
    assert doc["pressure"] == pytest.approx(0.6931471805599453, abs=1e-12)
    jsonschema.validate(doc, RESULT_SCHEMAS["pressure"])


def test_pressure_srb_weight(tmp_path):
    code, out = invoke(tmp_path, "pressure", SINE, "--tau", "0.05")
    doc = json.loads((out / "pressure.json").read_text())
    assert code == EXIT_OK
    assert doc["z_star"] == pytest.approx(1.0, abs=1e-10)


def test_periodic_points_doubling(tmp_path):
    code, out = invoke(tmp_path, "periodic-points", {"schema_version": 1, "family": {"degree": 2}}, "--period", "2")
    assert code == EXIT_OK
    lines = (out / "periodic_points.csv").read_text().splitlines()
    assert lines[0] == "itinerary,x,residual"
    xs = sorted(float(line.split(",")[1]) for line in lines[1:])
    assert xs == pytest.approx([0.0, 1 / 3, 2 / 3], abs=1e-15)


def test_traces_and_coeffs(tmp_path):
    code, out = invoke(tmp_path, "traces", SINE, "--n-max", "5")
    assert code == EXIT_OK
    rows = (out / "traces.csv").read_text().splitlines()
    assert rows[0] == "n,b,bu,btau,butau" and len(rows) == 6
    code, out = invoke(tmp_path, "det-coeffs", SINE, "--n-max", "5")
    rows = (out / "det_coeffs.csv").read_text().splitlines()
    assert rows[0] == "n,a,au,atau,autau" and len(rows) == 7
    assert rows[2].split(",")[1] == "-1"  # a_1 of the doubling map


def test_float_format(tmp_path):
    code, out = invoke(tmp_path, "periodic-points", SINE, "--period", "3", "--tau", "0.05")
    x = (out / "periodic_points.csv").read_text().splitlines()[2].split(",")[1]
    assert float(x) == float(format(float(x), ".17g"))
    assert len(x.replace("0.", "").lstrip("0")) >= 15


def test_response_commands(tmp_path):
    code, out = invoke(tmp_path, "srb-average", SINE, "--tau", "0.05")
    assert code == EXIT_OK
    doc = json.loads((out / "srb_average.json").read_text())
    jsonschema.validate(doc, RESULT_SCHEMAS["response"])
    assert doc["linear_response"] is None and doc["converged"]

    code, out = invoke(tmp_path, "linear-response", HARMONIC2)
    doc = json.loads((out / "linear_response.json").read_text())
    jsonschema.validate(doc, RESULT_SCHEMAS["response"])
    assert doc["linear_response"] == pytest.approx(-0.25, abs=1e-9)
    assert (out / "convergence.csv").read_text().startswith("n,a,n_a,au,n_atau,autau\n")

    code, out = invoke(tmp_path, "linear-response", SINE)
    assert abs(json.loads((out / "linear_response.json").read_text())["linear_response"]) < 1e-12


def test_oracle_compare(tmp_path):
    code, out = invoke(tmp_path, "oracle-compare", HARMONIC2, *FAST)
    assert code == EXIT_OK
    doc = json.loads((out / "oracle_compare.json").read_text())
    jsonschema.validate(doc, RESULT_SCHEMAS["oracle-compare"])
    assert doc["srb_average"]["abs_diff"] < 1e-3
    assert doc["linear_response"]["abs_diff"] < 5e-3


def test_ulam_density(tmp_path):
    code, out = invoke(tmp_path, "ulam-density", SINE, "--bins", "64")
    lines = (out / "density.csv").read_text().splitlines()
    assert lines[0] == "bin,value" and len(lines) == 65
    values = [float(line.split(",")[1]) for line in lines[1:]]
    assert math.fsum(values) / 64 == pytest.approx(1.0, abs=1e-12)


def test_unconverged_exit_code(tmp_path):
    rough = {
        "schema_version": 1,
        "family": {"degree": 2, "sin": [["0.15", "0.1"]], "tau_domain": [-0.01, 0.01]},
        "observable": {"cos": [1]},
    }
    code, out = invoke(tmp_path, "linear-response", rough, "--n-max", "4")
    assert code == EXIT_UNCONVERGED
    doc = json.loads((out / "linear_response.json").read_text())
    assert doc["converged"] is False
    jsonschema.validate(doc, RESULT_SCHEMAS["response"])


@pytest.mark.parametrize(
    "doc, message",
    [
        ({"family": {"degree": 2}}, "schema_version"),
        ({"schema_version": 1, "family": {"degree": 2, "sin": [[0.5]]}}, "not uniformly expanding"),
        ({"schema_version": 1, "family": {"degree": 1}}, "degree"),
        ({"schema_version": 1, "family": {"degree": 2}, "params": {"colour": 1}}, "unknown"),
        ({"schema_version": 1, "family": {"degree": 2, "sin": [["abc"]]}}, "parse"),
        ({"schema_version": 1, "family": {"degree": 2}, "weight": {"kind": "gibbs"}}, "weight.kind"),
    ],
)
def test_invalid_configs(doc, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(doc)


def test_invalid_exit_codes(tmp_path, capsys):
    code, _ = invoke(tmp_path, "pressure", {"schema_version": 1, "family": {"degree": 2, "sin": [[0.5]]}})
    assert code == EXIT_INVALID
    assert "not uniformly expanding" in capsys.readouterr().err
    code, _ = invoke(tmp_path, "srb-average", SINE, "--tau", "0.5")
    assert code == EXIT_INVALID
    code, _ = invoke(tmp_path, "srb-average", SINE, "--workers", "0")
    assert code == EXIT_INVALID


def test_params_override_defaults():
    cfg = parse_config({**SINE, "params": {"n_max": "9", "fd_step": "0.02"}})
    assert cfg.params["n_max"] == 9 and cfg.params["fd_step"] == 0.02
    assert cfg.params["bins"] == DEFAULTS["bins"]


@pytest.mark.parametrize("command", COMMANDS)
def test_deterministic_outputs(tmp_path, command):
    doc = DOUBLING_ZERO if command == "pressure" else SINE
    tau = "0.0" if command == "pressure" else "0.05"
    extra = ["--tau", tau, "--period", "9", *FAST]
    outputs = []
    for i, workers in enumerate(("1", "1", "8")):
        code, out = invoke(tmp_path, command, doc, *extra, "--workers", workers, out=f"run{i}")
        assert code == EXIT_OK
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outputs[0] == outputs[1] == outputs[2]
    assert outputs[0]
