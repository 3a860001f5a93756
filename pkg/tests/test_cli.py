import csv
import io
import json
import subprocess
import sys

import pytest

from specgap.cli import load_spec, parse_spec, run
from specgap.errors import ParseError, SchemaError


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, doc, name="spec.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


BDMC = {"model": "bdmc", "params": {"p": "4/5", "q": "1/10", "r": "1/10", "r0": "1/10"}}


def test_tau_flag_model():
    code, out, _ = call("tau", "--model", "rw-g2d1", "--a", "0.5,0.3333,0,0.1667", "--format", "json")
    assert code == 0
    assert json.loads(out)["tau"] == pytest.approx(0.1805, abs=1e-4)


def test_tau_exact_rationals():
    code, out, _ = call("tau", "--model", "rw-g2d1", "--a", "1/2,1/3,0,1/6", "--format", "json")
    assert json.loads(out)["tau"] == pytest.approx((37 ** 0.5 - 5) / 6, abs=1e-12)


def test_alpha0_human_output():
    code, out, _ = call("alpha0", "--model", "rw-g2d1")
    assert code == 0 and "alpha0" in out and "0.62416" in out


def test_missing_spec_is_input_error():
    code, _, err = call("rho2", "--spec", "missing.json")
    assert code == 2 and "missing.json" in err


def test_usage_error_exit_2():
    code, _, _ = call("nonsense")
    assert code == 2


def test_no_chain_given():
    code, _, err = call("tau")
    assert code == 2 and "--spec" in err


def test_numerical_error_exit_3():
    # positive mean increment: psi has no root below 1
    code, _, err = call("tau", "--model", "rw-g2d1", "--a", "1/10,1/10,1/10,7/10")
    assert code == 3 and "numerical" in err


def test_load_spec_bdmc(tmp_path):
    doc = load_spec(write(tmp_path, BDMC))
    assert doc.model == "bdmc"
    assert doc.params["p"] == 0.8 and doc.params["r0"] == pytest.approx(0.1)


def test_two_model_tags(tmp_path):
    with pytest.raises(SchemaError) as exc:
        load_spec(write(tmp_path, {"model": ["rw", "bdmc"], "params": {}}))
    assert any("exactly one" in v for v in exc.value.violations)


def test_negative_coefficient_cites_field(tmp_path):
    doc = {"model": "rw", "params": {"g": 2, "d": 1, "a": [0.5, -0.1, 0.4, 0.2],
                                     "boundary": [{"0": 0.5, "1": 0.5}, {"0": 0.5, "2": 0.5}]}}
    with pytest.raises(SchemaError) as exc:
        load_spec(write(tmp_path, doc))
    assert any("params.a[1]" in v for v in exc.value.violations)


def test_every_violation_listed():
    with pytest.raises(SchemaError) as exc:
        parse_spec({"model": "bdmc", "params": {"p": "x", "q": 2}, "extra": 1, "analysis": {"eps": -1}})
    v = " | ".join(exc.value.violations)
    for needle in ("extra", "params.r", "params.r0", "analysis.eps"):
        assert needle in v


def test_parse_error(tmp_path):
    with pytest.raises(ParseError):
        load_spec(write(tmp_path, "{not json"))
    code, _, err = call("alpha0", "--spec", write(tmp_path, "{not json", "bad.json"))
    assert code == 2


def test_rho2_spec_roundtrip(tmp_path):
    path = write(tmp_path, {**BDMC, "analysis": {"eps": 1e-6, "k_max": 100}})
    code, out, _ = call("rho2", "--spec", path, "--format", "json", "--verbose")
    rec = json.loads(out)
    assert code == 0
    assert rec["verdict"] == "point" and rec["value"] == pytest.approx(0.8, abs=1e-6)
    assert rec["eps"] == 1e-6 and rec["trajectory"][0][0] == 2


def test_rho2_unstabilized_exit_3():
    code, out, _ = call("rho2", "--model", "mh-geometric", "--tau", "0.8", "--q", "0.5", "--k-max", "5")
    assert code == 3 and "stabilized" in out


def test_explicit_model(tmp_path):
    doc = {"model": "explicit", "params": {"N": 1, "i0": 1, "band": ["1/2", "1/4", "1/4"],
                                           "boundary": [{"0": "1/2", "1": "1/2"}]}}
    code, out, _ = call("alpha0", "--spec", write(tmp_path, doc), "--format", "json")
    assert code == 0
    assert json.loads(out)["alpha0"] == pytest.approx(0.25 + 2 * (1 / 8) ** 0.5)


def test_mh_spec_and_validate(tmp_path):
    doc = {"model": "mh", "params": {"target": {"tag": "poisson", "lam": 1},
                                     "proposal": {"r": "1/2", "q": "0.38"}}}
    code, out, _ = call("validate", "--spec", write(tmp_path, doc), "--format", "json")
    rec = json.loads(out)
    assert code == 0 and rec["violations"] == 0 and rec["reversible"] is True
    assert rec["alpha0"] == pytest.approx(0.62)


def test_sweep_csv_columns():
    code, out, _ = call("sweep", "--model", "mh-poisson", "--q", "0.5", "--param", "q",
                        "--values", "0.4,0.5", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["parameter", "alpha0", "k_final", "rho_k", "verdict"]
    assert len(rows) == 3 and rows[2][4] == "point"


def test_sweep_records_point_errors():
    code, out, _ = call("sweep", "--model", "mh-poisson", "--q", "0.5", "--param", "q",
                        "--values", "0.5,0.9", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 3 and rows[2][4].startswith("error")


def test_reproduce_table1_is_deterministic():
    a = call("reproduce", "table1")
    b = call("reproduce", "table1")
    assert a == b and a[0] == 0
    rows = list(csv.DictReader(io.StringIO(a[1])))
    assert [r["verdict"] for r in rows] == ["upper", "point", "point"]
    assert float(rows[1]["rho_k"]) == pytest.approx(0.688, abs=1e-3)


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "specgap.cli", "tau", "--model", "rw-g2d1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "0.18046" in proc.stdout
