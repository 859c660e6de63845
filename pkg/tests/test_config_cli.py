import csv
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pseudowronskian import __version__
from pseudowronskian.cli import main
from pseudowronskian.config import DEFAULTS, OUTPUT_ENV, ConfigError, ScenarioConfig, parse_overrides, parse_text, parse_value
from pseudowronskian.reports import to_jsonable, write_json


def run(tmp_path, *argv):
    out = tmp_path / "out"
    code = main([*argv, "--out", str(out)])
    report = json.loads((out / f"{argv[0]}.json").read_text()) if (out / f"{argv[0]}.json").exists() else None
    return code, report, out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# config parsing


def test_parse_values():
    assert parse_value("true") is True
    assert parse_value("3") == 3
    assert parse_value("1e-10") == 1e-10
    assert parse_value("1, 0.5") == [1.0, 0.5]
    assert parse_value("'exp-cos'") == "exp-cos"
    assert parse_value("power:2") == "power:2"


def test_parse_text_ignores_comments():
    text = "# scenario\nproblem.c = 2  # slope\n\ntolerance.quadrature = 1e-9\n"
    assert parse_text(text) == {"problem.c": 2, "tolerance.quadrature": 1e-9}


def test_parse_text_rejects_garbage():
    with pytest.raises(ConfigError):
        parse_text("this is not a key value line")


def test_defaults_validate():
    cfg = ScenarioConfig.from_mapping({})
    assert cfg.to_dict() == dict(sorted(DEFAULTS.items()))


@pytest.mark.parametrize("mapping", [
    {"problem.typo": 1},
    {"tolerance.quadrature": -1.0},
    {"problem.p": 1.0},
    {"problem.c": 0},
    {"coefficient.preset": "nope"},
    {"nonlinearity.preset": "power:x"},
    {"solver.max_iter": 2.5},
    {"indicators.closed_form": 1},
    {"nonlinearity.preset": "custom-table"},
])
def test_invalid_configs(mapping):
    with pytest.raises(ConfigError):
        ScenarioConfig.from_mapping(mapping)


def test_load_file_and_overrides(tmp_path):
    path = tmp_path / "s.cfg"
    path.write_text("problem.c = 2\nproblem.eta = 2\n")
    cfg = ScenarioConfig.load(path, {"problem.eta": 3.0})
    assert cfg["problem.c"] == 2.0 and cfg["problem.eta"] == 3.0


def test_missing_file():
    with pytest.raises(ConfigError):
        ScenarioConfig.load("/nonexistent/s.cfg")


def test_tabulated_inputs(tmp_path):
    table = tmp_path / "a.csv"
    table.write_text("\n".join(f"{t},{t ** -4.0}" for t in range(1, 50)))
    wtab = tmp_path / "w.csv"
    wtab.write_text("-1,-1\n0,0\n1,1\n")
    cfg = ScenarioConfig.from_mapping({"coefficient.table": str(table), "nonlinearity.preset": "custom-table",
                                       "nonlinearity.table": str(wtab)})
    assert cfg.coefficient().name == "table:a.csv"
    assert cfg.nonlinearity().lipschitz_k == 1.0


def test_output_dir_precedence(monkeypatch):
    cfg = ScenarioConfig.from_mapping({})
    monkeypatch.setenv(OUTPUT_ENV, "/tmp/from-env")
    assert str(cfg.output_dir()) == "/tmp/from-env"
    assert str(cfg.output_dir("/tmp/cli")) == "/tmp/cli"
    monkeypatch.delenv(OUTPUT_ENV)
    assert str(cfg.output_dir()) == "pw-out"


def test_parse_overrides():
    assert parse_overrides(["problem.c=2", "witness.n_wanted = 3"]) == {"problem.c": 2, "witness.n_wanted": 3}
    with pytest.raises(ConfigError):
        parse_overrides(["problem.c"])


@given(st.floats(allow_nan=True, allow_infinity=True))
def test_json_encoding_is_strict(x):
    value = to_jsonable({"x": x})["x"]
    json.dumps(value, allow_nan=False)
    if math.isfinite(x):
        assert value == x


# CLI


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_tails(tmp_path):
    code, rep, out = run(tmp_path, "tails")
    assert code == 0
    assert rep["result"]["max_signed_deviation"] <= 1e-8
    rows = read_csv(out / "tails.csv")
    assert len(rows) == 51


def test_indicators_tri_cells(tmp_path):
    code, rep, out = run(tmp_path, "indicators", "--preset", "tri-cells:alpha=4")
    assert code == 0
    trend = rep["result"]["trend"]
    assert trend["limit_plus"] == 9.0 and trend["limit_minus"] == -9.0
    assert abs(trend["last_positive"] - 9) <= 0.05 * 9
    assert abs(trend["last_negative"] + 9) <= 0.05 * 9
    assert read_csv(out / "indicators.csv")[0] == ["t", "ratio", "running_sup", "running_inf"]


def test_solve_oscillatory(tmp_path):
    code, rep, out = run(tmp_path, "solve-oscillatory")
    assert code == 0
    res = rep["result"]
    assert res["certified_pairs"] >= 3
    assert res["error_budget"]["max_node_budget"] > 0
    assert read_csv(out / "trajectory.csv")[0] == ["t", "x", "x_prime", "wronskian"]
    rows = read_csv(out / "witnesses.csv")
    assert rows[0] == ["kind", "t", "value", "lhs_14_or_15"]
    kinds = [r[0] for r in rows[1:]]
    assert kinds.count("negative") >= 3 and kinds.count("positive") >= 3
    # the full resolved config is embedded
    assert rep["config"]["problem.c"] == 1.0


def test_solve_monotone_exit_codes(tmp_path):
    code, rep, _ = run(tmp_path, "solve-monotone", "--preset", "exp")
    assert code == 2
    assert rep["result"]["gate"]["integral"] == pytest.approx(2 / math.e, abs=1e-9)
    code, rep, _ = run(tmp_path, "solve-monotone", "--preset", "power:exponent=4,scale=0.5")
    assert code == 0
    assert rep["result"]["band"]["ok"]


def test_no_convergence_exit(tmp_path):
    code, rep, _ = run(tmp_path, "solve-oscillatory", "--set", "solver.max_iter=2")
    assert code == 3
    assert rep["error"]["type"] == "NoConvergence"


def test_config_error_exit(tmp_path):
    assert main(["tails", "--set", "bogus.key=1", "--out", str(tmp_path)]) == 4
    assert main(["tails", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path)]) == 4


def test_numerical_failure_exit(tmp_path):
    code, rep, _ = run(tmp_path, "tails", "--set", "tolerance.quadrature=1e-30")
    assert code == 5
    assert rep["error"]["type"] == "QuadratureFailure"


def test_infeasible_exit(tmp_path):
    code, _, _ = run(tmp_path, "solve-oscillatory", "--preset", "power:exponent=4",
                     "--set", "tolerance.quadrature=1e-6")
    assert code == 2


def test_verify_and_lp(tmp_path):
    code, rep, _ = run(tmp_path, "verify")
    assert code == 0 and rep["result"]["agreement_sup"] <= 1e-6
    code, rep, _ = run(tmp_path, "lp")
    assert code == 0 and rep["result"]["lp"]["pass"]


def test_lp_cells(tmp_path):
    code, rep, out = run(tmp_path, "lp", "--preset", "tri-cells:alpha=4")
    assert code == 0
    assert rep["result"]["cells"]["all_dominated"]
    assert len(read_csv(out / "cells.csv")) == 101


def test_examples(tmp_path):
    code, rep, _ = run(tmp_path, "examples")
    assert code == 0 and rep["result"]["all_pass"]


def test_reports_are_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for d in (a, b):
        assert main(["solve-oscillatory", "--out", str(d)]) == 0
    for name in ("solve-oscillatory.json", "trajectory.csv", "witnesses.csv", "indicators.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_atomic_write_leaves_no_temp_files(tmp_path):
    write_json(tmp_path / "r.json", {"x": float("inf")})
    assert [p.name for p in tmp_path.iterdir()] == ["r.json"]
    assert json.loads((tmp_path / "r.json").read_text()) == {"x": "inf"}
