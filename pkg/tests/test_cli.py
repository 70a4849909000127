import argparse
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from dioflow.cli import int_list, main, rational_list


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_traj_zero_vector_csv(capsys):
    code, out, _ = run(capsys, "traj", "--y", "0", "--n", "1", "--tmax", "5", "--csv")
    assert code == 0
    csv = out[out.index("t,height"):].splitlines()
    assert [row.split(",")[1] for row in csv[1:]] == ["1", "1/2", "1/4", "1/8", "1/16", "1/32"]
    doc = json.loads(out[:out.index("t,height")])
    assert doc["schema_version"] == 1 and doc["command"] == "traj"
    assert doc["result"]["omega_hat_sharp"] == "inf"


def test_out_prefix_writes_json_and_csv(tmp_path, capsys):
    prefix = tmp_path / "sub" / "run"
    code, out, _ = run(capsys, "traj", "--y", "1/3", "--tmax", "8", "--out", str(prefix))
    assert code == 0 and out == ""
    doc = json.loads(prefix.with_suffix(".json").read_text())
    assert "threads" not in doc["config"] and "out" not in doc["config"]
    assert prefix.with_suffix(".csv").read_text().startswith("t,height,log2_height\n")


def test_surd_exponent(capsys):
    code, out, _ = run(capsys, "exponent", "--y", "(sqrt(5)-1)/2", "--tmax", "100", "--smax", "16")
    assert code == 0
    res = json.loads(out)["result"]
    assert 0.95 <= res["omega_dyn_sharp"] <= 1.15


def test_budget_refusal_exits_one(capsys):
    code, _, err = run(capsys, "oracle", "--y", "0.1,0.2", "--n", "2", "--smax", "13")
    assert code == 1 and "budget refused" in err


def test_input_errors_exit_one(capsys):
    assert run(capsys, "traj", "--y", "0.1,0.2", "--n", "1", "--tmax", "4")[0] == 1
    assert run(capsys, "traj", "--y", "abc", "--tmax", "4")[0] == 1
    with pytest.raises(SystemExit) as e:
        main(["traj", "--y", "0"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["nondiv-scan", "--map", "veronese:2", "--measure", "lebesgue:1,2", "--eps", "2^-1..3^-4"])
    assert e.value.code == 1


def test_hypothesis_failure_exits_two(capsys):
    code, out, _ = run(capsys, "bc-series", "--map", "veronese:2", "--measure", "lebesgue:1,2", "--v", "2",
                       "--gamma", "0", "--tmax", "6", "--samples", "3")
    assert code == 2
    assert json.loads(out)["warnings"]
    code, out, _ = run(capsys, "check-good", "--map", "affine:1,2;0,1", "--measure", "lebesgue:1,2",
                       "--census-size", "16")
    assert code == 2


def test_list_grammar():
    assert rational_list("2^-1..2^-3") == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]
    assert rational_list("2,1/4, 0.5") == [2, Fraction(1, 4), Fraction(1, 2)]
    assert int_list("5..20:5") == [5, 10, 15, 20]
    assert int_list("1,3..4") == [1, 3, 4]
    for bad in ("", "2^-1..3^-2"):
        with pytest.raises(argparse.ArgumentTypeError):
            rational_list(bad)
    with pytest.raises(argparse.ArgumentTypeError):
        int_list("1..x")


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "dioflow", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "0.1.0"


def test_mult_default_precision_covers_walk(capsys):
    code, out, _ = run(capsys, "mult", "--y", "sqrt(2)-1,sqrt(3)-1", "--n", "2", "--tmax", "20")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["omega_hat_mult"] >= res["omega_hat_sharp"]
