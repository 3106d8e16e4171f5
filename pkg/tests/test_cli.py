import json
import subprocess
import sys

import pytest

from lattice_rigidity.cli import main
from conftest import TESTDATA


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    assert code == 0, err
    return json.loads(out)


def td(name):
    return str(TESTDATA / name)


def test_group_endrank_example(capsys):
    rep = run_json(capsys, "group", "--group", "(1 2),(1 2 3)", "--subgroup", "(1 2)", "--p", "3", "--op", "endrank")
    assert rep["result"]["end_rank"] == 2
    assert rep["result"]["double_cosets"] == 2


def test_rigid_example(capsys):
    rep = run_json(capsys, "rigid", "--order", td("order_c2.json"), td("lattice_c2_regular.json"))
    assert rep["result"]["rigid"] is True
    assert rep["result"]["ext1"]["invariants"] == []
    assert set(rep["inputs"]) == {"order", "lattice"}


def test_rigid_inline_order(capsys):
    rep = run_json(capsys, "rigid", td("lattice_c2_regular_inline.json"))
    assert rep["result"]["rigid"] is True


def test_rigid_diagonal_not_rigid(capsys):
    rep = run_json(capsys, "rigid", "--order", td("order_c2.json"), td("lattice_c2_diagonal.json"))
    assert rep["result"]["rigid"] is False
    assert rep["result"]["ext1"]["invariants"] == [1, 1]


def test_genval_example(capsys):
    rep = run_json(capsys, "genval", td("poly_x1.json"), "--point", "0", "--digits", "1")
    assert rep["result"]["generic_valuation"] == 1


def test_genval_witness_and_threshold(capsys):
    rep = run_json(capsys, "genval", td("poly_x1sq_plus_px1.json"), "--point-file", td("point_zero.json"),
                   "--witness", "--threshold", "2")
    res = rep["result"]
    assert res["generic_valuation"] == 2 and res["member"] is True
    assert res["witness"]["extension_degree"] == 2
    assert res["witness"]["achieved"] == 2


def test_census_command(capsys):
    rep = run_json(capsys, "census", "--order", td("order_c2.json"), td("lattice_c2_regular.json"),
                   "--max-colength", "3")
    assert rep["result"]["class_count"] == 2
    assert rep["result"]["rigid_class_count"] == 1
    assert rep["result"]["counts"] == {"0": 1, "1": 1, "2": 3, "3": 5}


def test_group_hh1(capsys):
    rep = run_json(capsys, "group", "--group", "(1 2)", "--p", "2", "--op", "hh1")
    assert rep["result"]["hh1_vanishes"] is True


def test_witt_add(capsys):
    rep = run_json(capsys, "witt", "--p", "3", "--precision", "2", "--op", "add", "--a", "1", "--b", "2")
    assert rep["result"]["agree"] is True
    assert rep["result"]["ring"] == [3]
    assert rep["result"]["digits"] == [0, 1]


def test_witt_from_digits(capsys):
    rep = run_json(capsys, "witt", "--p", "2", "--precision", "2", "--op", "from-digits", "--digits", "0,1")
    assert rep["result"]["ring"] == [2]


def test_table_output(capsys):
    code, out, _ = run(capsys, "group", "--group", "(1 2)", "--p", "2", "--op", "rigid")
    assert code == 0
    assert "command   group" in out and "rigid" in out


def test_validation_exit_code(capsys):
    assert run(capsys, "group", "--group", "(1 2)", "--p", "4", "--op", "rigid")[0] == 2
    assert run(capsys, "rigid", "--order", td("order_bad_assoc.json"), td("lattice_c2_regular.json"))[0] == 2
    assert run(capsys, "rigid", "--order", td("order_c2.json"), td("lattice_c2_bad.json"))[0] == 2
    assert run(capsys, "rigid", "--order", td("order_c2.json"), td("missing.json"))[0] == 2
    assert run(capsys, "genval", td("poly_x1.json"), "--point", "a")[0] == 2


def test_argparse_errors_use_code_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["group", "--group", "(1 2)", "--op", "nonsense"])
    assert exc.value.code == 2


def test_precision_retry_is_reported(capsys, tmp_path):
    poly = tmp_path / "cube.json"
    poly.write_text(json.dumps({"context": {"p": 2, "m": 1, "N": 3}, "n": 1,
                                "terms": [{"exponents": [3], "coefficient": 1}]}))
    rep = run_json(capsys, "genval", str(poly), "--point", "0", "--digits", "1")
    assert rep["result"]["generic_valuation"] == 3
    assert rep["precision_retries"] and rep["precision_retries"][0]["from"] == 3
    assert rep["context"]["N"] == 6
    code, out, _ = run(capsys, "genval", str(poly), "--point", "0", "--digits", "1")
    assert "retry     precision 3 -> 6" in out


def test_precision_exit_code(capsys, tmp_path):
    poly = tmp_path / "x7.json"
    poly.write_text(json.dumps({"context": {"p": 2, "m": 1, "N": 3}, "n": 1,
                                "terms": [{"exponents": [7], "coefficient": 1}]}))
    code, _, err = run(capsys, "genval", str(poly), "--point", "0", "--digits", "1")
    assert code == 3 and "precision" in err


def test_cap_exit_code(capsys):
    assert run(capsys, "group", "--group", "(1 2),(1 2 3 4 5)", "--p", "2", "--op", "rigid")[0] == 4


def test_out_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "group", "--group", "(1 2 3)", "--p", "3", "--op", "endrank", "--out", str(target))
    assert code == 0
    data = json.loads(target.read_text())
    assert data["result"]["end_rank"] == 3
    assert "timings" not in data


def test_timings_opt_in(capsys):
    rep = run_json(capsys, "group", "--group", "(1 2)", "--p", "2", "--op", "endrank", "--timings")
    assert "wall_seconds" in rep["timings"]


def test_byte_identical_runs():
    argv = [sys.executable, "-m", "lattice_rigidity", "census", "--order", td("order_c2.json"),
            td("lattice_c2_regular.json"), "--max-colength", "3", "--json", "--seed", "7"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["seed"] == 7
