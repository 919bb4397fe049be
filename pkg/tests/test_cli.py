import csv
import io
import json

import pytest

from matreg.cli import RunConfig, ConfigError, main, parse_int_list, parse_tolerances


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("text,expected", [("4,8,16", (4, 8, 16)), ("2..5", (2, 3, 4, 5)), (" 3 ", (3,))])
def test_parse_int_list(text, expected):
    assert parse_int_list(text) == expected


@pytest.mark.parametrize("text", ["a,b", "5..2", "1.5"])
def test_parse_int_list_rejects(text):
    with pytest.raises(ConfigError):
        parse_int_list(text)


def test_parse_tolerances():
    assert parse_tolerances(["slope=-1.0"]) == {"slope": -1.0}
    with pytest.raises(ConfigError):
        parse_tolerances(["slope"])
    with pytest.raises(ConfigError):
        parse_tolerances(["slope=abc"])


def test_config_rejects_unknown_fields():
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"command": "basis", "bogus": 1})
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"command": "converge", "sizes": (8, 4)})
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"command": "converge", "tolerances": {"nope": 1.0}})


@pytest.mark.parametrize("manifold,cutoff,count", [("s2", 3, 9), ("s4", 2, 6), ("s2xs2", 2, 16)])
def test_basis_json(capsys, manifold, cutoff, count):
    code, out, _ = run(capsys, "basis", "--manifold", manifold, "--cutoff", str(cutoff))
    assert code == 0
    assert len(json.loads(out)["modes"]) == count


def test_basis_csv_to_file(tmp_path):
    path = tmp_path / "basis.csv"
    assert main(["basis", "--manifold", "s2", "--cutoff", "2", "--format", "csv", "-o", str(path)]) == 0
    raw = path.read_bytes()
    assert b"\r\n" in raw
    rows = list(csv.reader(io.StringIO(raw.decode())))
    assert rows[0] == ["mode", "degree", "label", "exponents", "coefficient"]
    assert len(rows) == 5


def test_matrixify_default_size(capsys):
    code, out, _ = run(capsys, "matrixify", "--manifold", "s4", "--cutoff", "2")
    data = json.loads(out)
    assert code == 0 and data["size"] == 3 and data["dimension"] == 6
    assert data["gamma_coeffs"]["n"] == 3


def test_capacity_exit_code(capsys):
    code, _, err = run(capsys, "matrixify", "--manifold", "s4", "--cutoff", "3", "--size", "4")
    assert code == 4
    assert "minimal admissible size: 10" in err
    code, _, _ = run(capsys, "matrixify", "--manifold", "s4", "--cutoff", "3", "--size", "4", "--allow-undersized")
    assert code == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["basis", "--manifold", "t3", "--cutoff", "2"],
        ["basis", "--manifold", "s2"],
        ["verify", "--suite", "nope"],
        ["converge", "--manifold", "s2", "--cutoff", "3", "--sizes", "8,4"],
        ["converge", "--manifold", "s2", "--cutoff", "3", "--tol", "bogus=1"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_io_error(capsys, tmp_path):
    target = tmp_path / "missing" / "out.json"
    assert run(capsys, "basis", "--manifold", "s2", "--cutoff", "2", "-o", str(target))[0] == 3


@pytest.mark.parametrize("suite", ["gamma", "leibniz", "counting"])
def test_verify_suites_pass(capsys, suite):
    code, out, _ = run(capsys, "verify", "--suite", suite, "--n", "2..6", "--max-n", "6")
    data = json.loads(out)
    assert code == 0 and data["passed"] and data["n_checks"] > 0


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "leibniz", "--format", "csv")
    assert code == 0 and out.startswith("suite,check,value")


def test_converge_assert_and_threshold_override(capsys):
    code, out, _ = run(capsys, "converge", "--manifold", "s3", "--cutoff", "2", "--assert")
    assert code == 0 and json.loads(out)["sizes"] == [3, 6, 12]
    argv = ["converge", "--manifold", "s2", "--cutoff", "4", "--sizes", "4,8,16", "--assert", "--tol", "slope=-5"]
    assert run(capsys, *argv)[0] == 1


def test_converge_with_remainder(capsys):
    code, out, _ = run(capsys, "converge", "--manifold", "s2", "--cutoff", "3", "--sizes", "3,4,5", "--remainder")
    assert code == 0
    assert json.loads(out)["remainder"]["evaluated_on"] == "s2xs2"


def test_counts(capsys):
    code, out, _ = run(capsys, "counts", "--max-n", "5", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "d,cutoff,total,closed_form,match"


def test_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("MANIFOLD_MATRIX_THREADS", "1")
    assert run(capsys, "counts", "--max-n", "3")[0] == 0
    monkeypatch.setenv("MANIFOLD_MATRIX_THREADS", "zero")
    assert run(capsys, "counts", "--max-n", "3")[0] == 2


def test_help_exits_zero(capsys):
    assert run(capsys, "--help")[0] == 0
