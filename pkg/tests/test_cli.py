import json

import pytest

from src.rough_forms import main as cli
from src.rough_forms.errors import BudgetError, NonConvergentError
from src.rough_forms.main import TABLE_COLUMNS, main
from src.rough_forms.rough import pure_area_2d_exact


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def result_of(out):
    data = json.loads(out)
    assert data["schema"] == "roughforms/1"
    return data["result"]


def test_young_of_a_constant_integrand(capsys):
    code, out = run(capsys, "young", "--f", "1", "--g", "x", "--simplex", "0;2")
    assert code == 0
    assert result_of(out)["value"] == 2.0


def test_young_of_a_polynomial(capsys):
    code, out = run(capsys, "young", "--f", "x", "--g", "x^2", "--simplex", "0;1")
    assert code == 0
    assert result_of(out)["value"] == pytest.approx(2.0 / 3.0, abs=1e-4)


def test_young_table(capsys):
    code, out = run(capsys, "young", "--f", "x", "--g", "x", "--simplex", "0;1", "--max-level", "3", "--table")
    table = result_of(out)["table"]
    assert code == 0
    assert [row["level"] for row in table] == [0, 1, 2, 3]
    assert set(table[0]) == set(TABLE_COLUMNS)


def test_absolute_increment_fails_certification_only_when_strict(capsys):
    code, _ = run(capsys, "young", "--germ", "abs-increment", "--simplex", "0;1", "--strict")
    assert code == 3
    code, out = run(capsys, "young", "--germ", "abs-increment", "--simplex", "0;1")
    assert code == 0
    assert result_of(out)["value"] == pytest.approx(1.0)


def test_zust(capsys):
    code, out = run(capsys, "zust", "--f", "1", "--g1", "x", "--g2", "y", "--simplex", "0,0;1,0;0,1")
    result = result_of(out)
    assert code == 0
    assert result["value"] == pytest.approx(0.5, abs=1e-9)
    assert result["provenance"] == "zust"


def test_stokes(capsys):
    code, out = run(capsys, "stokes", "--f", "x", "--g", "y", "--simplex", "0,0;1,0;0,1")
    result = result_of(out)
    assert code == 0
    assert result["lhs"] == pytest.approx(0.5, abs=2e-3)
    assert result["rhs"] == pytest.approx(0.5, abs=2e-3)


def test_pullback_along_a_curve(capsys):
    code, out = run(capsys, "pullback", "--f", "x", "--g", "y", "--phi", "cos(x); sin(x)", "--simplex", "0;1",
                    "--extrapolate", "--max-level", "8")
    result = result_of(out)
    assert code == 0
    assert result["lhs"] == pytest.approx(0.7273243567, abs=1e-3)
    assert result["rhs"] == pytest.approx(0.7273243567, abs=1e-3)


def test_pure_area_one_dimensional_table(capsys):
    code, out = run(capsys, "pure-area", "--dim", "1", "--n-list", "10,100")
    rows = result_of(out)["rows"]
    assert code == 0
    assert [row["n"] for row in rows] == [10, 100]
    assert rows[0]["error"] <= 0.1
    assert rows[1]["error"] <= 0.01
    assert rows[1]["limit"] == 0.5


def test_pure_area_two_dimensional_table(capsys):
    code, out = run(capsys, "pure-area", "--dim", "2", "--n-list", "4", "--max-level", "6")
    (row,) = result_of(out)["rows"]
    assert code == 0
    assert row["exact"] == pytest.approx(pure_area_2d_exact(4), abs=1e-9)
    assert row["limit"] == 0.125


def test_gauge(capsys):
    code, out = run(capsys, "gauge", "--seed", "3")
    result = result_of(out)
    assert code == 0
    assert result["value"] == pytest.approx(1.0)


def test_csv_prints_the_level_table(capsys):
    code, out = run(capsys, "young", "--f", "x", "--g", "x", "--simplex", "0;1", "--max-level", "2",
                    "--format", "csv")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "level,n_leaves,partial_sum,increment,rate_estimate"
    assert len(lines) == 4


def test_reruns_are_byte_identical(capsys):
    argv = ("zust", "--f", "x", "--g1", "x", "--g2", "y", "--simplex", "0,0;1,0;0,1")
    _, first = run(capsys, *argv)
    _, second = run(capsys, *argv)
    assert first == second


@pytest.mark.parametrize("argv", [
    ("young", "--f", "x +", "--g", "x", "--simplex", "0;1"),
    ("young", "--f", "x", "--g", "x", "--simplex", "0;a"),
    ("zust", "--f", "1", "--g1", "x", "--g2", "y", "--simplex", "0;1"),
    ("young", "--f", "foo(x)", "--g", "x", "--simplex", "0;1"),
    ("young", "--simplex", "0;1"),
])
def test_usage_errors(argv, capsys):
    code, out = run(capsys, *argv)
    assert code == 2
    assert out == ""


def test_missing_config_file(tmp_path, capsys):
    code, _ = run(capsys, "young", "--f", "1", "--g", "x", "--simplex", "0;1", "--config",
                  str(tmp_path / "missing.toml"))
    assert code == 2


def test_argparse_rejects_missing_arguments():
    with pytest.raises(SystemExit) as info:
        main(["zust", "--f", "1"])
    assert info.value.code == 2


@pytest.mark.parametrize("error, expected", [
    (BudgetError("too deep"), 4),
    (NonConvergentError("diverged", None, "young"), 3),
])
def test_exit_codes(monkeypatch, capsys, error, expected):
    def failing(*args, **kwargs):
        raise error

    monkeypatch.setattr(cli, "young", failing)
    code, _ = run(capsys, "young", "--f", "x", "--g", "x", "--simplex", "0;1")
    assert code == expected
