import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import mpmath as mp
import pytest

from snextremes import cli, diagnostics, norming


def run(argv, capsys):
    code = cli.run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_dist_cdf_at_zero(capsys):
    code, out, _ = run(["dist", "--lambda", "1", "--x", "0", "--cdf"], capsys)
    assert code == 0 and out == "0.25\n"


@pytest.mark.parametrize("flag", ["--pdf", "--survival", "--log-survival"])
def test_dist_other_quantities(flag, capsys):
    code, out, _ = run(["dist", "--lambda", "-2", "--x", "1.5", flag], capsys)
    assert code == 0
    value = float(out)
    assert math.isfinite(value)
    assert out == f"{value:.15g}\n"


def test_dist_defaults_to_pdf(capsys):
    _, out, _ = run(["dist", "--lambda", "3.7", "--x", "0"], capsys)
    assert float(out) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-14)


def test_norming_closed_form(capsys):
    code, out, _ = run(["norming", "--lambda", "1", "--n", "1e6", "--method", "closed"], capsys)
    assert code == 0
    (row,) = rows(out)
    with mp.workdps(30):
        ln = 6 * mp.log(10)
        scale = 1 / mp.sqrt(2 * ln)
        loc = mp.sqrt(2 * ln) - (mp.log(ln) + mp.log(mp.pi)) / (2 * mp.sqrt(2 * ln))
    assert float(row["scale"]) == pytest.approx(float(scale), rel=1e-14)
    assert float(row["location"]) == pytest.approx(float(loc), rel=1e-14)
    assert float(row["scale"]) == pytest.approx(0.190238, abs=2e-6)
    assert float(row["location"]) == pytest.approx(4.897893, abs=3e-5)
    assert row["method"] == "closed_form"


@pytest.mark.parametrize("method", ["leadbetter0", "hall0", "nair0"])
def test_norming_baselines_need_no_lambda(method, capsys):
    code, out, _ = run(["norming", "--n", "1e6", "--method", method], capsys)
    assert code == 0
    (row,) = rows(out)
    assert row["method"] == method and float(row["lambda"]) == 0.0


def test_norming_huge_n(capsys):
    code, out, _ = run(["norming", "--lambda", "-1", "--n", "1e300", "--method", "quantile"], capsys)
    assert code == 0
    (row,) = rows(out)
    assert float(row["log_n"]) == pytest.approx(300 * math.log(10), rel=1e-15)
    assert float(row["location"]) == pytest.approx(norming.solve_quantile_bn(300 * math.log(10), -1.0), rel=1e-15)


def test_parse_log_n():
    assert cli.parse_log_n("1e300") == pytest.approx(300 * math.log(10), rel=1e-15)
    assert cli.parse_log_n("1e100000") == pytest.approx(100000 * math.log(10), rel=1e-15)
    assert cli.parse_log_n("2.5E+7") == pytest.approx(math.log(2.5e7), rel=1e-15)
    for bad in ("1", "0.5", "-3", "abc", "inf", "nan"):
        with pytest.raises(Exception):
            cli.parse_log_n(bad)


def test_rates_csv(capsys):
    code, out, _ = run(
        ["rates", "--lambda", "1", "--n-grid", "1e8,1e16", "--x-grid", "0.5,1", "--order", "first",
         "--method", "quantile"],
        capsys,
    )
    assert code == 0
    table = rows(out)
    assert [(r["log_n"], r["x"]) for r in table] == [
        (diagnostics.format_number(8 * math.log(10)), "0.5"),
        (diagnostics.format_number(8 * math.log(10)), "1"),
        (diagnostics.format_number(16 * math.log(10)), "0.5"),
        (diagnostics.format_number(16 * math.log(10)), "1"),
    ]


def test_rates_json_schema(capsys):
    code, out, _ = run(["rates", "--lambda", "-1", "--order", "leading", "--method", "closed", "--format", "json"],
                       capsys)
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, diagnostics.RATE_TABLE_SCHEMA)
    assert len(doc) == len(diagnostics.DEFAULT_LOG_N_GRID) * len(diagnostics.DEFAULT_X_GRID)


def test_rates_mismatched_order_and_method(capsys):
    code, out, err = run(["rates", "--lambda", "1", "--order", "leading", "--method", "quantile"], capsys)
    assert code == 2 and out == ""
    assert "requires method" in err


def test_unknown_flag(capsys):
    code, out, err = run(["dist", "--lambda", "1", "--x", "0", "--bogus"], capsys)
    assert code == 2 and out == ""
    assert "usage:" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["dist", "--lambda", "nan", "--x", "0"],
        ["dist", "--lambda", "1"],
        ["norming", "--lambda", "1", "--n", "1", "--method", "closed"],
        ["norming", "--n", "1e6", "--method", "closed"],
        ["norming", "--lambda", "0", "--n", "1e6", "--method", "quantile"],
        ["bounds", "--lambda", "1", "--x-min", "3", "--x-max", "1", "--steps", "3"],
        ["bounds", "--lambda", "1", "--x-min", "0", "--x-max", "1", "--steps", "3"],
        ["simulate", "--lambda", "1", "--n", "1e6", "--reps", "100000", "--seed", "1"],
        ["simulate", "--lambda", "1", "--n", "10.5", "--reps", "1000", "--seed", "1"],
        ["rates", "--lambda", "1", "--x-grid", ",", "--order", "leading", "--method", "closed"],
    ],
)
def test_validation_errors_exit_2(argv, capsys):
    code, out, _ = run(argv, capsys)
    assert code == 2 and out == ""


def test_solver_error_exit_3(capsys):
    # the root sits below the bracket floor for this strongly skewed law
    code, out, err = run(["norming", "--lambda", "-6", "--n", "100", "--method", "quantile"], capsys)
    assert code == 3 and out == ""
    assert "no sign change" in err


def test_io_error_exit_4(tmp_path, capsys):
    target = tmp_path / "no" / "such" / "dir" / "out.csv"
    code, out, err = run(["bounds", "--lambda", "1", "--x-min", "1", "--x-max", "2", "--steps", "2",
                          "--out", str(target)], capsys)
    assert code == 4 and out == ""
    assert not target.exists()


def test_bounds_table(capsys):
    code, out, _ = run(["bounds", "--lambda", "-1", "--x-min", "0.5", "--x-max", "5", "--steps", "10"], capsys)
    assert code == 0
    table = rows(out)
    assert len(table) == 10
    assert table[0]["status"] == "lower_vacuous" and table[-1]["status"] == "ok"
    for r in table:
        if r["status"] == "ok":
            assert float(r["lower"]) < float(r["ratio"]) < float(r["upper"])


def test_bounds_normal(capsys):
    _, out, _ = run(["bounds", "--normal", "--x-min", "1", "--x-max", "1", "--steps", "1"], capsys)
    (row,) = rows(out)
    assert float(row["lower"]) == 0.5 and float(row["upper"]) == 1.0


def test_stdout_and_file_are_byte_identical(tmp_path, capsys):
    argv = ["rates", "--lambda", "1", "--n-grid", "1e10,1e20", "--x-grid", "1,2", "--order", "second",
            "--method", "quantile"]
    _, out, _ = run(argv + ["--out", "-"], capsys)
    target = tmp_path / "rates.csv"
    code, file_out, _ = run(argv + ["--out", str(target)], capsys)
    assert code == 0 and file_out == ""
    assert target.read_bytes() == out.encode()


def test_simulate_is_reproducible(tmp_path, capsys):
    argv = ["simulate", "--lambda", "1", "--n", "200", "--reps", "1000", "--seed", "42", "--format", "json"]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv + ["--workers", "3"], capsys)
    assert first == second
    doc = json.loads(first)
    assert doc[0]["seed"] == 42 and len(doc[0]["normalized_points"]) == 1000
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(argv[:-2] + ["--out", str(a)], capsys)
    run(argv[:-2] + ["--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "snextremes.cli", "dist", "--lambda", "1", "--x", "0", "--survival"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and proc.stdout == "0.75\n"
    proc = subprocess.run([sys.executable, "-m", "snextremes.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "dist" in proc.stdout
