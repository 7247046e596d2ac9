import csv
import io
import json

import numpy as np
import pytest

from ratio_ci import (
    BootstrapConfig,
    BootstrapMethod,
    ConfidenceSpec,
    Method,
    PairedSample,
    fieller_set,
    ratio_bootstrap_results,
    summarize,
    taylor_limits,
)
from ratio_ci.cli import main

from test_methods import WORKED_X, WORKED_Y


@pytest.fixture()
def worked_csv(tmp_path):
    path = tmp_path / "pairs.csv"
    lines = ["x,y"] + [f"{x},{y}" for x, y in zip(WORKED_X, WORKED_Y)]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _parse_csv(text):
    return list(csv.reader(io.StringIO(text)))


# ------------------------------------------------------------------- ci


def test_ci_json_matches_library(capsys, worked_csv):
    code, out, err = _run(capsys, ["ci", "--input", worked_csv])
    assert code == 0 and err == ""
    records = json.loads(out)
    assert [r["method"] for r in records] == [
        "fieller",
        "taylor",
        "index",
        "trimmed_index",
        "zero_variance",
    ]
    sample = PairedSample(np.array(WORKED_X), np.array(WORKED_Y))
    spec = ConfidenceSpec.two_sided(0.95, df=sample.n - 1)
    fieller = fieller_set(summarize(sample), spec)
    taylor = taylor_limits(summarize(sample), spec)
    by_method = {r["method"]: r for r in records}
    assert by_method["fieller"]["lower"] == fieller.confidence_set.lower
    assert by_method["fieller"]["upper"] == fieller.confidence_set.upper
    assert by_method["fieller"]["estimate"] == fieller.estimate
    assert by_method["fieller"]["case"] == "bounded"
    assert by_method["taylor"]["lower"] == taylor.confidence_set.lower
    assert by_method["taylor"]["upper"] == taylor.confidence_set.upper


def test_ci_csv_layout(capsys, worked_csv):
    code, out, _ = _run(capsys, ["ci", "--input", worked_csv, "--format", "csv"])
    assert code == 0
    rows = _parse_csv(out)
    assert rows[0] == [
        "method",
        "estimate",
        "case",
        "lower",
        "upper",
        "excluded_lower",
        "excluded_upper",
    ]
    assert len(rows) == 6
    fieller = rows[1]
    assert fieller[0] == "fieller" and fieller[2] == "bounded"
    # Cells hold repr() of the float: parsing them back is lossless.
    assert float(fieller[3]) < 0.0 < float(fieller[4])
    assert fieller[5] == "" and fieller[6] == ""


@pytest.mark.filterwarnings("ignore:fewer than 1000 replications")
def test_ci_bootstrap_methods_match_library(capsys, worked_csv):
    code, out, _ = _run(
        capsys,
        [
            "ci",
            "--input",
            worked_csv,
            "--methods",
            "bootstrap_percentile,bootstrap_bca",
            "--replications",
            "500",
            "--seed",
            "11",
        ],
    )
    assert code == 0
    records = {r["method"]: r for r in json.loads(out)}
    sample = PairedSample(np.array(WORKED_X), np.array(WORKED_Y))
    spec = ConfidenceSpec.two_sided(0.95, df=sample.n - 1)
    with pytest.warns(RuntimeWarning, match="1000 replications"):
        config = BootstrapConfig(
            replications=500, seed=11, method=BootstrapMethod.BCA
        )
    expected = ratio_bootstrap_results(
        sample, config, spec, (Method.BOOTSTRAP_PERCENTILE, Method.BOOTSTRAP_BCA)
    )
    for method in ("bootstrap_percentile", "bootstrap_bca"):
        wanted = expected[Method(method)].confidence_set
        assert records[method]["lower"] == wanted.lower
        assert records[method]["upper"] == wanted.upper


def test_ci_output_file(capsys, worked_csv, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = _run(
        capsys, ["ci", "--input", worked_csv, "--output", str(target)]
    )
    assert code == 0 and out == ""
    assert json.loads(target.read_text())[0]["method"] == "fieller"


def test_ci_whole_line_case_serializes_null_bounds(capsys, tmp_path):
    # Pure noise around zero: the exact set is the whole line.
    rng = np.random.default_rng(3)
    path = tmp_path / "noise.csv"
    rows = ["x,y"] + [f"{x},{y}" for x, y in rng.normal(0.0, 1.0, (10, 2))]
    path.write_text("\n".join(rows) + "\n")
    code, out, _ = _run(
        capsys, ["ci", "--input", str(path), "--methods", "fieller"]
    )
    assert code == 0
    (record,) = json.loads(out)
    assert record["case"] == "whole_line"
    assert record["lower"] is None and record["upper"] is None


# -------------------------------------------------------- ci error paths


@pytest.mark.parametrize(
    "mutation",
    [
        "missing",
        "empty",
        "wrong_columns",
        "one_row",
        "non_numeric",
    ],
)
def test_ci_malformed_inputs_exit_2(capsys, tmp_path, mutation):
    path = tmp_path / "bad.csv"
    if mutation == "missing":
        pass  # never created
    elif mutation == "empty":
        path.write_text("")
    elif mutation == "wrong_columns":
        path.write_text("a,b\n1,2\n3,4\n")
    elif mutation == "one_row":
        path.write_text("x,y\n1,2\n")
    elif mutation == "non_numeric":
        path.write_text("x,y\n1,2\nfoo,4\n")
    code, out, err = _run(capsys, ["ci", "--input", str(path)])
    assert code == 2
    assert out == "" and err.startswith("error:")


def test_ci_bad_level_and_bad_method_exit_2(capsys, worked_csv):
    code, _, _ = _run(capsys, ["ci", "--input", worked_csv, "--level", "1.5"])
    assert code == 2
    code, _, _ = _run(capsys, ["ci", "--input", worked_csv, "--methods", "magic"])
    assert code == 2


def test_ci_method_precondition_failures_exit_3(capsys, tmp_path):
    zero_x = tmp_path / "zero.csv"
    zero_x.write_text("x,y\n1.0,2.0\n0.0,3.0\n2.0,4.0\n")
    code, out, err = _run(
        capsys, ["ci", "--input", str(zero_x), "--methods", "index"]
    )
    assert code == 3 and out == ""
    assert err.startswith("error: index:")

    code, _, err = _run(
        capsys,
        ["ci", "--input", str(zero_x), "--methods", "trimmed_index", "--trim", "0.34"],
    )
    assert code == 3
    assert err.startswith("error: trimmed_index:")

    balanced = tmp_path / "balanced.csv"
    balanced.write_text("x,y\n-1.0,2.0\n1.0,3.0\n")
    code, _, err = _run(
        capsys, ["ci", "--input", str(balanced), "--methods", "taylor"]
    )
    assert code == 3
    assert err.startswith("error: taylor:")


def test_unwritable_output_exits_2(capsys, worked_csv, tmp_path):
    code, _, err = _run(
        capsys,
        ["ci", "--input", worked_csv, "--output", str(tmp_path / "no_dir" / "x.json")],
    )
    assert code == 2 and err.startswith("error:")


# -------------------------------------------------------------- simulate


def test_simulate_deterministic_and_thread_invariant(capsys):
    argv = [
        "simulate",
        "--cv-x",
        "0.3,1.0",
        "--cv-y",
        "0.5",
        "--n",
        "10",
        "--runs",
        "150",
        "--methods",
        "fieller,taylor",
        "--seed",
        "4",
    ]
    code1, out1, err1 = _run(capsys, argv + ["--threads", "1"])
    code2, out2, err2 = _run(capsys, argv + ["--threads", "3"])
    assert code1 == code2 == 0
    assert out1 == out2
    assert "reference: cv of the mean of x reaches 0.5 at cv_x = 1.581" in err1
    rows = _parse_csv(out1)
    assert rows[0][:5] == ["cv_x", "cv_y", "n", "corr", "method"]
    assert len(rows) == 1 + 2 * 2


def test_simulate_axis_syntax_and_guards(capsys):
    code, out, _ = _run(
        capsys,
        [
            "simulate",
            "--cv-x",
            "0.1:10:3",
            "--cv-y",
            "1.0",
            "--n",
            "8",
            "--runs",
            "100",
            "--methods",
            "taylor",
        ],
    )
    assert code == 0
    rows = _parse_csv(out)
    assert [r[0] for r in rows[1:]] == ["0.1", "1.0", "10.0"]

    code, _, _ = _run(capsys, ["simulate", "--cv-x", "0.5", "--runs", "99"])
    assert code == 2
    code, _, _ = _run(capsys, ["simulate", "--cv-x", "-1,2"])
    assert code == 2
    code, _, _ = _run(capsys, ["simulate", "--cv-x", "junk:1:3"])
    assert code == 2


# ------------------------------------------------------------- errorbars


def test_errorbars_csv(capsys):
    argv = [
        "errorbars",
        "--cv-x",
        "0.15",
        "--cv-y",
        "0.1",
        "--n",
        "60",
        "--runs",
        "12",
        "--seed",
        "2",
    ]
    code, out, err = _run(capsys, argv)
    assert code == 0 and err == ""
    rows = _parse_csv(out)
    assert rows[0] == ["method", "run", "estimate", "lower", "upper", "case", "covers_true"]
    assert len(rows) == 25
    assert {r[0] for r in rows[1:]} == {"fieller", "index"}
    code2, out2, _ = _run(capsys, argv)
    assert out2 == out


def test_errorbars_requires_cell_flags(capsys):
    code, _, _ = _run(capsys, ["errorbars", "--cv-y", "0.1"])
    assert code == 2


# --------------------------------------------------------------- ellipse


def test_ellipse_svg_and_csv(capsys, worked_csv):
    code, svg, _ = _run(capsys, ["ellipse", "--input", worked_csv])
    assert code == 0
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert 'class="tangent"' in svg

    code, out, _ = _run(
        capsys, ["ellipse", "--input", worked_csv, "--format", "csv", "--points", "64"]
    )
    assert code == 0
    rows = _parse_csv(out)
    assert rows[0] == ["element", "x", "y"]
    elements = {r[0] for r in rows[1:]}
    assert {"ellipse", "tangent_1", "tangent_2", "vertical_reference"} <= elements
    assert sum(r[0] == "ellipse" for r in rows[1:]) == 64


def test_ellipse_point_guard(capsys, worked_csv):
    code, _, _ = _run(capsys, ["ellipse", "--input", worked_csv, "--points", "2"])
    assert code == 2


# --------------------------------------------------------------- regress


@pytest.fixture()
def line_csv(tmp_path):
    rng = np.random.default_rng(5)
    xs = rng.uniform(1.0, 10.0, 20)
    ys = 2.0 + 3.0 * xs + rng.normal(0.0, 0.5, 20)
    path = tmp_path / "line.csv"
    rows = ["x,y"] + [f"{x},{y}" for x, y in zip(xs, ys)]
    path.write_text("\n".join(rows) + "\n")
    return str(path)


def test_regress_ols_json(capsys, line_csv):
    code, out, _ = _run(
        capsys,
        [
            "regress",
            "--input",
            line_csv,
            "--model",
            "ols",
            "--response",
            "y",
            "--regressors",
            "x",
        ],
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["coefficients"]["x"] == pytest.approx(3.0, abs=0.2)
    assert payload["coefficients"]["intercept"] == pytest.approx(2.0, abs=1.0)
    assert payload["df"] == 18


def test_regress_ols_requires_response(capsys, line_csv):
    code, _, err = _run(capsys, ["regress", "--input", line_csv, "--model", "ols"])
    assert code == 2 and "response" in err


def test_regress_deflated_and_allometric(capsys, line_csv, tmp_path):
    code, out, _ = _run(
        capsys, ["regress", "--input", line_csv, "--model", "deflated"]
    )
    assert code == 0
    payload = json.loads(out)
    assert set(payload["coefficients"]) == {"alpha", "beta"}

    power = tmp_path / "power.csv"
    xs = np.array([1.0, 2.0, 4.0, 8.0])
    rows = ["x,y"] + [f"{x},{5.0 * x ** 2}" for x in xs]
    power.write_text("\n".join(rows) + "\n")
    code, out, _ = _run(
        capsys, ["regress", "--input", str(power), "--model", "allometric"]
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["coefficients"]["gamma_x"] == pytest.approx(2.0, rel=1e-10)
    assert payload["coefficients"]["beta"] == pytest.approx(5.0, rel=1e-10)


def test_regress_ancova_text_carries_note(capsys, tmp_path):
    path = tmp_path / "groups.csv"
    lines = ["x,y,group"]
    for x in (1.0, 2.0, 3.0, 4.0):
        lines.append(f"{x},{2.0 * x},a")
        lines.append(f"{x},{2.5 * x},b")
    path.write_text("\n".join(lines) + "\n")
    code, out, _ = _run(
        capsys,
        ["regress", "--input", str(path), "--model", "ancova", "--format", "text"],
    )
    assert code == 0
    assert "one common slope" in out and "one slope per group" in out
    assert "zero-intercept slope treats the denominator as error-free" in out

    code, out, _ = _run(capsys, ["regress", "--input", str(path), "--model", "ancova"])
    assert code == 0
    payload = json.loads(out)
    assert "note" in payload and "slope_2" in payload["full"]["coefficients"]


def test_regress_ancova_without_group_column_exits_2(capsys, line_csv):
    code, _, err = _run(capsys, ["regress", "--input", line_csv, "--model", "ancova"])
    assert code == 2 and "group" in err


def test_regress_allometric_negative_data_exits_3(capsys, tmp_path):
    path = tmp_path / "neg.csv"
    path.write_text("x,y\n1.0,2.0\n-2.0,3.0\n4.0,5.0\n")
    code, _, err = _run(capsys, ["regress", "--input", str(path), "--model", "allometric"])
    assert code == 3 and err.startswith("error: allometric:")


# ------------------------------------------------------------------ demo


def test_demo_stork(capsys):
    code, out, err = _run(capsys, ["demo", "stork"])
    assert code == 0 and err == ""
    assert out.splitlines()[0].startswith("county")
    assert "Partial regression" in out
    assert "Rate regression" in out
    code2, out2, _ = _run(capsys, ["demo", "stork"])
    assert out2 == out


def test_unknown_subcommand_and_topic_exit_2(capsys):
    assert _run(capsys, ["frobnicate"])[0] == 2
    assert _run(capsys, ["demo", "unicorn"])[0] == 2
    assert _run(capsys, [])[0] == 2
