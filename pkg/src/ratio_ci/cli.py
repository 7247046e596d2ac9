"""Command-line front end.

Subcommands: ci (confidence sets for one dataset), simulate (coverage
grid), errorbars (per-run interval experiment), ellipse (geometric
construction export), regress (regression views), demo (worked examples).

Exit codes: 0 success, 2 malformed input or usage, 3 a method's
precondition failed on valid input (the message names the method).
All output is deterministic given the flags; nothing reads the clock or
ambient entropy, and RATIO_CI_THREADS only changes the schedule, never
the numbers.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .bootstrap import (
    BootstrapConfig,
    BootstrapMethod,
    hwang_set,
    ratio_bootstrap_results,
)
from .core import ConfidenceSpec, PairedSample, summarize
from .errors import RatioCiError
from .geometry import construct_wedge, wedge_csv_rows, wedge_svg
from .linear_models import (
    RATIO_SLOPE_NOTE,
    ModelComparison,
    RegressionFit,
    allometric_fit,
    ancova_ratio_compare,
    deflated_fit,
    ols_fit,
    spurious_demo,
    stork_demo_table,
)
from .methods import (
    Method,
    MethodResult,
    SetCase,
    fieller_set,
    index_limits,
    taylor_limits,
    trimmed_index_limits,
    zero_variance_limits,
)
from .montecarlo import (
    GridSpec,
    SimCell,
    error_bar_experiment,
    errorbar_csv_rows,
    grid_csv_rows,
    run_grid,
)

CLOSED_FORM = "fieller,taylor,index,trimmed_index,zero_variance"
_RATIO_BOOT = (Method.BOOTSTRAP_PERCENTILE, Method.BOOTSTRAP_BCA)


class _InputError(Exception):
    """Malformed input file or value; maps to exit code 2."""


# ---------------------------------------------------------------- arg types


def _level_arg(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("level must lie strictly between 0 and 1")
    return value


def _trim_arg(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 <= value < 0.5:
        raise argparse.ArgumentTypeError("trim must lie in [0, 0.5)")
    return value


def _corr_arg(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not abs(value) <= 1.0:
        raise argparse.ArgumentTypeError("correlation must lie in [-1, 1]")
    return value


def _positive_int(minimum: int, what: str):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
        if value < minimum:
            raise argparse.ArgumentTypeError(f"{what} must be at least {minimum}")
        return value

    return parse


def _methods_arg(text: str) -> tuple[Method, ...]:
    out: list[Method] = []
    for name in text.split(","):
        name = name.strip()
        if not name:
            continue
        try:
            method = Method(name)
        except ValueError:
            known = ", ".join(m.value for m in Method)
            raise argparse.ArgumentTypeError(f"unknown method {name!r} (known: {known})")
        if method not in out:
            out.append(method)
    if not out:
        raise argparse.ArgumentTypeError("need at least one method")
    return tuple(out)


def _axis_arg(text: str) -> tuple[float, ...]:
    """Either an explicit comma list '0.3,1,3' or a log range 'lo:hi:count'."""
    try:
        if ":" in text:
            lo_s, hi_s, count_s = text.split(":")
            lo, hi, count = float(lo_s), float(hi_s), int(count_s)
            if not (0.0 < lo <= hi) or count < 1:
                raise ValueError
            values = tuple(float(v) for v in np.geomspace(lo, hi, count))
        else:
            values = tuple(float(v) for v in text.split(","))
            if not values or any(not v > 0.0 for v in values):
                raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bad axis {text!r}: use 'v1,v2,...' or 'low:high:count', all positive"
        )
    return values


# ------------------------------------------------------------------- output


def _write(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _csv_text(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _fmt(value: float) -> str:
    return repr(float(value))


def _jsonable(obj):
    """Dataclasses to dicts, enums to strings, non-finite floats to null."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(_jsonable(k)): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _json_text(payload) -> str:
    return json.dumps(_jsonable(payload), indent=2, allow_nan=False) + "\n"


def _result_record(result: MethodResult) -> dict:
    cset = result.confidence_set
    return {
        "method": result.method.value,
        "estimate": result.estimate,
        "case": cset.case.value,
        "lower": cset.lower,
        "upper": cset.upper,
        "excluded_lower": cset.excluded_lower,
        "excluded_upper": cset.excluded_upper,
        "diagnostics": result.diagnostics,
    }


def _ci_csv_rows(results: Sequence[MethodResult]) -> list[list[str]]:
    rows = [["method", "estimate", "case", "lower", "upper", "excluded_lower", "excluded_upper"]]
    for r in results:
        cset = r.confidence_set

        def cell(value: float | None) -> str:
            return "" if value is None or not math.isfinite(value) else _fmt(value)

        rows.append(
            [
                r.method.value,
                cell(r.estimate),
                cset.case.value,
                cell(cset.lower),
                cell(cset.upper),
                cell(cset.excluded_lower),
                cell(cset.excluded_upper),
            ]
        )
    return rows


# -------------------------------------------------------------------- input


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc}")


def _parse_table(path: str) -> dict[str, np.ndarray]:
    reader = csv.reader(io.StringIO(_read_text(path)))
    rows = [row for row in reader if row and any(field.strip() for field in row)]
    if not rows:
        raise _InputError(f"{path} is empty")
    header = [name.strip() for name in rows[0]]
    if len(set(header)) != len(header) or any(not h for h in header):
        raise _InputError(f"{path}: header must be unique non-empty column names")
    columns: dict[str, list] = {name: [] for name in header}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise _InputError(f"{path}:{lineno}: expected {len(header)} fields")
        for name, field in zip(header, row):
            columns[name].append(field.strip())
    return {name: np.asarray(vals, dtype=object) for name, vals in columns.items()}


def _numeric_column(table: dict, name: str, path: str) -> np.ndarray:
    if name not in table:
        raise _InputError(f"{path}: missing column {name!r}")
    try:
        return np.asarray([float(v) for v in table[name]], dtype=float)
    except ValueError as exc:
        raise _InputError(f"{path}: column {name!r}: {exc}")


def _load_pairs(path: str) -> PairedSample:
    table = _parse_table(path)
    if set(table) != {"x", "y"}:
        raise _InputError(f"{path}: expected exactly the columns x,y")
    xs = _numeric_column(table, "x", path)
    ys = _numeric_column(table, "y", path)
    if xs.size < 2:
        raise _InputError(f"{path}: need at least 2 data rows")
    try:
        return PairedSample(xs, ys)
    except RatioCiError as exc:
        raise _InputError(f"{path}: {exc}")


# ----------------------------------------------------------------- handlers


def _fail_method(name: str, exc: RatioCiError) -> int:
    print(f"error: {name}: {exc}", file=sys.stderr)
    return 3


def _cmd_ci(args: argparse.Namespace) -> int:
    sample = _load_pairs(args.input)
    spec = ConfidenceSpec.two_sided(args.level, df=sample.n - 1)
    stats = summarize(sample)
    boot_method = (
        BootstrapMethod.BCA if Method.BOOTSTRAP_BCA in args.methods else BootstrapMethod.PERCENTILE
    )
    config = BootstrapConfig(
        replications=args.replications, seed=args.seed, method=boot_method
    )
    ratio_boot = None
    results: list[MethodResult] = []
    for method in args.methods:
        try:
            if method is Method.FIELLER:
                results.append(fieller_set(stats, spec))
            elif method is Method.TAYLOR:
                results.append(taylor_limits(stats, spec))
            elif method is Method.INDEX:
                results.append(index_limits(sample, spec))
            elif method is Method.TRIMMED_INDEX:
                results.append(trimmed_index_limits(sample, spec, args.trim))
            elif method is Method.ZERO_VARIANCE:
                results.append(zero_variance_limits(sample, spec))
            elif method is Method.HWANG_BOOTSTRAP:
                hwang_config = BootstrapConfig(
                    replications=args.replications,
                    seed=args.seed,
                    method=BootstrapMethod.BCA,
                )
                results.append(hwang_set(sample, hwang_config, spec))
            else:
                if ratio_boot is None:
                    wanted = tuple(m for m in args.methods if m in _RATIO_BOOT)
                    ratio_boot = ratio_bootstrap_results(sample, config, spec, wanted)
                results.append(ratio_boot[method])
        except RatioCiError as exc:
            return _fail_method(method.value, exc)
    if args.format == "json":
        text = _json_text([_result_record(r) for r in results])
    else:
        text = _csv_text(_ci_csv_rows(results))
    _write(text, args.output)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    gridspec = GridSpec(
        cv_x_values=args.cv_x, cv_y_values=args.cv_y, n=args.n, corr=args.corr
    )
    boot_config = BootstrapConfig(
        replications=args.replications, method=BootstrapMethod.BCA
    )
    try:
        grid = run_grid(
            gridspec,
            args.methods,
            runs=args.runs,
            master_seed=args.seed,
            boot_config=boot_config,
            level=args.level,
            trim=args.trim,
            threads=args.threads,
        )
    except RatioCiError as exc:
        return _fail_method("simulate", exc)
    print(
        f"reference: cv of the mean of x reaches 0.5 at cv_x = "
        f"{grid.reference_cv_x:.4g} for n = {gridspec.n}",
        file=sys.stderr,
    )
    _write(_csv_text(grid_csv_rows(grid)), args.output)
    return 0


def _cmd_errorbars(args: argparse.Namespace) -> int:
    cell = SimCell(cv_x=args.cv_x, cv_y=args.cv_y, n=args.n, corr=args.corr)
    try:
        experiment = error_bar_experiment(cell, runs=args.runs, seed=args.seed, level=args.level)
    except RatioCiError as exc:
        return _fail_method("errorbars", exc)
    _write(_csv_text(errorbar_csv_rows(experiment)), args.output)
    return 0


def _cmd_ellipse(args: argparse.Namespace) -> int:
    sample = _load_pairs(args.input)
    spec = ConfidenceSpec.two_sided(args.level, df=sample.n - 1)
    try:
        wedge = construct_wedge(summarize(sample), spec)
    except RatioCiError as exc:
        return _fail_method("ellipse", exc)
    if args.format == "svg":
        text = wedge_svg(wedge, k=args.points)
    else:
        rows = [["element", "x", "y"]]
        rows += [[el, _fmt(x), _fmt(y)] for el, x, y in wedge_csv_rows(wedge, k=args.points)]
        text = _csv_text(rows)
    _write(text, args.output)
    return 0


def _fit_record(fit: RegressionFit) -> dict:
    return {
        "coefficients": fit.coefficients,
        "standard_errors": fit.standard_errors,
        "residual_variance": fit.residual_variance,
        "df": fit.df,
        "r_squared": fit.r_squared,
    }


def _comparison_record(comparison: ModelComparison) -> dict:
    return {
        "restricted": _fit_record(comparison.restricted),
        "full": _fit_record(comparison.full),
        "f_statistic": comparison.f_statistic,
        "p_value": comparison.p_value,
    }


def _fit_text(fit: RegressionFit, title: str) -> str:
    lines = [title]
    for name, value in fit.coefficients.items():
        se = fit.standard_errors.get(name)
        se_part = f" (se {se:.6g})" if se is not None else ""
        lines.append(f"  {name} = {value:.6g}{se_part}")
    lines.append(
        f"  residual variance {fit.residual_variance:.6g}, df {fit.df}, "
        f"r^2 {fit.r_squared:.6g}"
    )
    return "\n".join(lines)


def _cmd_regress(args: argparse.Namespace) -> int:
    table = _parse_table(args.input)
    path = args.input
    try:
        if args.model == "ols":
            if not args.response or not args.regressors:
                raise _InputError("ols needs --response and --regressors")
            y = _numeric_column(table, args.response, path)
            regs = {
                name: _numeric_column(table, name, path)
                for name in args.regressors.split(",")
            }
            fit = ols_fit(y, regs, intercept=args.intercept)
            payload, text = _fit_record(fit), _fit_text(fit, "least-squares fit")
        elif args.model == "deflated":
            sample = _table_pairs(table, path)
            fit = deflated_fit(sample)
            payload, text = _fit_record(fit), _fit_text(fit, "deflated fit of y = alpha + beta*x")
        elif args.model == "allometric":
            sample = _table_pairs(table, path)
            fit = allometric_fit(sample)
            payload, text = _fit_record(fit), _fit_text(fit, "power-law fit y = beta * x^gamma")
        else:  # ancova
            groups = _table_groups(table, path)
            comparison = ancova_ratio_compare(groups)
            payload = _comparison_record(comparison)
            payload["note"] = RATIO_SLOPE_NOTE
            text = "\n".join(
                [
                    _fit_text(comparison.restricted, "restricted: one common slope"),
                    _fit_text(comparison.full, "full: one slope per group"),
                    f"F = {comparison.f_statistic:.6g}, p = {comparison.p_value:.6g}",
                    RATIO_SLOPE_NOTE,
                ]
            )
    except RatioCiError as exc:
        return _fail_method(args.model, exc)
    _write(_json_text(payload) if args.format == "json" else text + "\n", args.output)
    return 0


def _table_pairs(table: dict, path: str) -> PairedSample:
    xs = _numeric_column(table, "x", path)
    ys = _numeric_column(table, "y", path)
    if xs.size < 2:
        raise _InputError(f"{path}: need at least 2 data rows")
    try:
        return PairedSample(xs, ys)
    except RatioCiError as exc:
        raise _InputError(f"{path}: {exc}")


def _table_groups(table: dict, path: str) -> list[PairedSample]:
    if "group" not in table:
        raise _InputError(f"{path}: ancova needs columns x,y,group")
    xs = _numeric_column(table, "x", path)
    ys = _numeric_column(table, "y", path)
    labels = [str(v) for v in table["group"]]
    groups = []
    for label in sorted(set(labels)):
        mask = np.asarray([v == label for v in labels])
        try:
            groups.append(PairedSample(xs[mask], ys[mask]))
        except RatioCiError as exc:
            raise _InputError(f"{path}: group {label!r}: {exc}")
    return groups


def _cmd_demo(args: argparse.Namespace) -> int:
    table = stork_demo_table()
    report = spurious_demo(table["women"], table["babies"], table["storks"])
    lines = ["county  women  babies  storks  birth-rate  stork-rate"]
    for i in range(len(table["women"])):
        w, b, s = table["women"][i], table["babies"][i], table["storks"][i]
        lines.append(
            f"{i + 1:>6}  {w:>5g}  {b:>6g}  {s:>6g}  {b / w:>10.1f}  {s / w:>10.1f}"
        )
    lines.append("")
    lines.append(report.summary())
    _write("\n".join(lines) + "\n", args.output)
    return 0


# ------------------------------------------------------------------- parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratio-ci",
        description="Confidence sets and diagnostics for ratios of paired means.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser, *, seed_default: int = 0) -> None:
        p.add_argument("--level", type=_level_arg, default=0.95)
        p.add_argument("--seed", type=_positive_int(0, "seed"), default=seed_default)
        p.add_argument("--output", default=None, help="write here instead of stdout")

    ci = sub.add_parser("ci", help="confidence sets for one x,y dataset")
    ci.add_argument("--input", required=True, help="CSV with header x,y")
    ci.add_argument("--methods", type=_methods_arg, default=_methods_arg(CLOSED_FORM))
    ci.add_argument(
        "--replications", type=_positive_int(100, "replications"), default=2000
    )
    ci.add_argument("--trim", type=_trim_arg, default=0.25)
    ci.add_argument("--format", choices=("json", "csv"), default="json")
    common(ci)
    ci.set_defaults(handler=_cmd_ci)

    sim = sub.add_parser("simulate", help="coverage grid over cv_x, cv_y cells")
    sim.add_argument("--cv-x", type=_axis_arg, default=_axis_arg("0.01:10:7"))
    sim.add_argument("--cv-y", type=_axis_arg, default=_axis_arg("0.01:10:7"))
    sim.add_argument("--n", type=_positive_int(2, "n"), default=20)
    sim.add_argument("--corr", type=_corr_arg, default=0.0)
    sim.add_argument("--runs", type=_positive_int(100, "runs"), default=500)
    sim.add_argument("--methods", type=_methods_arg, default=_methods_arg(CLOSED_FORM))
    sim.add_argument(
        "--replications", type=_positive_int(100, "replications"), default=2000
    )
    sim.add_argument("--trim", type=_trim_arg, default=0.25)
    sim.add_argument("--threads", type=_positive_int(1, "threads"), default=None)
    common(sim)
    sim.set_defaults(handler=_cmd_simulate)

    bars = sub.add_parser("errorbars", help="per-run intervals at one cell")
    bars.add_argument("--cv-x", type=float, required=True)
    bars.add_argument("--cv-y", type=float, required=True)
    bars.add_argument("--n", type=_positive_int(2, "n"), default=500)
    bars.add_argument("--corr", type=_corr_arg, default=0.0)
    bars.add_argument("--runs", type=_positive_int(1, "runs"), default=40)
    common(bars)
    bars.set_defaults(handler=_cmd_errorbars)

    ell = sub.add_parser("ellipse", help="export the ellipse-and-wedge construction")
    ell.add_argument("--input", required=True, help="CSV with header x,y")
    ell.add_argument("--points", type=_positive_int(3, "points"), default=256)
    ell.add_argument("--format", choices=("svg", "csv"), default="svg")
    common(ell)
    ell.set_defaults(handler=_cmd_ellipse)

    reg = sub.add_parser("regress", help="regression views of ratio data")
    reg.add_argument("--input", required=True, help="CSV with named columns")
    reg.add_argument(
        "--model", choices=("ols", "ancova", "deflated", "allometric"), required=True
    )
    reg.add_argument("--response", default=None)
    reg.add_argument("--regressors", default=None, help="comma-separated column names")
    reg.add_argument("--intercept", action=argparse.BooleanOptionalAction, default=True)
    reg.add_argument("--format", choices=("json", "text"), default="json")
    common(reg)
    reg.set_defaults(handler=_cmd_regress)

    demo = sub.add_parser("demo", help="worked examples")
    demo.add_argument("topic", choices=("stork",))
    demo.add_argument("--output", default=None)
    demo.set_defaults(handler=_cmd_demo)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    try:
        return args.handler(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RatioCiError as exc:
        print(f"error: {args.subcommand}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
