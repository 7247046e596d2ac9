"""Coverage simulations for the ratio methods over a (cv_x, cv_y, n) grid.

Cells are described by the individual-level coefficients of variation of the
two measurements. Population means default to 1, so the true ratio is 1 and
the CVs double as the standard deviations; every method under study is
scale equivariant, so this loses no generality.

Unbounded confidence sets count as covering when the true ratio is not in
the excluded interval (the whole line always covers); they are also tallied
separately so their frequency stays visible in the output.

Determinism: each run draws from default_rng([seed, run, attempt]), and each
grid cell gets its seed from SeedSequence([master_seed, cell_index]), so
results are identical regardless of thread count or which method subset is
requested. The bootstrap seed for a run is drawn from the run's stream even
when no bootstrap method is active, for the same reason.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .bootstrap import BootstrapConfig, BootstrapMethod, hwang_set, ratio_bootstrap_results
from .core import BivariateNormalParams, ConfidenceSpec, PairedSample, _draw_pairs, summarize
from .errors import DomainError, RatioCiError
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

__all__ = [
    "SimCell",
    "MethodCoverage",
    "CoverageResult",
    "GridSpec",
    "CoverageGrid",
    "ErrorBarRun",
    "ErrorBarExperiment",
    "run_cell",
    "run_grid",
    "error_bar_experiment",
    "grid_csv_rows",
    "errorbar_csv_rows",
    "thread_cap",
]

_RATIO_BOOT_METHODS = (Method.BOOTSTRAP_PERCENTILE, Method.BOOTSTRAP_BCA)


@dataclass(frozen=True)
class SimCell:
    """One simulation condition: CVs at the individual-measurement level."""

    cv_x: float
    cv_y: float
    n: int
    corr: float = 0.0
    mean_x: float = 1.0
    mean_y: float = 1.0

    def __post_init__(self):
        for name in ("cv_x", "cv_y", "corr", "mean_x", "mean_y"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "n", int(self.n))
        if not (self.cv_x > 0.0 and self.cv_y > 0.0):
            raise DomainError("coefficients of variation must be positive")
        if not abs(self.corr) <= 1.0:
            raise DomainError("correlation must lie in [-1, 1]")
        if self.n < 2:
            raise DomainError("need at least two pairs per sample")
        if self.mean_x == 0.0 or not math.isfinite(self.mean_y / self.mean_x):
            raise DomainError("true ratio must be finite")

    @property
    def true_rho(self) -> float:
        return self.mean_y / self.mean_x

    def params(self) -> BivariateNormalParams:
        return BivariateNormalParams(
            mean_x=self.mean_x,
            mean_y=self.mean_y,
            sd_x=self.cv_x * abs(self.mean_x),
            sd_y=self.cv_y * abs(self.mean_y),
            corr=self.corr,
        )


@dataclass(frozen=True)
class MethodCoverage:
    """Coverage tally for one method in one cell.

    Estimate moments are taken over the runs in which the method produced a
    finite estimate; runs where it raised count as non-coverage only.
    """

    runs: int
    covered: int
    unbounded_sets: int
    estimate_mean: float
    estimate_variance: float

    @property
    def coverage(self) -> float:
        return self.covered / self.runs


@dataclass(frozen=True)
class CoverageResult:
    cell: SimCell
    seed: int
    methods: dict[Method, MethodCoverage]
    redraws: int


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid of cells: the cross product of the two CV axes."""

    cv_x_values: tuple[float, ...]
    cv_y_values: tuple[float, ...]
    n: int
    corr: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "cv_x_values", tuple(float(v) for v in self.cv_x_values))
        object.__setattr__(self, "cv_y_values", tuple(float(v) for v in self.cv_y_values))
        if not self.cv_x_values or not self.cv_y_values:
            raise DomainError("both grid axes need at least one value")

    @classmethod
    def log_spaced(
        cls,
        n: int,
        count: int = 7,
        low: float = 0.01,
        high: float = 10.0,
        corr: float = 0.0,
    ) -> "GridSpec":
        axis = tuple(float(v) for v in np.geomspace(low, high, count))
        return cls(cv_x_values=axis, cv_y_values=axis, n=n, corr=corr)

    def cells(self) -> list[SimCell]:
        # cv_x varies slowest; the cell index fixes each cell's seed.
        return [
            SimCell(cv_x=cx, cv_y=cy, n=self.n, corr=self.corr)
            for cx in self.cv_x_values
            for cy in self.cv_y_values
        ]


@dataclass(frozen=True)
class CoverageGrid:
    spec: GridSpec
    runs: int
    master_seed: int
    results: tuple[CoverageResult, ...]

    @property
    def reference_cv_x(self) -> float:
        """cv_x above which the denominator mean is typically not
        significantly nonzero (cv of the mean = 0.5)."""
        return 0.5 * math.sqrt(self.spec.n)


@dataclass(frozen=True)
class ErrorBarRun:
    method: Method
    run: int
    estimate: float
    confidence_set: object
    covers_true: bool


@dataclass(frozen=True)
class ErrorBarExperiment:
    cell: SimCell
    seed: int
    level: float
    rows: tuple[ErrorBarRun, ...]

    def significant_deviations(self, method: Method) -> int:
        return sum(1 for r in self.rows if r.method is method and not r.covers_true)


def thread_cap(requested: int | None = None) -> int:
    """Worker count: explicit argument, else RATIO_CI_THREADS, else all cores."""
    if requested is None:
        env = os.environ.get("RATIO_CI_THREADS")
        if env is not None:
            try:
                requested = int(env)
            except ValueError:
                raise DomainError(f"RATIO_CI_THREADS must be an integer, got {env!r}")
    if requested is None:
        return os.cpu_count() or 1
    if requested < 1:
        raise DomainError("thread cap must be at least 1")
    return requested


def _draw_run(
    cell: SimCell, seed: int, run: int
) -> tuple[PairedSample, int, int]:
    """Sample for one run plus its bootstrap seed and the redraw count.

    Exactly-zero x draws (possible only by floating-point chance) invalidate
    the per-pair ratio methods, so the whole run is redrawn from the next
    attempt substream and tallied.
    """
    params = cell.params()
    attempt = 0
    while True:
        rng = np.random.default_rng([seed, run, attempt])
        sample = _draw_pairs(params, cell.n, rng)
        if not np.any(sample.xs == 0.0):
            break
        attempt += 1
    boot_seed = int(rng.integers(0, 2**63))
    return sample, boot_seed, attempt


def _normalized_methods(methods: Iterable[Method]) -> tuple[Method, ...]:
    requested = {Method(m) for m in methods}
    if not requested:
        raise DomainError("need at least one method")
    return tuple(m for m in Method if m in requested)


def run_cell(
    cell: SimCell,
    methods: Iterable[Method],
    runs: int,
    seed: int,
    boot_config: BootstrapConfig | None = None,
    level: float = 0.95,
    trim: float = 0.25,
) -> CoverageResult:
    """Simulate one cell and tally coverage per method.

    Method errors on a particular draw (a degenerate resample set, say)
    count as non-coverage for that run; they never abort the cell.
    """
    if runs < 100:
        raise DomainError("need at least 100 runs per cell")
    method_order = _normalized_methods(methods)
    if boot_config is None:
        boot_config = BootstrapConfig(method=BootstrapMethod.BCA)
    spec = ConfidenceSpec.two_sided(level, df=cell.n - 1)
    ratio_boot_wanted = tuple(m for m in method_order if m in _RATIO_BOOT_METHODS)
    rho = cell.true_rho

    covered = {m: 0 for m in method_order}
    unbounded = {m: 0 for m in method_order}
    estimates: dict[Method, list[float]] = {m: [] for m in method_order}
    redraws = 0

    for run in range(runs):
        sample, boot_seed, attempts = _draw_run(cell, seed, run)
        redraws += attempts
        stats = summarize(sample)
        run_config = replace(boot_config, seed=boot_seed)
        ratio_boot: dict[Method, MethodResult] | None = None
        for method in method_order:
            try:
                if method is Method.FIELLER:
                    result = fieller_set(stats, spec)
                elif method is Method.TAYLOR:
                    result = taylor_limits(stats, spec)
                elif method is Method.INDEX:
                    result = index_limits(sample, spec)
                elif method is Method.TRIMMED_INDEX:
                    result = trimmed_index_limits(sample, spec, trim)
                elif method is Method.ZERO_VARIANCE:
                    result = zero_variance_limits(sample, spec)
                elif method is Method.HWANG_BOOTSTRAP:
                    result = hwang_set(sample, run_config, spec)
                else:
                    if ratio_boot is None:
                        ratio_boot = ratio_bootstrap_results(
                            sample, run_config, spec, ratio_boot_wanted
                        )
                    result = ratio_boot[method]
            except RatioCiError:
                continue
            cset = result.confidence_set
            if cset.contains(rho):
                covered[method] += 1
            if cset.case is not SetCase.BOUNDED:
                unbounded[method] += 1
            if math.isfinite(result.estimate):
                estimates[method].append(result.estimate)

    tallies = {}
    for m in method_order:
        est = estimates[m]
        mean = float(np.mean(est)) if est else math.nan
        var = float(np.var(est, ddof=1)) if len(est) >= 2 else math.nan
        tallies[m] = MethodCoverage(
            runs=runs,
            covered=covered[m],
            unbounded_sets=unbounded[m],
            estimate_mean=mean,
            estimate_variance=var,
        )
    return CoverageResult(cell=cell, seed=seed, methods=tallies, redraws=redraws)


def _cell_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, np.uint64)[0])


def run_grid(
    gridspec: GridSpec,
    methods: Iterable[Method],
    runs: int,
    master_seed: int,
    boot_config: BootstrapConfig | None = None,
    level: float = 0.95,
    trim: float = 0.25,
    threads: int | None = None,
) -> CoverageGrid:
    """Run every cell of the grid, in parallel, in deterministic order.

    Cell seeds derive from (master_seed, cell index) alone, and results are
    collected in cell order, so the grid is a pure function of its arguments
    no matter how many workers execute it.
    """
    method_order = _normalized_methods(methods)
    cells = gridspec.cells()
    seeds = [_cell_seed(master_seed, i) for i in range(len(cells))]

    def job(args: tuple[SimCell, int]) -> CoverageResult:
        cell, seed = args
        return run_cell(cell, method_order, runs, seed, boot_config, level, trim)

    with ThreadPoolExecutor(max_workers=thread_cap(threads)) as pool:
        results = tuple(pool.map(job, zip(cells, seeds)))
    return CoverageGrid(spec=gridspec, runs=runs, master_seed=master_seed, results=results)


def error_bar_experiment(
    cell: SimCell, runs: int = 40, seed: int = 0, level: float = 0.95
) -> ErrorBarExperiment:
    """Per-run exact and per-pair-ratio intervals, ordered by estimate.

    At a 95% level roughly 2 of 40 intervals should miss the true ratio for
    a method whose coverage holds; a systematically biased method misses far
    more often. Rows are sorted by estimate within each method, the exact
    method's rows first.
    """
    if runs < 1:
        raise DomainError("need at least one run")
    spec = ConfidenceSpec.two_sided(level, df=cell.n - 1)
    rho = cell.true_rho
    per_method: dict[Method, list[ErrorBarRun]] = {Method.FIELLER: [], Method.INDEX: []}
    for run in range(runs):
        sample, _, _ = _draw_run(cell, seed, run)
        stats = summarize(sample)
        for method, result in (
            (Method.FIELLER, fieller_set(stats, spec)),
            (Method.INDEX, index_limits(sample, spec)),
        ):
            per_method[method].append(
                ErrorBarRun(
                    method=method,
                    run=run,
                    estimate=result.estimate,
                    confidence_set=result.confidence_set,
                    covers_true=result.confidence_set.contains(rho),
                )
            )
    rows: list[ErrorBarRun] = []
    for method in (Method.FIELLER, Method.INDEX):
        rows.extend(sorted(per_method[method], key=lambda r: r.estimate))
    return ErrorBarExperiment(cell=cell, seed=seed, level=level, rows=tuple(rows))


def _fmt(value: float) -> str:
    return repr(float(value))


def grid_csv_rows(grid: CoverageGrid) -> list[list[str]]:
    """Plot-ready long-format rows, one per (cell, method), plus header."""
    rows = [
        [
            "cv_x",
            "cv_y",
            "n",
            "corr",
            "method",
            "runs",
            "covered",
            "coverage",
            "unbounded_sets",
            "redraws",
        ]
    ]
    for result in grid.results:
        cell = result.cell
        for method, tally in result.methods.items():
            rows.append(
                [
                    _fmt(cell.cv_x),
                    _fmt(cell.cv_y),
                    str(cell.n),
                    _fmt(cell.corr),
                    method.value,
                    str(tally.runs),
                    str(tally.covered),
                    _fmt(tally.coverage),
                    str(tally.unbounded_sets),
                    str(result.redraws),
                ]
            )
    return rows


def errorbar_csv_rows(experiment: ErrorBarExperiment) -> list[list[str]]:
    """One row per (method, run); unbounded sets leave lower/upper empty."""
    rows = [["method", "run", "estimate", "lower", "upper", "case", "covers_true"]]
    for r in experiment.rows:
        cset = r.confidence_set
        bounded = cset.case is SetCase.BOUNDED
        rows.append(
            [
                r.method.value,
                str(r.run),
                _fmt(r.estimate),
                _fmt(cset.lower) if bounded else "",
                _fmt(cset.upper) if bounded else "",
                cset.case.value,
                "true" if r.covers_true else "false",
            ]
        )
    return rows
