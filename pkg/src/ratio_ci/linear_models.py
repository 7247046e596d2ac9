"""Regression views of ratio problems.

Zero-intercept slope fits treat the ratio as a regression coefficient,
which is appropriate when the denominator is fixed by design and the error
sits in the numerator. The deflated fit divides the model y = a + b*x + e
through by x, turning b into an intercept; it estimates the same parameters
under errors proportional to x. Allometric fits estimate power laws on the
log scale. The spurious-correlation demonstration contrasts a proper
partial regression with the rate-on-rate regression that manufactures
significance by dividing both sides by the same noisy denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import fdtrc

from .core import PairedSample, _validated_array
from .errors import (
    DomainError,
    NonPositiveData,
    RankDeficient,
    TooFewObservations,
    ZeroIndividualDenominator,
)

__all__ = [
    "RegressionFit",
    "ModelComparison",
    "SpuriousReport",
    "RATIO_SLOPE_NOTE",
    "ols_fit",
    "ancova_ratio_compare",
    "deflated_fit",
    "allometric_fit",
    "spurious_demo",
    "stork_demo_table",
]

RATIO_SLOPE_NOTE = (
    "Note: a zero-intercept slope treats the denominator as error-free. "
    "When both measurements carry sampling error, summarize the ratio with "
    "the exact confidence set instead (ci --methods fieller)."
)


@dataclass(frozen=True)
class RegressionFit:
    """Least-squares fit: named coefficients with matching standard errors."""

    coefficients: dict[str, float]
    standard_errors: dict[str, float]
    residual_variance: float
    df: int
    r_squared: float

    def __post_init__(self):
        if self.df < 1:
            raise TooFewObservations("no residual degrees of freedom")
        if self.residual_variance < 0.0:
            raise DomainError("residual variance cannot be negative")

    @property
    def sse(self) -> float:
        return self.residual_variance * self.df


@dataclass(frozen=True)
class ModelComparison:
    """Nested-model F test: does the full model improve on the restricted?"""

    restricted: RegressionFit
    full: RegressionFit
    f_statistic: float
    p_value: float


def _column(values, name: str) -> np.ndarray:
    return _validated_array(values, name)


def ols_fit(
    y: Sequence[float],
    regressors: Mapping[str, Sequence[float]],
    intercept: bool,
) -> RegressionFit:
    """Ordinary least squares with named columns.

    R-squared is centered when an intercept is fitted and uncentered
    otherwise (share of the raw sum of squares explained).
    """
    yv = _column(y, "y")
    n = yv.size
    names = (["intercept"] if intercept else []) + list(regressors)
    columns = [np.ones(n)] if intercept else []
    for name, values in regressors.items():
        col = _column(values, name)
        if col.size != n:
            raise DomainError(f"regressor {name} has {col.size} values, expected {n}")
        columns.append(col)
    if not columns:
        raise DomainError("nothing to fit: no regressors and no intercept")
    p = len(columns)
    if n <= p:
        raise TooFewObservations(f"{n} observations cannot identify {p} coefficients")
    x = np.column_stack(columns)
    if np.linalg.matrix_rank(x) < p:
        raise RankDeficient("design matrix columns are linearly dependent")

    beta, _, _, _ = np.linalg.lstsq(x, yv, rcond=None)
    resid = yv - x @ beta
    sse = float(resid @ resid)
    df = n - p
    s2 = sse / df
    cov = s2 * np.linalg.inv(x.T @ x)
    ses = np.sqrt(np.maximum(np.diag(cov), 0.0))

    if intercept:
        dev = yv - yv.mean()
        tss = float(dev @ dev)
    else:
        tss = float(yv @ yv)
    if tss > 0.0:
        r_squared = 1.0 - sse / tss
    else:
        r_squared = 1.0 if sse == 0.0 else math.nan

    return RegressionFit(
        coefficients={name: float(b) for name, b in zip(names, beta)},
        standard_errors={name: float(s) for name, s in zip(names, ses)},
        residual_variance=s2,
        df=df,
        r_squared=r_squared,
    )


def _nested_f(sse_r: float, sse_f: float, df_r: int, df_f: int) -> tuple[float, float]:
    num_df = df_r - df_f
    if num_df < 1:
        raise DomainError("the full model must fit more coefficients")
    if df_f < 1:
        raise TooFewObservations("full model has no residual degrees of freedom")
    # Rounding can leave the restricted SSE a hair below the full one.
    num = max(sse_r - sse_f, 0.0) / num_df
    if sse_f == 0.0:
        if num == 0.0:
            return 0.0, 1.0
        return math.inf, 0.0
    f = num / (sse_f / df_f)
    return f, float(fdtrc(num_df, df_f, f))


def ancova_ratio_compare(groups: Sequence[PairedSample]) -> ModelComparison:
    """Are the per-group zero-intercept slopes (ratios) equal?

    Full model: one slope per group, y_gi = b_g * x_gi. Restricted model:
    one common slope. Both are closed-form projections, compared by the
    standard nested F test. See RATIO_SLOPE_NOTE for when this framing is
    appropriate at all.
    """
    if len(groups) < 2:
        raise DomainError("need at least two groups to compare slopes")
    sxx, sxy, syy, sizes = [], [], [], []
    for g, sample in enumerate(groups, start=1):
        xs, ys = sample.xs, sample.ys
        sxx_g = float(xs @ xs)
        if sxx_g == 0.0:
            raise RankDeficient(f"group {g} has all-zero x values")
        sxx.append(sxx_g)
        sxy.append(float(xs @ ys))
        syy.append(float(ys @ ys))
        sizes.append(sample.n)

    n_total = sum(sizes)
    m = len(groups)
    slopes = [b / a for a, b in zip(sxx, sxy)]
    sse_full = sum(max(sy - b * sx_y, 0.0) for sy, b, sx_y in zip(syy, slopes, sxy))
    df_full = n_total - m
    if df_full < 1:
        raise TooFewObservations("not enough observations for per-group slopes")

    common = sum(sxy) / sum(sxx)
    sse_restricted = max(sum(syy) - common * sum(sxy), 0.0)
    df_restricted = n_total - 1

    tss = sum(syy)

    def uncentered_r2(sse: float) -> float:
        if tss > 0.0:
            return 1.0 - sse / tss
        return 1.0 if sse == 0.0 else math.nan

    s2_r = sse_restricted / df_restricted
    restricted = RegressionFit(
        coefficients={"slope": common},
        standard_errors={"slope": math.sqrt(s2_r / sum(sxx))},
        residual_variance=s2_r,
        df=df_restricted,
        r_squared=uncentered_r2(sse_restricted),
    )
    s2_f = sse_full / df_full
    full = RegressionFit(
        coefficients={f"slope_{g}": b for g, b in enumerate(slopes, start=1)},
        standard_errors={
            f"slope_{g}": math.sqrt(s2_f / a) for g, a in enumerate(sxx, start=1)
        },
        residual_variance=s2_f,
        df=df_full,
        r_squared=uncentered_r2(sse_full),
    )
    f, p = _nested_f(sse_restricted, sse_full, df_restricted, df_full)
    return ModelComparison(restricted=restricted, full=full, f_statistic=f, p_value=p)


def deflated_fit(sample: PairedSample) -> RegressionFit:
    """Fit y = a + b*x by regressing y/x on 1/x.

    Dividing through by x moves b into the intercept and a onto the 1/x
    slope; the coefficients are relabeled back to (alpha, beta) of the
    original line. This weighting is the right one when the error scale
    grows proportionally to x.
    """
    zeros = np.flatnonzero(sample.xs == 0.0)
    if zeros.size:
        raise ZeroIndividualDenominator(zeros)
    rates = sample.ys / sample.xs
    inv = 1.0 / sample.xs
    fit = ols_fit(rates, {"inverse_x": inv}, intercept=True)
    return RegressionFit(
        coefficients={
            "alpha": fit.coefficients["inverse_x"],
            "beta": fit.coefficients["intercept"],
        },
        standard_errors={
            "alpha": fit.standard_errors["inverse_x"],
            "beta": fit.standard_errors["intercept"],
        },
        residual_variance=fit.residual_variance,
        df=fit.df,
        r_squared=fit.r_squared,
    )


def allometric_fit(
    data: PairedSample | Sequence[float],
    regressors: Mapping[str, Sequence[float]] | None = None,
) -> RegressionFit:
    """Power-law fit y = beta * prod(x_j ** gamma_j) via log-log regression.

    Accepts a PairedSample (single regressor named x) or an explicit
    response plus named regressors. All values must be strictly positive.
    Coefficients: log_beta and beta for the prefactor, gamma_<name> per
    regressor; the standard error is reported on the log_beta scale.
    """
    if isinstance(data, PairedSample):
        response = data.ys
        regs: dict[str, np.ndarray] = {"x": data.xs}
    else:
        if not regressors:
            raise DomainError("need at least one regressor")
        response = _column(data, "response")
        regs = {name: _column(v, name) for name, v in regressors.items()}
    if np.any(response <= 0.0) or any(np.any(v <= 0.0) for v in regs.values()):
        raise NonPositiveData("log-scale fitting needs strictly positive values")

    fit = ols_fit(np.log(response), {n: np.log(v) for n, v in regs.items()}, intercept=True)
    log_beta = fit.coefficients["intercept"]
    coefficients = {"log_beta": log_beta, "beta": math.exp(log_beta)}
    standard_errors = {"log_beta": fit.standard_errors["intercept"]}
    for name in regs:
        coefficients[f"gamma_{name}"] = fit.coefficients[name]
        standard_errors[f"gamma_{name}"] = fit.standard_errors[name]
    return RegressionFit(
        coefficients=coefficients,
        standard_errors=standard_errors,
        residual_variance=fit.residual_variance,
        df=fit.df,
        r_squared=fit.r_squared,
    )


@dataclass(frozen=True)
class SpuriousReport:
    """Side-by-side partial regression vs rate-on-rate regression."""

    partial: ModelComparison
    rate_based: ModelComparison

    def summary(self, alpha: float = 0.05) -> str:
        def verdict(comparison: ModelComparison, label: str, coef: str) -> list[str]:
            est = comparison.full.coefficients[coef]
            se = comparison.full.standard_errors[coef]
            sig = "significant" if comparison.p_value < alpha else "not significant"
            return [
                f"{label}:",
                f"  extra coefficient {coef} = {est:.4f} (se {se:.4f})",
                f"  F = {comparison.f_statistic:.4f}, p = {comparison.p_value:.4f}"
                f" -> {sig} at {alpha:g}",
            ]

        lines = verdict(
            self.partial, "Partial regression (counts on counts)", "storks"
        )
        lines += verdict(
            self.rate_based, "Rate regression (both sides divided by women)", "stork_rate"
        )
        lines.append(
            "Dividing response and regressor by the same noisy count couples "
            "their errors; the rate regression can declare an effect the "
            "partial regression does not support."
        )
        lines.append(
            "Illustrative only: with a handful of observations the p-values "
            "are fragile; the contrast between the two analyses is the point."
        )
        return "\n".join(lines)


def spurious_demo(
    women: Sequence[float],
    babies: Sequence[float],
    storks: Sequence[float],
) -> SpuriousReport:
    """Contrast the two ways of asking whether storks deliver babies.

    Partial regression: babies ~ women + storks, testing the stork term
    against babies ~ women. Rate-based: babies/women ~ storks/women tested
    against a constant birth rate. Same data, same question, and only the
    deflated version finds an effect when none was put in.
    """
    x = _column(women, "women")
    y = _column(babies, "babies")
    z = _column(storks, "storks")
    if not (x.size == y.size == z.size):
        raise DomainError("all three columns must have the same length")
    if x.size < 4:
        raise TooFewObservations("need at least four observations")
    if np.any(x <= 0.0):
        raise NonPositiveData("women counts must be strictly positive")

    counts_restricted = ols_fit(y, {"women": x}, intercept=True)
    counts_full = ols_fit(y, {"women": x, "storks": z}, intercept=True)
    f_stat, p = _nested_f(
        counts_restricted.sse, counts_full.sse, counts_restricted.df, counts_full.df
    )
    partial = ModelComparison(counts_restricted, counts_full, f_stat, p)

    rates = y / x
    rates_restricted = ols_fit(rates, {}, intercept=True)
    rates_full = ols_fit(rates, {"stork_rate": z / x}, intercept=True)
    f_stat, p = _nested_f(
        rates_restricted.sse, rates_full.sse, rates_restricted.df, rates_full.df
    )
    rate_based = ModelComparison(rates_restricted, rates_full, f_stat, p)
    return SpuriousReport(partial=partial, rate_based=rate_based)


def stork_demo_table() -> dict[str, tuple[float, ...]]:
    """Four-region toy counts: women and babies grow together; storks tag
    along with region size."""
    return {
        "women": (1.0, 2.0, 3.0, 4.0),
        "babies": (15.8, 20.2, 25.4, 30.1),
        "storks": (3.2, 4.1, 5.6, 6.3),
    }
