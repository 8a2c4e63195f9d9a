"""Exponential decay of effectiveness, and everything reported from it.

The working model is log(y) = -mu * t + u with y the effectiveness of a
model aged t years, fitted by least squares on the log scale, by default
through the origin (u = 0).  mu is the decay rate per year and
ln 2 / mu its half-life.  The pairwise variant regresses the difference
of two topics' log effectiveness on t, so its slope -beta is the rate
gap, with H0: beta = 0 giving a significance band for "these two topics
perish at different speeds".
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .curves import EffectivenessSeries
from .errors import InsufficientDataError
from .stats import LinearFit, fit_line, fit_through_origin

DEFAULT_HALF_LIFE_CAP = 100.0


@dataclass
class HalfLife:
    years: float  # math.inf when mu <= 0
    display: str
    censored: bool  # True when reported as "> cap"


def half_life(mu: float, cap: float = DEFAULT_HALF_LIFE_CAP) -> HalfLife:
    """Half-life in years for decay rate mu, capped for reporting.

    Values beyond the cap keep their raw number but display in the
    censored form, e.g. mu=0.004103 gives "100> (168.9)".  A
    non-positive rate never halves at all and displays as infinite.
    """
    if mu <= 0:
        return HalfLife(math.inf, "∞", False)
    years = math.log(2.0) / mu
    if years > cap:
        return HalfLife(years, f"{cap:g}> ({years:.1f})", True)
    return HalfLife(years, f"{years:.2f}", False)


class Band(IntEnum):
    """Significance bands for H0: no rate difference, strict thresholds."""

    NONE = 0  # p >= 0.05
    P05 = 1  # p < 0.05
    P01 = 2  # p < 0.01
    P001 = 3  # p < 0.001


def significance_band(
    p_value: float,
    thresholds: tuple[float, float, float] = (1e-3, 0.01, 0.05),
) -> Band:
    if not 0.0 <= p_value <= 1.0:
        raise ValueError(f"p-value {p_value!r} outside [0, 1]")
    strong, mid, weak = thresholds
    if p_value < strong:
        return Band.P001
    if p_value < mid:
        return Band.P01
    if p_value < weak:
        return Band.P05
    return Band.NONE


def _clean_series(series: EffectivenessSeries, clip_at_one: bool) -> tuple[np.ndarray, np.ndarray, int]:
    t = series.t.astype(float)
    y = series.y.astype(float)
    keep = y > 0
    dropped = int((~keep).sum())
    t, y = t[keep], y[keep]
    if clip_at_one:
        y = np.minimum(y, 1.0)
    return t, y, dropped


@dataclass
class DecayFit:
    topic: str
    mu: float  # per year
    stderr: float
    t_stat: float
    p_value: float
    half_life: HalfLife
    n_points: int
    dropped_points: int  # nonpositive effectiveness, unusable on the log scale
    intercept: float
    intercept_used: bool


def fit_exponential_decay(
    series: EffectivenessSeries,
    intercept: bool = False,
    clip_at_one: bool = True,
    cap: float = DEFAULT_HALF_LIFE_CAP,
) -> DecayFit:
    """Fit log(y) = -mu * t (+ u with ``intercept=True``) to a series.

    Effectiveness above 1 is clipped to 1 before the log unless
    ``clip_at_one`` is off; nonpositive values are dropped and counted.
    Inference on mu is exact-t with n - k degrees of freedom.
    """
    t, y, dropped = _clean_series(series, clip_at_one)
    need = 3 if intercept else 2
    if len(t) < need:
        raise InsufficientDataError(
            f"topic {series.topic!r}: {len(t)} usable points, need {need}"
        )
    logy = np.log(y)
    fit: LinearFit = fit_line(t, logy) if intercept else fit_through_origin(t, logy)
    mu = -fit.slope
    return DecayFit(
        topic=series.topic,
        mu=mu,
        stderr=fit.stderr,
        t_stat=fit.t_stat,
        p_value=fit.p_value,
        half_life=half_life(mu, cap=cap),
        n_points=fit.n,
        dropped_points=dropped,
        intercept=fit.intercept,
        intercept_used=intercept,
    )


@dataclass
class PairwiseFit:
    topic_i: str
    topic_j: str
    beta: float  # decay-rate gap per year, positive when i perishes faster
    stderr: float
    t_stat: float
    p_value: float
    band: Band
    n_points: int


def pairwise_decay_difference(
    series_i: EffectivenessSeries,
    series_j: EffectivenessSeries,
    intercept: bool = False,
    clip_at_one: bool = True,
) -> PairwiseFit:
    """Fit log(y_i) - log(y_j) = -beta * t on the common age gaps.

    Points align by age gap (inner join, months of resolution).  Swapping
    the two series negates beta exactly and keeps the p-value.
    """
    ti, yi, _ = _clean_series(series_i, clip_at_one)
    tj, yj, _ = _clean_series(series_j, clip_at_one)
    right = {round(t, 9): y for t, y in zip(tj, yj)}
    t_common, d = [], []
    for t, y in zip(ti, yi):
        other = right.get(round(t, 9))
        if other is not None:
            t_common.append(t)
            d.append(math.log(y) - math.log(other))
    need = 3
    if len(t_common) < need:
        raise InsufficientDataError(
            f"{series_i.topic!r} vs {series_j.topic!r}: only {len(t_common)} "
            f"common age gaps, need {need}"
        )
    t_arr = np.array(t_common)
    d_arr = np.array(d)
    fit = fit_line(t_arr, d_arr) if intercept else fit_through_origin(t_arr, d_arr)
    beta = -fit.slope
    # an identical pair fits exactly with beta 0; that is no evidence of a
    # difference, so it lands in the lowest band
    p = 1.0 if (fit.stderr == 0 and beta == 0) else fit.p_value
    return PairwiseFit(
        topic_i=series_i.topic,
        topic_j=series_j.topic,
        beta=beta,
        stderr=fit.stderr,
        t_stat=fit.t_stat,
        p_value=p,
        band=significance_band(p),
        n_points=fit.n,
    )


@dataclass
class FormComparison:
    topic: str
    exp_sse: float
    exp_r2: float
    pow_sse: float
    pow_r2: float
    verdict: str  # "exponential" | "power_law" | "inconclusive"
    excluded_zero_dt: int
    n_points: int


def compare_functional_forms(
    series: EffectivenessSeries,
    clip_at_one: bool = True,
    tie_margin: float = 0.05,
) -> FormComparison:
    """Race log y against t (exponential) and against log t (power law).

    Zero age gaps cannot enter the power-law regression (log t) and are
    excluded there but kept for the exponential fit; the count is
    recorded.  The verdict goes to the smaller SSE unless the two are
    within ``tie_margin`` of each other, which is a tie.
    """
    t, y, _ = _clean_series(series, clip_at_one)
    if len(t) < 3:
        raise InsufficientDataError(f"topic {series.topic!r}: need 3 positive points")
    logy = np.log(y)
    exp_fit = fit_line(t, logy)

    positive_t = t > 0
    excluded = int((~positive_t).sum())
    if positive_t.sum() < 3:
        raise InsufficientDataError(
            f"topic {series.topic!r}: need 3 points with positive age gap"
        )
    pow_fit = fit_line(np.log(t[positive_t]), logy[positive_t])

    e_sse, p_sse = exp_fit.residual_sse, pow_fit.residual_sse
    if abs(e_sse - p_sse) <= tie_margin * max(e_sse, p_sse):
        verdict = "inconclusive"
    elif e_sse < p_sse:
        verdict = "exponential"
    else:
        verdict = "power_law"
    return FormComparison(
        topic=series.topic,
        exp_sse=e_sse,
        exp_r2=exp_fit.r_squared,
        pow_sse=p_sse,
        pow_r2=pow_fit.r_squared,
        verdict=verdict,
        excluded_zero_dt=excluded,
        n_points=len(t),
    )


def render_rate_table(fits: list[DecayFit]) -> str:
    """CSV of decay rates, slowest perishing first.

    The estimate column is the regression slope -mu, the half-life column
    the capped display form.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["topic", "estimate_per_year", "half_life_years", "stderr", "p_value"])
    for fit in sorted(fits, key=lambda f: abs(f.mu)):
        writer.writerow(
            [
                fit.topic,
                f"{-fit.mu:.3f}",
                fit.half_life.display,
                f"{fit.stderr:.2E}",
                f"{fit.p_value:.3G}",
            ]
        )
    return buf.getvalue()


def render_band_matrix(fits: list[DecayFit], pairs: list[PairwiseFit]) -> str:
    """CSV matrix of pairwise significance bands (codes 0-3), diagonal blank."""
    topics = [f.topic for f in sorted(fits, key=lambda f: abs(f.mu))]
    lookup: dict[frozenset, Band] = {}
    for p in pairs:
        lookup[frozenset((p.topic_i, p.topic_j))] = p.band
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["topic"] + topics)
    for a in topics:
        row: list[str] = [a]
        for b in topics:
            if a == b:
                row.append("")
                continue
            band = lookup.get(frozenset((a, b)))
            row.append("" if band is None else str(int(band)))
        writer.writerow(row)
    return buf.getvalue()


def render_effectiveness_csv(series: EffectivenessSeries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "topic",
            "train_period",
            "test_period",
            "delta_years",
            "native_size",
            "effective_size",
            "effectiveness",
            "extrapolated",
        ]
    )
    for p in series.points:
        writer.writerow(
            [
                series.topic,
                p.train_period,
                p.test_period,
                f"{p.delta_years:.6g}",
                f"{p.native_size:.6g}",
                f"{p.effective_size:.6g}",
                f"{p.effectiveness:.6g}",
                int(p.extrapolated),
            ]
        )
    return buf.getvalue()


def render_reports(fits: list[DecayFit], pairs: list[PairwiseFit]) -> tuple[str, str]:
    """The decay-rate table and the pairwise band matrix, as CSV strings."""
    return render_rate_table(fits), render_band_matrix(fits, pairs)
