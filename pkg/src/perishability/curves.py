"""Learning curves and their inversion into effective dataset sizes.

A learning curve maps training-set size to evaluation loss as
loss(n) = a * n**-b + c, the three-parameter power law with an
irreducible floor c.  Inverting a fitted curve at an observed loss asks
"how much data from this period would score the same", which is the whole
measurement: a stale model's loss on fresh test data, pushed through the
fresh period's native curve, becomes an effective fresh-data size, and
dividing by the model's own training size gives its effectiveness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .backend import EvalRecord, best_records
from .errors import BackendMismatchError, DegenerateFitError, FitError, SaturationError
from .periods import delta_years

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class LearningCurvePoint:
    size: int
    loss: float


@dataclass
class LearningCurveFit:
    a: float
    b: float
    c: float
    residual_sse: float  # in log(loss - c) space
    r_squared: float
    point_count: int
    size_min: int
    size_max: int
    topic: str = ""
    period_id: str = ""
    backend_id: str = ""

    def predict(self, size: float) -> float:
        return self.a * size ** (-self.b) + self.c


@dataclass
class Inversion:
    size: float
    extrapolated: bool  # outside the fitted size range


def _log_fit_sse(sizes: np.ndarray, losses: np.ndarray, c: float) -> tuple[float, float, float]:
    """Regress log(loss - c) on log(size); returns (sse, slope, intercept)."""
    z = np.log(losses - c)
    x = np.log(sizes)
    n = len(x)
    xm, zm = x.mean(), z.mean()
    dx = x - xm
    sxx = float(np.dot(dx, dx))
    slope = float(np.dot(dx, z - zm)) / sxx
    intercept = zm - slope * xm
    resid = z - slope * x - intercept
    return float(np.dot(resid, resid)), slope, intercept


def fit_power_law(
    points: Sequence[LearningCurvePoint],
    topic: str = "",
    period_id: str = "",
    backend_id: str = "",
    grid: int = 256,
) -> LearningCurveFit:
    """Fit loss(n) = a * n**-b + c by profiling the floor c.

    c is scanned over [0, min loss) on a grid and refined by golden
    section; at each c the remaining two parameters drop out of a linear
    regression of log(loss - c) on log(size).  Candidate floors are
    compared by the residual sum of squares in the original loss space;
    log-space residuals are not comparable across c, since raising c
    stretches the log column and shrinking it compresses every residual.
    """
    if len(points) < 3:
        raise FitError(f"need at least 3 points, got {len(points)}")
    sizes = np.array([p.size for p in points], dtype=float)
    losses = np.array([p.loss for p in points], dtype=float)
    if len(set(sizes.tolist())) < 3:
        raise FitError("need at least 3 distinct sizes")
    if (losses <= 0).any():
        raise FitError("losses must be positive")
    order = np.argsort(sizes)
    sizes, losses = sizes[order], losses[order]

    min_loss = float(losses.min())
    hi = min_loss * (1.0 - 1e-12)

    def objective(c: float) -> float:
        if not 0.0 <= c <= hi:
            return math.inf
        _, slope, intercept = _log_fit_sse(sizes, losses, c)
        resid = math.exp(intercept) * sizes**slope + c - losses
        return float(np.dot(resid, resid))

    cs = np.linspace(0.0, hi, grid)
    sses = [objective(c) for c in cs]
    k = int(np.argmin(sses))
    lo_c = cs[max(k - 1, 0)]
    hi_c = cs[min(k + 1, grid - 1)]
    # golden section on the bracketing interval
    x1 = hi_c - _GOLDEN * (hi_c - lo_c)
    x2 = lo_c + _GOLDEN * (hi_c - lo_c)
    f1, f2 = objective(x1), objective(x2)
    for _ in range(120):
        if hi_c - lo_c < 1e-14 * max(min_loss, 1.0):
            break
        if f1 <= f2:
            hi_c, x2, f2 = x2, x1, f1
            x1 = hi_c - _GOLDEN * (hi_c - lo_c)
            f1 = objective(x1)
        else:
            lo_c, x1, f1 = x1, x2, f2
            x2 = lo_c + _GOLDEN * (hi_c - lo_c)
            f2 = objective(x2)
    best_c = min((objective(c), c) for c in (lo_c, x1, x2, hi_c, 0.0))[1]

    best_c = float(best_c)
    sse, slope, intercept = _log_fit_sse(sizes, losses, best_c)
    b = -slope
    a = math.exp(intercept)
    if b <= 0:
        rising = [
            (int(sizes[i]), float(losses[i]), int(sizes[i + 1]), float(losses[i + 1]))
            for i in range(len(sizes) - 1)
            if losses[i + 1] >= losses[i]
        ]
        raise DegenerateFitError(
            f"losses do not decrease with size (b={b:.4g}); offending pairs: {rising}"
        )
    z = np.log(losses - best_c)
    szz = float(np.dot(z - z.mean(), z - z.mean()))
    r2 = 1.0 - sse / szz if szz > 0 else 1.0
    return LearningCurveFit(
        a=a,
        b=b,
        c=best_c,
        residual_sse=sse,
        r_squared=r2,
        point_count=len(points),
        size_min=int(sizes[0]),
        size_max=int(sizes[-1]),
        topic=topic,
        period_id=period_id,
        backend_id=backend_id,
    )


def invert_curve(fit: LearningCurveFit, loss: float) -> Inversion:
    """Training size at which the fitted curve reaches ``loss``.

    Raises SaturationError at or below the floor c, where no finite amount
    of data reaches the loss.  Sizes outside the fitted range are still
    returned, flagged extrapolated.
    """
    if loss <= fit.c:
        raise SaturationError(
            f"loss {loss:.6g} is at or below the fitted floor {fit.c:.6g}"
        )
    size = ((loss - fit.c) / fit.a) ** (-1.0 / fit.b)
    # a hair of float slack so range endpoints do not flag as extrapolation
    inside = fit.size_min * (1 - 1e-9) <= size <= fit.size_max * (1 + 1e-9)
    return Inversion(size=size, extrapolated=not inside)


@dataclass
class EffectivenessPoint:
    train_period: str
    test_period: str
    delta_years: float
    native_size: float
    effective_size: float
    effectiveness: float
    extrapolated: bool


@dataclass
class EffectivenessSeries:
    """Effectiveness of one reference model across test periods, by age gap."""

    topic: str
    train_period: str
    backend_id: str
    points: list[EffectivenessPoint] = field(default_factory=list)
    skipped_periods: list[str] = field(default_factory=list)

    @property
    def t(self) -> np.ndarray:
        return np.array([p.delta_years for p in self.points])

    @property
    def y(self) -> np.ndarray:
        return np.array([p.effectiveness for p in self.points])

    @classmethod
    def from_values(
        cls,
        t: Sequence[float],
        y: Sequence[float],
        topic: str = "synthetic",
    ) -> "EffectivenessSeries":
        """Series from bare (age gap, effectiveness) pairs, for analysis code
        that does not care where the numbers came from."""
        if len(t) != len(y):
            raise ValueError("t and y differ in length")
        pts = [
            EffectivenessPoint("", "", float(ti), 0.0, 0.0, float(yi), False)
            for ti, yi in zip(t, y)
        ]
        pts.sort(key=lambda p: p.delta_years)
        return cls(topic=topic, train_period="", backend_id="", points=pts)


def effective_size(
    model_eval: EvalRecord,
    native_fit: LearningCurveFit,
    native_size: float | None = None,
) -> EffectivenessPoint:
    """Invert one cross-period evaluation through the test period's curve."""
    if native_fit.backend_id and native_fit.backend_id != model_eval.job.backend_id:
        raise BackendMismatchError(
            f"curve fitted on {native_fit.backend_id!r} cannot invert a "
            f"{model_eval.job.backend_id!r} evaluation"
        )
    if native_size is None:
        native_size = float(model_eval.job.subset_size)
    if native_size <= 0:
        raise ValueError("native size must be positive")
    inv = invert_curve(native_fit, model_eval.loss_nats_per_token)
    return EffectivenessPoint(
        train_period=model_eval.job.train_period,
        test_period=model_eval.test_period,
        delta_years=delta_years(model_eval.test_period, model_eval.job.train_period),
        native_size=native_size,
        effective_size=inv.size,
        effectiveness=inv.size / native_size,
        extrapolated=inv.extrapolated,
    )


def native_curve_points(
    records: Iterable[EvalRecord],
    topic: str,
    period_id: str,
    backend_id: str,
) -> list[LearningCurvePoint]:
    """Same-period (size, loss) points from a manifest, best seed per size."""
    picked = best_records(
        r
        for r in records
        if r.job.topic == topic
        and r.job.train_period == period_id
        and r.test_period == period_id
        and r.job.backend_id == backend_id
    )
    return [
        LearningCurvePoint(size=key[2], loss=rec.loss_nats_per_token)
        for key, rec in sorted(picked.items())
    ]


def fit_native_curves(
    records: Sequence[EvalRecord],
    topic: str,
    backend_id: str,
) -> dict[str, LearningCurveFit]:
    """Per-period power-law fits for every period with enough ladder rungs."""
    periods = sorted(
        {
            r.job.train_period
            for r in records
            if r.job.topic == topic and r.job.backend_id == backend_id
        }
    )
    fits = {}
    for pid in periods:
        points = native_curve_points(records, topic, pid, backend_id)
        if len(points) < 3:
            continue
        fits[pid] = fit_power_law(
            points, topic=topic, period_id=pid, backend_id=backend_id
        )
    return fits


def _single_backend_id(records: Sequence[EvalRecord], topic: str) -> str:
    ids = {r.job.backend_id for r in records if r.job.topic == topic}
    if not ids:
        raise FitError(f"no records for topic {topic!r}")
    if len(ids) > 1:
        raise BackendMismatchError(
            f"topic {topic!r} mixes backends {sorted(ids)}; pass backend_id"
        )
    return ids.pop()


def build_effectiveness_series(
    records: Sequence[EvalRecord],
    topic: str,
    reference_period: str,
    native_fits: dict[str, LearningCurveFit],
    reference_size: int | None = None,
    backend_id: str | None = None,
) -> EffectivenessSeries:
    """Effectiveness of the reference period's model on every test period.

    Uses the largest trained subset of the reference period unless
    ``reference_size`` narrows it.  Test periods without a native curve fit
    are skipped and listed on the returned series.
    """
    if backend_id is None:
        backend_id = _single_backend_id(records, topic)
    pool = [
        r
        for r in records
        if r.job.topic == topic
        and r.job.backend_id == backend_id
        and r.job.train_period == reference_period
    ]
    if not pool:
        raise FitError(
            f"no evaluations of a {reference_period} model for topic {topic!r}"
        )
    if reference_size is None:
        reference_size = max(r.job.subset_size for r in pool)
    picked = best_records(r for r in pool if r.job.subset_size == reference_size)

    series = EffectivenessSeries(
        topic=topic, train_period=reference_period, backend_id=backend_id
    )
    for key, rec in sorted(picked.items(), key=lambda kv: kv[0][4]):
        fit = native_fits.get(rec.test_period)
        if fit is None:
            series.skipped_periods.append(rec.test_period)
            continue
        series.points.append(effective_size(rec, fit, native_size=reference_size))
    series.points.sort(key=lambda p: p.delta_years)
    return series
