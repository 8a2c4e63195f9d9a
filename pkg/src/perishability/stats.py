"""Least-squares lines with exact small-sample inference.

Slopes come from ordinary least squares, optionally through the origin.
P-values use the Student t distribution with the exact residual degrees of
freedom rather than a normal approximation; the tail probability is
computed through the regularized incomplete beta function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc


def student_t_two_sided(t_stat: float, df: int) -> float:
    """Two-sided tail probability P(|T| >= |t|) for Student's t.

    Uses the identity P(|T| >= t) = I_x(df/2, 1/2) with x = df/(df + t*t),
    where I is the regularized incomplete beta function.

    Parameters
    ----------
    t_stat : float
        Observed t statistic.
    df : int
        Degrees of freedom, at least 1.

    Returns
    -------
    float
        Two-sided p-value in [0, 1].
    """
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if math.isnan(t_stat):
        return float("nan")
    if math.isinf(t_stat):
        return 0.0
    x = df / (df + t_stat * t_stat)
    return float(betainc(df / 2.0, 0.5, x))


@dataclass
class LinearFit:
    """A fitted line with inference on the slope."""

    slope: float
    intercept: float  # 0.0 for fits through the origin
    stderr: float  # standard error of the slope
    t_stat: float
    p_value: float
    residual_sse: float
    r_squared: float
    df: int
    n: int

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.slope * np.asarray(x, dtype=float) + self.intercept


def _slope_inference(slope: float, sse: float, sxx: float, df: int) -> tuple[float, float, float]:
    sse = max(sse, 0.0)
    var = sse / df / sxx if df > 0 else float("nan")
    stderr = math.sqrt(var)
    if stderr > 0:
        t_stat = slope / stderr
    else:
        # exact fit: any nonzero slope is infinitely significant
        t_stat = 0.0 if slope == 0 else math.copysign(math.inf, slope)
    return stderr, t_stat, student_t_two_sided(t_stat, df)


def fit_through_origin(x: np.ndarray, y: np.ndarray) -> LinearFit:
    """OLS line through the origin; df = n - 1.

    R-squared is the uncentered variant 1 - SSE / sum(y^2), the natural
    quantity for a no-intercept model.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n != len(y):
        raise ValueError("x and y differ in length")
    if n < 2:
        raise ValueError(f"need at least 2 points, got {n}")
    sxx = float(np.dot(x, x))
    if sxx == 0:
        raise ValueError("all x values are zero, slope undefined")
    slope = float(np.dot(x, y)) / sxx
    resid = y - slope * x
    sse = float(np.dot(resid, resid))
    syy = float(np.dot(y, y))
    r2 = 1.0 - sse / syy if syy > 0 else 1.0
    df = n - 1
    stderr, t_stat, p = _slope_inference(slope, sse, sxx, df)
    return LinearFit(slope, 0.0, stderr, t_stat, p, sse, r2, df, n)


def fit_line(x: np.ndarray, y: np.ndarray) -> LinearFit:
    """OLS line with intercept; df = n - 2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n != len(y):
        raise ValueError("x and y differ in length")
    if n < 3:
        raise ValueError(f"need at least 3 points, got {n}")
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = float(np.dot(dx, dx))
    if sxx == 0:
        raise ValueError("x values are all equal, slope undefined")
    slope = float(np.dot(dx, y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - slope * x - intercept
    sse = float(np.dot(resid, resid))
    syy = float(np.dot(y - ym, y - ym))
    r2 = 1.0 - sse / syy if syy > 0 else 1.0
    df = n - 2
    stderr, t_stat, p = _slope_inference(slope, sse, sxx, df)
    return LinearFit(slope, intercept, stderr, t_stat, p, sse, r2, df, n)
