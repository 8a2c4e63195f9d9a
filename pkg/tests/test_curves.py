"""Learning-curve fits, inversion, and effectiveness construction."""

import numpy as np
import pytest

from perishability.backend import EvalRecord, TrainJob
from perishability.curves import (
    EffectivenessSeries,
    Inversion,
    LearningCurveFit,
    LearningCurvePoint,
    build_effectiveness_series,
    effective_size,
    fit_power_law,
    invert_curve,
    native_curve_points,
)
from perishability.errors import (
    BackendMismatchError,
    DegenerateFitError,
    FitError,
    SaturationError,
)


def curve(a=2.0, b=0.3, c=1.0, lo=10_000, hi=10_000_000, backend="ngram-o4-em"):
    return LearningCurveFit(
        a=a, b=b, c=c, residual_sse=0.0, r_squared=1.0, point_count=6,
        size_min=lo, size_max=hi, topic="t", period_id="2012-01",
        backend_id=backend,
    )


def test_inversion_is_the_exact_inverse():
    fit = curve()
    for n in [1e4, 1e5, 1e6, 1e7]:
        inv = invert_curve(fit, fit.predict(n))
        assert abs(inv.size - n) / n < 1e-9
        assert not inv.extrapolated


def test_inversion_decreases_with_loss():
    fit = curve()
    losses = np.linspace(fit.predict(1e7), fit.predict(1e4), 50)
    sizes = [invert_curve(fit, l).size for l in losses]
    assert all(x > y for x, y in zip(sizes, sizes[1:]))


def test_inversion_saturates_at_the_floor():
    fit = curve()
    with pytest.raises(SaturationError):
        invert_curve(fit, fit.c)
    with pytest.raises(SaturationError):
        invert_curve(fit, fit.c - 0.05)


def test_extrapolation_flag_and_endpoint_slack():
    fit = curve()
    assert invert_curve(fit, fit.predict(5e3)).extrapolated
    assert invert_curve(fit, fit.predict(5e7)).extrapolated
    # exact endpoints carry float error from predict; they must not flag
    assert not invert_curve(fit, fit.predict(fit.size_min)).extrapolated
    assert not invert_curve(fit, fit.predict(fit.size_max)).extrapolated


def test_noiseless_fit_recovers_a_saturating_curve():
    sizes = [1e3, 3e3, 1e4, 3e4, 1e5, 3e5]
    pts = [LearningCurvePoint(int(n), 5.0 * n ** -0.5 + 3.2) for n in sizes]
    fit = fit_power_law(pts)
    assert fit.a == pytest.approx(5.0, rel=1e-6)
    assert fit.b == pytest.approx(0.5, rel=1e-6)
    assert fit.c == pytest.approx(3.2, rel=1e-6)
    assert fit.r_squared > 0.999999


def test_b_recovery_quality_gate_under_one_percent_noise():
    # 1% multiplicative noise, 100 seeds, b within 10% on every seed.
    # The true floor is 0 here: with a large floor the decaying component
    # at the top sizes drops below the noise and no estimator could pin b.
    sizes = np.array([1e3, 2e3, 5e3, 1e4, 5e4, 1e5, 5e5, 1e6])
    true = 10.0 * sizes ** -0.3
    for seed in range(100):
        rng = np.random.default_rng(seed)
        noisy = true * np.exp(rng.normal(0.0, 0.01, sizes.size))
        fit = fit_power_law(
            [LearningCurvePoint(int(n), float(l)) for n, l in zip(sizes, noisy)]
        )
        assert abs(fit.b - 0.3) / 0.3 <= 0.10, f"seed {seed}: b={fit.b:.4f}"


def test_fit_rejects_degenerate_inputs():
    flat = [LearningCurvePoint(n, 2.0) for n in (10, 100, 1000)]
    with pytest.raises(DegenerateFitError):
        fit_power_law(flat)
    rising = [LearningCurvePoint(n, float(i)) for i, n in enumerate((10, 100, 1000), 1)]
    with pytest.raises(DegenerateFitError):
        fit_power_law(rising)
    with pytest.raises(FitError):
        fit_power_law([LearningCurvePoint(10, 2.0), LearningCurvePoint(100, 1.0)])
    dupes = [LearningCurvePoint(10, 3.0), LearningCurvePoint(10, 2.9),
             LearningCurvePoint(100, 1.0)]
    with pytest.raises(FitError):
        fit_power_law(dupes)
    negative = [LearningCurvePoint(10, 2.0), LearningCurvePoint(100, -1.0),
                LearningCurvePoint(1000, 0.5)]
    with pytest.raises(FitError):
        fit_power_law(negative)


def record(size, loss, train="2012-01", test="2012-01", seed=0, dev=None,
           backend="ngram-o4-em", topic="t"):
    return EvalRecord(
        job=TrainJob(topic=topic, train_period=train, subset_size=size,
                     backend_id=backend, seed=seed),
        test_period=test, loss_nats_per_token=loss, token_count=1000,
        dev_loss=dev,
    )


def test_effective_size_guards_backend_identity():
    fit = curve(backend="ngram-o4-em")
    rec = record(100_000, fit.predict(50_000), backend="ext:gpt")
    with pytest.raises(BackendMismatchError):
        effective_size(rec, fit)


def test_effective_size_explicit_native_size():
    fit = curve()
    rec = record(100_000, fit.predict(50_000))
    point = effective_size(rec, fit, native_size=200_000)
    assert point.effective_size == pytest.approx(50_000, rel=1e-9)
    assert point.effectiveness == pytest.approx(0.25, rel=1e-9)


def test_native_points_take_best_seed_per_size():
    records = [
        record(1000, 3.0, seed=0, dev=3.5),
        record(1000, 2.9, seed=1, dev=3.3),
        record(2000, 2.5, seed=0, dev=3.1),
        record(2000, 2.6, seed=1, dev=3.2),
        record(2000, 9.9, seed=0, dev=3.0, test="2012-02"),  # cross-period, ignored
    ]
    pts = native_curve_points(records, "t", "2012-01", "ngram-o4-em")
    assert [(p.size, p.loss) for p in pts] == [(1000, 2.9), (2000, 2.5)]


def ladder_records(period, fit, topic="t", cross_from=None):
    """Native ladder for one period, plus one cross evaluation if asked."""
    sizes = [10_000, 20_000, 40_000, 80_000, 160_000]
    recs = [record(n, fit.predict(n), train=period, test=period, topic=topic)
            for n in sizes]
    if cross_from:
        recs.append(record(160_000, fit.predict(120_000), train=cross_from,
                           test=period, topic=topic))
    return recs


def test_effectiveness_series_same_period_is_one():
    fit = curve(lo=10_000, hi=160_000)
    records = ladder_records("2012-01", fit)
    series = build_effectiveness_series(records, "t", "2012-01", {"2012-01": fit})
    assert len(series.points) == 1
    pt = series.points[0]
    assert pt.delta_years == 0.0
    assert pt.effectiveness == pytest.approx(1.0, rel=1e-9)


def test_effectiveness_series_cross_period_and_skips():
    fit1 = curve(lo=10_000, hi=160_000)
    fit2 = curve(a=2.2, lo=10_000, hi=160_000)
    records = (
        ladder_records("2012-01", fit1)
        + ladder_records("2012-07", fit2, cross_from="2012-01")
        + [record(160_000, 3.0, train="2012-01", test="2013-01")]
    )
    series = build_effectiveness_series(
        records, "t", "2012-01", {"2012-01": fit1, "2012-07": fit2}
    )
    assert series.skipped_periods == ["2013-01"]  # no native fit there
    assert [p.test_period for p in series.points] == ["2012-01", "2012-07"]
    far = series.points[1]
    assert far.delta_years == pytest.approx(0.5)
    assert far.effectiveness == pytest.approx(120_000 / 160_000, rel=1e-9)


def test_effectiveness_series_rejects_mixed_backends():
    fit = curve(lo=10_000, hi=160_000)
    records = ladder_records("2012-01", fit) + [
        record(160_000, 2.0, backend="ext:other")
    ]
    with pytest.raises(BackendMismatchError):
        build_effectiveness_series(records, "t", "2012-01", {"2012-01": fit})


def test_effectiveness_series_needs_reference_evaluations():
    fit = curve()
    with pytest.raises(FitError):
        build_effectiveness_series(
            ladder_records("2012-01", fit), "t", "2015-01", {"2012-01": fit}
        )


def test_series_from_values_sorts_by_age():
    series = EffectivenessSeries.from_values([2.0, 0.5, 1.0], [0.5, 0.9, 0.8])
    assert series.t.tolist() == [0.5, 1.0, 2.0]
    assert series.y.tolist() == [0.9, 0.8, 0.5]
