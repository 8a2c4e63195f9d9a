"""Equivalence-model theory: densities, mixing, substitution, off-loading.

Closed-form oracle values are derived by hand from the model formulas:
with curve amplitude a=5 and exponent b=0.4, an excess loss d gives
equivalent size n (1 + d n^b / a)^(-1/b), so n=1e4 at d=0.02 yields
6911.366413 and the large-n limit is (d/a)^(-1/b) = 988211.768803.  The
uniform-age equivalent time under exponential decay solves
e^(-mu t*) = (1 - e^(-mu T)) / (mu T); at mu=0.5, T=2 that is
t* = 0.917350290774.
"""

import math

import numpy as np
import pytest

from perishability.theory import (
    DatasetComposition,
    DriftShift,
    PureExponential,
    SamplingDensity,
    check_perishability_order,
    composition_equivalent_size,
    equivalent_time,
    greedy_offload,
    linear_drift,
    net_distribution,
    offload_condition,
    theorem1_property,
    uniform_exponential_t_star,
)


def test_density_validation():
    with pytest.raises(ValueError):
        SamplingDensity((0.0, 1.0), (0.6, 0.4))  # edge count off
    with pytest.raises(ValueError):
        SamplingDensity((0.0, 2.0, 1.0), (0.5, 0.5))  # edges descend
    with pytest.raises(ValueError):
        SamplingDensity((0.0, 1.0, 2.0), (0.7, 0.4))  # mass sum 1.1
    with pytest.raises(ValueError):
        SamplingDensity((-1.0, 1.0), (1.0,))  # negative age
    with pytest.raises(ValueError):
        SamplingDensity((0.0, 1.0, 2.0), (1.2, -0.2))


def test_density_constructors():
    u = SamplingDensity.uniform(2.0, bins=4)
    assert u.window == 2.0
    assert u.edges == (0.0, 0.5, 1.0, 1.5, 2.0)
    assert u.masses == (0.25, 0.25, 0.25, 0.25)
    atom = SamplingDensity.point_mass(1.5)
    assert atom.window == 1.5
    assert atom.bins == [(1.5, 1.5, 1.0)]


def test_density_mean_of_is_exact_on_polynomials():
    # Gauss-Legendre bin quadrature integrates low-degree polynomials
    # exactly; mean of age^2 over uniform [0, 3] is 3
    u = SamplingDensity.uniform(3.0, bins=2)
    assert u.mean_of(lambda s: s**2) == pytest.approx(3.0, abs=1e-12)
    atom = SamplingDensity.point_mass(2.0)
    assert atom.mean_of(lambda s: s**2) == pytest.approx(4.0, abs=1e-12)


def test_density_drop_oldest_renormalizes():
    d = SamplingDensity((0.0, 1.0, 2.0, 3.0), (0.5, 0.3, 0.2))
    rest, removed = d.drop_oldest()
    assert removed == pytest.approx(0.2)
    assert rest.edges == (0.0, 1.0, 2.0)
    assert rest.masses[0] == pytest.approx(0.625)
    assert rest.masses[1] == pytest.approx(0.375)
    with pytest.raises(ValueError):
        SamplingDensity.point_mass(1.0).drop_oldest()


def test_net_distribution_mixes_by_mass():
    d = SamplingDensity((0.0, 1.0, 2.0), (0.75, 0.25))
    p1 = np.array([0.9, 0.1])
    p2 = np.array([0.1, 0.9])
    mixed = net_distribution(d, [p1, p2])
    np.testing.assert_allclose(mixed, [0.7, 0.3], atol=1e-12)
    # identical per-bin distributions pass through untouched
    same = net_distribution(d, [p1, p1])
    np.testing.assert_allclose(same, p1, atol=1e-15)


def test_net_distribution_validation():
    d = SamplingDensity((0.0, 1.0, 2.0), (0.5, 0.5))
    with pytest.raises(ValueError):
        net_distribution(d, [np.array([1.0])])  # bin count mismatch
    with pytest.raises(ValueError):
        net_distribution(d, [np.array([0.5, 0.5]), np.array([0.5, 0.5, 0.0])])
    with pytest.raises(ValueError):
        net_distribution(d, [np.array([0.5, 0.4]), np.array([0.5, 0.5])])


def test_pure_exponential_model():
    m = PureExponential(0.5)
    assert m.equivalent_size(1000.0, 0.0) == 1000.0
    half_age = math.log(2) / 0.5
    assert m.equivalent_size(1000.0, half_age) == pytest.approx(500.0)
    assert m.effectiveness(123.0, 1.0) == pytest.approx(math.exp(-0.5))
    assert m.upper_bound(2.0) == math.inf
    with pytest.raises(ValueError):
        PureExponential(-0.1)


def test_substitution_closed_form_and_size_independence():
    m = PureExponential(0.5)
    for n in (10.0, 1e6):
        assert m.substitution(n, 1.0, 3.0) == pytest.approx(math.exp(1.0))
        assert m.substitution(n, 2.0, 2.0) == 1.0
        assert m.substitution(n, 3.0, 1.0) == pytest.approx(math.exp(-1.0))


def test_drift_shift_oracle_values():
    flat = DriftShift(5.0, 0.4, linear_drift(0.0))
    assert flat.equivalent_size(1e6, 7.0) == pytest.approx(1e6)

    fixed = DriftShift(5.0, 0.4, lambda s: 0.02 * (s > 0))
    assert fixed.equivalent_size(1e4, 1.0) == pytest.approx(6911.366413, abs=1e-4)
    assert fixed.equivalent_size(1e6, 1.0) == pytest.approx(175730.428572, abs=1e-4)
    assert fixed.upper_bound(1.0) == pytest.approx(988211.768803, abs=1e-4)
    # size converges to the bound from below, within 1% by n = 1e12
    big = fixed.equivalent_size(1e12, 1.0)
    assert big < 988211.768803 < big * 1.01


def test_drift_shift_validation():
    with pytest.raises(ValueError):
        DriftShift(0.0, 0.4, linear_drift(0.1))
    with pytest.raises(ValueError):
        DriftShift(5.0, 0.4, lambda s: 0.1)  # drift(0) != 0
    bad = DriftShift(5.0, 0.4, lambda s: -s)
    with pytest.raises(ValueError):
        bad.equivalent_size(100.0, 1.0)
    with pytest.raises(ValueError):
        linear_drift(-1.0)


def test_composition_equivalent_size_two_atoms():
    m = PureExponential(0.5)
    density = SamplingDensity((1.0, 1.0, 2.0, 2.0), (0.5, 0.0, 0.5))
    comp = DatasetComposition(density, 1000.0)
    expected = 1000.0 * 0.5 * (math.exp(-0.5) + math.exp(-1.0))
    assert composition_equivalent_size(m, comp) == pytest.approx(expected, rel=1e-9)


def test_equivalent_time_point_mass_and_fresh():
    m = PureExponential(0.7)
    aged = DatasetComposition(SamplingDensity.point_mass(1.3), 500.0)
    assert equivalent_time(m, aged) == pytest.approx(1.3, abs=1e-8)
    fresh = DatasetComposition(SamplingDensity.point_mass(0.0), 500.0)
    assert equivalent_time(m, fresh) == 0.0


def test_equivalent_time_uniform_matches_closed_form():
    mu, window = 0.5, 2.0
    m = PureExponential(mu)
    comp = DatasetComposition(SamplingDensity.uniform(window), 1e4)
    t_star = equivalent_time(m, comp)
    assert t_star == pytest.approx(0.917350290774, abs=1e-6)
    assert uniform_exponential_t_star(mu, window) == pytest.approx(
        0.917350290774, abs=1e-10
    )
    assert t_star == pytest.approx(uniform_exponential_t_star(mu, window), abs=1e-6)


def test_equivalent_time_flat_model_pins_zero():
    m = PureExponential(0.0)
    comp = DatasetComposition(SamplingDensity.uniform(2.0, bins=3), 100.0)
    assert equivalent_time(m, comp) == 0.0


def test_offload_condition_exponential_threshold():
    # f = e^(mu dt) = e^0.5; dropping n0 of 100 pays only while
    # 100 / (100 - n0) stays under it, i.e. n0 <= 39
    m = PureExponential(0.5)
    good = offload_condition(m, 100.0, 39.0, 2.0, 1.0)
    assert good.admissible
    assert good.substitution_ratio == pytest.approx(math.exp(0.5))
    assert good.threshold == pytest.approx(100.0 / 61.0)
    bad = offload_condition(m, 100.0, 40.0, 2.0, 1.0)
    assert not bad.admissible


def test_offload_condition_zero_drop_is_pure_freshening():
    m = PureExponential(0.3)
    assert offload_condition(m, 1000.0, 0.0, 3.0, 1.0).admissible
    assert not offload_condition(m, 1000.0, 0.0, 2.0, 2.0).admissible


def test_offload_condition_rejects_bad_arguments():
    m = PureExponential(0.3)
    with pytest.raises(ValueError):
        offload_condition(m, 100.0, 100.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        offload_condition(m, 100.0, -1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        offload_condition(m, 100.0, 10.0, 1.0, 2.0)  # aging, not freshening


STEEP = DriftShift(100.0, 0.5, linear_drift(50.0))
TWO_BIN = SamplingDensity((0.0, 0.1, 2.0), (0.5, 0.5))


def test_greedy_net_gain_drops_a_worthless_tail():
    comp = DatasetComposition(TWO_BIN, 10_000.0)
    before = composition_equivalent_size(STEEP, comp)
    traj = greedy_offload(comp, STEEP)
    assert len(traj.steps) == 1
    step = traj.steps[0]
    assert step.removed_bin == (0.1, 2.0)
    assert step.removed_mass == pytest.approx(5_000.0)
    after = composition_equivalent_size(STEEP, traj.final)
    assert step.gain == pytest.approx(after / before, rel=1e-9)
    assert after > before  # fewer tokens, worth more fresh ones
    assert traj.final.size == pytest.approx(5_000.0)
    assert traj.final_t_star < step.t_star_before
    assert step.t_star_after == pytest.approx(traj.final_t_star)


def test_greedy_strict_substitution_rule_never_fires():
    # dropping a bin always shrinks n faster than the survivors' age
    # improves under the strict ratio test, so this rule stays empty even
    # where the net-gain rule fires
    comp = DatasetComposition(TWO_BIN, 10_000.0)
    traj = greedy_offload(comp, STEEP, rule="substitution")
    assert traj.steps == []
    assert traj.final.size == comp.size


def test_greedy_exponential_decay_never_pays():
    # size-independent decay makes the dropped data's worth the exact
    # price of dropping it, so no strict improvement exists
    comp = DatasetComposition(TWO_BIN, 10_000.0)
    traj = greedy_offload(comp, PureExponential(3.0))
    assert traj.steps == []


def test_greedy_rejects_unknown_rule():
    comp = DatasetComposition(TWO_BIN, 10_000.0)
    with pytest.raises(ValueError):
        greedy_offload(comp, STEEP, rule="grab_bag")


def test_perishability_order_verdicts():
    grid = [0.0, 0.5, 1.0, 1.5, 2.0]
    ordered = check_perishability_order(
        PureExponential(0.6), PureExponential(0.2), 1e4, grid
    )
    assert ordered.ordered and ordered.counterexample is None
    tied = check_perishability_order(
        PureExponential(0.4), PureExponential(0.4), 1e4, grid
    )
    assert not tied.ordered
    assert tied.counterexample is not None


def test_theorem_harness_requires_an_ordered_pair():
    with pytest.raises(ValueError, match="ordered"):
        theorem1_property(PureExponential(0.3), PureExponential(0.3), trials=10)


def test_theorem_harness_mixed_model_pair():
    # a drift model against a slower pure-exponential one, still ordered
    # across the sampled envelope
    h = DriftShift(1000.0, 0.5, linear_drift(0.05))
    l = PureExponential(0.001)
    report = theorem1_property(h, l, trials=200, seed=11)
    assert report.ok, report.violations
