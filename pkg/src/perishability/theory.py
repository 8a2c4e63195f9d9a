"""Executable theory of value equivalence for aging datasets.

The objects here answer "how much fresh data is this stale dataset worth"
in closed form, so the measurement pipeline has an analytic counterpart
to test against.

An equivalence model maps (size n, age) to an equivalent fresh size
n_eq <= n.  Two families are built in:

* pure_exponential(mu):      n_eq = n * exp(-mu * age)
* drift_shift(a, b, d):      n_eq = n * (1 + d(age) * n**b / a) ** (-1/b)

with d an increasing drift amount, d(0) = 0, and (a, b) the amplitude and
exponent of the underlying learning curve.  A dataset whose ages follow a
sampling density gets a single equivalent age t_star, the age at which a
same-size uniform-age dataset would be worth the same.  Off-loading asks
whether dropping the oldest slice of data raises the equivalent size of
what remains; the greedy trajectory repeats that until no drop helps.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)

MASS_TOL = 1e-9
STRICT_MARGIN = 1e-12  # margin used for every strict ">" on ratio scales


@dataclass(frozen=True)
class SamplingDensity:
    """Piecewise-constant density of data ages over [0, window].

    ``edges`` ascend; ``masses[i]`` is the probability mass on
    [edges[i], edges[i+1]].  A zero-width bin is an atom.  Age 0 is the
    freshest data, the last bin the oldest.
    """

    edges: tuple[float, ...]
    masses: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.edges) != len(self.masses) + 1:
            raise ValueError("need len(edges) == len(masses) + 1")
        if len(self.masses) < 1:
            raise ValueError("density needs at least one bin")
        if self.edges[0] < 0:
            raise ValueError("ages start at 0")
        for lo, hi in zip(self.edges, self.edges[1:]):
            if hi < lo:
                raise ValueError("edges must ascend")
        if any(m < 0 for m in self.masses):
            raise ValueError("masses must be nonnegative")
        if abs(sum(self.masses) - 1.0) > MASS_TOL:
            raise ValueError(
                f"masses sum to {sum(self.masses)!r}, must be 1 within {MASS_TOL}"
            )

    @property
    def window(self) -> float:
        return self.edges[-1]

    @property
    def bins(self) -> list[tuple[float, float, float]]:
        return [
            (lo, hi, m) for lo, hi, m in zip(self.edges, self.edges[1:], self.masses)
        ]

    @classmethod
    def uniform(cls, window: float, bins: int = 1) -> "SamplingDensity":
        if window <= 0 or bins < 1:
            raise ValueError("window must be positive, bins >= 1")
        edges = tuple(window * i / bins for i in range(bins + 1))
        return cls(edges, tuple(1.0 / bins for _ in range(bins)))

    @classmethod
    def point_mass(cls, age: float) -> "SamplingDensity":
        if age < 0:
            raise ValueError("age must be >= 0")
        return cls((age, age), (1.0,))

    def mean_of(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        """Mass-weighted mean of fn(age), bin integrals by Gauss-Legendre."""
        total = 0.0
        for lo, hi, mass in self.bins:
            if mass == 0.0:
                continue
            if hi == lo:
                total += mass * float(fn(np.array([lo]))[0])
                continue
            mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
            vals = fn(mid + half * _GL_NODES)
            total += mass * 0.5 * float(np.dot(_GL_WEIGHTS, vals))
        return total

    def drop_oldest(self) -> tuple["SamplingDensity", float]:
        """Density without its oldest bin, renormalized; returns removed mass."""
        if len(self.masses) < 2:
            raise ValueError("cannot drop the only bin")
        removed = self.masses[-1]
        rest = sum(self.masses[:-1])
        if rest <= 0:
            raise ValueError("all mass sits in the oldest bin")
        return (
            SamplingDensity(self.edges[:-1], tuple(m / rest for m in self.masses[:-1])),
            removed,
        )


def net_distribution(
    density: SamplingDensity, per_bin: Sequence[np.ndarray]
) -> np.ndarray:
    """Mixture of per-bin token distributions weighted by bin mass.

    ``per_bin`` aligns with ``density.bins`` and every distribution must
    share one support (equal length, entries summing to 1).
    """
    if len(per_bin) != len(density.masses):
        raise ValueError(
            f"{len(per_bin)} distributions for {len(density.masses)} bins"
        )
    dists = [np.asarray(p, dtype=float) for p in per_bin]
    size = dists[0].shape
    for i, p in enumerate(dists):
        if p.shape != size:
            raise ValueError(f"distribution {i} has support {p.shape}, expected {size}")
        if (p < 0).any() or abs(float(p.sum()) - 1.0) > MASS_TOL:
            raise ValueError(f"distribution {i} is not a probability distribution")
    out = np.zeros(size)
    for mass, p in zip(density.masses, dists):
        out += mass * p
    return out


class EquivalenceModel:
    """Maps (size, age) to the equivalent amount of brand-new data."""

    def equivalent_size(self, n: float, age: float) -> float:
        raise NotImplementedError

    def effectiveness(self, n: float, age: float) -> float:
        return self.equivalent_size(n, age) / n

    def substitution(self, n: float, t1: float, t2: float) -> float:
        """f_n(t1, t2): how many tokens aged t2 one token aged t1 replaces."""
        return self.equivalent_size(n, t1) / self.equivalent_size(n, t2)

    def upper_bound(self, age: float) -> float:
        """Limit of equivalent size as n grows without bound."""
        raise NotImplementedError


@dataclass(frozen=True)
class PureExponential(EquivalenceModel):
    mu: float

    def __post_init__(self) -> None:
        if self.mu < 0:
            raise ValueError("mu must be >= 0")

    def equivalent_size(self, n: float, age: float) -> float:
        return n * math.exp(-self.mu * age)

    def upper_bound(self, age: float) -> float:
        # n * exp(-mu * age) is unbounded in n at every age
        return math.inf


@dataclass(frozen=True)
class DriftShift(EquivalenceModel):
    """Equivalent size induced by a drifted loss on a power-law curve.

    ``drift`` gives the excess loss d(age) added by distribution shift;
    it must be increasing with d(0) = 0.  (a, b) are the learning-curve
    amplitude and exponent.
    """

    a: float
    b: float
    drift: Callable[[float], float]

    def __post_init__(self) -> None:
        if self.a <= 0 or self.b <= 0:
            raise ValueError("a and b must be positive")
        if abs(self.drift(0.0)) > 1e-12:
            raise ValueError("drift(0) must be 0")

    def equivalent_size(self, n: float, age: float) -> float:
        d = self.drift(age)
        if d < 0:
            raise ValueError(f"drift({age}) is negative")
        return n * (1.0 + d * n**self.b / self.a) ** (-1.0 / self.b)

    def upper_bound(self, age: float) -> float:
        d = self.drift(age)
        if d < 0:
            raise ValueError(f"drift({age}) is negative")
        if d == 0:
            return math.inf
        return (d / self.a) ** (-1.0 / self.b)


def linear_drift(rate: float) -> Callable[[float], float]:
    """The simplest admissible drift amount, d(age) = rate * age."""
    if rate < 0:
        raise ValueError("rate must be >= 0")
    return lambda age: rate * age


# module-level aliases matching the operation names used in the docs
def equivalent_size(model: EquivalenceModel, n: float, age: float) -> float:
    return model.equivalent_size(n, age)


def substitution(model: EquivalenceModel, n: float, t1: float, t2: float) -> float:
    return model.substitution(n, t1, t2)


def upper_bound(model: EquivalenceModel, age: float) -> float:
    return model.upper_bound(age)


@dataclass(frozen=True)
class DatasetComposition:
    """A dataset: how many tokens and how their ages are distributed."""

    density: SamplingDensity
    size: float

    def __post_init__(self) -> None:
        if self.size <= 0:
            raise ValueError("size must be positive")


def composition_equivalent_size(model: EquivalenceModel, comp: DatasetComposition) -> float:
    """Equivalent fresh size of a mixed-age dataset: each slice of mass
    contributes at the model's effectiveness for its age."""
    n = comp.size
    eff = comp.density.mean_of(
        lambda ages: np.array([model.effectiveness(n, s) for s in ages])
    )
    return n * eff


def equivalent_time(
    model: EquivalenceModel,
    comp: DatasetComposition,
    rel_tol: float = 1e-9,
) -> float:
    """Age t_star at which n tokens all aged t_star match the composition.

    Solved by bisection over [0, window] to ``rel_tol`` relative precision.
    A flat model (no decay over the window) pins t_star to 0 when
    consistent, since every age is then worth the same.
    """
    n = comp.size
    window = comp.density.window
    target = composition_equivalent_size(model, comp)
    top = model.equivalent_size(n, 0.0)
    bottom = model.equivalent_size(n, window)
    slack = MASS_TOL * max(abs(top), 1.0)
    if target > top + slack or target < bottom - slack:
        raise ValueError(
            f"equivalent size {target!r} outside attainable [{bottom!r}, {top!r}]"
        )
    if window == 0.0:
        return 0.0
    if top - bottom <= slack:  # flat model, any age is equivalent
        return 0.0
    lo, hi = 0.0, window
    tol = rel_tol * window
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if model.equivalent_size(n, mid) >= target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class OffloadCheck:
    admissible: bool
    substitution_ratio: float  # f_{n-n0}(t_new, t_old)
    gain: float  # net equivalent-size multiplier
    threshold: float  # n / (n - n0)


def offload_condition(
    model: EquivalenceModel,
    n: float,
    n0: float,
    t_old: float,
    t_new: float,
    margin: float = STRICT_MARGIN,
) -> OffloadCheck:
    """Is it worth shrinking the dataset from age t_old to age t_new?

    Dropping n0 of n tokens pays off when the substitution ratio at the
    surviving size beats the size penalty:
    f_{n-n0}(t_new, t_old) > n / (n - n0), tested with a strict margin.
    """
    if not 0 <= n0 < n:
        raise ValueError(f"need 0 <= n0 < n, got n0={n0} n={n}")
    if t_new > t_old:
        raise ValueError("off-loading cannot age the dataset")
    # n0 = 0 leaves threshold 1: admissible whenever freshening alone pays
    ratio = model.substitution(n - n0, t_new, t_old)
    threshold = n / (n - n0)
    gain = ratio / threshold
    return OffloadCheck(gain > 1.0 + margin, ratio, gain, threshold)


@dataclass
class OffloadStep:
    removed_mass: float  # tokens dropped
    removed_bin: tuple[float, float]
    t_star_before: float
    t_star_after: float
    gain: float  # equivalent-size multiplier under "net_gain", f*(n-n0)/n under "substitution"


@dataclass
class OffloadTrajectory:
    steps: list[OffloadStep]
    final: DatasetComposition
    final_t_star: float


def greedy_offload(
    comp: DatasetComposition,
    model: EquivalenceModel,
    margin: float = STRICT_MARGIN,
    rule: str = "net_gain",
) -> OffloadTrajectory:
    """Drop oldest bins while each drop strictly pays off.

    Each candidate step removes the oldest bin, recomputes the equivalent
    time of what remains and keeps the step only if it pays under ``rule``:

    * ``"net_gain"``: the equivalent size strictly increases.  This is the
      rule that can actually fire: under a size-dependent model, shedding
      the worst-aged tokens can raise the whole dataset's equivalent size.
    * ``"substitution"``: the per-token substitution ratio beats the size
      penalty, f_{n-n0}(t_new, t_old) > n/(n-n0), with both equivalent
      times taken from the compositions themselves.  For models whose
      effectiveness does not depend on size this algebraically reduces to
      requiring the dropped tokens to have negative worth, and even with
      size effects the threshold is out of reach (at the junk-dropping
      extreme it needs 2 > u**b + u**-b for u = kept fraction < 1), so
      this rule always yields an empty trajectory; it is kept for study.

    With effectiveness flat over the window neither rule fires.  Every
    accepted step removes one bin, so termination is immediate, and a
    single-bin composition has nothing strictly older to drop.
    """
    if rule not in ("net_gain", "substitution"):
        raise ValueError(f"unknown rule {rule!r}")
    steps: list[OffloadStep] = []
    current = comp
    while len(current.density.masses) > 1:
        t_old = equivalent_time(model, current)
        next_density, removed_frac = current.density.drop_oldest()
        n = current.size
        n0 = removed_frac * n
        if n0 <= 0:  # empty oldest bin, dropping it is free
            current = DatasetComposition(next_density, n)
            continue
        candidate = DatasetComposition(next_density, n - n0)
        t_new = equivalent_time(model, candidate)
        if rule == "substitution":
            check = offload_condition(model, n, n0, t_old, t_new, margin=margin)
            admissible, gain = check.admissible, check.gain
        else:
            before = composition_equivalent_size(model, current)
            after = composition_equivalent_size(model, candidate)
            gain = after / before
            admissible = gain > 1.0 + margin
        if not admissible:
            break
        dropped = current.density.bins[-1]
        steps.append(
            OffloadStep(
                removed_mass=n0,
                removed_bin=(dropped[0], dropped[1]),
                t_star_before=t_old,
                t_star_after=t_new,
                gain=gain,
            )
        )
        current = candidate
    return OffloadTrajectory(
        steps=steps, final=current, final_t_star=equivalent_time(model, current)
    )


@dataclass
class OrderingVerdict:
    ordered: bool
    counterexample: tuple[float, float] | None = None


def check_perishability_order(
    model_h: EquivalenceModel,
    model_l: EquivalenceModel,
    n: float,
    grid: Sequence[float],
    margin: float = STRICT_MARGIN,
) -> OrderingVerdict:
    """Does H lose strictly more equivalent size than L over every age pair?

    Checks (n_eq_H(t1) - n_eq_H(t2)) / n > (n_eq_L(t1) - n_eq_L(t2)) / n
    for all grid pairs t1 < t2, strict with margin.  The first failing
    pair comes back as the counterexample.
    """
    ages = sorted(set(float(t) for t in grid))
    eff_h = [model_h.effectiveness(n, t) for t in ages]
    eff_l = [model_l.effectiveness(n, t) for t in ages]
    for i in range(len(ages)):
        for j in range(i + 1, len(ages)):
            drop_h = eff_h[i] - eff_h[j]
            drop_l = eff_l[i] - eff_l[j]
            if not drop_h > drop_l + margin:
                return OrderingVerdict(False, (ages[i], ages[j]))
    return OrderingVerdict(True, None)


@dataclass
class Theorem1Report:
    trials: int
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def theorem1_property(
    model_h: EquivalenceModel,
    model_l: EquivalenceModel,
    trials: int = 1000,
    seed: int = 0,
    n_range: tuple[float, float] = (1e3, 1e6),
    window: float = 2.0,
    max_bins: int = 6,
    margin: float = STRICT_MARGIN,
) -> Theorem1Report:
    """Randomized check that faster perishing rewards off-loading more.

    Requires the perishability ordering to hold between H and L across the
    sampled envelope, then asserts per trial:

    (i)   substitution ratios order: f_H(t1, t2) > f_L(t1, t2) for t1 < t2
    (ii)  any off-load step admissible under L is admissible under H
    (iii) greedy off-loading under H ends at an equivalent time no later
          than under L, on an identical random composition

    Violations come back in the report; a sound model pair yields none.
    """
    grid = [window * k / 24.0 for k in range(25)]
    for n_probe in (n_range[0], math.sqrt(n_range[0] * n_range[1]), n_range[1]):
        verdict = check_perishability_order(model_h, model_l, n_probe, grid, margin)
        if not verdict.ordered:
            raise ValueError(
                f"models are not perishability-ordered at n={n_probe:g}, "
                f"counterexample ages {verdict.counterexample}; nothing to test"
            )
    rng = random.Random(seed)
    report = Theorem1Report(trials=trials)
    log_lo, log_hi = math.log(n_range[0]), math.log(n_range[1])
    min_gap = 0.01 * window
    for trial in range(trials):
        n = math.exp(rng.uniform(log_lo, log_hi))
        while True:
            t1, t2 = sorted((rng.uniform(0, window), rng.uniform(0, window)))
            if t2 - t1 >= min_gap:
                break
        n0 = rng.uniform(0.05, 0.6) * n

        f_h = model_h.substitution(n, t1, t2)
        f_l = model_l.substitution(n, t1, t2)
        if not f_h > f_l + margin:
            report.violations.append(
                f"trial {trial}: f_H={f_h!r} <= f_L={f_l!r} at n={n:.4g} t=({t1:.4g},{t2:.4g})"
            )
        check_l = offload_condition(model_l, n, n0, t2, t1, margin=margin)
        check_h = offload_condition(model_h, n, n0, t2, t1, margin=margin)
        if check_l.admissible and not check_h.admissible:
            report.violations.append(
                f"trial {trial}: L admits the step but H refuses it "
                f"(n={n:.4g} n0={n0:.4g} t=({t1:.4g},{t2:.4g}))"
            )

        bins = rng.randint(2, max_bins)
        cuts = sorted(rng.uniform(0.05 * window, window) for _ in range(bins - 1))
        edges = tuple([0.0] + cuts + [window])
        raw = [rng.gammavariate(1.0, 1.0) + 1e-3 for _ in range(bins)]
        total = sum(raw)
        density = SamplingDensity(edges, tuple(m / total for m in raw))
        comp = DatasetComposition(density, n)
        traj_h = greedy_offload(comp, model_h, margin=margin)
        traj_l = greedy_offload(comp, model_l, margin=margin)
        if traj_h.final_t_star > traj_l.final_t_star + 1e-9 * window:
            report.violations.append(
                f"trial {trial}: greedy H ends at t*={traj_h.final_t_star!r} later "
                f"than L at {traj_l.final_t_star!r}"
            )
    return report


def uniform_exponential_t_star(mu: float, window: float) -> float:
    """Closed-form equivalent time of a uniform-age dataset under pure
    exponential decay: t* = -(1/mu) * ln((1 - exp(-mu t)) / (mu t))."""
    if mu <= 0 or window <= 0:
        raise ValueError("mu and window must be positive")
    return -math.log((1.0 - math.exp(-mu * window)) / (mu * window)) / mu
