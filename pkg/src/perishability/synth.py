"""Synthetic corpora with a known, tunable rate of distribution drift.

Tokens come from an order-1 Markov chain whose transition matrix slides
from a base matrix toward an alternative as the corpus ages:

    P(s) = (1 - w(s)) * base + w(s) * alt

with s the age of the period in years since the first generated period and
w a mixing schedule, by default w(s) = 1 - exp(-rho * s).  rho = 0 freezes
the chain, larger rho drifts faster, which is what makes these corpora a
ground-truth harness for the decay measurements.
"""

from __future__ import annotations

import bisect
import math
import random
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .corpus import Document
from .periods import mid_month_timestamp, month_index


def exponential_schedule(rho: float) -> Callable[[float], float]:
    """Mixing weight w(s) = 1 - exp(-rho * s); rho is per year."""
    if rho < 0:
        raise ValueError("rho must be >= 0")
    return lambda s: 1.0 - math.exp(-rho * s)


def _check_stochastic(matrix: np.ndarray, name: str) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{name} must be square")
    if (matrix < 0).any():
        raise ValueError(f"{name} has negative entries")
    if np.abs(matrix.sum(axis=1) - 1.0).max() > 1e-9:
        raise ValueError(f"{name} rows must sum to 1")
    return matrix


@dataclass
class DriftProcess:
    vocab_size: int
    base: np.ndarray
    alt: np.ndarray
    schedule: Callable[[float], float]
    seed: int
    topic: str = "synthetic"

    def __post_init__(self) -> None:
        self.base = _check_stochastic(self.base, "base")
        self.alt = _check_stochastic(self.alt, "alt")
        if self.base.shape[0] != self.vocab_size or self.alt.shape[0] != self.vocab_size:
            raise ValueError("matrix size does not match vocab_size")

    @classmethod
    def random(
        cls,
        vocab_size: int,
        rho: float,
        seed: int,
        topic: str = "synthetic",
        concentration: float = 0.5,
    ) -> "DriftProcess":
        """Two independent Dirichlet-row matrices under one seed."""
        rng = np.random.default_rng(seed)
        base = rng.dirichlet(np.full(vocab_size, concentration), size=vocab_size)
        alt = rng.dirichlet(np.full(vocab_size, concentration), size=vocab_size)
        return cls(vocab_size, base, alt, exponential_schedule(rho), seed, topic)

    def transition_matrix(self, age_years: float) -> np.ndarray:
        w = self.schedule(age_years)
        if not 0.0 <= w <= 1.0:
            raise ValueError(f"schedule returned {w} outside [0, 1]")
        return (1.0 - w) * self.base + w * self.alt


def stationary_distribution(matrix: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Stationary row vector by power iteration.

    Iterates on (I + P) / 2, which has the same stationary distribution
    and converges even for periodic chains.
    """
    matrix = _check_stochastic(matrix, "matrix")
    n = matrix.shape[0]
    half = 0.5 * (matrix + np.eye(n))
    pi = np.full(n, 1.0 / n)
    for _ in range(200_000):
        nxt = pi @ half
        if np.abs(nxt - pi).sum() < tol:
            pi = nxt
            break
        pi = nxt
    return pi / pi.sum()


def entropy_rate(matrix: np.ndarray, tol: float = 1e-12) -> float:
    """Entropy rate of a Markov chain in nats per token.

    H = -sum_i pi_i sum_j P_ij ln P_ij with the stationary pi from power
    iteration.  A reducible chain gets a warning; the stationary weight,
    and so the rate, then reflects only its recurrent classes.
    """
    matrix = _check_stochastic(matrix, "matrix")
    n_comp, _ = connected_components(csr_matrix(matrix > 0), connection="strong")
    if n_comp > 1:
        warnings.warn(
            "transition matrix is reducible; entropy rate covers recurrent classes only",
            stacklevel=2,
        )
    pi = stationary_distribution(matrix, tol=tol)
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(matrix > 0, matrix * np.log(matrix), 0.0)
    # + 0.0 keeps deterministic chains from reporting -0.0
    return float(-(pi @ plogp.sum(axis=1)) + 0.0)


def _token_names(vocab_size: int) -> list[str]:
    width = max(3, len(str(vocab_size - 1)))
    return [f"w{i:0{width}d}" for i in range(vocab_size)]


def _sample_chain(
    matrix: np.ndarray, start: int, length: int, rng: random.Random
) -> list[int]:
    # cumulative rows as plain lists make bisect the whole inner loop
    cum = [row.tolist() for row in np.cumsum(matrix, axis=1)]
    out = [0] * length
    state = start
    rand = rng.random
    bl = bisect.bisect_left
    top = matrix.shape[0] - 1
    for i in range(length):
        state = min(bl(cum[state], rand()), top)
        out[i] = state
    return out


def generate_corpus(
    process: DriftProcess,
    periods: Sequence[str],
    words_per_period: int,
    words_per_doc: int = 100,
    score: int = 3,
) -> list[Document]:
    """Sample one drifting corpus as documents in the flat-corpus schema.

    Each period is a single chain run under that period's transition
    matrix, chopped into fixed-length documents stamped mid-month.  Fully
    deterministic in (process.seed, periods, sizes).
    """
    if not periods:
        raise ValueError("need at least one period")
    if words_per_period < 1 or words_per_doc < 1:
        raise ValueError("word counts must be positive")
    names = _token_names(process.vocab_size)
    base_idx = month_index(periods[0])
    docs: list[Document] = []
    for p_num, pid in enumerate(periods):
        age = (month_index(pid) - base_idx) / 12.0
        matrix = process.transition_matrix(age)
        pi = stationary_distribution(matrix)
        # string seeding is stable across processes, unlike tuple hashing
        rng = random.Random(f"{process.seed}:{pid}")
        start = min(
            bisect.bisect_left(np.cumsum(pi).tolist(), rng.random()),
            process.vocab_size - 1,
        )
        ids = _sample_chain(matrix, start, words_per_period, rng)
        ts = mid_month_timestamp(pid)
        for j in range(0, words_per_period, words_per_doc):
            chunk = ids[j : j + words_per_doc]
            docs.append(
                Document(
                    topic=process.topic,
                    timestamp=ts,
                    kind="post",
                    score=score,
                    text=" ".join(names[i] for i in chunk),
                    doc_id=f"{process.topic}-{pid}-{j // words_per_doc:05d}",
                )
            )
    return docs
