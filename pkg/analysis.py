#
#  Module: analysis
#
#  Instrumentation of runs and the one-generation reachability counts:
#     FrequencyTrace  - per-generation per-bit one-counts of a run
#     HittingReport   - first generation an event holds (or None)
#     frequency_matrix, first_band_exit, first_absorption, first_reach,
#     quantiles       - nearest-rank quantiles
#     forced_positions, tuple_reachable_count, forced_mismatch_count,
#     reachable_set_size (and an independent brute-force enumeration)
#
#  A donor tuple is (i, r1, r2, r3): parent, base and difference pair.
#  Position j is forced when X[r1,j] == X[i,j] and X[r2,j] == X[r3,j];
#  every trial of that tuple then carries X[i,j] there. With 0 < F and
#  0 < C < 1 every unforced position can take both values.
#

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from core import InvalidParameter, Population, RandomStream, bit_vector

logger = logging.getLogger(__name__)

MAX_TUPLE_D = 40
MAX_REACH_D = 20
MAX_REACH_N = 8


@dataclass
class FrequencyTrace:
    ones: np.ndarray
    N: int
    min_ones: Optional[float] = None
    min_curve: Optional[np.ndarray] = None

    def __post_init__(self):
        self.ones = np.atleast_2d(np.asarray(self.ones))
        if np.any(self.ones < 0) or np.any(self.ones > self.N):
            raise InvalidParameter(f"one-counts must lie in [0, {self.N}]")
        if self.min_ones is None and self.ones.size:
            self.min_ones = self.ones.min().item()
        if self.min_curve is None:
            self.min_curve = self.ones.min(axis=1)
        self.min_curve = np.asarray(self.min_curve)

    @property
    def generations(self):
        return self.ones.shape[0]

    @property
    def frequencies(self):
        return self.ones / self.N

    def column(self, bit):
        return self.ones[:, bit]


@dataclass
class HittingReport:
    event: str
    generation: Optional[int] = None

    @property
    def hit(self):
        return self.generation is not None


def frequency_matrix(trace: Sequence[Population]) -> FrequencyTrace:
    if not trace:
        raise InvalidParameter("a frequency trace needs at least one population")
    shapes = {P.members.shape for P in trace}
    if len(shapes) != 1:
        raise InvalidParameter(f"populations of different shapes: {sorted(shapes)}")
    return FrequencyTrace(np.vstack([P.ones() for P in trace]), trace[0].N)


def _first(mask, event):
    hits = np.flatnonzero(mask)
    return HittingReport(event, int(hits[0]) if hits.size else None)


# first g with series[g] outside the closed band [lo, hi]
def first_band_exit(series, lo, hi) -> HittingReport:
    if lo > hi:
        raise InvalidParameter(f"empty band [{lo}, {hi}]")
    series = np.asarray(series)
    return _first((series < lo) | (series > hi), "band_exit")


def first_absorption(series) -> HittingReport:
    series = np.asarray(series)
    return _first((series == 0) | (series == 1), "absorption")


def first_reach(series, target, event="optimum") -> HittingReport:
    return _first(np.asarray(series) >= target, event)


# Nearest-rank quantiles: rank ceil(q*n) clamped to [1, n]. With an axis the
# result holds one row per level.
def quantiles(samples, qs, axis=None) -> list:
    samples = np.asarray(samples)
    if samples.size == 0:
        raise InvalidParameter("quantiles of an empty sample")
    qs = np.asarray(qs, dtype=float)
    if np.any((qs < 0) | (qs > 1)):
        raise InvalidParameter(f"quantile levels must lie in [0,1], got {qs.tolist()}")
    return np.quantile(samples, qs, axis=axis, method="inverted_cdf").tolist()


def _check_tuple(P, indices):
    if len(set(indices)) != 4:
        raise InvalidParameter(f"tuple indices must be mutually distinct, got {indices}")
    if any(not 0 <= k < P.N for k in indices):
        raise InvalidParameter(f"tuple indices must lie in 0..{P.N - 1}, got {indices}")


def _forced_mask(P, i, r1, r2, r3):
    X = P.members
    return (X[r1] == X[i]) & (X[r2] == X[r3])


# forced positions of the tuple and the value each one is forced to
def forced_positions(P: Population, i, r1, r2, r3):
    _check_tuple(P, (i, r1, r2, r3))
    positions = np.flatnonzero(_forced_mask(P, i, r1, r2, r3))
    return positions, P.members[i][positions]


def tuple_reachable_count(P: Population, i, r1, r2, r3) -> int:
    _check_tuple(P, (i, r1, r2, r3))
    if P.D > MAX_TUPLE_D:
        raise InvalidParameter(f"tuple counts need D <= {MAX_TUPLE_D}, got D={P.D}")
    return 1 << int(P.D - _forced_mask(P, i, r1, r2, r3).sum())


# The target can be produced by the tuple iff this count is 0.
def forced_mismatch_count(target, P: Population, i, r1, r2, r3) -> int:
    _check_tuple(P, (i, r1, r2, r3))
    target = bit_vector(target)
    if target.size != P.D:
        raise InvalidParameter(f"dimension mismatch: {target.size} vs {P.D}")
    forced = _forced_mask(P, i, r1, r2, r3)
    return int(np.count_nonzero(forced & (P.members[i] != target)))


def ordered_tuples(N):
    return itertools.permutations(range(N), 4)


def _check_reach_size(P):
    if P.D > MAX_REACH_D or P.N > MAX_REACH_N:
        raise InvalidParameter(f"exact reachability needs D <= {MAX_REACH_D} and "
                               f"N <= {MAX_REACH_N}, got D={P.D}, N={P.N}")
    if P.N < 4:
        raise InvalidParameter(f"a donor tuple needs N >= 4, got N={P.N}")


# Number of points of {0,1}^D that some ordered tuple can produce in one
# generation. Points are encoded as integers, gene j on bit j.
def reachable_set_size(P: Population) -> int:
    _check_reach_size(P)
    weights = 1 << np.arange(P.D, dtype=np.int64)
    constraints = set()
    for i, r1, r2, r3 in ordered_tuples(P.N):
        mask = _forced_mask(P, i, r1, r2, r3)
        constraints.add((int(weights[mask].sum()),
                         int(weights[mask & (P.members[i] == 1)].sum())))
    if any(mask == 0 for mask, _ in constraints):
        return 1 << P.D
    candidates = np.arange(1 << P.D, dtype=np.int64)
    reachable = np.zeros(candidates.size, dtype=bool)
    for mask, values in constraints:
        reachable |= (candidates & mask) == values
    logger.debug("%d distinct forcing patterns over %d tuples", len(constraints),
                 math.perm(P.N, 4))
    return int(reachable.sum())


# Reference enumeration: every mutant and crossover outcome per position,
# combined over positions, for every ordered tuple.
def reachable_set_size_bruteforce(P: Population) -> int:
    _check_reach_size(P)
    X = P.members.tolist()
    points = set()
    for i, r1, r2, r3 in ordered_tuples(P.N):
        options = []
        for j in range(P.D):
            mutants = {X[r1][j]} if X[r2][j] == X[r3][j] else {0, 1}
            options.append(sorted(mutants | {X[i][j]}))
        points.update(itertools.product(*options))
    return len(points)


def _mean_and_stderr(values):
    values = np.asarray(values, dtype=float)
    return float(values.mean()), float(stats.sem(values))


def _random_tuples(D, samples, rng):
    return rng.integers(0, 2, size=(4, samples, D), dtype=np.uint8)


# mean number of points reachable from a tuple of uniform random members
def mean_reachable_count(D: int, samples: int, rng: RandomStream):
    if D > MAX_TUPLE_D:
        raise InvalidParameter(f"tuple counts need D <= {MAX_TUPLE_D}, got D={D}")
    xi, x1, x2, x3 = _random_tuples(D, samples, rng)
    forced = ((x1 == xi) & (x2 == x3)).sum(axis=1)
    return _mean_and_stderr(2.0 ** (D - forced))


# mean forced mismatch against a uniform random target
def mean_forced_mismatch(D: int, samples: int, rng: RandomStream):
    xi, x1, x2, x3 = _random_tuples(D, samples, rng)
    target = rng.integers(0, 2, size=(samples, D), dtype=np.uint8)
    mismatches = ((x1 == xi) & (x2 == x3) & (xi != target)).sum(axis=1)
    return _mean_and_stderr(mismatches)
