#
#  Module: algorithms
#
#  One-generation steps and the run driver:
#     bde_trial / bde_generation    - binary DE, one donor triple per member
#     ibde_trial / ibde_generation  - binary DE, one donor triple per bit
#     umda_generation               - mu best of lambda, marginal means
#     cga_generation                - two-sample tournament, steps of 1/K
#     umda_neutral_step,
#     cga_neutral_step              - the frequency of a neutral bit alone
#     Evolution                     - drives generations until termination
#     run                           - Evolution(...).run() in one call
#
#  Generations are synchronous: every trial of generation g is built from
#  the generation-g population. Member indices are 0-based.
#

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from core import (AlgorithmParams, InvalidParameter, Population, RandomStream,
                  UnknownIdentifier, check_probability, draw_distinct_donors,
                  make_stream, sample_population)

logger = logging.getLogger(__name__)


@dataclass
class GenerationOutcome:
    next_population: Optional[Population] = None
    next_frequencies: Optional["FrequencyState"] = None
    accepted_count: int = 0
    trial_ones: Optional[np.ndarray] = None
    trials: Optional[np.ndarray] = None
    trial_fitness: Optional[np.ndarray] = None


@dataclass
class FrequencyState:
    p: np.ndarray
    t: int = 0

    def __post_init__(self):
        self.p = np.array(self.p, dtype=float)
        if self.p.ndim != 1 or np.any((self.p < 0) | (self.p > 1)):
            raise InvalidParameter("frequencies must be a vector of values in [0,1]")

    @classmethod
    def uniform(cls, D, p=0.5):
        check_probability(p)
        return cls(np.full(D, float(p)))

    @property
    def D(self):
        return self.p.size


# Binomial crossover of a binary mutant with its parent.
# The mutant flips the base gene where the two difference donors disagree
# and mrand < F; crossover takes the mutant gene where crand < C.
def binomial_trial(parent, base, a, b, mrand, crand, F, C):
    mutant = np.where((a != b) & (mrand < F), base ^ 1, base)
    return np.where(crand < C, mutant, parent).astype(np.uint8)


def _check_donor_pool(P):
    if P.N < 4:
        raise InvalidParameter(f"BDE needs N >= 4, got N={P.N}")


def bde_trial(P: Population, i: int, F: float, C: float, rng: RandomStream) -> np.ndarray:
    _check_donor_pool(P)
    if not 0 <= i < P.N:
        raise InvalidParameter(f"member index {i} outside 0..{P.N - 1}")
    r1, r2, r3 = draw_distinct_donors(P.N, i, rng)
    X = P.members
    mrand = rng.random(P.D)
    crand = rng.random(P.D)
    return binomial_trial(X[i], X[r1], X[r2], X[r3], mrand, crand, F, C)


def ibde_trial(P: Population, i: int, F: float, C: float, rng: RandomStream) -> np.ndarray:
    _check_donor_pool(P)
    if not 0 <= i < P.N:
        raise InvalidParameter(f"member index {i} outside 0..{P.N - 1}")
    donors = draw_distinct_donors(P.N, np.full(P.D, i), rng)
    X = P.members
    cols = np.arange(P.D)
    mrand = rng.random(P.D)
    crand = rng.random(P.D)
    return binomial_trial(X[i], X[donors[:, 0], cols], X[donors[:, 1], cols],
                          X[donors[:, 2], cols], mrand, crand, F, C)


# parent-offspring selection; the trial wins ties
def _select(P, f, trials):
    parent_fitness = P.evaluate(f)
    trial_fitness = f.evaluate_many(trials)
    accept = np.asarray(trial_fitness >= parent_fitness, dtype=bool)
    members = np.where(accept[:, None], trials, P.members)
    fitness = np.where(accept, trial_fitness, parent_fitness)
    logger.debug("accepted %d of %d trials", int(accept.sum()), P.N)
    return GenerationOutcome(next_population=Population(members, fitness, f),
                             accepted_count=int(accept.sum()),
                             trial_ones=trials.sum(axis=0, dtype=np.int64),
                             trials=trials,
                             trial_fitness=trial_fitness)


# Random numbers are consumed in a fixed order: donors, mrand, crand.
def bde_generation(P: Population, f, F: float, C: float, rng: RandomStream) -> GenerationOutcome:
    _check_donor_pool(P)
    X = P.members
    donors = draw_distinct_donors(P.N, np.arange(P.N), rng)
    mrand = rng.random((P.N, P.D))
    crand = rng.random((P.N, P.D))
    trials = binomial_trial(X, X[donors[:, 0]], X[donors[:, 1]], X[donors[:, 2]],
                            mrand, crand, F, C)
    return _select(P, f, trials)


def ibde_generation(P: Population, f, F: float, C: float, rng: RandomStream) -> GenerationOutcome:
    _check_donor_pool(P)
    X = P.members
    exclude = np.broadcast_to(np.arange(P.N)[:, None], (P.N, P.D))
    donors = draw_distinct_donors(P.N, exclude, rng)
    cols = np.arange(P.D)[None, :]
    mrand = rng.random((P.N, P.D))
    crand = rng.random((P.N, P.D))
    trials = binomial_trial(X, X[donors[..., 0], cols], X[donors[..., 1], cols],
                            X[donors[..., 2], cols], mrand, crand, F, C)
    return _select(P, f, trials)


def _sample(p, size, rng):
    return (rng.random((size, p.size)) < p).astype(np.uint8)


# UMDA generation keeping the sampled offspring. Offspring are ranked by
# fitness, ties broken by sample index.
def umda_step(state: FrequencyState, f, mu: int, lam: int, rng: RandomStream) -> GenerationOutcome:
    if not 1 <= mu <= lam:
        raise InvalidParameter(f"need 1 <= mu <= lambda, got mu={mu}, lambda={lam}")
    offspring = _sample(state.p, lam, rng)
    fitness = f.evaluate_many(offspring)
    order = np.argsort(-fitness, kind="stable")
    selected = offspring[order[:mu]]
    return GenerationOutcome(next_frequencies=FrequencyState(selected.mean(axis=0), state.t + 1),
                             accepted_count=mu,
                             trial_ones=offspring.sum(axis=0, dtype=np.int64),
                             trials=offspring,
                             trial_fitness=fitness)


def umda_generation(state: FrequencyState, f, mu: int, lam: int, rng: RandomStream) -> FrequencyState:
    return umda_step(state, f, mu, lam, rng).next_frequencies


def _check_K(K):
    if K < 2 or K % 2:
        raise InvalidParameter(f"K must be even and at least 2, got {K}")


# cGA generation keeping both samples. The first sample wins unless the
# second is strictly better.
def cga_step(state: FrequencyState, f, K: int, rng: RandomStream) -> GenerationOutcome:
    _check_K(K)
    pair = _sample(state.p, 2, rng)
    fitness = f.evaluate_many(pair)
    w = 1 if fitness[1] > fitness[0] else 0
    counts = np.rint(state.p * K) + pair[w].astype(int) - pair[1 - w].astype(int)
    return GenerationOutcome(next_frequencies=FrequencyState(counts / K, state.t + 1),
                             accepted_count=1,
                             trial_ones=pair.sum(axis=0, dtype=np.int64),
                             trials=pair,
                             trial_fitness=fitness)


def cga_generation(state: FrequencyState, f, K: int, rng: RandomStream) -> FrequencyState:
    return cga_step(state, f, K, rng).next_frequencies


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


# Frequency of a neutral bit after one UMDA generation: Binomial(mu, p)/mu.
# Accepts a scalar or an array of independent frequencies.
def umda_neutral_step(p, mu: int, rng: RandomStream):
    if mu < 1:
        raise InvalidParameter(f"mu must be positive, got {mu}")
    if np.any((np.asarray(p) < 0) | (np.asarray(p) > 1)):
        raise InvalidParameter(f"frequency outside [0,1]: {p}")
    return _scalar_or_array(rng.binomial(mu, p) / mu, p)


# Frequency of a neutral bit after one cGA generation: +-1/K where the
# two samples differ.
def cga_neutral_step(p, K: int, rng: RandomStream):
    _check_K(K)
    steps = np.asarray(p, dtype=float) * K
    if np.any(np.abs(steps - np.rint(steps)) > 1e-9) or np.any((steps < 0) | (steps > K)):
        raise InvalidParameter(f"frequency {p} is not a multiple of 1/{K} in [0,1]")
    r = rng.random((2,) + steps.shape)
    moved = np.rint(steps) + (r[0] < p).astype(int) - (r[1] < p).astype(int)
    return _scalar_or_array(moved / K, p)


class Status(str, Enum):
    SUCCESS = "success"
    FREQUENCY_ZERO = "frequency_zero"
    GENERATION_LIMIT = "generation_limit"
    BAND_EXIT = "band_exit"


@dataclass
class RunRecord:
    algorithm: str
    objective: str
    status: Status
    generations: int
    params: AlgorithmParams
    seed: int
    trace: Optional[np.ndarray] = None
    best_curve: Optional[list] = None
    min_ones: Optional[float] = None
    min_curve: Optional[list] = None


POPULATION_STEPS = {"bde": bde_generation, "ibde": ibde_generation}
EDA_ALGORITHMS = ("umda", "cga")
NEUTRAL_STEPS = {"umda_neutral": umda_neutral_step, "cga_neutral": cga_neutral_step}
ALGORITHMS = tuple(POPULATION_STEPS) + EDA_ALGORITHMS + tuple(NEUTRAL_STEPS)

TRACE_MODES = {"none": "none", "last": "last", "last_bit": "last",
               "all": "all", "all_bits": "all"}


# numpy scalars become Python numbers; object-array values pass through
def _plain(value):
    return value.item() if isinstance(value, np.generic) else value


def check_algorithm(algorithm):
    if algorithm not in ALGORITHMS:
        raise UnknownIdentifier("algorithm", algorithm, ALGORITHMS)


# Runs one algorithm from an initial population (or frequency vector) until
#   - an optimum is in the population / was sampled   -> success
#   - the zero-converged bits rule out every optimum  -> frequency_zero
#   - a bit leaves the band (when a band is given)    -> band_exit
#   - the generation budget is used up                -> generation_limit
# For the neutral chains a single frequency starts at init_p and the run
# ends when it is absorbed: at 1 -> success, at 0 -> frequency_zero.
# "observer", when given, is called as observer(g, outcome) after every
# generation step.
class Evolution:

    def __init__(self, algorithm, objective, params: AlgorithmParams, seed=0,
                 trace="none", band=None, initial=None, rng=None,
                 observer: Optional[Callable] = None):
        check_algorithm(algorithm)
        if trace not in TRACE_MODES:
            raise InvalidParameter(f"trace must be one of {', '.join(TRACE_MODES)}, got {trace}")
        if band is not None and not 0.0 <= band[0] <= band[1] <= 1.0:
            raise InvalidParameter(f"band must satisfy 0 <= lo <= hi <= 1, got {band}")
        self.algorithm = algorithm
        self.objective = objective
        self.params = params.validate_for(algorithm)
        self.seed = seed
        self.trace_mode = TRACE_MODES[trace]
        self.band = band
        self.initial = initial
        self.rng = rng if rng is not None else make_stream(seed)
        self.observer = observer
        self.rows = []
        self.best_curve = []
        self.min_curve = []
        self.min_ones = None
        self.generation = 0

    def _record(self, counts):
        low = counts.min()
        self.min_ones = low if self.min_ones is None else min(self.min_ones, low)
        if self.trace_mode != "none":
            self.min_curve.append(_plain(low))
        if self.trace_mode == "all":
            self.rows.append(np.array(counts))
        elif self.trace_mode == "last":
            self.rows.append(np.array(counts[-1:]))

    def _outside_band(self, fractions):
        if self.band is None:
            return False
        lo, hi = self.band
        return bool(np.any((fractions < lo) | (fractions > hi)))

    def _finish(self, status):
        trace = np.vstack(self.rows) if self.rows else None
        record = RunRecord(self.algorithm, self.objective.name if self.objective else "neutral",
                           Status(status), self.generation, self.params, self.seed, trace,
                           self.best_curve if self.trace_mode != "none" else None,
                           _plain(self.min_ones),
                           self.min_curve if self.trace_mode != "none" else None)
        logger.info("%s on %s: %s after %d generations", record.algorithm,
                    record.objective, record.status.value, record.generations)
        return record

    def search(self, limit=None):
        limit = self.params.max_generations if limit is None else limit
        if self.algorithm in POPULATION_STEPS:
            return self._run_population(limit)
        if self.algorithm in EDA_ALGORITHMS:
            return self._run_frequencies(limit)
        return self._run_neutral(limit)

    run = search

    def _run_population(self, limit):
        f = self.objective
        P = self.initial
        if P is None:
            P = sample_population(self.params.N, self.params.D, self.params.init_p, self.rng)
        elif not isinstance(P, Population):
            P = Population(P)
        if P.D != f.D:
            raise InvalidParameter(f"population has D={P.D}, objective expects D={f.D}")
        step = POPULATION_STEPS[self.algorithm]
        while True:
            ones = P.ones()
            self._record(ones)
            fitness = P.evaluate(f)
            if self.trace_mode != "none":
                self.best_curve.append(_plain(fitness.max()))
            if f.optimal_mask(fitness).any():
                return self._finish(Status.SUCCESS)
            if f.optimum_blocked(ones):
                if self.generation == 0:
                    logger.warning("initial population already rules out the optimum of %s", f.name)
                return self._finish(Status.FREQUENCY_ZERO)
            if self._outside_band(ones / P.N):
                return self._finish(Status.BAND_EXIT)
            if self.generation >= limit:
                return self._finish(Status.GENERATION_LIMIT)
            outcome = step(P, f, self.params.F, self.params.C, self.rng)
            P = outcome.next_population
            self.generation += 1
            if self.observer:
                self.observer(self.generation, outcome)

    def _run_frequencies(self, limit):
        f = self.objective
        state = self.initial
        if state is None:
            state = FrequencyState.uniform(f.D, self.params.init_p)
        elif not isinstance(state, FrequencyState):
            state = FrequencyState(state)
        sampled_optimum = False
        while True:
            self._record(state.p)
            if sampled_optimum or (np.all((state.p == 0) | (state.p == 1))
                                   and f.is_optimal(state.p.astype(np.uint8))):
                return self._finish(Status.SUCCESS)
            if f.optimum_blocked(state.p):
                if self.generation == 0:
                    logger.warning("initial frequencies already rule out the optimum of %s", f.name)
                return self._finish(Status.FREQUENCY_ZERO)
            if self._outside_band(state.p):
                return self._finish(Status.BAND_EXIT)
            if self.generation >= limit:
                return self._finish(Status.GENERATION_LIMIT)
            if self.algorithm == "umda":
                outcome = umda_step(state, f, self.params.mu, self.params.lam, self.rng)
            else:
                outcome = cga_step(state, f, self.params.K, self.rng)
            state = outcome.next_frequencies
            sampled_optimum = bool(f.optimal_mask(outcome.trial_fitness).any())
            if self.trace_mode != "none":
                self.best_curve.append(_plain(outcome.trial_fitness.max()))
            self.generation += 1
            logger.debug("generation %d: min frequency %.4f", self.generation, state.p.min())
            if self.observer:
                self.observer(self.generation, outcome)

    def _run_neutral(self, limit):
        step = NEUTRAL_STEPS[self.algorithm]
        size = self.params.mu if self.algorithm == "umda_neutral" else self.params.K
        p = float(self.initial) if self.initial is not None else self.params.init_p
        while True:
            self._record(np.array([p]))
            if p == 1.0:
                return self._finish(Status.SUCCESS)
            if p == 0.0:
                return self._finish(Status.FREQUENCY_ZERO)
            if self._outside_band(np.array([p])):
                return self._finish(Status.BAND_EXIT)
            if self.generation >= limit:
                return self._finish(Status.GENERATION_LIMIT)
            p = step(p, size, self.rng)
            self.generation += 1


def run(algorithm: str, f, params: AlgorithmParams, seed: int, trace="none",
        band=None, initial=None, observer=None) -> RunRecord:
    return Evolution(algorithm, f, params, seed, trace, band, initial,
                     observer=observer).run()
