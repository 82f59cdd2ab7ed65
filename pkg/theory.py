#
#  Module: theory
#
#  Closed-form expressions for binary DE and the neutral-bit chains,
#  each with a Monte Carlo oracle that simulates the quantity directly:
#     H_N(y)  trial_ones_expectation   expected trial one-count at a bit
#     R_N(y)  mutant_one_prob          probability a mutant gene is 1
#     S_N(z)  dominant_flip_prob       probability a dominant 0 becomes 1
#     biased_mutant_one_prob, expected_trial_fitness_gap, onemax_gamma
#     dominant_delta, dominant_growth_c0, neutral_step_variance
#     thresholds on N and the derived probability / runtime bounds
#  plus check_formula (closed form against oracle), theory_grid and the
#  property checkers for the monotonicity and band facts.
#

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from algorithms import binomial_trial, cga_neutral_step, umda_neutral_step
from core import (InvalidParameter, RandomStream, UnknownIdentifier,
                  check_probability, draw_distinct_donors)

logger = logging.getLogger(__name__)

# rows simulated per vectorised chunk (rows x columns random numbers)
CHUNK_CELLS = 1 << 20


def _check_population_size(N):
    if N < 4:
        raise InvalidParameter(f"formula needs N >= 4, got N={N}")


def _check_count(value, lo, hi, name):
    if np.any(np.asarray(value) < lo) or np.any(np.asarray(value) > hi):
        raise InvalidParameter(f"{name} must lie in [{lo},{hi}], got {value}")


# Closed forms. Count arguments may be arrays or non-integers; the curves
# below evaluate them on fractions of N.

def _h(N, F, C, y):
    y = np.asarray(y, dtype=float)
    return (4 * F * C * y ** 3 - 6 * F * C * N * y ** 2
            + ((2 * F * C + 1) * N ** 2 - 3 * N + 2) * y) / ((N - 1) * (N - 2))


def _r(N, F, y):
    y = np.asarray(y, dtype=float)
    return (4 * F * y ** 3 - 6 * F * (N - 1) * y ** 2
            + ((2 * F + 1) * N ** 2 - (5 + 4 * F) * N + 2 * F + 6) * y) \
        / ((N - 1) * (N - 2) * (N - 3))


def _s(N, F, C, z):
    z = np.asarray(z, dtype=float)
    A1 = -4 * F * C
    A2 = (6 * N + 6) * F * C
    A3 = -C * ((1 + 2 * F) * N ** 2 + (8 * F - 5) * N + 6 + 2 * F)
    A4 = C * N ** 3 + (2 * F - 5) * C * N ** 2 + (6 + 2 * F) * C * N
    return (A1 * z ** 3 + A2 * z ** 2 + A3 * z + A4) / ((N - 1) * (N - 2) * (N - 3))


def _number(value):
    return float(value) if np.ndim(value) == 0 else value


# H_N(y): expected number of ones at a bit in the trial population when the
# parents carry y ones there (before selection).
def trial_ones_expectation(N: int, F: float, C: float, y):
    _check_population_size(N)
    _check_count(y, 0, N, "y")
    return _number(_h(N, F, C, y))


# R_N(y): probability a mutant gene is 1 when y of the N-1 donor-eligible
# members carry a one.
def mutant_one_prob(N: int, F: float, y_minus):
    _check_population_size(N)
    _check_count(y_minus, 0, N - 1, "y_minus")
    return _number(_r(N, F, y_minus))


# S_N(z): probability that member i, carrying 0 at the dominant bit, holds
# a 1 there next generation when z members (i included) carry 0.
def dominant_flip_prob(N: int, F: float, C: float, z):
    _check_population_size(N)
    _check_count(z, 1, N, "z")
    return _number(_s(N, F, C, z))


def biased_mutant_one_prob(p, F: float):
    check_probability(p)
    return p + 4 * F * p * (1 - p) * (0.5 - p)


def onemax_gamma(F: float, C: float, p: float) -> float:
    if not 0.5 < p < 1:
        raise InvalidParameter(f"p must lie in (0.5,1), got {p}")
    numerator = F ** 2 * C * p * (1 - p) * (p - 0.5) ** 2
    denominator = 1 + (1 - 2 * F * C * p * (1 - p)) * F * (1 - 2 * p) ** 2
    return 8 / 3 * numerator / denominator


# E[onemax(U) - onemax(X)] with the parent and the three donors independent
# Bernoulli(p) strings
def expected_trial_fitness_gap(D: int, F: float, C: float, p: float) -> float:
    check_probability(p)
    return 4 * F * C * D * p * (1 - p) * (0.5 - p)


def dominant_delta(F: float, C: float) -> float:
    check_probability(F, "F")
    check_probability(C, "C")
    return 3 * C * (4 - F) / 80


def dominant_growth_c0(F: float, C: float) -> float:
    check_probability(F, "F")
    check_probability(C, "C")
    return 1 + 0.7 * C * (0.5 - F / 8)


# one-step variance of a neutral frequency; size is mu (umda) or K (cga)
def neutral_step_variance(algorithm: str, p, size: int):
    check_probability(p)
    if algorithm == "umda":
        return p * (1 - p) / size
    if algorithm == "cga":
        return 2 * p * (1 - p) / size ** 2
    raise UnknownIdentifier("chain", algorithm, ("umda", "cga"))


# ceiling that ignores floating-point noise, e.g. 3.2 / 0.1 -> 32
def _ceil(x):
    return math.ceil(round(x, 9))


def stability_threshold_N(F: float, C: float) -> int:
    FC = F * C
    if not 0 < FC < 1:
        raise InvalidParameter(f"need 0 < F*C < 1, got F*C={FC}")
    return _ceil(max(3 / (1 - FC), 15625 * math.log(2) / (288 * FC ** 2)))


def mutant_monotone_threshold_N(F: float) -> float:
    if not 0 <= F < 1:
        raise InvalidParameter(f"need 0 <= F < 1, got F={F}")
    return (5 - 2 * F) / (1 - F)


def flip_monotone_threshold_N(F: float) -> float:
    return max(mutant_monotone_threshold_N(F), 11)


# lower bound on N for the band facts of R_N at 8/25 and 17/25
def mutant_band_threshold_N(F: float) -> float:
    return (3125 - 1224 * F) / (625 - 612 * F)


def ibde_stability_threshold_N(F: float) -> int:
    if not 0 < F < 1:
        raise InvalidParameter(f"need 0 < F < 1, got F={F}")
    return _ceil(max(mutant_monotone_threshold_N(F), mutant_band_threshold_N(F),
                     625 / (24 * F)))


# Normalised curves: h(x) = H_N(Nx)/N, r(x) = R_N(x(N-1)), s(x) = S_N(Nx)

def trial_drift_relative(N, F, C, x):
    _check_population_size(N)
    _check_count(x, 0, 1, "x")
    return _number(_h(N, F, C, np.asarray(x) * N) / N)


def mutant_prob_relative(N, F, x):
    _check_population_size(N)
    _check_count(x, 0, 1, "x")
    return _number(_r(N, F, np.asarray(x) * (N - 1)))


def flip_prob_relative(N, F, C, x):
    _check_population_size(N)
    _check_count(x, 0, 1, "x")
    return _number(_s(N, F, C, np.asarray(x) * N))


# Expected number of search points a population can generate in one
# generation: at most N^4 tuples, each reaching (7/4)^D points on average.
def expected_reachable_bound(N: int, D: int) -> float:
    return N ** 4 * 1.75 ** D


# Lower bound on the probability that a point at Hamming distance >= cD
# from the parent population cannot be generated.
def unreachable_probability_bound(N: int, D: int, c: float) -> float:
    if not 0 < c < 1 / 8:
        raise InvalidParameter(f"c must lie in (0,1/8), got {c}")
    return 1 - N ** 4 * math.exp(-2 * c ** 2 * D)


# probability that a uniform random population has a converged bit
def converged_bit_probability(N: int, D: int) -> float:
    return -math.expm1(D * math.log1p(-2.0 ** (1 - N)))


# probability that at most 0.7N members start with a 0 at the dominant bit
def dominant_start_probability(N: int) -> float:
    return -math.expm1(-2 * N / 25)


# Expected generations for LeadingOnes (and BinaryValue) while every bit
# keeps at least eps*N ones; needs N >= 8/eps.
def leadingones_runtime_bound(eps: float, C: float, D: int) -> float:
    if not 0 < eps <= 1:
        raise InvalidParameter(f"eps must lie in (0,1], got {eps}")
    return 64 * D / (eps ** 4 * C)


# Monte Carlo oracles: each returns (estimate, standard error)

def _mean_and_stderr(total, total_sq, n):
    mean = total / n
    var = max(total_sq / n - mean ** 2, 0.0) * n / max(n - 1, 1)
    return mean, math.sqrt(var / n)


def _bernoulli(hits, n):
    p = hits / n
    return p, math.sqrt(p * (1 - p) / n)


def _chunks(n, width):
    rows = max(1, CHUNK_CELLS // max(width, 1))
    done = 0
    while done < n:
        size = min(rows, n - done)
        yield size
        done += size


# One selection-free generation at a single bit of a population with y
# ones (members 0..y-1); returns the trial one-count statistics.
def mc_trial_ones(N, F, C, y, n, rng: RandomStream):
    bits = (np.arange(N) < y).astype(np.uint8)
    total = total_sq = 0.0
    for rows in _chunks(n, 3 * N):
        exclude = np.broadcast_to(np.arange(N), (rows, N))
        donors = draw_distinct_donors(N, exclude, rng)
        mrand = rng.random((rows, N))
        crand = rng.random((rows, N))
        trial = binomial_trial(bits[None, :], bits[donors[..., 0]], bits[donors[..., 1]],
                               bits[donors[..., 2]], mrand, crand, F, C)
        counts = trial.sum(axis=1, dtype=np.int64).astype(float)
        total += counts.sum()
        total_sq += (counts ** 2).sum()
    return _mean_and_stderr(total, total_sq, n)


# mutant gene drawn from N-1 members of which y_minus carry a one
def mc_mutant_one_prob(N, F, y_minus, n, rng: RandomStream):
    bits = (np.arange(N - 1) < y_minus).astype(np.uint8)
    hits = 0
    for rows in _chunks(n, 3):
        donors = draw_distinct_donors(N - 1, np.full(rows, -1), rng)
        base, a, b = bits[donors[:, 0]], bits[donors[:, 1]], bits[donors[:, 2]]
        mutant = np.where((a != b) & (rng.random(rows) < F), base ^ 1, base)
        hits += int(mutant.sum())
    return _bernoulli(hits, n)


# member 0 carries a 0; members 0..z-1 are the zeros
def mc_dominant_flip(N, F, C, z, n, rng: RandomStream):
    bits = (np.arange(N) >= z).astype(np.uint8)
    hits = 0
    for rows in _chunks(n, 3):
        donors = draw_distinct_donors(N, np.zeros(rows, dtype=np.int64), rng)
        trial = binomial_trial(np.uint8(0), bits[donors[:, 0]], bits[donors[:, 1]],
                               bits[donors[:, 2]], rng.random(rows), rng.random(rows), F, C)
        hits += int(trial.sum())
    return _bernoulli(hits, n)


def mc_biased_mutant(p, F, n, rng: RandomStream):
    hits = 0
    for rows in _chunks(n, 4):
        base, a, b = (rng.random((3, rows)) < p).astype(np.uint8)
        mutant = np.where((a != b) & (rng.random(rows) < F), base ^ 1, base)
        hits += int(mutant.sum())
    return _bernoulli(hits, n)


def mc_fitness_gap(D, F, C, p, n, rng: RandomStream):
    total = total_sq = 0.0
    for rows in _chunks(n, 6 * D):
        parent, base, a, b = (rng.random((4, rows, D)) < p).astype(np.uint8)
        trial = binomial_trial(parent, base, a, b, rng.random((rows, D)),
                               rng.random((rows, D)), F, C)
        gap = (trial.sum(axis=1, dtype=np.int64) - parent.sum(axis=1, dtype=np.int64)).astype(float)
        total += gap.sum()
        total_sq += (gap ** 2).sum()
    return _mean_and_stderr(total, total_sq, n)


# sample variance of one neutral step; its standard error uses the fourth
# central moment
def mc_neutral_variance(algorithm, p, size, n, rng: RandomStream):
    if algorithm == "umda":
        draws = umda_neutral_step(np.full(n, float(p)), size, rng)
    elif algorithm == "cga":
        draws = cga_neutral_step(np.full(n, float(p)), size, rng)
    else:
        raise UnknownIdentifier("chain", algorithm, ("umda", "cga"))
    centred = draws - draws.mean()
    var = centred.var(ddof=1)
    m4 = np.mean(centred ** 4)
    return float(var), math.sqrt(max(m4 - var ** 2, 0.0) / n)


@dataclass
class FormulaCheckResult:
    formula: str
    params: dict
    closed_form: float
    mc_estimate: float
    mc_stderr: float
    n_samples: int
    within_3_sigma: bool

    @property
    def params_text(self):
        return ";".join(f"{k}={v}" for k, v in self.params.items())

    def to_row(self):
        row = asdict(self)
        row["params"] = self.params_text
        row["pass"] = row.pop("within_3_sigma")
        return row


FORMULAS = {
    "trial_ones_expectation": (
        lambda N, F, C, y: trial_ones_expectation(N, F, C, y),
        lambda N, F, C, y, n, rng: mc_trial_ones(N, F, C, y, n, rng)),
    "mutant_one_prob": (
        lambda N, F, y_minus: mutant_one_prob(N, F, y_minus),
        lambda N, F, y_minus, n, rng: mc_mutant_one_prob(N, F, y_minus, n, rng)),
    "dominant_flip_prob": (
        lambda N, F, C, z: dominant_flip_prob(N, F, C, z),
        lambda N, F, C, z, n, rng: mc_dominant_flip(N, F, C, z, n, rng)),
    "biased_mutant_one_prob": (
        lambda p, F: biased_mutant_one_prob(p, F),
        lambda p, F, n, rng: mc_biased_mutant(p, F, n, rng)),
    "expected_trial_fitness_gap": (
        lambda D, F, C, p: expected_trial_fitness_gap(D, F, C, p),
        lambda D, F, C, p, n, rng: mc_fitness_gap(D, F, C, p, n, rng)),
    "neutral_step_variance": (
        lambda algorithm, p, size: neutral_step_variance(algorithm, p, size),
        lambda algorithm, p, size, n, rng: mc_neutral_variance(algorithm, p, size, n, rng)),
}


def check_formula(name: str, params: dict, n: int, rng: RandomStream,
                  sigmas: float = 3.0) -> FormulaCheckResult:
    if name not in FORMULAS:
        raise UnknownIdentifier("formula", name, FORMULAS)
    closed, oracle = FORMULAS[name]
    value = float(closed(**params))
    estimate, stderr = oracle(n=n, rng=rng, **params)
    passed = abs(value - estimate) <= sigmas * stderr + 1e-9
    if not passed:
        logger.warning("%s(%s): closed form %.6g, estimate %.6g +- %.3g",
                       name, params, value, estimate, stderr)
    return FormulaCheckResult(name, dict(params), value, float(estimate), float(stderr),
                              n, bool(passed))


GRID_N = (8, 16, 64)
GRID_FC = (0.2, 0.5, 0.9)


def _counts(N, lo, hi):
    if N == 8:
        return list(range(lo, hi + 1))
    return sorted({max(lo, 1), N // 4, N // 2, 3 * N // 4, min(hi, N - 1)})


# (formula, params) pairs checked by verify-theory: every count at N=8 and
# five representative counts at the larger sizes
def theory_grid():
    grid = []
    for N in GRID_N:
        for F in GRID_FC:
            for y in _counts(N, 0, N - 1):
                grid.append(("mutant_one_prob", {"N": N, "F": F, "y_minus": y}))
            for C in GRID_FC:
                for y in _counts(N, 0, N):
                    grid.append(("trial_ones_expectation", {"N": N, "F": F, "C": C, "y": y}))
                for z in _counts(N, 1, N):
                    grid.append(("dominant_flip_prob", {"N": N, "F": F, "C": C, "z": z}))
    for F in GRID_FC:
        for p in (0.1, 0.3, 0.6, 0.9):
            grid.append(("biased_mutant_one_prob", {"p": p, "F": F}))
        for C in GRID_FC:
            for p in (0.3, 0.6):
                grid.append(("expected_trial_fitness_gap", {"D": 40, "F": F, "C": C, "p": p}))
    for algorithm, sizes in (("umda", (10, 100)), ("cga", (10, 100))):
        for size in sizes:
            for p in (0.1, 0.5, 0.9):
                grid.append(("neutral_step_variance",
                             {"algorithm": algorithm, "p": p, "size": size}))
    return grid


# Property checkers. Each returns the list of violations found on its grid.

PROPERTY_N = tuple(range(8, 257, 8))
PROPERTY_FC = tuple(round(0.1 * k, 1) for k in range(1, 10))
PROPERTY_A = tuple(round(0.1 * k, 1) for k in range(1, 13))
# rounding allowance for monotonicity of the closed forms
TOLERANCE = 1e-12


def trial_drift_violations(Ns=PROPERTY_N, Fs=PROPERTY_FC, Cs=PROPERTY_FC):
    found = []
    for F in Fs:
        for C in Cs:
            for N in Ns:
                y = np.arange(N + 1)
                H = _h(N, F, C, y)
                if N >= 3 / (1 - F * C):
                    for k in np.flatnonzero(np.diff(H) < -TOLERANCE):
                        found.append(f"H not monotone: N={N} F={F} C={C} y={k}")
                inner = y[1:N]
                Hin = H[1:N]
                bad = ((2 * inner < N) & ~(Hin > inner)) | ((2 * inner > N) & ~(Hin < inner))
                for k in inner[bad]:
                    found.append(f"H does not drift to N/2: N={N} F={F} C={C} y={k}")
    return found


def mutant_prob_violations(Ns=PROPERTY_N, Fs=PROPERTY_FC):
    found = []
    for F in Fs:
        for N in Ns:
            where = f"N={N} F={F}"
            if N >= mutant_monotone_threshold_N(F):
                if np.any(np.diff(_r(N, F, np.arange(N))) < -TOLERANCE):
                    found.append(f"R not monotone: {where}")
            if not _r(N, F, 12 / 25 * (N - 1)) > 12 / 25:
                found.append(f"R(12/25(N-1)) <= 12/25: {where}")
            if N >= 625 / (24 * F) and not _r(N, F, 13 / 25 * N) < 13 / 25:
                found.append(f"R(13/25 N) >= 13/25: {where}")
            if N > mutant_band_threshold_N(F):
                if not _r(N, F, 8 / 25 * (N - 1)) < 12 / 25:
                    found.append(f"R(8/25(N-1)) >= 12/25: {where}")
                if not _r(N, F, 17 / 25 * N) > 13 / 25:
                    found.append(f"R(17/25 N) <= 13/25: {where}")
    return found


def flip_prob_violations(Ns=PROPERTY_N, Fs=PROPERTY_FC, Cs=PROPERTY_FC):
    found = []
    for F in Fs:
        for C in Cs:
            for N in Ns:
                if N < flip_monotone_threshold_N(F):
                    continue
                where = f"N={N} F={F} C={C}"
                if np.any(np.diff(_s(N, F, C, np.arange(1, N + 1))) > TOLERANCE):
                    found.append(f"S not decreasing: {where}")
                for a in PROPERTY_FC:
                    if _s(N, F, C, a * N) < C * (1 - a) * (0.5 - F / 8):
                        found.append(f"S(aN) below C(1-a)(1/2-F/8): {where} a={a}")
    return found


def cube_ratio(a, N):
    aN = a * N
    return aN * (aN - 1) * (aN - 2) / ((N - 1) * (N - 2) * (N - 3))


def cube_bound_violations(As=PROPERTY_A, Ns=PROPERTY_N + (512, 1024)):
    found = []
    for a in As:
        if not 0 < a <= 0.4 * math.sqrt(10):
            raise InvalidParameter(f"a must lie in (0, 0.4*sqrt(10)], got {a}")
        for N in sorted(set(Ns) | {max(4, math.ceil(4 / a))}):
            if N < max(4, 4 / a):
                continue
            if cube_ratio(a, N) < a ** 3 / 4:
                found.append(f"a^3/4 bound fails: a={a} N={N}")
    return found


def property_violations():
    return (trial_drift_violations() + mutant_prob_violations()
            + flip_prob_violations() + cube_bound_violations())
