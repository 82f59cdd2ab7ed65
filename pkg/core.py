#
#  Module: core
#
#  Basic types shared by every algorithm of the lab:
#     BitVector       - a 0/1 gene vector (numpy uint8 array)
#     Population      - N bit vectors of equal length plus cached fitness
#     RandomStream    - a seeded numpy Generator
#     AlgorithmParams - N, D, F, C, mu, lambda, K, budget and init_p
#  together with the project exceptions, the seeding scheme and the
#  samplers for initial populations and donor triples.
#

import logging
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

RandomStream = np.random.Generator
BitVector = np.ndarray


class LabError(Exception):
    pass


class InvalidParameter(LabError, ValueError):
    pass


class UnknownIdentifier(LabError, KeyError):
    def __init__(self, kind, name, known):
        self.kind = kind
        self.name = name
        self.known = sorted(known)
        super().__init__(f"unknown {kind} '{name}'; known: {', '.join(self.known)}")

    # KeyError would print the repr of the message
    def __str__(self):
        return self.args[0]


class OutputError(LabError, OSError):
    def __init__(self, path, reason):
        self.path = str(path)
        super().__init__(f"cannot write {path}: {reason}")


# Random streams

def make_stream(seed: int) -> RandomStream:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


# The run index is mixed into the master seed as a spawn key, so run k of
# an experiment gets the same stream no matter how runs are scheduled.
def derive_stream(master_seed: int, run_index: int) -> RandomStream:
    return np.random.default_rng(
        np.random.SeedSequence(int(master_seed), spawn_key=(int(run_index),)))


def check_probability(p, name="p"):
    if not 0.0 <= p <= 1.0:
        raise InvalidParameter(f"{name} must lie in [0,1], got {p}")


def bit_vector(genes) -> BitVector:
    x = np.asarray(genes)
    if x.ndim != 1 or x.size == 0:
        raise InvalidParameter("a bit vector is a non-empty one-dimensional sequence")
    if not np.all((x == 0) | (x == 1)):
        raise InvalidParameter("genes must be 0 or 1")
    return x.astype(np.uint8)


def hamming(a, b) -> int:
    a = bit_vector(a)
    b = bit_vector(b)
    if a.shape != b.shape:
        raise InvalidParameter(f"dimension mismatch: {a.size} vs {b.size}")
    return int(np.count_nonzero(a != b))


# An ordered collection of N bit vectors (rows of a uint8 matrix).
# Members are read-only once built; fitness values are cached per objective.
class Population:

    def __init__(self, members, fitness=None, evaluated_by=None):
        matrix = np.array(members, dtype=np.uint8)
        if matrix.ndim != 2 or matrix.shape[0] == 0 or matrix.shape[1] == 0:
            raise InvalidParameter("a population is a non-empty N x D matrix of genes")
        if np.any(matrix > 1):
            raise InvalidParameter("genes must be 0 or 1")
        matrix.flags.writeable = False
        self.members = matrix
        self.fitness = fitness
        self.evaluated_by = evaluated_by if fitness is not None else None

    @property
    def N(self):
        return self.members.shape[0]

    @property
    def D(self):
        return self.members.shape[1]

    def __len__(self):
        return self.N

    def __getitem__(self, i):
        return self.members[i]

    def ones(self) -> np.ndarray:
        return self.members.sum(axis=0, dtype=np.int64)

    # positions where every member carries the same value
    def converged_bits(self) -> np.ndarray:
        ones = self.ones()
        return (ones == 0) | (ones == self.N)

    def evaluate(self, objective):
        if self.fitness is None or self.evaluated_by is not objective:
            self.fitness = objective.evaluate_many(self.members)
            self.evaluated_by = objective
        return self.fitness

    def __repr__(self):
        return f"Population(N={self.N}, D={self.D})"


@dataclass(frozen=True)
class AlgorithmParams:
    N: int = 100
    D: int = 100
    F: float = 0.2
    C: float = 0.3
    mu: int = 50
    lam: int = 100
    K: int = 100
    max_generations: int = 2000
    init_p: float = 0.5

    def validate(self):
        if self.N < 1 or self.D < 1:
            raise InvalidParameter(f"N and D must be positive, got N={self.N}, D={self.D}")
        check_probability(self.F, "F")
        if not 0.0 < self.C <= 1.0:
            raise InvalidParameter(f"C must lie in (0,1], got {self.C}")
        if not 1 <= self.mu <= self.lam:
            raise InvalidParameter(f"need 1 <= mu <= lambda, got mu={self.mu}, lambda={self.lam}")
        if self.K < 2 or self.K % 2:
            raise InvalidParameter(f"K must be even and at least 2, got {self.K}")
        if self.max_generations < 0:
            raise InvalidParameter("max_generations must be non-negative")
        check_probability(self.init_p, "init_p")
        return self

    def validate_for(self, algorithm):
        self.validate()
        if algorithm in ("bde", "ibde") and self.N < 4:
            raise InvalidParameter(f"{algorithm} needs N >= 4, got N={self.N}")
        if algorithm in ("cga", "cga_neutral"):
            steps = self.init_p * self.K
            if abs(steps - round(steps)) > 1e-9:
                raise InvalidParameter(f"init_p={self.init_p} is not a multiple of 1/K")
        return self

    # "lambda" is the name used in config files and CSV headers
    def to_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidParameter(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        return cls(**d)


def sample_population(N: int, D: int, p: float, rng: RandomStream) -> Population:
    if N < 1 or D < 1:
        raise InvalidParameter(f"N and D must be positive, got N={N}, D={D}")
    check_probability(p)
    return Population(rng.random((N, D)) < p)


# Rejection sampler: individuals with max_ones or more ones are redrawn.
def sample_population_below(N: int, D: int, p: float, max_ones: int,
                            rng: RandomStream) -> Population:
    if max_ones < 1:
        raise InvalidParameter("max_ones must be at least 1")
    check_probability(p)
    members = rng.random((N, D)) < p
    bad = np.flatnonzero(members.sum(axis=1) >= max_ones)
    while bad.size:
        members[bad] = rng.random((bad.size, D)) < p
        bad = bad[members[bad].sum(axis=1) >= max_ones]
    return Population(members)


def _invalid_triples(donors, exclude):
    r1, r2, r3 = donors[:, 0], donors[:, 1], donors[:, 2]
    return ((r1 == exclude) | (r2 == exclude) | (r3 == exclude)
            | (r1 == r2) | (r1 == r3) | (r2 == r3))


# Draw, for every entry of "exclude", three mutually different member
# indices from range(n_members), all different from that entry.
# Triples are redrawn until valid, which makes them uniform over the
# ordered distinct triples. Use exclude=-1 for "no member excluded".
# Returns an array of shape exclude.shape + (3,).
def draw_distinct_donors(n_members: int, exclude, rng: RandomStream) -> np.ndarray:
    exclude = np.asarray(exclude, dtype=np.int64)
    excluding = np.any((exclude >= 0) & (exclude < n_members))
    if n_members - (1 if excluding else 0) < 3:
        raise InvalidParameter(f"three distinct donors need N >= 4, got N={n_members}")
    flat_exclude = exclude.reshape(-1)
    donors = rng.integers(0, n_members, size=(flat_exclude.size, 3))
    redo = np.flatnonzero(_invalid_triples(donors, flat_exclude))
    while redo.size:
        donors[redo] = rng.integers(0, n_members, size=(redo.size, 3))
        redo = redo[_invalid_triples(donors[redo], flat_exclude[redo])]
    return donors.reshape(exclude.shape + (3,))


def stack_members(vectors: Sequence) -> Population:
    return Population(np.vstack([bit_vector(v) for v in vectors]))
