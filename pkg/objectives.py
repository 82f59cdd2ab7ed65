#
#  Module: objectives
#
#  Pseudo-Boolean fitness functions to be maximized:
#     Objective       - base class (evaluation, optimum, blocked-optimum test)
#     OneMax, LeadingOnes, BinaryValue, Needle,
#     DominantOneMax  - first bit dominant, OneMax on the rest
#     Trap            - three one-norm bands, BDE never leaves the low band
#     PinnedObjective - evaluates f with one gene overwritten (neutral bit)
#
#  Concrete objectives are found through Objective.__subclasses__(), so a
#  new benchmark only needs a subclass with a "name".
#

import logging
from abc import ABC, abstractmethod

import numpy as np

from core import InvalidParameter, UnknownIdentifier, bit_vector

logger = logging.getLogger(__name__)

# BinaryValue fits an int64 up to this dimension
EXACT_INT_BITS = 62


class Objective(ABC):

    name = None
    min_dimension = 1

    def __init__(self, D):
        if D < self.min_dimension:
            raise InvalidParameter(f"{self.name} needs D >= {self.min_dimension}, got D={D}")
        self.D = D

    # fitness of every row of a N x D gene matrix
    @abstractmethod
    def evaluate_many(self, members) -> np.ndarray:
        pass

    @property
    @abstractmethod
    def optimum_value(self):
        pass

    # positions that carry a one in every optimum
    def required_ones(self) -> np.ndarray:
        return np.ones(self.D, dtype=bool)

    def evaluate(self, x) -> int:
        x = bit_vector(x)
        if x.size != self.D:
            raise InvalidParameter(f"{self.name} expects D={self.D}, got {x.size} genes")
        return int(self.evaluate_many(x[None, :])[0])

    def __call__(self, x):
        return self.evaluate(x)

    def is_optimal(self, x) -> bool:
        return self.evaluate(x) == self.optimum_value

    def optimal_mask(self, fitness) -> np.ndarray:
        return np.asarray(fitness == self.optimum_value, dtype=bool)

    # True when the zero-converged positions (one-count 0) rule out every
    # optimum; such bits never come back under BDE and absorbing EDAs.
    def optimum_blocked(self, ones) -> bool:
        return bool(np.any((np.asarray(ones) == 0) & self.required_ones()))

    def __repr__(self):
        return f"{type(self).__name__}(D={self.D})"


class OneMax(Objective):
    name = "onemax"

    def evaluate_many(self, members):
        return np.asarray(members).sum(axis=1, dtype=np.int64)

    @property
    def optimum_value(self):
        return self.D


class LeadingOnes(Objective):
    name = "leadingones"

    def evaluate_many(self, members):
        zeros = np.asarray(members) == 0
        first = zeros.argmax(axis=1).astype(np.int64)
        first[~zeros.any(axis=1)] = zeros.shape[1]
        return first

    @property
    def optimum_value(self):
        return self.D


# Weight 2^(D-i) on gene i. Above EXACT_INT_BITS the values are Python
# integers in an object array, whose order is the lexicographic order of
# the bit strings.
class BinaryValue(Objective):
    name = "binaryvalue"

    def evaluate_many(self, members):
        members = np.asarray(members, dtype=np.uint8)
        D = members.shape[1]
        if D <= EXACT_INT_BITS:
            weights = np.left_shift(np.int64(1), np.arange(D - 1, -1, -1, dtype=np.int64))
            return members.astype(np.int64) @ weights
        pad = (-D) % 8
        packed = np.packbits(members, axis=1)
        values = np.empty(members.shape[0], dtype=object)
        for k, row in enumerate(packed):
            values[k] = int.from_bytes(row.tobytes(), "big") >> pad
        return values

    @property
    def optimum_value(self):
        return (1 << self.D) - 1


class Needle(Objective):
    name = "needle"

    def evaluate_many(self, members):
        return np.all(np.asarray(members) == 1, axis=1).astype(np.int64)

    @property
    def optimum_value(self):
        return 1


# f(X) = D*X_1 + sum of the other genes: any string with a one in the first
# position beats every string with a zero there.
class DominantOneMax(Objective):
    name = "dominant_onemax"
    min_dimension = 2

    def evaluate_many(self, members):
        members = np.asarray(members, dtype=np.int64)
        return self.D * members[:, 0] + members[:, 1:].sum(axis=1)

    @property
    def optimum_value(self):
        return 2 * self.D - 1


# |X| below 0.2D scores |X|, the middle band scores -1 and |X| >= 0.8D is
# optimal with value D. Bands are compared in integers (5|X| vs D, 4D).
class Trap(Objective):
    name = "trap"
    min_dimension = 5

    def evaluate_many(self, members):
        ones = np.asarray(members).sum(axis=1, dtype=np.int64)
        return np.where(5 * ones < self.D, ones,
                        np.where(5 * ones >= 4 * self.D, self.D, -1)).astype(np.int64)

    @property
    def optimum_value(self):
        return self.D

    def required_ones(self):
        return np.zeros(self.D, dtype=bool)

    # the optimum needs ceil(0.8D) ones among the positions not stuck at zero
    def optimum_blocked(self, ones):
        free = self.D - int(np.count_nonzero(np.asarray(ones) == 0))
        return 5 * free < 4 * self.D


# Evaluates the base objective with gene j (1-based) overwritten by v, so
# that gene j becomes neutral.
class PinnedObjective(Objective):

    def __init__(self, base, j, v):
        if not 1 <= j <= base.D:
            raise InvalidParameter(f"bit index {j} outside 1..{base.D}")
        if v not in (0, 1):
            raise InvalidParameter(f"pinned value must be 0 or 1, got {v}")
        super().__init__(base.D)
        self.base = base
        self.j = j
        self.v = v
        self.name = f"{base.name}|{j}={v}"

    def evaluate_many(self, members):
        pinned = np.array(members, dtype=np.uint8)
        pinned[:, self.j - 1] = self.v
        return self.base.evaluate_many(pinned)

    # best value over strings with gene j pinned; all base objectives here
    # are maximized by the all-ones string once gene j is fixed
    @property
    def optimum_value(self):
        best = np.ones((1, self.D), dtype=np.uint8)
        best[0, self.j - 1] = self.v
        value = self.base.evaluate_many(best)[0]
        return int(value)

    def required_ones(self):
        required = self.base.required_ones().copy()
        required[self.j - 1] = False
        return required

    def optimum_blocked(self, ones):
        ones = np.array(ones)
        ones[self.j - 1] = 1
        return self.base.optimum_blocked(ones)

    def __repr__(self):
        return f"pin_bit({self.base!r}, {self.j}, {self.v})"


def pin_bit(f: Objective, j: int, v: int) -> Objective:
    return PinnedObjective(f, j, v)


def registry():
    return {cls.name: cls for cls in Objective.__subclasses__() if cls.name}


def make_objective(name: str, D: int) -> Objective:
    known = registry()
    if name not in known:
        raise UnknownIdentifier("objective", name, known)
    return known[name](D)


# Plain functions on a single bit vector

def _evaluate(cls, x):
    x = bit_vector(x)
    return cls(x.size).evaluate(x)


def onemax(x) -> int:
    return _evaluate(OneMax, x)


def leadingones(x) -> int:
    return _evaluate(LeadingOnes, x)


def binaryvalue(x) -> int:
    return _evaluate(BinaryValue, x)


def needle(x) -> int:
    return _evaluate(Needle, x)


def dominant_onemax(x) -> int:
    return _evaluate(DominantOneMax, x)


def trap_nonconverge(x) -> int:
    return _evaluate(Trap, x)
