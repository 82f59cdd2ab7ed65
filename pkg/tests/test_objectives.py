import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core import InvalidParameter, UnknownIdentifier
from objectives import (BinaryValue, DominantOneMax, LeadingOnes, Needle, OneMax, Trap,
                        binaryvalue, dominant_onemax, leadingones, make_objective, needle,
                        onemax, pin_bit, registry, trap_nonconverge)


def all_strings(D):
    return np.array(list(itertools.product((0, 1), repeat=D)), dtype=np.uint8)


def with_ones(D, k):
    return [1] * k + [0] * (D - k)


def bits(min_size=1, max_size=16):
    return st.lists(st.integers(0, 1), min_size=min_size, max_size=max_size)


def test_onemax():
    assert onemax((1, 1, 1, 1)) == 4
    assert onemax((0, 0, 0)) == 0
    assert onemax((1, 0, 1, 0, 1)) == 3


def test_leadingones():
    assert leadingones((0,) * 6) == 0
    assert leadingones((1, 1, 0, 1)) == 2
    assert leadingones((1, 1, 1)) == 3
    assert leadingones((0, 1, 1)) == 0


def test_binaryvalue():
    assert binaryvalue((1, 0, 1, 1)) == 11
    assert binaryvalue((0, 0, 0, 0)) == 0
    assert binaryvalue((1,) + (0,) * 9) == 512


def test_needle():
    assert needle((1, 1, 1)) == 1
    assert needle((1, 0, 1)) == 0
    assert needle((0, 0, 0)) == 0


def test_dominant_onemax():
    assert dominant_onemax((1, 0, 0, 0)) == 4
    assert dominant_onemax((0, 1, 1, 1)) == 3
    assert dominant_onemax((1, 1, 1, 1)) == 7


def test_trap_nonconverge():
    assert trap_nonconverge(with_ones(10, 10)) == 10
    assert trap_nonconverge(with_ones(10, 5)) == -1
    assert trap_nonconverge(with_ones(10, 1)) == 1
    assert trap_nonconverge(with_ones(10, 8)) == 10
    assert trap_nonconverge(with_ones(10, 2)) == -1


def test_pin_bit():
    assert pin_bit(LeadingOnes(4), 3, 1)((1, 1, 0, 1)) == 4
    assert pin_bit(OneMax(3), 1, 0)((1, 1, 1)) == 2
    assert pin_bit(Needle(3), 2, 1)((1, 0, 1)) == 1


def test_pin_bit_rejects_bad_index():
    with pytest.raises(InvalidParameter):
        pin_bit(OneMax(3), 0, 1)
    with pytest.raises(InvalidParameter):
        pin_bit(OneMax(3), 4, 1)
    with pytest.raises(InvalidParameter):
        pin_bit(OneMax(3), 2, 2)


@pytest.mark.parametrize("cls", [OneMax, LeadingOnes, BinaryValue, Needle, DominantOneMax, Trap])
def test_pinned_bit_is_neutral(cls):
    D = 8
    X = all_strings(D)
    for j in (1, 4, D):
        for v in (0, 1):
            f = pin_bit(cls(D), j, v)
            flipped = X.copy()
            flipped[:, j - 1] ^= 1
            assert np.array_equal(f.evaluate_many(X), f.evaluate_many(flipped))


def test_pinned_optimum():
    assert pin_bit(OneMax(5), 1, 0).optimum_value == 4
    assert pin_bit(Needle(5), 2, 1).optimum_value == 1
    f = pin_bit(LeadingOnes(5), 5, 0)
    assert f.optimum_value == 4
    assert f.is_optimal((1, 1, 1, 1, 0))
    assert f.is_optimal((1, 1, 1, 1, 1))


def test_dominance_of_first_bit():
    D = 10
    f = DominantOneMax(D)
    values = f.evaluate_many(all_strings(D))
    first = all_strings(D)[:, 0]
    assert values[first == 1].min() > values[first == 0].max()


@pytest.mark.parametrize("D", [5, 10, 12, 13])
def test_trap_bands(D):
    f = Trap(D)
    levels = {k: f(with_ones(D, k)) for k in range(D + 1)}
    low = [levels[k] for k in range(D + 1) if 5 * k < D]
    middle = [levels[k] for k in range(D + 1) if D <= 5 * k < 4 * D]
    high = [k for k in range(D + 1) if levels[k] == f.optimum_value]
    assert max(middle) < min(low)
    assert high == [k for k in range(D + 1) if 5 * k >= 4 * D]


def test_binaryvalue_order_is_lexicographic():
    X = all_strings(10)
    values = BinaryValue(10).evaluate_many(X)
    assert np.all(np.diff(values) > 0)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_binaryvalue_large_dimension(data):
    D = data.draw(st.integers(63, 130))
    a = data.draw(bits(D, D))
    b = data.draw(bits(D, D))
    f = BinaryValue(D)
    assert (f(a) > f(b)) == (tuple(a) > tuple(b))
    assert f(a) == int("".join(map(str, a)), 2)


@settings(max_examples=60, deadline=None)
@given(bits())
def test_evaluate_matches_evaluate_many(x):
    for name, cls in registry().items():
        if len(x) < cls.min_dimension:
            continue
        f = cls(len(x))
        assert f(x) == f.evaluate_many(np.array([x]))[0]
        assert f.is_optimal(x) == (f(x) == f.optimum_value)


def test_all_ones_is_optimal():
    for name in ("onemax", "leadingones", "binaryvalue", "needle", "dominant_onemax", "trap"):
        f = make_objective(name, 12)
        assert f.is_optimal([1] * 12)
        assert not f.is_optimal([0] * 12)


def test_registry():
    assert set(registry()) == {"onemax", "leadingones", "binaryvalue", "needle",
                               "dominant_onemax", "trap"}
    with pytest.raises(UnknownIdentifier) as e:
        make_objective("twomax", 5)
    assert "onemax" in str(e.value)


def test_dimension_limits():
    with pytest.raises(InvalidParameter):
        Trap(4)
    with pytest.raises(InvalidParameter):
        DominantOneMax(1)
    with pytest.raises(InvalidParameter):
        OneMax(3)((1, 1))


def test_optimum_blocked():
    assert OneMax(3).optimum_blocked([2, 0, 1])
    assert not OneMax(3).optimum_blocked([2, 1, 1])
    assert not pin_bit(OneMax(3), 2, 0).optimum_blocked([2, 0, 1])
    trap = Trap(10)
    assert not trap.optimum_blocked([0, 0] + [1] * 8)
    assert trap.optimum_blocked([0, 0, 0] + [1] * 7)
