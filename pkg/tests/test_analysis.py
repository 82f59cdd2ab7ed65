import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from analysis import (FrequencyTrace, HittingReport, first_absorption, first_band_exit,
                      first_reach, forced_mismatch_count, forced_positions, frequency_matrix,
                      mean_forced_mismatch, mean_reachable_count, ordered_tuples, quantiles,
                      reachable_set_size, reachable_set_size_bruteforce, tuple_reachable_count)
from core import InvalidParameter, Population, make_stream, sample_population, stack_members


@pytest.fixture
def tuple_population():
    return stack_members([(1, 0, 1, 0), (1, 1, 1, 0), (0, 0, 1, 1), (0, 1, 1, 0),
                          (1, 1, 0, 0)])


def test_frequency_matrix():
    P1 = stack_members([(1, 0, 0), (1, 1, 0), (0, 1, 0), (1, 1, 0)])
    P2 = stack_members([(1, 1, 0), (1, 1, 0), (1, 1, 0), (1, 1, 1)])
    trace = frequency_matrix([P1, P2])
    assert trace.generations == 2
    assert trace.ones.tolist() == [[3, 3, 0], [4, 4, 1]]
    assert trace.min_ones == 0
    assert trace.min_curve.tolist() == [0, 1]
    assert trace.frequencies[1].tolist() == [1.0, 1.0, 0.25]
    assert trace.column(2).tolist() == [0, 1]


def test_frequency_matrix_rejects_bad_traces():
    with pytest.raises(InvalidParameter):
        frequency_matrix([])
    with pytest.raises(InvalidParameter):
        frequency_matrix([stack_members([(1, 0)] * 4), stack_members([(1, 0, 1)] * 4)])
    with pytest.raises(InvalidParameter):
        FrequencyTrace(np.array([[0, 5]]), N=4)


def test_first_band_exit():
    series = [0.5, 0.4, 0.55, 0.6, 0.3]
    assert first_band_exit(series, 0.4, 0.55) == HittingReport("band_exit", 3)
    assert not first_band_exit(series, 0.3, 0.6).hit
    with pytest.raises(InvalidParameter):
        first_band_exit(series, 0.6, 0.4)


def test_first_absorption_and_reach():
    assert first_absorption([0.5, 0.6, 1.0, 1.0]).generation == 2
    assert first_absorption([0.0]).generation == 0
    assert not first_absorption([0.2, 0.8]).hit
    report = first_reach([10, 30, 55, 40], 50)
    assert report.event == "optimum" and report.generation == 2
    assert first_reach([1, 2], 2, event="target").generation == 1


def test_quantiles_nearest_rank():
    samples = list(range(10, 0, -1))
    assert quantiles(samples, [0, 0.1, 0.5, 0.9, 1]) == [1, 1, 5, 9, 10]
    assert quantiles(samples, [0.25, 0.75]) == [3, 8]
    assert quantiles([7], [0, 0.5, 1]) == [7, 7, 7]
    with pytest.raises(InvalidParameter):
        quantiles([], [0.5])
    with pytest.raises(InvalidParameter):
        quantiles([1, 2], [1.5])


def test_quantiles_along_an_axis():
    # rows are generations, columns are runs
    table = np.array([[4, 1, 3, 2], [0, 0, 8, 8]])
    levels = quantiles(table, [0, 0.5, 1], axis=1)
    assert levels == [[1, 0], [2, 0], [4, 8]]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-100, 100), min_size=1, max_size=40), st.floats(0, 1))
def test_quantile_is_a_sample_with_enough_mass_below(samples, q):
    value = quantiles(samples, [q])[0]
    assert value in samples
    below = sum(s <= value for s in samples)
    assert below >= q * len(samples) - 1e-9


def test_forced_positions(tuple_population):
    positions, values = forced_positions(tuple_population, 0, 1, 2, 3)
    assert positions.tolist() == [0, 2]
    assert values.tolist() == [1, 1]
    assert tuple_reachable_count(tuple_population, 0, 1, 2, 3) == 4
    assert forced_mismatch_count((0, 0, 1, 0), tuple_population, 0, 1, 2, 3) == 1
    assert forced_mismatch_count((1, 1, 1, 1), tuple_population, 0, 1, 2, 3) == 0


def test_tuple_validation(tuple_population):
    with pytest.raises(InvalidParameter):
        forced_positions(tuple_population, 0, 1, 1, 3)
    with pytest.raises(InvalidParameter):
        tuple_reachable_count(tuple_population, 0, 1, 2, 5)
    with pytest.raises(InvalidParameter):
        forced_mismatch_count((1, 0), tuple_population, 0, 1, 2, 3)
    wide = sample_population(4, 41, 0.5, make_stream(0))
    with pytest.raises(InvalidParameter):
        tuple_reachable_count(wide, 0, 1, 2, 3)


def test_ordered_tuples():
    tuples = list(ordered_tuples(5))
    assert len(tuples) == 120
    assert all(len(set(t)) == 4 for t in tuples)


def test_converged_population_reaches_itself():
    P = stack_members([(1, 0, 1)] * 4)
    assert reachable_set_size(P) == 1
    assert reachable_set_size_bruteforce(P) == 1


@pytest.mark.parametrize("seed", range(12))
def test_reachable_set_matches_enumeration(seed):
    rng = make_stream(seed)
    N = 4 + seed % 3
    D = 3 + seed % 5
    P = sample_population(N, D, 0.5, rng)
    assert reachable_set_size(P) == reachable_set_size_bruteforce(P)
    assert 1 <= reachable_set_size(P) <= 2 ** D


def test_reachable_set_size_limits():
    with pytest.raises(InvalidParameter):
        reachable_set_size(sample_population(9, 4, 0.5, make_stream(1)))
    with pytest.raises(InvalidParameter):
        reachable_set_size(sample_population(4, 21, 0.5, make_stream(1)))
    with pytest.raises(InvalidParameter):
        reachable_set_size_bruteforce(Population(np.zeros((3, 4))))


def test_mean_reachable_count():
    mean, stderr = mean_reachable_count(8, 100_000, make_stream(3))
    assert abs(mean - 1.75 ** 8) <= 4 * stderr
    with pytest.raises(InvalidParameter):
        mean_reachable_count(41, 10, make_stream(3))


def test_mean_forced_mismatch():
    mean, stderr = mean_forced_mismatch(16, 100_000, make_stream(4))
    assert abs(mean - 2.0) <= 4 * stderr
