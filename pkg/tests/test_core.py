import numpy as np
import pytest
from mock import Mock
from scipy.stats import binom, chisquare

from core import (AlgorithmParams, InvalidParameter, OutputError, Population,
                  UnknownIdentifier, bit_vector, derive_stream, draw_distinct_donors,
                  hamming, make_stream, sample_population, sample_population_below,
                  stack_members)


@pytest.fixture
def rng():
    return make_stream(2024)


@pytest.fixture
def small_population():
    return stack_members([(1, 0, 1, 1), (0, 0, 1, 0), (1, 1, 1, 0), (0, 1, 1, 1)])


def test_sample_population_degenerate(rng):
    assert sample_population(3, 5, 0.0, rng).members.sum() == 0
    assert sample_population(3, 5, 1.0, rng).members.sum() == 15


def test_sample_population_rejects_bad_probability(rng):
    with pytest.raises(InvalidParameter):
        sample_population(3, 5, 1.5, rng)
    with pytest.raises(InvalidParameter):
        sample_population(0, 5, 0.5, rng)


def test_sample_population_concentration():
    # 500 +- 3*sqrt(250) for Binomial(1000, 1/2)
    lo, hi = 500 - 3 * np.sqrt(250), 500 + 3 * np.sqrt(250)
    coverage = binom.cdf(np.floor(hi), 1000, 0.5) - binom.cdf(np.ceil(lo) - 1, 1000, 0.5)
    assert coverage > 0.99
    inside = 0
    for seed in range(100):
        total = sample_population(1000, 1, 0.5, make_stream(seed)).members.sum()
        inside += lo <= total <= hi
    assert inside >= 97


def test_sample_population_bit_frequency(rng):
    P = sample_population(100_000, 3, 0.5, rng)
    freq = P.ones() / P.N
    stderr = np.sqrt(0.25 / P.N)
    assert np.all(np.abs(freq - 0.5) <= 4 * stderr)


def test_sample_population_below(rng):
    P = sample_population_below(50, 30, 0.3, 6, rng)
    assert P.members.sum(axis=1).max() < 6


def test_hamming():
    assert hamming((1, 0, 1), (1, 0, 1)) == 0
    assert hamming((1, 0, 1), (0, 1, 0)) == 3
    assert hamming((1, 1, 0, 0), (1, 0, 0, 1)) == 2
    with pytest.raises(InvalidParameter):
        hamming((1, 0), (1, 0, 1))


def test_bit_vector_rejects_other_values():
    assert bit_vector([1, 0, 1]).dtype == np.uint8
    with pytest.raises(InvalidParameter):
        bit_vector([1, 2, 0])
    with pytest.raises(InvalidParameter):
        bit_vector([])


def test_population_shape_and_counts(small_population):
    assert small_population.N == 4
    assert small_population.D == 4
    assert list(small_population.ones()) == [2, 2, 4, 2]
    assert list(small_population.converged_bits()) == [False, False, True, False]


def test_population_is_read_only(small_population):
    with pytest.raises(ValueError):
        small_population.members[0, 0] = 0


def test_population_rejects_ragged_or_non_binary():
    with pytest.raises(InvalidParameter):
        Population([[0, 1, 2]])
    with pytest.raises(InvalidParameter):
        Population([0, 1, 1])


def test_fitness_cache_per_objective(small_population):
    f = Mock()
    f.evaluate_many.return_value = np.array([1, 2, 3, 4])
    g = Mock()
    g.evaluate_many.return_value = np.array([0, 0, 0, 0])
    small_population.evaluate(f)
    small_population.evaluate(f)
    assert f.evaluate_many.call_count == 1
    assert list(small_population.evaluate(g)) == [0, 0, 0, 0]
    assert list(small_population.evaluate(f)) == [1, 2, 3, 4]
    assert f.evaluate_many.call_count == 2


def test_params_validation():
    AlgorithmParams().validate()
    for bad in (dict(F=1.5), dict(C=0.0), dict(K=3), dict(mu=10, lam=5),
                dict(max_generations=-1), dict(init_p=2.0)):
        with pytest.raises(InvalidParameter):
            AlgorithmParams(**bad).validate()


def test_params_per_algorithm():
    with pytest.raises(InvalidParameter):
        AlgorithmParams(N=3).validate_for("bde")
    with pytest.raises(InvalidParameter):
        AlgorithmParams(K=10, init_p=0.33).validate_for("cga")
    AlgorithmParams(N=3).validate_for("umda")
    AlgorithmParams(K=10, init_p=0.3).validate_for("cga")


def test_params_dict_uses_lambda():
    p = AlgorithmParams(lam=80, mu=20)
    d = p.to_dict()
    assert d["lambda"] == 80 and "lam" not in d
    assert AlgorithmParams.from_dict(d) == p
    with pytest.raises(InvalidParameter):
        AlgorithmParams.from_dict({"population": 10})


def test_derived_streams():
    a = derive_stream(7, 3).random(5)
    b = derive_stream(7, 3).random(5)
    c = derive_stream(7, 4).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.array_equal(make_stream(11).random(3), make_stream(11).random(3))


def test_draw_distinct_donors(rng):
    exclude = np.arange(6)
    donors = draw_distinct_donors(6, exclude, rng)
    assert donors.shape == (6, 3)
    for i, (r1, r2, r3) in enumerate(donors):
        assert len({i, r1, r2, r3}) == 4
    per_bit = draw_distinct_donors(6, np.zeros((4, 5), dtype=int), rng)
    assert per_bit.shape == (4, 5, 3)
    assert not np.any(per_bit == 0)


def test_draw_distinct_donors_uniform(rng):
    donors = draw_distinct_donors(5, np.zeros(24_000, dtype=int), rng)
    codes = donors[:, 0] * 100 + donors[:, 1] * 10 + donors[:, 2]
    values, counts = np.unique(codes, return_counts=True)
    assert len(values) == 24
    assert chisquare(counts).pvalue > 1e-4


def test_draw_distinct_donors_needs_four(rng):
    with pytest.raises(InvalidParameter):
        draw_distinct_donors(3, np.array([0]), rng)
    assert draw_distinct_donors(3, -1, rng).shape == (3,)


def test_exception_messages():
    e = UnknownIdentifier("objective", "twomax", ["onemax", "needle"])
    assert isinstance(e, KeyError)
    assert str(e) == "unknown objective 'twomax'; known: needle, onemax"
    o = OutputError("/tmp/x.csv", "Permission denied")
    assert isinstance(o, OSError) and o.path == "/tmp/x.csv"
