import math

import pytest

from harness import (dominant_convergence, neutral_hitting, reproduce, runtime_table,
                     success_table, trap_demo)

pytestmark = pytest.mark.slow


def test_leadingones_desk_runtime():
    findings = runtime_table("table1_lo", "leadingones", D=200, N=200, runs=20).findings
    for algorithm in ("bde", "ibde"):
        assert findings[algorithm]["success"] > 0
        assert 2.0 * 200 <= findings[algorithm]["mean"] <= 3.0 * 200


def test_binaryvalue_desk_runtime():
    findings = runtime_table("table2_bv", "binaryvalue", D=200, N=200, runs=20,
                             algorithms=("bde",)).findings
    assert findings["bde"]["success"] > 0
    assert 1.0 * 200 <= findings["bde"]["mean"] <= 1.5 * 200


def test_onemax_desk_success_is_all_or_nothing(tmp_path):
    first = reproduce("table3_onemax", "desk", seed=0, out=tmp_path / "first")
    for algorithm in ("bde", "ibde"):
        small, large = first.findings[f"{algorithm}/N=25"], first.findings[f"{algorithm}/N=100"]
        assert (small["frequency_zero"], small["success"]) == (20, 0)
        assert (large["success"], large["frequency_zero"]) == (20, 0)
    reproduce("table3_onemax", "desk", seed=0, out=tmp_path / "second", workers=2)
    for name in ("runs.csv", "fitness_curves.csv"):
        assert (tmp_path / "first" / name).read_bytes() == \
               (tmp_path / "second" / name).read_bytes()


def test_onemax_small_population_converges_prematurely():
    findings = success_table("om", D=500, Ns=(25, 100), runs=10, algorithms=("bde",)).findings
    assert findings["bde/N=25"]["frequency_zero"] == 10
    assert findings["bde/N=100"]["success"] == 10


def test_dominant_bit_converges_in_logarithmic_time():
    findings = dominant_convergence().findings
    for N in (64, 256, 1024):
        hit = findings[f"N={N}"]
        assert hit["missed"] == 0
        assert hit["mean"] <= hit["bound"]
        assert hit["bound"] == pytest.approx((math.log(N) + 3) / 0.04275, rel=1e-3)
    assert findings["growth_ratio"] <= 3


@pytest.mark.parametrize("algorithm,sizes", [("umda_neutral", (32, 64, 128, 256)),
                                             ("cga_neutral", (16, 32, 64))])
def test_neutral_hitting_time_scales_with_size(algorithm, sizes):
    findings = neutral_hitting(algorithm, sizes, runs=200).findings
    assert findings["spread"] <= 1.5


def test_trap_population_never_converges():
    # trap_demo raises PropertyViolation on any member or trial leaving the low band
    findings = trap_demo(D=50, N=20, generations=10_000, runs=5).findings
    assert findings["successes"] == 0
    assert all(r["outside_a"] == 0 and r["trial_hits"] == 0 for r in findings["runs"])
