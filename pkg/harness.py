#
#  Module: harness
#
#  Experiment configuration and orchestration:
#     ExperimentConfig   - one algorithm/objective/params set, repeated "runs" times
#     ExperimentSummary  - run records, status counts, runtime statistics, findings
#     run_experiment     - fans runs out over a process pool, writes runs.csv
#     emit_quantile_table- per-generation frequency quantiles over runs
#     fitness_curve_frame- per-generation best fitness over runs (fitness_curves.csv)
#     reproduce          - the canned experiments (EXPERIMENTS), desk or paper scale
#     verify_theory      - every closed form against its Monte Carlo oracle
#     reachability       - exact one-generation reachable set of a random population
#
#  Run k of an experiment always draws from derive_stream(master_seed, k),
#  and results are reduced in run order, so outputs do not depend on the
#  number of workers.
#

import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from algorithms import (NEUTRAL_STEPS, TRACE_MODES, Evolution, RunRecord, Status,
                        bde_generation, check_algorithm)
from analysis import (FrequencyTrace, first_band_exit, first_reach, mean_forced_mismatch,
                      mean_reachable_count, ordered_tuples, quantiles, reachable_set_size,
                      reachable_set_size_bruteforce)
from core import (AlgorithmParams, InvalidParameter, LabError, OutputError,
                  UnknownIdentifier, derive_stream, make_stream, sample_population,
                  sample_population_below)
from objectives import make_objective, registry
from theory import (check_formula, dominant_delta, expected_trial_fitness_gap,
                    flip_prob_relative, mc_fitness_gap, mutant_prob_relative,
                    onemax_gamma, stability_threshold_N, theory_grid, trial_drift_relative)

logger = logging.getLogger(__name__)

RUNS_COLUMNS = ["run_id", "algo", "objective", "D", "N", "F", "C", "mu", "lambda", "K",
                "init_p", "seed", "status", "generations"]
QUANTILE_LEVELS = (0.0, 0.1, 0.5, 0.9, 1.0)
HITTING_COLUMNS = ["algo", "size_param", "run_id", "hit_generation"]
FITNESS_COLUMNS = ["algo", "objective", "D", "N", "generation", "mean", "min", "max"]
THEORY_COLUMNS = ["formula", "params", "closed_form", "mc_estimate", "mc_stderr",
                  "n_samples", "pass"]
SCALES = ("desk", "paper")


class PropertyViolation(LabError):
    pass


@dataclass
class ExperimentConfig:
    experiment_id: str
    algorithm: str = "bde"
    objective: str = "onemax"
    params: AlgorithmParams = field(default_factory=AlgorithmParams)
    runs: int = 1
    master_seed: int = 0
    trace_bits: str = "none"
    outputs: dict = field(default_factory=dict)
    workers: Optional[int] = None
    band: Optional[tuple] = None

    def validate(self):
        if self.runs < 1:
            raise InvalidParameter(f"runs must be at least 1, got {self.runs}")
        check_algorithm(self.algorithm)
        if self.algorithm not in NEUTRAL_STEPS and self.objective not in registry():
            raise UnknownIdentifier("objective", self.objective, registry())
        if self.trace_bits not in TRACE_MODES:
            raise InvalidParameter(f"trace_bits must be one of {', '.join(TRACE_MODES)}")
        if self.workers is not None and self.workers < 1:
            raise InvalidParameter(f"workers must be positive, got {self.workers}")
        self.params.validate_for(self.algorithm)
        return self

    def to_dict(self):
        d = asdict(self)
        d["params"] = self.params.to_dict()
        d["band"] = list(self.band) if self.band is not None else None
        d["outputs"] = {k: str(v) for k, v in self.outputs.items()}
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidParameter(f"unknown config field(s): {', '.join(sorted(unknown))}")
        d["params"] = AlgorithmParams.from_dict(d.get("params", {}))
        if d.get("band") is not None:
            d["band"] = tuple(d["band"])
        return cls(**d)

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            _write_text(text + "\n", path)
        return text

    @classmethod
    def from_json(cls, source):
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
            try:
                source = Path(source).read_text(encoding="utf-8")
            except OSError as e:
                raise InvalidParameter(f"cannot read config {source}: {e}") from e
        try:
            return cls.from_dict(json.loads(source))
        except json.JSONDecodeError as e:
            raise InvalidParameter(f"config is not valid JSON: {e}") from e


@dataclass
class ExperimentSummary:
    experiment_id: str
    records: list
    findings: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)
    quantile_rows: Optional[pd.DataFrame] = None

    @property
    def runs(self):
        return len(self.records)

    @property
    def status_counts(self):
        counts = {status.value: 0 for status in Status}
        for record in self.records:
            counts[record.status.value] += 1
        return counts

    # min / mean / max generations over successful runs
    @property
    def runtime(self):
        times = [r.generations for r in self.records if r.status == Status.SUCCESS]
        if not times:
            return {"min": None, "mean": None, "max": None}
        return {"min": min(times), "mean": float(np.mean(times)), "max": max(times)}

    def to_dict(self):
        return {"experiment_id": self.experiment_id, "runs": self.runs,
                "status_counts": self.status_counts, "runtime": self.runtime,
                "findings": self.findings, "files": self.files}


# Output helpers

def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def _prepare(path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(path, e.strerror or e) from e
    return path


def _write_text(text, path):
    path = _prepare(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(path, e.strerror or e) from e
    return path


def write_frame(frame: pd.DataFrame, path):
    path = _prepare(path)
    try:
        frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as e:
        raise OutputError(path, e.strerror or e) from e
    logger.info("wrote %s (%d rows)", path, len(frame))
    return path


def write_json(data, path):
    path = _write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n",
                       path)
    logger.info("wrote %s", path)
    return path


# A row is replayed from derive_stream(seed, run_id).
def runs_frame(records, run_ids=None) -> pd.DataFrame:
    rows = []
    for k, r in enumerate(records):
        p = r.params
        rows.append([k if run_ids is None else run_ids[k], r.algorithm, r.objective, p.D, p.N,
                     p.F, p.C, p.mu, p.lam, p.K, p.init_p, r.seed, r.status.value,
                     r.generations])
    return pd.DataFrame(rows, columns=RUNS_COLUMNS)


def hitting_frame(rows) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=HITTING_COLUMNS)


# Best fitness per generation over the runs of each (algo, objective, D, N);
# a finished run keeps its last value up to the longest run.
def fitness_curve_frame(records) -> pd.DataFrame:
    groups = {}
    for r in records:
        if r.best_curve is None:
            raise InvalidParameter(f"run of {r.algorithm} on {r.objective} has no fitness curve")
        key = (r.algorithm, r.objective, r.params.D, r.params.N)
        groups.setdefault(key, []).append([float(v) for v in r.best_curve])
    if not groups:
        raise InvalidParameter("no runs to summarise")
    frames = []
    for (algo, objective, D, N), curves in groups.items():
        length = max(len(c) for c in curves)
        curves = np.array([c + c[-1:] * (length - len(c)) for c in curves])
        frames.append(pd.DataFrame({"algo": algo, "objective": objective, "D": D, "N": N,
                                    "generation": np.arange(length),
                                    "mean": curves.mean(axis=0), "min": curves.min(axis=0),
                                    "max": curves.max(axis=0)}))
    return pd.concat(frames, ignore_index=True)[FITNESS_COLUMNS]


# Process-pool fan-out; workers=1 stays in this process. pool.map keeps
# the job order, which is the run order.
def fan_out(function, jobs, workers=None):
    jobs = list(jobs)
    workers = workers or os.cpu_count() or 1
    if workers == 1 or len(jobs) <= 1:
        return [function(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(function, jobs))


def _run_one(job) -> RunRecord:
    cfg, run_index = job
    objective = None if cfg.algorithm in NEUTRAL_STEPS else make_objective(cfg.objective, cfg.params.D)
    evolution = Evolution(cfg.algorithm, objective, cfg.params, seed=cfg.master_seed,
                          trace=cfg.trace_bits, band=cfg.band,
                          rng=derive_stream(cfg.master_seed, run_index))
    return evolution.run()


def run_records(cfg: ExperimentConfig) -> list:
    cfg.validate()
    logger.info("experiment %s: %d run(s) of %s on %s", cfg.experiment_id, cfg.runs,
                cfg.algorithm, cfg.objective)
    return fan_out(_run_one, [(cfg, k) for k in range(cfg.runs)], cfg.workers)


def traces_of(records) -> list:
    traces = []
    for r in records:
        if r.trace is None:
            raise InvalidParameter(f"run of {r.algorithm} on {r.objective} has no trace")
        N = 1 if r.algorithm not in ("bde", "ibde") else r.params.N
        traces.append(FrequencyTrace(r.trace, N, r.min_ones, r.min_curve))
    return traces


# Finished runs are extended to the longest run by repeating their last row.
def pad_traces(traces, length=None) -> list:
    length = length or max(t.generations for t in traces)
    padded = []
    for t in traces:
        extra = length - t.generations
        if extra < 0:
            raise InvalidParameter(f"trace longer than {length} generations")
        ones = np.vstack([t.ones, np.repeat(t.ones[-1:], extra, axis=0)])
        curve = np.concatenate([t.min_curve, np.repeat(t.min_curve[-1:], extra)])
        padded.append(FrequencyTrace(ones, t.N, t.min_ones, curve))
    return padded


def _level_name(q):
    if q == 0:
        return "min"
    if q == 1:
        return "max"
    return f"q{round(q * 100)}"


# One row per generation: quantiles over runs of the frequency at "bit"
# and the minimum frequency over all bits and runs at that generation.
def emit_quantile_table(traces, bit=-1, qs=QUANTILE_LEVELS, path=None) -> pd.DataFrame:
    if not traces:
        raise InvalidParameter("no traces to summarise")
    shapes = {t.ones.shape for t in traces}
    if len(shapes) != 1:
        raise InvalidParameter(f"traces of different shapes: {sorted(shapes)}")
    freqs = np.stack([t.ones[:, bit] / t.N for t in traces], axis=1)
    min_all = np.stack([t.min_curve / t.N for t in traces], axis=1).min(axis=1)
    levels = quantiles(freqs, qs, axis=1)
    frame = pd.DataFrame({"generation": np.arange(freqs.shape[0]),
                          **{_level_name(q): level for q, level in zip(qs, levels)},
                          "min_all_bits": min_all})
    if path is not None:
        write_frame(frame, path)
    return frame


def run_experiment(cfg: ExperimentConfig) -> ExperimentSummary:
    records = run_records(cfg)
    summary = ExperimentSummary(cfg.experiment_id, records)
    if "runs" in cfg.outputs:
        summary.files["runs"] = str(write_frame(runs_frame(records), cfg.outputs["runs"]))
    if "quantiles" in cfg.outputs:
        summary.quantile_rows = emit_quantile_table(pad_traces(traces_of(records)), -1,
                                                    path=cfg.outputs["quantiles"])
        summary.files["quantiles"] = str(cfg.outputs["quantiles"])
    if "summary" in cfg.outputs:
        summary.files["summary"] = str(cfg.outputs["summary"])
        write_json(summary.to_dict(), cfg.outputs["summary"])
    logger.info("experiment %s: %s", cfg.experiment_id, summary.status_counts)
    return summary


def run_batch(configs) -> list:
    ids = [cfg.experiment_id for cfg in configs]
    duplicated = sorted({i for i in ids if ids.count(i) > 1})
    if duplicated:
        raise InvalidParameter(f"experiment ids used twice: {', '.join(duplicated)}")
    return [run_experiment(cfg) for cfg in configs]


def _out(out, *parts):
    return None if out is None else Path(out).joinpath(*parts)


def _finish(summary, out, frames=()):
    for name, frame in frames:
        if out is not None:
            summary.files[name] = str(write_frame(frame, _out(out, name)))
    if out is not None:
        summary.files["summary.json"] = str(_out(out, "summary.json"))
        write_json(summary.to_dict(), _out(out, "summary.json"))
    return summary


def _runtime(records):
    return ExperimentSummary("", records).runtime


# Canned experiments. Each takes explicit sizes; the EXPERIMENTS entries
# fix the desk and original sizes.

def runtime_table(experiment_id, objective, D, N, runs, seed=0, out=None, workers=None,
                  algorithms=("bde", "ibde"), F=0.2, C=0.3, quantile_table=False):
    records, findings = [], {}
    params = AlgorithmParams(N=N, D=D, F=F, C=C, max_generations=10 * D)
    for algorithm in algorithms:
        cfg = ExperimentConfig(f"{experiment_id}/{algorithm}", algorithm, objective, params,
                               runs, seed, "last", workers=workers)
        if quantile_table and out is not None:
            cfg.outputs["quantiles"] = _out(out, algorithm, "freq_quantiles.csv")
        summary = run_experiment(cfg)
        records += summary.records
        findings[algorithm] = dict(summary.runtime, **summary.status_counts)
    means = [findings[a]["mean"] for a in algorithms]
    if len(algorithms) == 2 and all(means):
        findings["mean_ratio"] = means[1] / means[0]
    summary = ExperimentSummary(experiment_id, records, findings)
    run_ids = [k for _ in algorithms for k in range(runs)]
    return _finish(summary, out, [("runs.csv", runs_frame(records, run_ids)),
                                  ("fitness_curves.csv", fitness_curve_frame(records))])


def success_table(experiment_id, D, Ns, runs, seed=0, out=None, workers=None,
                  algorithms=("bde", "ibde"), F=0.2, C=0.3, max_generations=2000):
    records, run_ids, findings = [], [], {}
    for algorithm in algorithms:
        for N in Ns:
            params = AlgorithmParams(N=N, D=D, F=F, C=C, max_generations=max_generations)
            summary = run_experiment(ExperimentConfig(f"{experiment_id}/{algorithm}/N={N}",
                                                      algorithm, "onemax", params, runs, seed,
                                                      "last", workers=workers))
            records += summary.records
            run_ids += range(runs)
            findings[f"{algorithm}/N={N}"] = dict(summary.status_counts, **summary.runtime)
    summary = ExperimentSummary(experiment_id, records, findings)
    return _finish(summary, out, [("runs.csv", runs_frame(records, run_ids)),
                                  ("fitness_curves.csv", fitness_curve_frame(records))])


# Needle with every bit monitored against the closed band [lo*N, hi*N].
def needle_stability(D=20, N=None, F=0.9, C=0.9, generations=2000, runs=10, seed=0,
                     out=None, workers=None, band=(0.4, 0.6)):
    N = N or stability_threshold_N(F, C) + 6
    params = AlgorithmParams(N=N, D=D, F=F, C=C, max_generations=generations)
    cfg = ExperimentConfig("needle_stability", "bde", "needle", params, runs, seed, "all",
                           workers=workers)
    if out is not None:
        cfg.outputs["quantiles"] = _out(out, "freq_quantiles.csv")
    summary = run_experiment(cfg)
    lo, hi = band[0] * N, band[1] * N
    exits, first_exits, absorbed = 0, [], 0
    for r in summary.records:
        exits += int(np.count_nonzero((r.trace < lo) | (r.trace > hi)))
        first = first_band_exit(r.trace.min(axis=1), lo, hi)
        high = first_band_exit(r.trace.max(axis=1), lo, hi)
        hits = [g for g in (first.generation, high.generation) if g is not None]
        first_exits.append(min(hits) if hits else None)
        absorbed += int(np.any((r.trace == 0) | (r.trace == N)))
    summary.findings = {"N": N, "band": [lo, hi], "band_exit_cells": exits,
                        "runs_with_exit": sum(g is not None for g in first_exits),
                        "first_exit": first_exits, "runs_with_absorbed_bit": absorbed,
                        "min_ones": min(r.min_ones for r in summary.records),
                        "max_ones": max(int(r.trace.max()) for r in summary.records)}
    return _finish(summary, out, [("runs.csv", runs_frame(summary.records))])


def _dominant_hit(job):
    N, D, F, C, seed, run_index, limit = job
    rng = derive_stream(seed, run_index)
    f = make_objective("dominant_onemax", D)
    P = sample_population(N, D, 0.5, rng)
    series = [int(P.ones()[0])]
    while series[-1] < N and len(series) <= limit:
        P = bde_generation(P, f, F, C, rng).next_population
        series.append(int(P.ones()[0]))
    return first_reach(series, N, "dominant_converged").generation


# First generation at which every member carries a 1 at the dominant bit.
def dominant_convergence(Ns=(64, 256, 1024), D=50, F=0.2, C=0.3, runs=20, seed=0, out=None,
                         workers=None, limit=5000):
    rows, findings = [], {}
    delta = dominant_delta(F, C)
    for N in Ns:
        hits = fan_out(_dominant_hit, [(N, D, F, C, seed, k, limit) for k in range(runs)],
                       workers)
        rows += [["bde", N, k, g] for k, g in enumerate(hits)]
        reached = [g for g in hits if g is not None]
        findings[f"N={N}"] = {"mean": float(np.mean(reached)) if reached else None,
                              "missed": hits.count(None),
                              "bound": (math.log(N) + 3) / delta}
    first, last = findings[f"N={Ns[0]}"]["mean"], findings[f"N={Ns[-1]}"]["mean"]
    if first and last:
        findings["growth_ratio"] = last / first
    summary = ExperimentSummary("dominant_convergence", [], findings)
    return _finish(summary, out, [("hitting.csv", hitting_frame(rows))])


# Hitting time of {0,1} for the neutral frequency chain at each size.
def neutral_hitting(algorithm, sizes, runs=200, seed=0, out=None, workers=None, budget=50):
    rows, records, findings = [], [], {}
    for size in sizes:
        if algorithm == "umda_neutral":
            params = AlgorithmParams(N=size, D=1, mu=size, lam=size, K=2,
                                     max_generations=budget * size)
            scale = size
        else:
            params = AlgorithmParams(N=size, D=1, K=size, max_generations=budget * size ** 2)
            scale = size ** 2
        summary = run_experiment(ExperimentConfig(f"{algorithm}/{size}", algorithm, "onemax",
                                                  params, runs, seed, workers=workers))
        records += summary.records
        times = [r.generations if r.status != Status.GENERATION_LIMIT else None
                 for r in summary.records]
        rows += [[algorithm, size, k, t] for k, t in enumerate(times)]
        hit = [t for t in times if t is not None]
        findings[f"size={size}"] = {"mean": float(np.mean(hit)) if hit else None,
                                    "normalised": float(np.mean(hit)) / scale if hit else None,
                                    "missed": times.count(None)}
    normalised = [v["normalised"] for v in findings.values() if v["normalised"]]
    if normalised:
        findings["spread"] = max(normalised) / min(normalised)
    summary = ExperimentSummary(f"edahit_{algorithm.split('_')[0]}", records, findings)
    return _finish(summary, out, [("hitting.csv", hitting_frame(rows))])


def biased_init_gap(D=400, F=0.2, C=0.3, p=0.6, samples=100_000, seed=0, out=None):
    estimate, stderr = mc_fitness_gap(D, F, C, p, samples, make_stream(seed))
    expected = expected_trial_fitness_gap(D, F, C, p)
    findings = {"D": D, "F": F, "C": C, "p": p, "samples": samples,
                "expected_gap": expected, "mean_gap": estimate, "stderr": stderr,
                "relative_error": abs(estimate - expected) / abs(expected),
                "gamma": onemax_gamma(F, C, p)}
    return _finish(ExperimentSummary("biased_init_gap", [], findings), out)


def reach_demo(Ds=(4, 8, 12), mismatch_D=16, samples=100_000, seed=0, out=None,
               exact_D=6, exact_N=4):
    findings = {}
    for k, D in enumerate(Ds):
        mean, stderr = mean_reachable_count(D, samples, derive_stream(seed, k))
        findings[f"reachable_D={D}"] = {"mean": mean, "stderr": stderr, "expected": 1.75 ** D}
    mean, stderr = mean_forced_mismatch(mismatch_D, samples, derive_stream(seed, len(Ds)))
    findings[f"mismatch_D={mismatch_D}"] = {"mean": mean, "stderr": stderr,
                                            "expected": mismatch_D / 8}
    P = sample_population(exact_N, exact_D, 0.5, derive_stream(seed, len(Ds) + 1))
    findings["exact"] = {"D": exact_D, "N": exact_N, "reachable": reachable_set_size(P),
                         "bruteforce": reachable_set_size_bruteforce(P)}
    return _finish(ExperimentSummary("reach_demo", [], findings), out)


# BDE on the trap from a population inside property A (every member has
# fewer than D/5 ones). Checks A after every generation and that no trial
# reaches the optimal band.
def _trap_run(job):
    D, N, F, C, generations, seed, run_index = job
    rng = derive_stream(seed, run_index)
    f = make_objective("trap", D)
    P = sample_population_below(N, D, 0.1, math.ceil(D / 5), rng)
    outside_a = trial_hits = optimal = 0
    for _ in range(generations):
        outcome = bde_generation(P, f, F, C, rng)
        P = outcome.next_population
        ones = P.members.sum(axis=1)
        outside_a += int(np.count_nonzero(5 * ones >= D))
        trial_hits += int(np.count_nonzero(5 * outcome.trials.sum(axis=1) >= 4 * D))
        optimal += int(f.optimal_mask(P.evaluate(f)).any())
    return {"run": run_index, "outside_a": outside_a, "trial_hits": trial_hits,
            "optimal_generations": optimal,
            "zero_bits": int(np.count_nonzero(P.ones() == 0))}


def trap_demo(D=50, N=20, F=0.2, C=0.3, generations=10_000, runs=5, seed=0, out=None,
              workers=None, strict=True):
    results = fan_out(_trap_run, [(D, N, F, C, generations, seed, k) for k in range(runs)],
                      workers)
    findings = {"D": D, "N": N, "generations": generations, "runs": results,
                "successes": sum(r["optimal_generations"] > 0 for r in results)}
    summary = _finish(ExperimentSummary("trap_demo", [], findings), out)
    broken = [r for r in results if r["outside_a"] or r["trial_hits"]]
    if strict and broken:
        raise PropertyViolation(f"trap population left the low band in runs "
                                f"{[r['run'] for r in broken]}")
    return summary


def drift_curves(points=100, out=None):
    x = np.linspace(0.0, 1.0, points)
    curves = [("h", 10, x, trial_drift_relative(10, 0.9, 0.9, x)),
              ("h", 50, x, trial_drift_relative(50, 0.9, 0.9, x)),
              ("r", 10, x, mutant_prob_relative(10, 0.9, x)),
              ("r", 60, x, mutant_prob_relative(60, 0.9, x))]
    # s is defined from one zero (x = 1/N) upwards
    for N in (10, 50):
        xs = np.linspace(1 / N, 1.0, points)
        curves.append(("s", N, xs, flip_prob_relative(N, 0.9, 0.9, xs)))
    frames = [pd.DataFrame({"curve": curve, "N": N, "x": xs, "value": values})
              for curve, N, xs, values in curves]
    frame = pd.concat(frames, ignore_index=True)
    summary = ExperimentSummary("drift_curves", [], {"points": points, "rows": len(frame)})
    return _finish(summary, out, [("drift_curves.csv", frame)])


def om_scaling(Ds, Ns, runs, seed=0, out=None, workers=None, F=0.2, C=0.3):
    records, run_ids, findings = [], [], {}
    for N in Ns:
        for D in Ds:
            params = AlgorithmParams(N=N, D=D, F=F, C=C, max_generations=max(2000, 10 * D))
            summary = run_experiment(ExperimentConfig(f"fig_om_scaling/N={N}/D={D}", "bde",
                                                      "onemax", params, runs, seed, "last",
                                                      workers=workers))
            records += summary.records
            run_ids += range(runs)
            findings[f"N={N}/D={D}"] = dict(summary.runtime, **summary.status_counts)
    summary = ExperimentSummary("fig_om_scaling", records, findings)
    return _finish(summary, out, [("runs.csv", runs_frame(records, run_ids)),
                                  ("fitness_curves.csv", fitness_curve_frame(records))])


def _sized(desk, original):
    return lambda scale: desk if scale == "desk" else original


EXPERIMENTS = {
    "table1_lo": lambda scale, seed, out, workers: runtime_table(
        "table1_lo", "leadingones", **_sized(dict(D=200, N=200, runs=20),
                                             dict(D=1000, N=1000, runs=100))(scale),
        seed=seed, out=out, workers=workers),
    "table2_bv": lambda scale, seed, out, workers: runtime_table(
        "table2_bv", "binaryvalue", **_sized(dict(D=200, N=200, runs=20),
                                             dict(D=1000, N=1000, runs=100))(scale),
        seed=seed, out=out, workers=workers),
    "table3_onemax": lambda scale, seed, out, workers: success_table(
        "table3_onemax", **_sized(dict(D=500, Ns=(25, 100), runs=20),
                                  dict(D=500, Ns=(25, 50, 100, 1000, 10000), runs=100))(scale),
        seed=seed, out=out, workers=workers),
    "fig_neutral_quantiles": lambda scale, seed, out, workers: runtime_table(
        "fig_neutral_quantiles", "leadingones",
        **_sized(dict(D=200, N=200, runs=20), dict(D=1000, N=1000, runs=100))(scale),
        seed=seed, out=out, workers=workers, quantile_table=True),
    "fig_bv_quantiles": lambda scale, seed, out, workers: runtime_table(
        "fig_bv_quantiles", "binaryvalue",
        **_sized(dict(D=200, N=200, runs=20), dict(D=1000, N=1000, runs=100))(scale),
        seed=seed, out=out, workers=workers, quantile_table=True),
    "needle_stability": lambda scale, seed, out, workers: needle_stability(
        seed=seed, out=out, workers=workers),
    "dominant_convergence": lambda scale, seed, out, workers: dominant_convergence(
        seed=seed, out=out, workers=workers),
    "edahit_umda": lambda scale, seed, out, workers: neutral_hitting(
        "umda_neutral", (32, 64, 128, 256), seed=seed, out=out, workers=workers),
    "edahit_cga": lambda scale, seed, out, workers: neutral_hitting(
        "cga_neutral", (16, 32, 64), seed=seed, out=out, workers=workers),
    "biased_init_gap": lambda scale, seed, out, workers: biased_init_gap(seed=seed, out=out),
    "reach_demo": lambda scale, seed, out, workers: reach_demo(seed=seed, out=out),
    "trap_demo": lambda scale, seed, out, workers: trap_demo(
        generations=10_000, seed=seed, out=out, workers=workers),
    "drift_curves": lambda scale, seed, out, workers: drift_curves(out=out),
    "fig_om_scaling": lambda scale, seed, out, workers: om_scaling(
        **_sized(dict(Ds=(100, 200, 300), Ns=(100, 200), runs=5),
                 dict(Ds=tuple(range(100, 3301, 400)), Ns=(100, 200, 500), runs=10))(scale),
        seed=seed, out=out, workers=workers),
}


def reproduce(experiment_id: str, scale="desk", seed=0, out=None, workers=None) -> ExperimentSummary:
    if experiment_id not in EXPERIMENTS:
        raise UnknownIdentifier("experiment", experiment_id, EXPERIMENTS)
    if scale not in SCALES:
        raise InvalidParameter(f"scale must be one of {', '.join(SCALES)}, got {scale}")
    logger.info("reproducing %s at %s scale, seed %d", experiment_id, scale, seed)
    return EXPERIMENTS[experiment_id](scale, seed, out, workers)


def _check_one(job):
    index, name, params, samples, seed = job
    return check_formula(name, params, samples, derive_stream(seed, index))


def verify_theory(samples=1_000_000, seed=0, out=None, grid=None, workers=None) -> list:
    grid = theory_grid() if grid is None else grid
    jobs = [(k, name, params, samples, seed) for k, (name, params) in enumerate(grid)]
    results = fan_out(_check_one, jobs, workers)
    failed = [r for r in results if not r.within_3_sigma]
    logger.info("%d of %d formula checks within 3 standard errors",
                len(results) - len(failed), len(results))
    if out is not None:
        write_frame(pd.DataFrame([r.to_row() for r in results], columns=THEORY_COLUMNS),
                    _out(out, "theory_check.csv"))
    return results


def reachability(D: int, N: int, seed=0, out=None) -> dict:
    P = sample_population(N, D, 0.5, make_stream(seed))
    count = reachable_set_size(P)
    report = {"D": D, "N": N, "tuples": sum(1 for _ in ordered_tuples(N)),
              "reachable_count": count, "search_space": 2 ** D,
              "fraction": count / 2 ** D}
    if out is not None:
        write_json(report, _out(out, "reachability.json"))
    return report
