#
#  bde_lab: command line front end
#
#     python bde_lab.py run --algo bde --objective leadingones --dim 100 --pop 100 ...
#     python bde_lab.py reproduce table1_lo --scale desk --seed 1 --out results/
#     python bde_lab.py verify-theory --samples 1000000 --out results/
#     python bde_lab.py reachability --dim 6 --pop 4 --seed 1 --out results/
#
#  Exit status 0 on success, 2 on invalid input or failed output.
#

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from algorithms import ALGORITHMS
from core import LabError
from harness import (EXPERIMENTS, SCALES, ExperimentConfig, reachability, reproduce,
                     run_experiment, verify_theory)
from objectives import registry

logger = logging.getLogger("bde_lab")

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"

# CLI flag -> AlgorithmParams field
PARAM_FLAGS = {"dim": "D", "pop": "N", "scale_f": "F", "cross": "C", "mu": "mu",
               "lam": "lam", "k": "K", "max_gen": "max_generations", "init_p": "init_p"}


def build_parser():
    parser = argparse.ArgumentParser(prog="bde-lab",
                                     description="Binary DE and EDA experiments")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="repeated runs of one algorithm")
    run.add_argument("--config", help="JSON experiment config; flags override it")
    run.add_argument("--algo", choices=ALGORITHMS)
    run.add_argument("--objective", choices=sorted(registry()))
    run.add_argument("--dim", type=int)
    run.add_argument("--pop", type=int)
    run.add_argument("--scale-f", type=float)
    run.add_argument("--cross", type=float)
    run.add_argument("--mu", type=int)
    run.add_argument("--lambda", dest="lam", type=int)
    run.add_argument("--k", type=int)
    run.add_argument("--init-p", type=float)
    run.add_argument("--runs", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--max-gen", type=int)
    run.add_argument("--trace", choices=["none", "last", "all"])
    run.add_argument("--band", type=float, nargs=2, metavar=("LO", "HI"))
    run.add_argument("--workers", type=int)
    run.add_argument("--out")

    rep = commands.add_parser("reproduce", help="a canned experiment")
    rep.add_argument("experiment", metavar="id", help=", ".join(EXPERIMENTS))
    rep.add_argument("--scale", choices=SCALES, default="desk")
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--workers", type=int)
    rep.add_argument("--out")

    ver = commands.add_parser("verify-theory", help="closed forms against Monte Carlo")
    ver.add_argument("--samples", type=int, default=1_000_000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--workers", type=int)
    ver.add_argument("--out")

    reach = commands.add_parser("reachability", help="exact one-generation reachable set")
    reach.add_argument("--dim", type=int, required=True)
    reach.add_argument("--pop", type=int, required=True)
    reach.add_argument("--seed", type=int, default=0)
    reach.add_argument("--out")
    return parser


def config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig("run")
    overrides = {flag: getattr(args, flag) for flag in PARAM_FLAGS
                 if getattr(args, flag) is not None}
    params = replace(cfg.params, **{PARAM_FLAGS[k]: v for k, v in overrides.items()})
    fields = {"algorithm": args.algo, "objective": args.objective, "runs": args.runs,
              "master_seed": args.seed, "trace_bits": args.trace, "workers": args.workers,
              "band": tuple(args.band) if args.band else None}
    cfg = replace(cfg, params=params, **{k: v for k, v in fields.items() if v is not None})
    if args.out:
        out = Path(args.out)
        cfg.outputs = {"runs": out / "runs.csv", "summary": out / "summary.json"}
        if cfg.trace_bits != "none":
            cfg.outputs["quantiles"] = out / "freq_quantiles.csv"
    return cfg.validate()


def _show(data):
    print(json.dumps(data, indent=2, sort_keys=True, default=str))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT)
    try:
        if args.command == "run":
            _show(run_experiment(config_from_args(args)).to_dict())
        elif args.command == "reproduce":
            _show(reproduce(args.experiment, args.scale, args.seed, args.out,
                            args.workers).to_dict())
        elif args.command == "verify-theory":
            results = verify_theory(args.samples, args.seed, args.out, workers=args.workers)
            failed = [r.to_row() for r in results if not r.within_3_sigma]
            _show({"checks": len(results), "failed": failed})
        else:
            _show(reachability(args.dim, args.pop, args.seed, args.out))
    except LabError as e:
        logger.error("%s", e)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
