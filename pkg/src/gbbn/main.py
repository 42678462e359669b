"""
Command-line entry point for the gbbn benchmark tools.
"""

import argparse
import json
import logging
import os
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .benchmark import (
    BenchmarkManager,
    format_float,
    reference_deviation,
    sample_starts,
)
from .config import (
    Algorithm,
    BenchConfig,
    EtaGroup,
    InitialStepRule,
    LineSearchConfig,
    OutputFormat,
    SecantRule,
    SolverConfig,
    get_config,
)
from .interfaces import GBBNError
from .problems import check_gradients, get_problem, suite
from .solvers import SolverFactory

logger = logging.getLogger(__name__)


def _parse_floats(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected comma-separated numbers, got '{text}'")


def _parse_names(text: str) -> List[str]:
    return [item.strip() for item in text.split(',') if item.strip()]


def cmd_list_problems(args: argparse.Namespace) -> int:
    print(f"{'name':<12}{'n':>6}{'m':>4}  {'lower':>10}{'upper':>10}{'eta':>6}  reference")
    for p in suite():
        lower = format_float(float(np.min(p.lower)))
        upper = format_float(float(np.max(p.upper)))
        print(f"{p.name:<12}{p.n:>6}{p.m:>4}  {lower:>10}{upper:>10}{format_float(p.eta_default):>6}  "
              f"{p.reference}")
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    problem = get_problem(args.problem)
    if args.x0:
        x0 = np.array(args.x0)
    else:
        x0 = sample_starts(problem, 1, args.seed)[0]

    cfg = SolverConfig(
        eta=args.eta,
        max_iter=args.max_iter,
        initial_step=InitialStepRule(args.initial_step),
        secant=SecantRule(args.secant),
        ls=LineSearchConfig(memory_M=args.memory),
    )
    record = SolverFactory.create_solver(args.algo).solve(problem, x0, cfg)
    print(json.dumps(record.to_dict(), indent=2))
    if not record.converged:
        logger.warning("%s/%s terminated with %s", problem.name, args.algo, record.terminated_by.value)
    return 0


def _bench_config(args: argparse.Namespace) -> BenchConfig:
    if args.config:
        cfg = BenchConfig.load_from_file(args.config)
    else:
        cfg = BenchConfig()
    if args.problems:
        cfg.problems = [get_problem(name).name for name in _parse_names(args.problems)]
    if args.algos:
        cfg.algorithms = [name.lower() for name in _parse_names(args.algos)]
    if args.runs is not None:
        cfg.runs = args.runs
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.output_dir = args.out
    if args.format:
        cfg.format = OutputFormat(args.format)
    if args.workers is not None:
        cfg.workers = args.workers
    if args.eta is not None:
        cfg.eta_override = args.eta
    if args.no_time:
        cfg.include_time = False
    cfg.validate()
    return cfg


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _bench_config(args)
    manager = BenchmarkManager(cfg)
    report = manager.run_bench()
    if args.compare:
        for (problem, algorithm), deviation in reference_deviation(report).items():
            print(f"{problem:<12}{algorithm:<6}{deviation:+.1%}")
    return 0


def cmd_eta_sweep(args: argparse.Namespace) -> int:
    cfg = BenchConfig(runs=args.runs, seed=args.seed, output_dir=args.out, workers=args.workers)
    group = EtaGroup(args.group)
    path = os.path.join(args.out, f"eta_sweep_{group.value}.csv")
    table = BenchmarkManager(cfg).eta_sweep(group, args.etas, path)
    for row in table:
        print(f"eta={format_float(row.eta)} iter={row.mean_iter:.2f} feval={row.mean_feval:.2f} "
              f"stepsize={row.mean_stepsize:.2f}")
    return 0


def cmd_front(args: argparse.Namespace) -> int:
    problem = get_problem(args.problem)
    cfg = BenchConfig(problems=[problem.name], algorithms=[args.algo], runs=args.runs, seed=args.seed)
    BenchmarkManager(cfg).dump_front(problem, args.algo, args.runs, args.seed, args.out)
    return 0


def cmd_check_gradients(args: argparse.Namespace) -> int:
    app = get_config()
    failures = 0
    for p in suite():
        error = check_gradients(p, args.trials or app.gradient_check_trials, app.gradient_check_seed)
        ok = error <= app.gradient_check_tol
        print(f"{p.name:<12}{error:.3e}  {'ok' if ok else 'FAIL'}")
        if not ok:
            failures += 1
            logger.warning("%s: gradient check error %.3e exceeds %.1e", p.name, error,
                           app.gradient_check_tol)
    return 1 if failures else 0


def cmd_compare_eta0(args: argparse.Namespace) -> int:
    names = [get_problem(name).name for name in _parse_names(args.problems)] if args.problems else None
    cfg = BenchConfig(runs=args.runs, seed=args.seed, output_dir=args.out, workers=args.workers)
    path = os.path.join(args.out, "plain_normalization.csv")
    for row in BenchmarkManager(cfg).plain_normalization_comparison(names, path):
        deviation = "" if row.plain_deviation is None else f"{row.plain_deviation:+.1%}"
        print(f"{row.problem:<12}plain {row.plain_iter:6.2f} {row.plain_feval:8.2f} {deviation:>8}   "
              f"eta {row.eta_iter:6.2f} {row.eta_feval:8.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    app = get_config()
    parser = argparse.ArgumentParser(prog="gbbn-bench",
                                     description="Multiobjective descent solvers and benchmark sweeps")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=app.log_level,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)
    algorithms = [algorithm.value for algorithm in Algorithm]

    lst = sub.add_parser("list-problems", help="List the test problems")
    lst.set_defaults(func=cmd_list_problems)

    slv = sub.add_parser("solve", help="Run one solver once and print the record as JSON")
    slv.add_argument("--problem", required=True)
    slv.add_argument("--algo", choices=algorithms, default="gbbn")
    slv.add_argument("--eta", type=float, default=None)
    slv.add_argument("--seed", type=int, default=0)
    slv.add_argument("--x0", type=_parse_floats, default=None, help="Comma-separated start point")
    slv.add_argument("--max-iter", type=int, default=500)
    slv.add_argument("--initial-step", choices=[rule.value for rule in InitialStepRule],
                     default=InitialStepRule.BB.value)
    slv.add_argument("--secant", choices=[rule.value for rule in SecantRule],
                     default=SecantRule.WEIGHTED.value)
    slv.add_argument("--memory", type=int, default=4)
    slv.set_defaults(func=cmd_solve)

    bch = sub.add_parser("bench", help="Run a benchmark sweep")
    bch.add_argument("--config", default=None, help="JSON file with BenchConfig fields")
    bch.add_argument("--problems", default=None, help="Comma-separated problem names")
    bch.add_argument("--algos", default=None, help="Comma-separated algorithms")
    bch.add_argument("--runs", type=int, default=None)
    bch.add_argument("--seed", type=int, default=None)
    bch.add_argument("--out", default=None)
    bch.add_argument("--format", choices=[fmt.value for fmt in OutputFormat], default=None)
    bch.add_argument("--workers", type=int, default=None)
    bch.add_argument("--eta", type=float, default=None)
    bch.add_argument("--no-time", action="store_true", help="Leave time columns out of the report")
    bch.add_argument("--compare", action="store_true",
                     help="Print relative deviations from published iteration means")
    bch.set_defaults(func=cmd_bench)

    eta = sub.add_parser("eta-sweep", help="Average GBBN metrics over a group for several eta values")
    eta.add_argument("--group", choices=[group.value for group in EtaGroup], required=True)
    eta.add_argument("--etas", type=_parse_floats, required=True)
    eta.add_argument("--runs", type=int, default=200)
    eta.add_argument("--seed", type=int, default=0)
    eta.add_argument("--workers", type=int, default=1)
    eta.add_argument("--out", default=app.default_output_dir)
    eta.set_defaults(func=cmd_eta_sweep)

    frt = sub.add_parser("front", help="Write final points of repeated runs")
    frt.add_argument("--problem", required=True)
    frt.add_argument("--algo", choices=algorithms, default="gbbn")
    frt.add_argument("--runs", type=int, default=200)
    frt.add_argument("--seed", type=int, default=0)
    frt.add_argument("--out", required=True)
    frt.set_defaults(func=cmd_front)

    chk = sub.add_parser("check-gradients", help="Compare analytic and finite-difference Jacobians")
    chk.add_argument("--trials", type=int, default=None)
    chk.set_defaults(func=cmd_check_gradients)

    cmp = sub.add_parser("compare-eta0", help="Compare plain normalization with the recommended eta")
    cmp.add_argument("--problems", default=None)
    cmp.add_argument("--runs", type=int, default=200)
    cmp.add_argument("--seed", type=int, default=0)
    cmp.add_argument("--workers", type=int, default=1)
    cmp.add_argument("--out", default=app.default_output_dir)
    cmp.set_defaults(func=cmd_compare_eta0)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (GBBNError, ValueError) as e:
        logger.error("%s", e)
        print(f"Error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
