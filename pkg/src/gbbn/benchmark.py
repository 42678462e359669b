"""
Benchmark harness: shared random starts, repeated solver runs and aggregated reports.

This module provides the BenchmarkManager class that runs sweeps over problems and
algorithms, eta-sensitivity tables and front dumps, and writes the results as CSV or JSON.
"""

import csv
import hashlib
import json
import logging
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import BenchConfig, ConfigurationError, EtaGroup, OutputFormat, SolverConfig, get_config
from .diagnostics import nondominated_mask
from .interfaces import BenchmarkError
from .models import BenchReport, BenchRow, RunRecord, TerminationReason
from .problems import SINGULAR_MARGIN, ProblemInstance, get_problem
from .solvers import SolverFactory, pareto_critical_residual

logger = logging.getLogger(__name__)

ETA_GROUPS: Dict[EtaGroup, Tuple[str, ...]] = {
    EtaGroup.ETA3: ("JOS1a", "JOS1b", "JOS1c", "JOS1d", "Deb", "DD1c", "DD1d"),
    EtaGroup.ETA40: ("Imbalance1", "Imbalance2", "WIT1", "WIT2", "WIT3", "WIT4", "WIT5", "WIT6",
                     "PNR", "TRIDIA1", "TRIDIA2", "LTDZ", "Hil", "SD"),
}

# Published mean iterations, function evaluations and step sizes over 200 runs.
PUBLISHED_METRICS: Dict[str, Dict[str, Tuple[float, float, float]]] = {
    "gbbn": {
        "Imbalance1": (2.38, 7.03, 145.39), "Imbalance2": (2.10, 5.61, 22.26),
        "JOS1a": (1.36, 3.10, 83.58), "JOS1b": (1.04, 2.13, 162.00),
        "JOS1c": (1.00, 2.00, 316.83), "JOS1d": (1.00, 2.00, 776.34),
        "WIT1": (3.91, 17.70, 12.87), "WIT2": (4.22, 19.50, 10.28),
        "WIT3": (3.27, 11.88, 13.63), "WIT4": (2.95, 9.36, 16.72),
        "WIT5": (2.67, 7.94, 18.46), "WIT6": (1.98, 5.01, 23.10),
        "Deb": (4.97, 23.13, 1.94), "PNR": (3.20, 11.40, 13.40),
        "DD1c": (6.51, 30.87, 21.58), "DD1d": (5.72, 35.72, 24.91),
        "TRIDIA1": (7.18, 31.39, 19.98), "TRIDIA2": (5.61, 23.38, 7.70),
        "LTDZ": (7.19, 34.59, 2.71), "Hil": (5.98, 28.49, 8.74), "SD": (3.71, 12.73, 93.34),
    },
    "gbb": {
        "Imbalance1": (36.24, 181.95, 0.86), "Imbalance2": (1.00, 2.00, 0.49),
        "JOS1a": (1.00, 2.00, 25.00), "JOS1b": (1.00, 2.00, 50.00),
        "JOS1c": (1.00, 2.00, 100.00), "JOS1d": (1.00, 2.00, 249.00),
        "WIT1": (18.16, 165.11, 0.11), "WIT2": (60.37, 592.17, 0.05),
        "WIT3": (30.26, 239.91, 0.16), "WIT4": (13.22, 69.41, 0.62),
        "WIT5": (14.90, 76.17, 0.69), "WIT6": (1.00, 2.00, 0.50),
        "Deb": (57.42, 549.52, 0.06), "PNR": (5.55, 31.88, 0.37),
        "DD1c": (20.42, 99.28, 0.72), "DD1d": (20.29, 98.76, 0.77),
        "TRIDIA1": (27.46, 162.18, 0.57), "TRIDIA2": (8.28, 44.32, 0.44),
        "LTDZ": (9.90, 44.45, 0.04), "Hil": (32.30, 199.88, 0.45), "SD": (19.63, 91.15, 1.05),
    },
}

# Published mean iterations and evaluations of the plain (eta = 0) normalization.
PUBLISHED_PLAIN: Dict[str, Tuple[float, float]] = {
    "Imbalance1": (3.23, 14.49), "Imbalance2": (3.31, 12.21),
    "JOS1a": (2.98, 8.94), "JOS1b": (2.96, 8.87), "JOS1c": (2.93, 8.75), "JOS1d": (2.72, 8.01),
    "WIT1": (5.49, 23.03), "WIT2": (4.34, 17.30), "WIT3": (4.19, 16.68), "WIT4": (3.58, 13.46),
    "WIT5": (3.10, 10.74), "WIT6": (2.96, 9.84), "Deb": (4.19, 16.69), "PNR": (4.93, 19.99),
    "DD1c": (6.15, 28.83), "DD1d": (5.26, 21.84), "TRIDIA1": (114.41, 1565.28),
    "TRIDIA2": (5.39, 25.16), "LTDZ": (9.77, 61.65), "Hil": (6.72, 35.70), "SD": (6.21, 25.94),
}

REPORT_FIELDS = [
    'problem', 'algorithm', 'eta', 'runs', 'mean_iter', 'mean_feval', 'mean_stepsize',
    'mean_time_ms', 'theta_small', 'max_iter', 'backtrack_fail', 'start_digest',
]
TIME_FIELDS = {'mean_time_ms'}


@dataclass
class BenchProgress:
    """Progress of a running sweep."""
    problem: str
    algorithm: str
    completed: int
    total: int

    @property
    def fraction(self) -> float:
        return self.completed / self.total if self.total else 1.0


@dataclass
class EtaSweepRow:
    """Group averages of per-problem means for one eta."""
    eta: float
    mean_iter: float
    mean_time_ms: float
    mean_stepsize: float
    mean_feval: float
    problems: List[str] = field(default_factory=list)


@dataclass
class PlainComparisonRow:
    """Per-problem comparison of plain normalization against the recommended eta."""
    problem: str
    plain_iter: float
    plain_time_ms: float
    plain_feval: float
    eta_iter: float
    eta_time_ms: float
    eta_feval: float

    @property
    def plain_deviation(self) -> Optional[float]:
        """Relative deviation of plain_iter from the published plain-normalization mean."""
        published = PUBLISHED_PLAIN.get(self.problem)
        if published is None:
            return None
        return (self.plain_iter - published[0]) / published[0]


def format_float(value: Optional[float]) -> str:
    """Locale-free text form used in every report."""
    if value is None:
        return ""
    return format(float(value), get_config().float_format)


def sample_starts(p: ProblemInstance, runs: int, seed: int) -> List[np.ndarray]:
    """
    Draw start points uniformly from the box of p.

    The generator is PCG64 seeded from (seed, crc32 of the problem name), so every
    problem has its own reproducible stream. Points within SINGULAR_MARGIN of a declared
    singular set are redrawn.

    Args:
        p: Problem instance
        runs: Number of start points
        seed: Sweep seed

    Returns:
        List of start points

    Raises:
        ValueError: If runs < 1
    """
    if runs < 1:
        raise ValueError("At least one run is required")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(zlib.crc32(p.name.encode('utf-8')),))
    rng = np.random.Generator(np.random.PCG64(sequence))
    starts: List[np.ndarray] = []
    while len(starts) < runs:
        x = rng.uniform(p.lower, p.upper)
        if p.is_singular_near(x, SINGULAR_MARGIN):
            continue
        starts.append(x)
    return starts


def start_digest(starts: Sequence[np.ndarray]) -> str:
    """SHA-256 of a start list, shortened to 16 hex digits."""
    data = np.ascontiguousarray(np.vstack(starts), dtype=float).tobytes()
    return hashlib.sha256(data).hexdigest()[:16]


def aggregate(problem: str, algorithm: str, eta: Optional[float],
              records: Sequence[RunRecord], digest: str = "") -> BenchRow:
    """Average run records into one report row."""
    steps = [step for record in records for step in record.accepted_steps]
    counts = {reason: 0 for reason in TerminationReason}
    for record in records:
        counts[record.terminated_by] += 1
    return BenchRow(
        problem=problem,
        algorithm=algorithm,
        eta=eta,
        runs=len(records),
        mean_iter=float(np.mean([record.iterations for record in records])),
        mean_feval=float(np.mean([record.fevals for record in records])),
        mean_stepsize=float(np.mean(steps)) if steps else 0.0,
        mean_time_ms=float(np.mean([record.wall_time for record in records])) * 1000.0,
        theta_small=counts[TerminationReason.THETA_SMALL],
        max_iter=counts[TerminationReason.MAX_ITER],
        backtrack_fail=counts[TerminationReason.BACKTRACK_FAIL],
        start_digest=digest,
    )


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(parent, exist_ok=True)
    except OSError as e:
        raise BenchmarkError(f"Cannot create directory {parent}: {e}")


class BenchmarkManager:
    """Runs benchmark sweeps and writes their reports."""

    def __init__(self, config: Optional[BenchConfig] = None):
        self.config = config or BenchConfig()
        self._progress_callbacks: List[Callable[[BenchProgress], None]] = []

    def add_progress_callback(self, callback: Callable[[BenchProgress], None]) -> None:
        """
        Add callback for sweep progress updates.

        Args:
            callback: Function to call with BenchProgress updates
        """
        self._progress_callbacks.append(callback)

    def remove_progress_callback(self, callback: Callable[[BenchProgress], None]) -> None:
        """Remove a previously added progress callback."""
        if callback in self._progress_callbacks:
            self._progress_callbacks.remove(callback)

    def _notify_progress_callbacks(self, progress: BenchProgress) -> None:
        for callback in self._progress_callbacks:
            try:
                callback(progress)
            except Exception as e:
                logger.error("Error in progress callback: %s", e)

    def solver_config(self, eta: Optional[float] = None) -> SolverConfig:
        """Solver settings of the sweep with an optional eta in place of the problem default."""
        if eta is None:
            eta = self.config.eta_override
        if eta is None:
            return self.config.solver
        return self.config.solver.with_overrides(eta=eta)

    def run_problem(self, problem: ProblemInstance, algorithm: str,
                    starts: Sequence[np.ndarray],
                    solver_config: Optional[SolverConfig] = None) -> List[RunRecord]:
        """
        Run one algorithm from every start point, in start order.

        Raises:
            BenchmarkError: If the algorithm is unknown
        """
        solver = SolverFactory.create_solver(algorithm)
        cfg = solver_config or self.solver_config()

        def run(x0: np.ndarray) -> RunRecord:
            return solver.solve(problem, x0, cfg)

        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as executor:
                return list(executor.map(run, starts))
        return [run(x0) for x0 in starts]

    def run_bench(self, write: bool = True) -> BenchReport:
        """
        Run every configured (problem, algorithm) pair on shared start points.

        Args:
            write: Write the report into the configured output directory

        Returns:
            BenchReport with one row per pair
        """
        cfg = self.config
        report = BenchReport(seed=cfg.seed, sampler_version=get_config().sampler_version)
        total = len(cfg.problems) * len(cfg.algorithms)
        completed = 0
        for name in cfg.problems:
            problem = get_problem(name)
            starts = sample_starts(problem, cfg.runs, cfg.seed)
            digest = start_digest(starts)
            for algorithm in cfg.algorithms:
                solver_cfg = self.solver_config()
                records = self.run_problem(problem, algorithm, starts, solver_cfg)
                eta = records[0].eta
                row = aggregate(problem.name, algorithm, eta, records, digest)
                report.rows.append(row)
                completed += 1
                logger.info("%s/%s: iter %.2f feval %.2f stepsize %.4g (%d max-iter, %d backtrack failures)",
                            problem.name, algorithm, row.mean_iter, row.mean_feval, row.mean_stepsize,
                            row.max_iter, row.backtrack_fail)
                self._notify_progress_callbacks(BenchProgress(problem.name, algorithm, completed, total))

        if write:
            self.write_report(report, cfg.output_dir, cfg.format, cfg.include_time)
        return report

    def write_report(self, report: BenchReport, output_dir: str,
                     fmt: OutputFormat = OutputFormat.CSV, include_time: bool = True) -> str:
        """
        Write a report as bench_report.csv or bench_report.json.

        Returns:
            Path of the written file

        Raises:
            BenchmarkError: If the file cannot be written
        """
        fields = [name for name in REPORT_FIELDS if include_time or name not in TIME_FIELDS]
        path = os.path.join(output_dir, f"bench_report.{fmt.value}")
        _ensure_parent(path)
        rows = [self._row_record(row, fields) for row in report.rows]
        try:
            with open(path, 'w', encoding='ascii', newline='') as f:
                if fmt is OutputFormat.CSV:
                    writer = csv.DictWriter(f, fieldnames=fields, lineterminator='\n')
                    writer.writeheader()
                    writer.writerows(rows)
                else:
                    json.dump({
                        'seed': report.seed,
                        'sampler_version': report.sampler_version,
                        'rows': rows,
                    }, f, indent=2)
        except OSError as e:
            raise BenchmarkError(f"Cannot write report {path}: {e}")
        logger.info("Wrote %s", path)
        return path

    @staticmethod
    def _row_record(row: BenchRow, fields: Sequence[str]) -> Dict[str, str]:
        values = {
            'problem': row.problem,
            'algorithm': row.algorithm,
            'eta': format_float(row.eta),
            'runs': str(row.runs),
            'mean_iter': format_float(row.mean_iter),
            'mean_feval': format_float(row.mean_feval),
            'mean_stepsize': format_float(row.mean_stepsize),
            'mean_time_ms': format_float(row.mean_time_ms),
            'theta_small': str(row.theta_small),
            'max_iter': str(row.max_iter),
            'backtrack_fail': str(row.backtrack_fail),
            'start_digest': row.start_digest,
        }
        return {name: values[name] for name in fields}

    def eta_sweep(self, group: EtaGroup, etas: Sequence[float],
                  output_path: Optional[str] = None) -> List[EtaSweepRow]:
        """
        Average GBBN metrics over a problem group for each eta.

        An eta of 0 selects plain normalization. Each problem uses the same start points
        for every eta.

        Args:
            group: Problem group
            etas: Normalization constants to compare
            output_path: Optional CSV file for the table

        Returns:
            One row per eta, in the given order

        Raises:
            ConfigurationError: If etas is empty or holds a negative value
        """
        if not etas:
            raise ConfigurationError("At least one eta is required")
        if any(eta < 0 for eta in etas):
            raise ConfigurationError("Eta values must be nonnegative")

        names = list(ETA_GROUPS[group])
        starts = {name: sample_starts(get_problem(name), self.config.runs, self.config.seed)
                  for name in names}
        table: List[EtaSweepRow] = []
        for eta in etas:
            rows = []
            for name in names:
                records = self.run_problem(get_problem(name), "gbbn", starts[name],
                                           self.solver_config(eta=float(eta)))
                rows.append(aggregate(name, "gbbn", eta, records))
            table.append(EtaSweepRow(
                eta=float(eta),
                mean_iter=float(np.mean([row.mean_iter for row in rows])),
                mean_time_ms=float(np.mean([row.mean_time_ms for row in rows])),
                mean_stepsize=float(np.mean([row.mean_stepsize for row in rows])),
                mean_feval=float(np.mean([row.mean_feval for row in rows])),
                problems=names,
            ))
            logger.info("%s eta=%s: iter %.2f feval %.2f", group.value, eta,
                        table[-1].mean_iter, table[-1].mean_feval)

        if output_path:
            self._write_table(output_path, ['eta', 'iter', 'time', 'stepsize', 'feval'], [
                [format_float(row.eta), format_float(row.mean_iter), format_float(row.mean_time_ms),
                 format_float(row.mean_stepsize), format_float(row.mean_feval)]
                for row in table
            ])
        return table

    def plain_normalization_comparison(self, names: Optional[Sequence[str]] = None,
                                       output_path: Optional[str] = None) -> List[PlainComparisonRow]:
        """
        Compare GBBN under plain normalization with GBBN at each problem's recommended eta.

        The written table also carries the relative deviation of the plain mean
        iterations from the published plain-normalization means.

        Returns:
            One row per problem
        """
        names = list(names or self.config.problems)
        table: List[PlainComparisonRow] = []
        for name in names:
            problem = get_problem(name)
            starts = sample_starts(problem, self.config.runs, self.config.seed)
            plain = aggregate(name, "gbbn", 0.0,
                              self.run_problem(problem, "gbbn", starts, self.solver_config(eta=0.0)))
            tuned = aggregate(name, "gbbn", problem.eta_default,
                              self.run_problem(problem, "gbbn", starts,
                                               self.solver_config(eta=problem.eta_default)))
            table.append(PlainComparisonRow(
                problem=name,
                plain_iter=plain.mean_iter, plain_time_ms=plain.mean_time_ms, plain_feval=plain.mean_feval,
                eta_iter=tuned.mean_iter, eta_time_ms=tuned.mean_time_ms, eta_feval=tuned.mean_feval,
            ))

        if output_path:
            self._write_table(output_path, [
                'problem', 'plain_iter', 'plain_time', 'plain_feval', 'eta_iter', 'eta_time', 'eta_feval',
                'plain_deviation',
            ], [
                [row.problem, format_float(row.plain_iter), format_float(row.plain_time_ms),
                 format_float(row.plain_feval), format_float(row.eta_iter),
                 format_float(row.eta_time_ms), format_float(row.eta_feval),
                 format_float(row.plain_deviation)]
                for row in table
            ])
        return table

    def dump_front(self, problem: ProblemInstance, algorithm: str, runs: int, seed: int,
                   path: str) -> str:
        """
        Write final objective vectors and points of repeated runs as CSV.

        Columns are run, f1..fm, x1..xn and a nondominated flag (1 when no other final
        point in the file dominates the row).

        Returns:
            Path of the written file

        Raises:
            BenchmarkError: If the algorithm is unknown or the file cannot be written
        """
        starts = sample_starts(problem, runs, seed)
        records = self.run_problem(problem, algorithm, starts)
        F = np.vstack([record.f_final for record in records])
        mask = nondominated_mask(F)
        header = (['run'] + [f"f{i + 1}" for i in range(problem.m)]
                  + [f"x{j + 1}" for j in range(problem.n)] + ['nondominated'])
        rows = [
            [str(index)] + [format_float(v) for v in record.f_final]
            + [format_float(v) for v in record.x_final] + ['1' if mask[index] else '0']
            for index, record in enumerate(records)
        ]
        self._write_table(path, header, rows)
        logger.info("%s/%s: %d of %d final points nondominated", problem.name, algorithm,
                    int(mask.sum()), len(records))
        return path

    @staticmethod
    def _write_table(path: str, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
        _ensure_parent(path)
        try:
            with open(path, 'w', encoding='ascii', newline='') as f:
                writer = csv.writer(f, lineterminator='\n')
                writer.writerow(header)
                writer.writerows(rows)
        except OSError as e:
            raise BenchmarkError(f"Cannot write {path}: {e}")
        logger.info("Wrote %s", path)


def run_bench(cfg: BenchConfig, write: bool = True) -> BenchReport:
    """Run a sweep described by cfg."""
    return BenchmarkManager(cfg).run_bench(write=write)


def eta_sweep(group: EtaGroup, etas: Sequence[float], cfg: BenchConfig,
              output_path: Optional[str] = None) -> List[EtaSweepRow]:
    """Average GBBN metrics over a problem group for each eta."""
    return BenchmarkManager(cfg).eta_sweep(group, etas, output_path)


def dump_front(p: ProblemInstance, algorithm: str, runs: int, seed: int, path: str,
               solver: Optional[SolverConfig] = None) -> str:
    """Write the final points of repeated runs with their nondominance flags."""
    cfg = BenchConfig(problems=[p.name], algorithms=[algorithm.lower()], runs=runs, seed=seed,
                      solver=solver or SolverConfig())
    return BenchmarkManager(cfg).dump_front(p, algorithm, runs, seed, path)


def reference_deviation(report: BenchReport) -> Dict[Tuple[str, str], float]:
    """
    Relative deviation of each row's mean iterations from the published mean.

    Rows without a published counterpart are skipped.
    """
    deviations: Dict[Tuple[str, str], float] = {}
    for row in report.rows:
        published = PUBLISHED_METRICS.get(row.algorithm, {}).get(row.problem)
        if published is None:
            continue
        deviations[(row.problem, row.algorithm)] = (row.mean_iter - published[0]) / published[0]
    return deviations


def criticality_crosscheck(p: ProblemInstance, records: Sequence[RunRecord],
                           cfg: Optional[SolverConfig] = None) -> float:
    """
    Worst steepest-descent residual |theta(x_final)| over converged runs.

    Returns:
        0.0 when no run converged
    """
    residuals = [pareto_critical_residual(p, record.x_final, cfg)
                 for record in records if record.converged]
    return max(residuals, default=0.0)
