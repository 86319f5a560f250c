"""
Experiment runner.

A `RunSpec` selects a problem and its dimensions, the metric, the
retraction, solver overrides, a seed and an output directory.
`run_experiment` builds the instance, runs the solver and writes the run
artifacts. `compare` runs a metric × retraction grid on one instance in a
thread pool and writes `comparison.csv`.

Dependencies:
- pydantic for the run and grid documents
- concurrent.futures for the grid workers
"""

import csv
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config.logging import setup_logging
from config.settings import settings
from istiefel.bench.problems import PROBLEMS, ProblemInstance
from istiefel.bench.reporting import (
    RunSummary,
    emit_history_plotdata,
    write_history,
    write_summary,
)
from istiefel.core.errors import InvalidParameterError
from istiefel.core.geodesics import RETRACTIONS, Retraction
from istiefel.core.matrix_io import save_matrix
from istiefel.core.metrics import Euclidean, Gamma3Choice, GeneralizedCanonical, MetricKind
from istiefel.core.optimizer import RunResult, SolverConfig, minimize

setup_logging()
logger = logging.getLogger(__name__)

COMPARISON_COLUMNS = (
    'combination',
    'obj',
    'grad',
    'feas',
    'iter',
    'eval',
    'cpu',
    'lyapunov_solves',
    'cpu_per_iter',
)


class SolverOverrides(BaseModel):
    model_config = ConfigDict(extra='forbid')

    beta: float | None = None
    delta: float | None = None
    gamma0: float | None = None
    gamma_min: float | None = None
    gamma_max: float | None = None
    alpha: float | None = None
    rstop: float | None = None
    max_iter: int | None = None
    max_backtracks: int | None = None


class RunSpec(BaseModel):
    model_config = ConfigDict(extra='forbid')

    problem: Literal['trace', 'procrustes'] = 'trace'
    n: int | None = Field(default=None, gt=0)
    k: int | None = Field(default=None, gt=0)
    p: int | None = Field(default=None, ge=0)
    m: int | None = Field(default=None, ge=0)
    k_p: int | None = Field(default=None, ge=0)
    k_m: int | None = Field(default=None, ge=0)
    rank_deficit: int | None = Field(default=None, ge=0)

    metric: Literal['eucl', 'gcan'] = 'gcan'
    gamma3: Gamma3Choice = Gamma3Choice.B
    rho: float = Field(default_factory=lambda: settings.rho, gt=0)
    retraction: Literal['qgeo'] = 'qgeo'
    solver: SolverOverrides = SolverOverrides()

    seed: int = 0
    out: Path | None = None
    timing: bool = True
    save_point: bool = False

    @model_validator(mode='after')
    def _fill_dimensions(self):
        if self.problem == 'trace':
            n = self.n or (self.p + self.m if self.p is not None and self.m is not None else 100)
            k = self.k or (self.k_p + self.k_m if self.k_p is not None and self.k_m is not None else 20)
            self.n, self.k = n, k
            if self.p is None:
                self.p = n - self.m if self.m is not None else (3 * n) // 4
            if self.m is None:
                self.m = n - self.p
            if self.k_p is None:
                self.k_p = k - self.k_m if self.k_m is not None else k // 2
            if self.k_m is None:
                self.k_m = k - self.k_p
            if self.p + self.m != n or self.k_p + self.k_m != k:
                raise ValueError('trace dimensions need p + m = n and k_p + k_m = k')
            if self.k_p > self.p or self.k_m > self.m:
                raise ValueError('trace dimensions need k_p ≤ p and k_m ≤ m')
        else:
            n = self.n or (self.p + self.m if self.p is not None and self.m is not None else 60)
            self.n = n
            if self.k is not None and self.k != n:
                raise ValueError(f'procrustes is square: k must equal n ({n}), got {self.k}')
            self.k = n
            if self.p is None:
                self.p = n - self.m if self.m is not None else (3 * n) // 4
            if self.m is None:
                self.m = n - self.p
            if self.p + self.m != n:
                raise ValueError('procrustes dimensions need p + m = n')
            if self.rank_deficit is None:
                self.rank_deficit = min(4, n - 1)
        return self

    @property
    def label(self) -> str:
        metric = 'eucl' if self.metric == 'eucl' else f'gcan-{self.gamma3.value}'
        return f'{metric}+{self.retraction}'

    def config_echo(self) -> dict:
        return self.model_dump(mode='json', exclude={'out'})


class GridSpec(RunSpec):
    """A RunSpec plus the lists of metrics, Γ₃ choices and retractions to combine."""

    metrics: list[Literal['eucl', 'gcan']] = ['gcan', 'eucl']
    gamma3_choices: list[Gamma3Choice] = [Gamma3Choice.B]
    retractions: list[Literal['qgeo']] = ['qgeo']

    def runs(self) -> list[RunSpec]:
        base = RunSpec.model_validate(self.model_dump(exclude={'metrics', 'gamma3_choices', 'retractions'}))
        specs, seen = [], set()
        for metric, gamma3, retraction in itertools.product(
            self.metrics, self.gamma3_choices, self.retractions
        ):
            rs = base.model_copy(update={'metric': metric, 'gamma3': gamma3, 'retraction': retraction})
            if rs.label not in seen:
                seen.add(rs.label)
                specs.append(rs)
        return specs


def load_run_spec(path: str | Path, model: type[RunSpec] = RunSpec) -> RunSpec:
    try:
        return model.model_validate_json(Path(path).read_text())
    except ValidationError as e:
        raise InvalidParameterError(f'{path}: invalid configuration: {e}') from e


@dataclass
class ExperimentResult:
    spec: RunSpec
    result: RunResult
    summary: RunSummary
    out_dir: Path | None = None


def build_problem(rs: RunSpec) -> ProblemInstance:
    if rs.problem == 'trace':
        return PROBLEMS['trace'](rs.n, rs.k, rs.p, rs.m, rs.k_p, rs.k_m, seed=rs.seed)
    return PROBLEMS['procrustes'](rs.n, rs.p, rs.m, rs.rank_deficit, seed=rs.seed)


def build_metric(rs: RunSpec) -> MetricKind:
    if rs.metric == 'eucl':
        return Euclidean()
    return GeneralizedCanonical(rho=rs.rho, gamma3=rs.gamma3)


def build_retraction(rs: RunSpec) -> Retraction:
    return RETRACTIONS[rs.retraction]()


def build_solver_config(rs: RunSpec) -> SolverConfig:
    return SolverConfig.from_overrides(**rs.solver.model_dump())


def _execute(rs: RunSpec, problem: ProblemInstance, out_dir: Path | None) -> ExperimentResult:
    result = minimize(problem, problem.x0, build_metric(rs), build_retraction(rs), build_solver_config(rs))
    summary = RunSummary.from_result(result, rs.config_echo())

    if out_dir is not None:
        write_history(result.history, out_dir / 'history.csv', timing=rs.timing)
        write_summary(summary, out_dir / 'summary.json')
        if result.history:
            emit_history_plotdata(result.history, out_dir / 'plotdata.csv')
        if rs.save_point:
            save_matrix(result.point.X, out_dir / 'final_point.json')
        logger.info(f'{rs.label}: artifacts written to {out_dir}')
    return ExperimentResult(rs, result, summary, out_dir)


def run_experiment(rs: RunSpec) -> ExperimentResult:
    """Build the instance, run the solver and write the artifacts to `rs.out`."""
    problem = build_problem(rs)
    logger.info(f'running {rs.problem} n={rs.n} k={rs.k} with {rs.label} (seed {rs.seed})')
    return _execute(rs, problem, rs.out)


def comparison_rows(results: list[ExperimentResult]) -> list[dict]:
    rows = []
    for res in results:
        s = res.summary
        rows.append(
            {
                'combination': res.spec.label,
                'obj': s.obj,
                'grad': s.grad,
                'feas': s.feas,
                'iter': s.iter,
                'eval': s.eval,
                'cpu': s.cpu,
                'lyapunov_solves': s.lyapunov_solves,
                'cpu_per_iter': s.cpu / max(s.iter, 1),
            }
        )
    return rows


def compare(grid: GridSpec, workers: int | None = None) -> list[dict]:
    """
    Run every combination of the grid on the same instance and write
    `comparison.csv` (plus one run directory per combination) under `grid.out`.
    """
    runs = grid.runs()
    problem = build_problem(runs[0])
    workers = workers or settings.workers
    logger.info(f'comparing {len(runs)} combinations on {grid.problem} n={grid.n} with {workers} workers')

    def job(rs: RunSpec) -> ExperimentResult:
        out_dir = grid.out / rs.label if grid.out is not None else None
        return _execute(rs, problem, out_dir)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(job, runs))

    rows = comparison_rows(results)
    if grid.out is not None:
        path = Path(grid.out) / 'comparison.csv'
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', newline='') as fh:
            writer = csv.DictWriter(fh, fieldnames=COMPARISON_COLUMNS, lineterminator='\n')
            writer.writeheader()
            writer.writerows(rows)
        logger.info(f'comparison written to {path}')
    return rows
