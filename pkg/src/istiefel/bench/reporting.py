"""
Run artifacts: per-iteration history, summary and convergence figures.

Files written for a run directory:
- `history.csv` with the header `iter,f,grad_norm,feas,tau,n_evals,elapsed`
- `summary.json` with obj, grad, feas, iter, eval and cpu, plus status,
  Lyapunov solve count and the configuration echo; obj and grad are null
  when the run failed at its starting point
- `plotdata.csv` with iteration, f − f_best, grad_norm and the nonmonotone
  reference value c

Dependencies:
- pydantic for the summary document
- plotly for the convergence-history figure
"""

import csv
import logging
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

import plotly.graph_objects as go
from plotly.subplots import make_subplots
from pydantic import BaseModel

from config.logging import setup_logging
from istiefel.core.manifold import feasibility_residual
from istiefel.core.optimizer import IterationRecord, RunResult

setup_logging()
logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ('iter', 'f', 'grad_norm', 'feas', 'tau', 'n_evals', 'elapsed')
PLOTDATA_COLUMNS = ('iteration', 'f_minus_fbest', 'grad_norm', 'c')


class RunSummary(BaseModel):
    status: str
    obj: float | None
    grad: float | None
    feas: float
    iter: int
    eval: int
    cpu: float
    lyapunov_solves: int
    message: str = ''
    config: dict[str, Any] = {}

    @classmethod
    def from_result(cls, result: RunResult, config: Mapping[str, Any]) -> 'RunSummary':
        final = result.final
        return cls(
            status=result.status.value,
            obj=final.f if final is not None else None,
            grad=final.grad_norm if final is not None else None,
            feas=final.feas if final is not None else feasibility_residual(result.point.spec, result.point.X),
            iter=result.iterations,
            eval=result.evaluations,
            cpu=result.wall_time,
            lyapunov_solves=result.lyapunov_solves,
            message=result.message,
            config=dict(config),
        )


def _fmt(value: float) -> str:
    return repr(float(value))


def write_history(history: Sequence[IterationRecord], path: str | Path, timing: bool = True) -> Path:
    """Write the per-iteration CSV; `timing=False` zeroes the elapsed column."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(HISTORY_COLUMNS)
        for rec in history:
            writer.writerow(
                [
                    rec.j,
                    _fmt(rec.f),
                    _fmt(rec.grad_norm),
                    _fmt(rec.feas),
                    _fmt(rec.tau),
                    rec.n_evals,
                    _fmt(rec.elapsed if timing else 0.0),
                ]
            )
    return path


def load_history(path: str | Path) -> list[dict[str, float]]:
    with Path(path).open(newline='') as fh:
        return [
            {key: (int(value) if key in ('iter', 'n_evals') else float(value)) for key, value in row.items()}
            for row in csv.DictReader(fh)
        ]


def write_summary(summary: RunSummary, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(summary.model_dump_json(indent=2))
    return path


def load_summary(path: str | Path) -> RunSummary:
    return RunSummary.model_validate_json(Path(path).read_text())


def emit_history_plotdata(history: Sequence[IterationRecord], path: str | Path) -> Path:
    """
    Columnar data for convergence plots. Rows with a non-positive gradient
    norm are dropped, except the final row, so the file is log-scale ready.
    """
    if not history:
        raise ValueError('cannot emit plot data for an empty history')
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    f_best = min(rec.f for rec in history)
    last = len(history) - 1
    with path.open('w', newline='') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(PLOTDATA_COLUMNS)
        for i, rec in enumerate(history):
            if rec.grad_norm <= 0 and i != last:
                continue
            writer.writerow([rec.j, _fmt(rec.f - f_best), _fmt(rec.grad_norm), _fmt(rec.c)])
    return path


def history_figure(histories: Mapping[str, Sequence[Mapping[str, float]]]) -> go.Figure:
    """f − f_best and the gradient norm against the iteration, one trace per run."""
    fig = make_subplots(rows=1, cols=2, subplot_titles=('f − f_best', 'gradient norm'))
    for label, rows in histories.items():
        if not rows:
            continue
        f_best = min(row['f'] for row in rows)
        iters = [row['iter'] for row in rows]
        # log axes cannot show exact zeros
        gap = [max(row['f'] - f_best, 1e-300) for row in rows]
        fig.add_trace(go.Scatter(x=iters, y=gap, mode='lines', name=label, legendgroup=label), row=1, col=1)
        fig.add_trace(
            go.Scatter(
                x=iters,
                y=[row['grad_norm'] for row in rows],
                mode='lines',
                name=label,
                legendgroup=label,
                showlegend=False,
            ),
            row=1,
            col=2,
        )
    fig.update_yaxes(type='log')
    fig.update_xaxes(title_text='iteration')
    fig.update_layout(title='Convergence history', template='plotly_white', height=450)
    return fig


def write_history_figure(fig: go.Figure, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.write_html(str(path), include_plotlyjs='cdn')
    logger.info(f'convergence figure written to {path}')
    return path
