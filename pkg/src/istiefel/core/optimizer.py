"""
Riemannian gradient descent with Barzilai-Borwein trial steps and a
nonmonotone backtracking line search.

Each iteration takes Z = −grad f(X), proposes a trial step γ (γ₀ first,
then alternating BB formulas clamped to [γ_min, γ_max]) and accepts the
largest τ = γ·δ^ℓ with

    f(R_X(τZ)) ≤ c + β·τ·g(grad f, Z),

where c is the weighted average of past objective values maintained by
`nonmonotone_update`. With α = 0 this is the classical Armijo rule.

The solver is generic over the metric and the retraction and never
re-projects iterates onto the manifold; the feasibility residual is
recorded at every iteration instead.

Dependencies:
- pydantic for the validated `SolverConfig`
- numpy for the iterate algebra
"""

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config.logging import setup_logging
from config.settings import settings
from istiefel.core.errors import IStiefelError, InvalidParameterError, LineSearchFailure, RangeError
from istiefel.core.geodesics import Retraction
from istiefel.core.manifold import Point, TangentVector, feasibility_residual
from istiefel.core.metrics import MetricKind, inner, riemannian_gradient, riemannian_norm

setup_logging()
logger = logging.getLogger(__name__)

BB_TRACE_TOL = 1e-14
BB_NORM_TOL = 1e-28


class SolverConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    beta: float = Field(default=1e-4, gt=0, lt=1)
    delta: float = Field(default=0.5, gt=0, lt=1)
    gamma0: float = Field(default=1e-3, gt=0)
    gamma_min: float = Field(default=1e-15, gt=0)
    gamma_max: float = Field(default=1e5, gt=0)
    alpha: float = Field(default=0.85, ge=0, le=1)
    rstop: float = Field(default_factory=lambda: settings.rstop, gt=0)
    max_iter: int = Field(default_factory=lambda: settings.max_iter, ge=0)
    max_backtracks: int = Field(default=50, ge=0)

    @model_validator(mode='after')
    def _ordered_clamp(self):
        if self.gamma_min >= self.gamma_max:
            raise ValueError(f'gamma_min ({self.gamma_min}) must be below gamma_max ({self.gamma_max})')
        return self

    @classmethod
    def from_overrides(cls, **overrides) -> 'SolverConfig':
        """Build a config, turning validation failures into InvalidParameterError."""
        try:
            return cls(**{k: v for k, v in overrides.items() if v is not None})
        except ValidationError as e:
            raise InvalidParameterError(f'invalid solver configuration: {e}') from e


class Objective(Protocol):
    def f(self, X: np.ndarray) -> float: ...

    def egrad(self, X: np.ndarray) -> np.ndarray: ...


class RunStatus(str, Enum):
    CONVERGED = 'Converged'
    MAX_ITER = 'MaxIter'
    LINE_SEARCH_FAILURE = 'LineSearchFailure'
    FAILED = 'Failed'


@dataclass(frozen=True)
class IterationRecord:
    j: int
    f: float
    grad_norm: float
    feas: float
    tau: float
    n_evals: int
    c: float
    q: float
    gamma: float
    backtracks: int
    lyapunov_solves: int
    elapsed: float


@dataclass
class RunResult:
    status: RunStatus
    point: Point
    history: list[IterationRecord] = field(default_factory=list)
    iterations: int = 0
    evaluations: int = 0
    wall_time: float = 0.0
    lyapunov_solves: int = 0
    message: str = ''

    @property
    def final(self) -> IterationRecord | None:
        """Last record; None when the run failed before the first one."""
        return self.history[-1] if self.history else None


@dataclass(frozen=True)
class LineSearchResult:
    tau: float
    point: Point
    f: float
    backtracks: int
    evaluations: int


def bb_trial_step(j: int, W, Y, cfg: SolverConfig) -> float:
    """
    Alternating Barzilai-Borwein step from W = X_j − X_{j−1} and
    Y = Z_j − Z_{j−1}: ⟨W,W⟩/|tr(WᵀY)| for odd j, |tr(WᵀY)|/⟨Y,Y⟩ for even j.
    Degenerate denominators fall back to γ₀.
    """
    if j == 0 or W is None or Y is None:
        gamma = cfg.gamma0
    else:
        W = np.asarray(W, dtype=float)
        Y = np.asarray(Y, dtype=float)
        wy = abs(float(np.sum(W * Y)))
        if j % 2 == 1:
            denominator_ok = wy > BB_TRACE_TOL * float(np.linalg.norm(W)) * float(np.linalg.norm(Y))
            gamma = float(np.sum(W * W)) / wy if denominator_ok else cfg.gamma0
        else:
            yy = float(np.sum(Y * Y))
            gamma = wy / yy if yy > BB_NORM_TOL else cfg.gamma0
        if not np.isfinite(gamma):
            gamma = cfg.gamma0
    return max(cfg.gamma_min, min(gamma, cfg.gamma_max))


def nonmonotone_update(c: float, q: float, f_next: float, alpha: float) -> tuple[float, float]:
    """q' = αq + 1 and c' = (αq/q')·c + f_next/q'."""
    q_next = alpha * q + 1.0
    return (alpha * q / q_next) * c + f_next / q_next, q_next


def line_search(
    f: Callable[[np.ndarray], float],
    point: Point,
    Z,
    gamma: float,
    c: float,
    cfg: SolverConfig,
    retraction: Retraction,
    metric: MetricKind,
    slope: float | None = None,
) -> LineSearchResult:
    """
    Smallest ℓ ≥ 0 such that τ = γ·δ^ℓ satisfies the nonmonotone condition.

    `slope` is g(grad f, Z); when omitted Z is taken to be −grad f so the slope
    is −‖Z‖². Trials the retraction refuses or with a non-finite objective
    are rejected like any other.

    :raises LineSearchFailure: no acceptable τ within `cfg.max_backtracks`
    """
    if not isinstance(Z, TangentVector):
        Z = TangentVector.unchecked(point, np.asarray(Z, dtype=float))
    if slope is None:
        slope = -inner(point, Z, Z, metric)
    trial = retraction.along(point, Z)

    evaluations = 0
    tau = gamma
    f_trial = float('nan')
    for ell in range(cfg.max_backtracks + 1):
        tau = gamma * cfg.delta**ell
        try:
            candidate = trial(tau)
        except RangeError as e:
            logger.debug(f'trial τ={tau:.3e} refused: {e}')
            continue
        f_trial = float(f(candidate.X))
        evaluations += 1
        if np.isfinite(f_trial) and f_trial <= c + cfg.beta * tau * slope:
            return LineSearchResult(tau, candidate, f_trial, ell, evaluations)

    raise LineSearchFailure(
        f'no acceptable step after {cfg.max_backtracks} backtracks (last τ={tau:.3e})',
        backtracks=cfg.max_backtracks,
        tau=tau,
        f_trial=f_trial,
        reference=c,
        evaluations=evaluations,
    )


def minimize(
    problem: Objective,
    x0: Point,
    metric: MetricKind,
    retraction: Retraction,
    cfg: SolverConfig | None = None,
    callback: Callable[[IterationRecord], None] | None = None,
) -> RunResult:
    """
    Run the descent from `x0` until the relative gradient norm drops below
    `cfg.rstop`, the iteration cap is hit or the line search fails.

    Errors raised by the gradient or the retraction end the run with status
    Failed; the history up to that point is kept, and is empty when X₀ itself
    cannot be evaluated.
    """
    cfg = cfg or SolverConfig()
    spec = x0.spec
    start = time.perf_counter()

    point = x0
    n_evals = 0
    try:
        f_val = float(problem.f(point.X))
        n_evals = 1
        report = riemannian_gradient(point, problem.egrad(point.X), metric)
        grad = report.gradient.Z
        grad_norm = riemannian_norm(point, grad, metric)
    except (IStiefelError, np.linalg.LinAlgError) as e:
        message = f'{type(e).__name__} at the initial point: {e}'
        logger.warning(f'run failed: {message}')
        return RunResult(
            status=RunStatus.FAILED,
            point=x0,
            evaluations=n_evals,
            wall_time=time.perf_counter() - start,
            message=message,
        )
    solves = report.lyapunov_solves
    grad_norm0 = grad_norm
    c, q = f_val, 1.0

    def record(j, tau, gamma, backtracks) -> IterationRecord:
        rec = IterationRecord(
            j=j,
            f=f_val,
            grad_norm=grad_norm,
            feas=feasibility_residual(spec, point.X),
            tau=tau,
            n_evals=n_evals,
            c=c,
            q=q,
            gamma=gamma,
            backtracks=backtracks,
            lyapunov_solves=solves,
            elapsed=time.perf_counter() - start,
        )
        if callback is not None:
            callback(rec)
        return rec

    history = [record(0, 0.0, cfg.gamma0, 0)]
    status, message = RunStatus.MAX_ITER, ''
    x_prev = z_prev = None

    for j in range(cfg.max_iter + 1):
        if grad_norm <= cfg.rstop * grad_norm0:
            status = RunStatus.CONVERGED
            break
        if j == cfg.max_iter:
            break

        Z = -grad
        gamma = bb_trial_step(
            j,
            None if x_prev is None else point.X - x_prev,
            None if z_prev is None else Z - z_prev,
            cfg,
        )
        try:
            step = line_search(
                problem.f, point, Z, gamma, c, cfg, retraction, metric, slope=-grad_norm**2
            )
        except LineSearchFailure as e:
            n_evals += e.evaluations
            status, message = RunStatus.LINE_SEARCH_FAILURE, str(e)
            logger.warning(f'line search failed at iteration {j}: {e}')
            break
        except (IStiefelError, np.linalg.LinAlgError) as e:
            status, message = RunStatus.FAILED, f'{type(e).__name__} at iteration {j}: {e}'
            logger.warning(f'run failed: {message}')
            break

        try:
            report = riemannian_gradient(step.point, problem.egrad(step.point.X), metric)
            next_grad_norm = riemannian_norm(step.point, report.gradient.Z, metric)
        except (IStiefelError, np.linalg.LinAlgError) as e:
            status, message = RunStatus.FAILED, f'{type(e).__name__} at iteration {j}: {e}'
            logger.warning(f'run failed: {message}')
            break

        x_prev, z_prev = point.X, Z
        point, f_val = step.point, step.f
        grad, grad_norm = report.gradient.Z, next_grad_norm
        n_evals += step.evaluations
        solves += report.lyapunov_solves
        c, q = nonmonotone_update(c, q, f_val, cfg.alpha)

        history.append(record(j + 1, step.tau, gamma, step.backtracks))
        logger.debug(
            f'iter {j + 1}: f={f_val:.6e} |grad|={grad_norm:.3e} τ={step.tau:.3e} ℓ={step.backtracks}'
        )

    wall_time = time.perf_counter() - start
    result = RunResult(
        status=status,
        point=point,
        history=history,
        iterations=len(history) - 1,
        evaluations=n_evals,
        wall_time=wall_time,
        lyapunov_solves=solves,
        message=message,
    )
    logger.info(
        f'{metric.label}+{retraction.name}: {status.value} after {result.iterations} iterations, '
        f'f={f_val:.6e}, |grad|={grad_norm:.3e}, feas={history[-1].feas:.3e}, {wall_time:.2f}s'
    )
    return result
