"""
Benchmark problems on the indefinite Stiefel manifold.

Features:
- trace minimization f(X) = tr(XᵀMX) with M = VVᵀ rank deficient and an
  indefinite diagonal A
- Procrustes f(X) = ‖GX − B‖²_F on the J-orthogonal group with a planted
  minimizer diag(U, V)
- random feasible instances for the property checks
- finite-difference check of a Euclidean gradient

Every generator takes a seed and draws from a Philox stream, so an
instance is fully determined by its parameters.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.linalg as spla

from config.logging import setup_logging
from istiefel.core.errors import InvalidParameterError
from istiefel.core.geodesics import retract_qgeo
from istiefel.core.linalg import make_rng, orthonormal_columns
from istiefel.core.manifold import ManifoldSpec, Point, make_spec, random_tangent

setup_logging()
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TraceObjective:
    M: np.ndarray

    def f(self, X: np.ndarray) -> float:
        return float(np.sum(X * (self.M @ X)))

    def egrad(self, X: np.ndarray) -> np.ndarray:
        return 2.0 * self.M @ X


@dataclass(frozen=True)
class ProcrustesObjective:
    G: np.ndarray
    B: np.ndarray

    def f(self, X: np.ndarray) -> float:
        R = self.G @ X - self.B
        return float(np.sum(R * R))

    def egrad(self, X: np.ndarray) -> np.ndarray:
        return 2.0 * self.G.T @ (self.G @ X - self.B)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    name: str
    objective: TraceObjective | ProcrustesObjective
    spec: ManifoldSpec
    x0: Point
    metadata: dict[str, Any] = field(default_factory=dict)
    x_star: np.ndarray | None = None

    def f(self, X: np.ndarray) -> float:
        return self.objective.f(X)

    def egrad(self, X: np.ndarray) -> np.ndarray:
        return self.objective.egrad(X)


def _require(condition: bool, message: str):
    if not condition:
        raise InvalidParameterError(message)


def _signature(n_pos: int, n_neg: int) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(n_pos), -np.ones(n_neg)]))


def gen_trace_problem(
    n: int = 100,
    k: int = 20,
    p: int = 75,
    m: int = 25,
    k_p: int = 10,
    k_m: int = 10,
    seed: int = 0,
) -> ProblemInstance:
    """
    min tr(XᵀMX) with A = diag(1..p, −1..−m), J = diag(I_{k_p}, −I_{k_m})
    and M = VVᵀ for a column-orthonormal n×(n−5) matrix V.

    X₀ carries 1/√i on the diagonal of the two blocks X₀[:k_p, :k_p] and
    X₀[p:p+k_m, k_p:], so X₀ᵀAX₀ = J holds exactly.
    """
    _require(p + m == n, f'p + m must equal n, got {p} + {m} != {n}')
    _require(k_p + k_m == k, f'k_p + k_m must equal k, got {k_p} + {k_m} != {k}')
    _require(0 <= k_p <= p and 0 <= k_m <= m, 'k_p ≤ p and k_m ≤ m are required')
    _require(n > 5, f'n must exceed 5, got {n}')

    rng = make_rng(seed)
    A = np.diag(np.concatenate([np.arange(1, p + 1), -np.arange(1, m + 1)]).astype(float))
    J = _signature(k_p, k_m)
    V = orthonormal_columns(rng.standard_normal((n, n - 5)))
    M = V @ V.T

    X0 = np.zeros((n, k))
    X0[np.arange(k_p), np.arange(k_p)] = 1.0 / np.sqrt(np.arange(1, k_p + 1))
    X0[p + np.arange(k_m), k_p + np.arange(k_m)] = 1.0 / np.sqrt(np.arange(1, k_m + 1))

    spec = make_spec(A, J)
    logger.debug(f'trace problem n={n} k={k} p={p} m={m} k_p={k_p} k_m={k_m} seed={seed}')
    return ProblemInstance(
        name='trace',
        objective=TraceObjective(M=M),
        spec=spec,
        x0=Point(spec, X0),
        metadata={'n': n, 'k': k, 'p': p, 'm': m, 'k_p': k_p, 'k_m': k_m, 'seed': seed},
    )


def _rotation(rng: np.random.Generator, size: int) -> np.ndarray:
    """Random orthogonal matrix with determinant +1."""
    Q = orthonormal_columns(rng.standard_normal((size, size)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def gen_procrustes_problem(
    n: int = 60,
    p: int = 45,
    m: int = 15,
    rank_deficit: int = 4,
    seed: int = 0,
) -> ProblemInstance:
    """
    min ‖GX − B‖²_F over the J-orthogonal group XᵀJX = J, J = diag(I_p, −I_m).

    G is (n − rank_deficit)×n and B = G·diag(U, V) for random rotations U, V,
    so diag(U, V) is a global minimizer with f = 0 in the component of X₀ = I.
    """
    _require(p + m == n, f'p + m must equal n, got {p} + {m} != {n}')
    _require(p >= 0 and m >= 0, 'p and m must be non-negative')
    _require(0 <= rank_deficit < n, f'rank_deficit must lie in [0, n), got {rank_deficit}')

    rng = make_rng(seed)
    G = rng.standard_normal((n - rank_deficit, n))
    X_star = spla.block_diag(_rotation(rng, p), _rotation(rng, m))
    B = G @ X_star
    J = _signature(p, m)

    spec = make_spec(J, J)
    logger.debug(f'procrustes problem n={n} p={p} m={m} rank_deficit={rank_deficit} seed={seed}')
    return ProblemInstance(
        name='procrustes',
        objective=ProcrustesObjective(G=G, B=B),
        spec=spec,
        x0=Point(spec, np.eye(n)),
        metadata={'n': n, 'k': n, 'p': p, 'm': m, 'rank_deficit': rank_deficit, 'seed': seed},
        x_star=X_star,
    )


def gen_random_instance(
    n: int, k: int, k_neg: int, seed: int, spread: float = 0.5
) -> tuple[ManifoldSpec, Point]:
    """
    Random indefinite A with eigenvalue magnitudes in [1, 3], J = diag(I, −I_{k_neg})
    and a feasible point moved off the eigenvector frame along a random tangent.
    """
    _require(0 < k <= n, f'need 0 < k ≤ n, got k={k}, n={n}')
    _require(0 <= k_neg <= k, f'need 0 ≤ k_neg ≤ k, got {k_neg}')

    rng = make_rng(seed)
    n_neg = k_neg + (n - k) // 2
    signs = np.concatenate([np.ones(n - n_neg), -np.ones(n_neg)])
    lam = signs * rng.uniform(1.0, 3.0, size=n)
    Q = orthonormal_columns(rng.standard_normal((n, n)))
    A = (Q * lam) @ Q.T
    A = 0.5 * (A + A.T)
    J = _signature(k - k_neg, k_neg)
    spec = make_spec(A, J)

    cols = np.concatenate([np.arange(k - k_neg), n - n_neg + np.arange(k_neg)])
    X = Q[:, cols] / np.sqrt(np.abs(lam[cols]))
    point = Point.unchecked(spec, X)
    if n * k - k * (k + 1) // 2 > 0:
        Z = random_tangent(point, int(rng.integers(2**31)), skew_scale=spread, normal_scale=spread)
        point = retract_qgeo(point, Z)
    return spec, Point(spec, point.X)


def check_egrad(
    f: Callable[[np.ndarray], float],
    egrad: Callable[[np.ndarray], np.ndarray],
    X: np.ndarray,
    seed: int = 0,
    h: float = 1e-6,
) -> float:
    """Relative error of ⟨∇f̄(X), D⟩ against a central difference along a random unit D."""
    D = make_rng(seed).standard_normal(X.shape)
    D /= np.linalg.norm(D)
    fd = (f(X + h * D) - f(X - h * D)) / (2.0 * h)
    exact = float(np.sum(egrad(X) * D))
    return abs(fd - exact) / max(abs(exact), 1e-12)


PROBLEMS: dict[str, Callable[..., ProblemInstance]] = {
    'trace': gen_trace_problem,
    'procrustes': gen_procrustes_problem,
}
