"""
The indefinite Stiefel manifold iSt_{A,J}(k,n) = {X in R^{n×k} : XᵀAX = J}.

Features:
- validated `ManifoldSpec` holding A, J and a cached LU factorization of A
- `Point` / `TangentVector` values checked at construction, with
  `unchecked` constructors for hot loops
- the E-matrix decomposition Z = XW + A⁻¹X⊥K of ambient matrices
- tangency predicate and random tangent generation

Dependencies:
- numpy / scipy.linalg
"""

import logging
import uuid
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as spla

from config.logging import setup_logging
from istiefel.core.errors import (
    AsymmetricMatrixError,
    InertiaViolationError,
    InfeasiblePointError,
    NonInvolutoryError,
    NotTangentError,
    ShapeError,
    SingularMatrixError,
)
from istiefel.core.linalg import (
    Inertia,
    as_matrix,
    as_square,
    inertia,
    is_symmetric,
    make_rng,
    nullspace_basis,
    skew,
    sym,
)

setup_logging()
logger = logging.getLogger(__name__)

SPEC_TOL = 1e-10
TANGENT_TOL = 1e-10


def _read_only(M: np.ndarray) -> np.ndarray:
    M = np.array(M, dtype=float, copy=True)
    M.setflags(write=False)
    return M


@dataclass(frozen=True, eq=False)
class ManifoldSpec:
    """Validated (A, J) pair. Build it with `make_spec`."""

    A: np.ndarray
    J: np.ndarray
    inertia_a: Inertia
    inertia_j: Inertia
    a_norm: float
    token: str = field(default_factory=lambda: uuid.uuid4().hex)
    _a_lu: tuple = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def k(self) -> int:
        return self.J.shape[0]

    def solve_a(self, Y: np.ndarray) -> np.ndarray:
        """A⁻¹Y through the cached factorization."""
        return spla.lu_solve(self._a_lu, Y)


def make_spec(A, J, tol: float = SPEC_TOL) -> ManifoldSpec:
    """
    Validate A and J and return the manifold specification.

    :raises AsymmetricMatrixError: A or J not symmetric
    :raises SingularMatrixError: A singular
    :raises NonInvolutoryError: J² ≠ I
    :raises InertiaViolationError: i₊(J) > i₊(A) or i₋(J) > i₋(A)
    """
    A = as_square(A, 'A')
    J = as_square(J, 'J')
    n, k = A.shape[0], J.shape[0]
    if k > n:
        raise ShapeError(f'J ({k}×{k}) cannot be larger than A ({n}×{n})')

    if not is_symmetric(A, tol):
        raise AsymmetricMatrixError('A is not symmetric')
    if not is_symmetric(J, tol):
        raise AsymmetricMatrixError('J is not symmetric')
    if np.linalg.norm(J @ J - np.eye(k)) > tol * max(1.0, float(np.linalg.norm(J))):
        raise NonInvolutoryError('J @ J differs from the identity')

    lam = np.linalg.eigvalsh(sym(A))
    if np.min(np.abs(lam)) <= tol * max(1.0, float(np.max(np.abs(lam)))):
        raise SingularMatrixError(f'A is singular (min |eigenvalue| = {np.min(np.abs(lam)):.3e})')

    inertia_a = inertia(A)
    inertia_j = inertia(J)
    if inertia_j.n_pos > inertia_a.n_pos or inertia_j.n_neg > inertia_a.n_neg:
        raise InertiaViolationError(
            f'manifold is empty: inertia(J) = ({inertia_j.n_pos}, {inertia_j.n_neg}) '
            f'does not fit inertia(A) = ({inertia_a.n_pos}, {inertia_a.n_neg})'
        )

    spec = ManifoldSpec(
        A=_read_only(A),
        J=_read_only(J),
        inertia_a=inertia_a,
        inertia_j=inertia_j,
        a_norm=float(np.linalg.norm(A)),
        _a_lu=spla.lu_factor(A),
    )
    logger.debug(f'manifold spec n={n} k={k} inertia(A)={inertia_a} inertia(J)={inertia_j}')
    return spec


def feasibility_residual(spec: ManifoldSpec, X) -> float:
    """‖XᵀAX − J‖_F."""
    X = as_matrix(X, 'X')
    if X.shape != (spec.n, spec.k):
        raise ShapeError(f'X must be {spec.n}×{spec.k}, got {X.shape}')
    return float(np.linalg.norm(X.T @ spec.A @ X - spec.J))


def feasibility_tolerance(spec: ManifoldSpec, X: np.ndarray) -> float:
    return 1e-8 * (1.0 + spec.a_norm * float(np.linalg.norm(X)) ** 2)


@dataclass(frozen=True, eq=False)
class Point:
    """A feasible X. Raises InfeasiblePointError on construction otherwise."""

    spec: ManifoldSpec
    X: np.ndarray

    def __post_init__(self):
        X = as_matrix(self.X, 'X')
        object.__setattr__(self, 'X', X)
        residual = feasibility_residual(self.spec, X)
        if residual > feasibility_tolerance(self.spec, X):
            raise InfeasiblePointError(f'‖XᵀAX − J‖_F = {residual:.3e} exceeds the feasibility tolerance')

    @classmethod
    def unchecked(cls, spec: ManifoldSpec, X: np.ndarray) -> 'Point':
        point = object.__new__(cls)
        object.__setattr__(point, 'spec', spec)
        object.__setattr__(point, 'X', X)
        return point

    @property
    def residual(self) -> float:
        return feasibility_residual(self.spec, self.X)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.X))


class TangencyCheck(NamedTuple):
    is_tangent: bool
    residual: float


def is_tangent(point: Point, Z, tol: float = TANGENT_TOL) -> TangencyCheck:
    """True iff ‖sym(XᵀAZ)‖_F ≤ tol·(1 + ‖XᵀAZ‖_F)."""
    Z = as_matrix(Z, 'Z')
    if Z.shape != point.X.shape:
        raise ShapeError(f'Z must have the shape of X {point.X.shape}, got {Z.shape}')
    xaz = point.X.T @ point.spec.A @ Z
    residual = float(np.linalg.norm(sym(xaz)))
    return TangencyCheck(residual <= tol * (1.0 + float(np.linalg.norm(xaz))), residual)


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Z with ZᵀAX + XᵀAZ = 0 at `base`."""

    base: Point
    Z: np.ndarray

    def __post_init__(self):
        Z = as_matrix(self.Z, 'Z')
        object.__setattr__(self, 'Z', Z)
        if Z.shape != self.base.X.shape:
            raise ShapeError(f'Z must have the shape of X {self.base.X.shape}, got {Z.shape}')
        spec = self.base.spec
        residual = float(np.linalg.norm(sym(self.base.X.T @ spec.A @ Z)))
        scale = 1.0 + spec.a_norm * self.base.norm * float(np.linalg.norm(Z))
        if residual > TANGENT_TOL * scale:
            raise NotTangentError(f'‖sym(XᵀAZ)‖_F = {residual:.3e} is not zero')

    @classmethod
    def unchecked(cls, base: Point, Z: np.ndarray) -> 'TangentVector':
        vector = object.__new__(cls)
        object.__setattr__(vector, 'base', base)
        object.__setattr__(vector, 'Z', Z)
        return vector

    def scaled(self, t: float) -> 'TangentVector':
        return TangentVector.unchecked(self.base, t * self.Z)


@dataclass(frozen=True)
class EDecomposition:
    """Y = X·W + A⁻¹·X⊥·K."""

    W: np.ndarray
    K: np.ndarray
    x_perp: np.ndarray

    def reconstruct(self, point: Point) -> np.ndarray:
        return point.X @ self.W + point.spec.solve_a(self.x_perp @ self.K)


def _check_x_perp(point: Point, x_perp) -> np.ndarray:
    x_perp = as_matrix(x_perp, 'X_perp')
    n, k = point.X.shape
    if x_perp.shape != (n, n - k):
        raise ShapeError(f'X_perp must be {n}×{n - k}, got {x_perp.shape}')
    return x_perp


def e_inverse_apply(spec: ManifoldSpec, point: Point, x_perp, Y) -> EDecomposition:
    """
    Coordinates of Y in the basis E = [X, A⁻¹X⊥]:
    W = J·Xᵀ·A·Y and K = (X⊥ᵀA⁻¹X⊥)⁻¹·X⊥ᵀ·Y.
    """
    x_perp = _check_x_perp(point, x_perp)
    Y = as_matrix(Y, 'Y')
    if Y.shape != point.X.shape:
        raise ShapeError(f'Y must have the shape of X {point.X.shape}, got {Y.shape}')

    W = spec.J @ (point.X.T @ (spec.A @ Y))
    gram = x_perp.T @ spec.solve_a(x_perp)
    try:
        K = spla.solve(gram, x_perp.T @ Y, assume_a='sym')
    except spla.LinAlgError as e:
        raise SingularMatrixError(f'X⊥ᵀA⁻¹X⊥ is singular ({e})') from e
    return EDecomposition(W=W, K=K, x_perp=x_perp)


def tangent_from_components(point: Point, x_perp, S, K) -> TangentVector:
    """Z = X·J·S + A⁻¹X⊥K, tangent whenever S is skew-symmetric."""
    x_perp = _check_x_perp(point, x_perp)
    spec = point.spec
    Z = point.X @ (spec.J @ S) + spec.solve_a(x_perp @ K)
    return TangentVector(point, Z)


def random_tangent(
    point: Point,
    seed: int | None,
    *,
    x_perp: np.ndarray | None = None,
    skew_scale: float = 1.0,
    normal_scale: float = 1.0,
) -> TangentVector:
    """Random tangent X·J·S + A⁻¹X⊥K with ‖S‖_F = skew_scale and ‖K‖_F = normal_scale."""
    rng = make_rng(seed)
    n, k = point.X.shape
    if x_perp is None:
        x_perp = nullspace_basis(point.X)

    S = skew(rng.standard_normal((k, k)))
    K = rng.standard_normal((n - k, k))
    s_norm, k_norm = np.linalg.norm(S), np.linalg.norm(K)
    S = skew_scale * S / s_norm if s_norm > 0 else S
    K = normal_scale * K / k_norm if k_norm > 0 else K
    return tangent_from_components(point, x_perp, S, K)
