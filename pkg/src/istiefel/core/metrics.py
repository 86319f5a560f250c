"""
Riemannian metrics on the indefinite Stiefel manifold.

Three geometries are supported:
- `Euclidean`: M_X = I
- `Tractable`: any point-dependent spd M_X given by a provider callback;
  projections and gradients need one Lyapunov solve each
- `GeneralizedCanonical`: the ρ-family for which that Lyapunov system has
  the closed-form solution U = ρ⁻¹ sym(·), so nothing is ever solved

Each metric exposes the inner product, the tangent projection and the
Riemannian gradient. The generalized canonical metric also exposes the
normal projection and the basis-dependent forms used as oracles.

Dependencies:
- numpy / scipy.linalg for the dense algebra
- cachetools for the per-point cache of the dense M_X factorization
"""

import logging
import threading
import uuid
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as spla
from cachetools import LRUCache, cached
from cachetools.keys import hashkey

from config.logging import setup_logging
from istiefel.core.errors import (
    BasePointMismatchError,
    DefinitenessError,
    InvalidParameterError,
    ShapeError,
    SingularMatrixError,
)
from istiefel.core.linalg import as_matrix, lyap_spd, nullspace_basis, skew, sym
from istiefel.core.manifold import ManifoldSpec, Point, TangentVector, e_inverse_apply

setup_logging()
logger = logging.getLogger(__name__)


class Gamma3Choice(str, Enum):
    A = 'A'  # Γ₃ = (X⊥ᵀX⊥)⁻¹
    B = 'B'  # Γ₃ = G⁻¹X⊥ᵀX⊥G⁻¹ with G = X⊥ᵀA⁻¹X⊥


@dataclass(frozen=True)
class Euclidean:
    label = 'eucl'


@dataclass(frozen=True)
class Tractable:
    mx_provider: Callable[[Point], np.ndarray]
    name: str = 'tractable'
    token: str = field(default_factory=lambda: uuid.uuid4().hex, compare=False)

    @property
    def label(self) -> str:
        return self.name


@dataclass(frozen=True)
class GeneralizedCanonical:
    rho: float = 2.0
    gamma3: Gamma3Choice = Gamma3Choice.B

    def __post_init__(self):
        if not np.isfinite(self.rho) or self.rho <= 0:
            raise InvalidParameterError(f'rho must be positive, got {self.rho}')
        object.__setattr__(self, 'gamma3', Gamma3Choice(self.gamma3))

    @property
    def label(self) -> str:
        return f'gcan-{self.gamma3.value}'


MetricKind = Euclidean | Tractable | GeneralizedCanonical


@dataclass(frozen=True)
class GradientReport:
    gradient: TangentVector
    lyapunov_solves: int
    flops_proxy: int


# --- helpers ---


def _ambient(point: Point, Y, name: str = 'Y') -> np.ndarray:
    Y = as_matrix(Y, name)
    if Y.shape != point.X.shape:
        raise ShapeError(f'{name} must have the shape of X {point.X.shape}, got {Y.shape}')
    return Y


def _tangent_array(point: Point, Z) -> np.ndarray:
    if isinstance(Z, TangentVector):
        if Z.base is not point and not (
            Z.base.spec is point.spec and np.array_equal(Z.base.X, point.X)
        ):
            raise BasePointMismatchError('tangent vector belongs to a different base point')
        return Z.Z
    return _ambient(point, Z, 'Z')


def _x_perp(point: Point, x_perp) -> np.ndarray:
    return nullspace_basis(point.X) if x_perp is None else as_matrix(x_perp, 'X_perp')


class _ProductTally:
    """Counts products with an n-sized dimension as they are formed."""

    def __init__(self):
        self.count = 0

    def __call__(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        self.count += 1
        return left @ right

    def apply(self, operator, V: np.ndarray) -> np.ndarray:
        """Apply A, A⁻¹ or M_X⁻¹ to an n×k block."""
        self.count += 1
        return operator(V)


def _a_inverse_gram(spec: ManifoldSpec, x_perp: np.ndarray) -> np.ndarray:
    """G = X⊥ᵀA⁻¹X⊥."""
    return sym(x_perp.T @ spec.solve_a(x_perp))


def _gcan_apply_mx(point: Point, Z: np.ndarray, metric: GeneralizedCanonical) -> np.ndarray:
    """M_X·Z for the generalized canonical metric without forming M_X."""
    spec, X = point.spec, point.X
    AX = spec.A @ X
    out = AX @ (AX.T @ Z) / metric.rho
    if metric.gamma3 is Gamma3Choice.A:
        # B = A(I − XJXᵀA), applied twice
        BZ = spec.A @ Z - AX @ (spec.J @ (AX.T @ Z))
        return out + spec.A @ BZ - AX @ (spec.J @ (AX.T @ BZ))
    return out + Z - X @ spla.solve(X.T @ X, X.T @ Z, assume_a='pos')


# --- Γ₃ and the dense representing matrices ---


def gamma3(spec: ManifoldSpec, x_perp, choice: Gamma3Choice) -> np.ndarray:
    """Γ₃ for the given basis X⊥ of the orthogonal complement of range(X)."""
    x_perp = as_matrix(x_perp, 'X_perp')
    try:
        if Gamma3Choice(choice) is Gamma3Choice.A:
            return sym(np.linalg.inv(x_perp.T @ x_perp))
        G_inv = np.linalg.inv(_a_inverse_gram(spec, x_perp))
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError(f'Γ₃ is undefined for this basis ({e})') from e
    return sym(G_inv @ (x_perp.T @ x_perp) @ G_inv)


def mx_matrix(point: Point, metric: MetricKind) -> np.ndarray:
    """
    Dense representing matrix M_X of the metric at `point`.

    :raises DefinitenessError: when the result is not numerically spd
    """
    spec, X = point.spec, point.X
    n = spec.n
    if isinstance(metric, Euclidean):
        return np.eye(n)
    if isinstance(metric, Tractable):
        M = sym(as_matrix(metric.mx_provider(point), 'M_X'))
        if M.shape != (n, n):
            raise ShapeError(f'M_X must be {n}×{n}, got {M.shape}')
    else:
        AX = spec.A @ X
        M = AX @ AX.T / metric.rho
        if metric.gamma3 is Gamma3Choice.A:
            B = spec.A - AX @ spec.J @ AX.T
            M = M + B @ B
        else:
            M = M + np.eye(n) - X @ spla.solve(X.T @ X, X.T, assume_a='pos')
        M = sym(M)

    try:
        spla.cho_factor(M)
    except spla.LinAlgError as e:
        raise DefinitenessError(f'M_X is not positive-definite for metric {metric.label}') from e
    return M


def mx_inverse_matrix(point: Point, metric: GeneralizedCanonical, x_perp=None) -> np.ndarray:
    """ρXXᵀ + A⁻¹X⊥Γ₃X⊥ᵀA⁻¹."""
    spec, X = point.spec, point.X
    x_perp = _x_perp(point, x_perp)
    AinvXp = spec.solve_a(x_perp)
    return sym(metric.rho * X @ X.T + AinvXp @ gamma3(spec, x_perp, metric.gamma3) @ AinvXp.T)


_mx_cache = LRUCache(maxsize=32)
_mx_lock = threading.Lock()


@cached(
    _mx_cache,
    key=lambda point, metric: hashkey(point.spec.token, metric.token, point.X.tobytes()),
    lock=_mx_lock,
)
def _tractable_factor(point: Point, metric: Tractable) -> tuple[np.ndarray, tuple]:
    M = mx_matrix(point, metric)
    return M, spla.cho_factor(M)


def clear_mx_cache():
    with _mx_lock:
        _mx_cache.clear()


# --- inner products ---


def inner(point: Point, Z1, Z2, metric: MetricKind) -> float:
    """g_X(Z₁, Z₂) = tr(Z₁ᵀ M_X Z₂)."""
    Z1 = _tangent_array(point, Z1)
    Z2 = _tangent_array(point, Z2)
    if isinstance(metric, Euclidean):
        MZ2 = Z2
    elif isinstance(metric, Tractable):
        M, _ = _tractable_factor(point, metric)
        MZ2 = M @ Z2
    else:
        MZ2 = _gcan_apply_mx(point, Z2, metric)
    return float(np.sum(Z1 * MZ2))


def inner_components(point: Point, Z1, Z2, metric: GeneralizedCanonical, x_perp=None) -> float:
    """ρ⁻¹tr(W₁ᵀW₂) + tr(K₁ᵀΓ₃⁻¹K₂) from the E-coordinates of Z₁ and Z₂."""
    spec = point.spec
    x_perp = _x_perp(point, x_perp)
    d1 = e_inverse_apply(spec, point, x_perp, _tangent_array(point, Z1))
    d2 = e_inverse_apply(spec, point, x_perp, _tangent_array(point, Z2))
    g3 = gamma3(spec, x_perp, metric.gamma3)
    return float(np.sum(d1.W * d2.W) / metric.rho + np.sum(d1.K * np.linalg.solve(g3, d2.K)))


def riemannian_norm(point: Point, Z, metric: MetricKind) -> float:
    return float(np.sqrt(max(inner(point, Z, Z, metric), 0.0)))


# --- projections ---


def project_tangent_gcan(point: Point, Y) -> TangentVector:
    """P_X(Y) = Y − XJ·sym(XᵀAY); the same for every ρ and Γ₃."""
    Y = _ambient(point, Y)
    return TangentVector.unchecked(point, Y - project_normal_gcan(point, Y))


def project_normal_gcan(point: Point, Y) -> np.ndarray:
    """P⊥_X(Y) = XJ·sym(XᵀAY), an element XU of the normal space with JU symmetric."""
    Y = _ambient(point, Y)
    spec, X = point.spec, point.X
    return X @ (spec.J @ sym(X.T @ (spec.A @ Y)))


def _tractable_operators(point: Point, metric: Euclidean | Tractable, mm=None):
    """Return M_X⁻¹ as a callable together with AX, M_X⁻¹AX and C = XᵀAM_X⁻¹AX."""
    mm = _ProductTally() if mm is None else mm
    spec, X = point.spec, point.X
    AX = mm.apply(spec.A.__matmul__, X)
    if isinstance(metric, Euclidean):
        def solve(V):
            return V

        Minv_AX = AX
    else:
        _, factor = _tractable_factor(point, metric)

        def solve(V):
            return spla.cho_solve(factor, V)

        Minv_AX = mm.apply(solve, AX)
    return solve, AX, Minv_AX, sym(mm(AX.T, Minv_AX))


def project_tangent_tractable(point: Point, Y, metric: Euclidean | Tractable) -> TangentVector:
    """
    P_X(Y) = Y − M_X⁻¹AX·U where U solves C U + U C = 2sym(XᵀAY),
    C = XᵀAM_X⁻¹AX.
    """
    if isinstance(metric, GeneralizedCanonical):
        raise InvalidParameterError('use project_tangent_gcan for the generalized canonical metric')
    Y = _ambient(point, Y)
    _, AX, Minv_AX, C = _tractable_operators(point, metric)
    U = lyap_spd(C, 2.0 * sym(AX.T @ Y))
    return TangentVector.unchecked(point, Y - Minv_AX @ U)


# --- gradients ---


def riemannian_gradient(point: Point, egrad, metric: MetricKind) -> GradientReport:
    """
    Riemannian gradient from the Euclidean gradient ∇f̄(X).

    Generalized canonical metrics use the closed forms:
    - Γ₃ choice A: ρXJ·skew(JXᵀ∇f̄) + A⁻¹(I − X(XᵀX)⁻¹Xᵀ)A⁻¹∇f̄
    - Γ₃ choice B: ρXJ·skew(JXᵀ∇f̄) + (I − XJXᵀA)(I − XJXᵀA)ᵀ∇f̄

    Euclidean and tractable metrics use M_X⁻¹∇f̄ − M_X⁻¹AX·U with
    C U + U C = 2sym(XᵀAM_X⁻¹∇f̄).

    `flops_proxy` is the number of products with an n-sized dimension the
    path performed, applications of A, A⁻¹ and M_X⁻¹ to an n×k block
    included; k×k work and the Lyapunov solve are not counted.
    """
    G = _ambient(point, egrad, 'egrad')
    spec, X, J = point.spec, point.X, point.spec.J
    mm = _ProductTally()

    if isinstance(metric, GeneralizedCanonical):
        XtG = mm(X.T, G)
        first = metric.rho * mm(X, J @ skew(J @ XtG))
        if metric.gamma3 is Gamma3Choice.A:
            AinvG = mm.apply(spec.solve_a, G)
            coef = spla.solve(mm(X.T, X), mm(X.T, AinvG), assume_a='pos')
            second = mm.apply(spec.solve_a, AinvG - mm(X, coef))
        else:
            AX = mm.apply(spec.A.__matmul__, X)
            H = G - mm(AX, J @ XtG)
            second = H - mm(X, J @ mm(AX.T, H))
        return GradientReport(TangentVector.unchecked(point, first + second), 0, mm.count)

    solve, AX, Minv_AX, C = _tractable_operators(point, metric, mm)
    Minv_G = mm.apply(solve, G) if isinstance(metric, Tractable) else G
    U = lyap_spd(C, 2.0 * sym(mm(AX.T, Minv_G)))
    grad = Minv_G - mm(Minv_AX, U)
    return GradientReport(TangentVector.unchecked(point, grad), 1, mm.count)


def gcan_gradient_from_basis(point: Point, egrad, metric: GeneralizedCanonical, x_perp=None) -> TangentVector:
    """ρXJ·skew(JXᵀ∇f̄) + A⁻¹X⊥Γ₃X⊥ᵀA⁻¹∇f̄ for an explicit basis X⊥."""
    G = _ambient(point, egrad, 'egrad')
    spec, X, J = point.spec, point.X, point.spec.J
    x_perp = _x_perp(point, x_perp)
    g3 = gamma3(spec, x_perp, metric.gamma3)
    second = spec.solve_a(x_perp @ (g3 @ (x_perp.T @ spec.solve_a(G))))
    return TangentVector.unchecked(point, metric.rho * X @ (J @ skew(J @ (X.T @ G))) + second)


def tractable_from(metric: GeneralizedCanonical) -> Tractable:
    """The same geometry routed through the dense M_X and the Lyapunov solver."""

    def provider(point: Point) -> np.ndarray:
        return mx_matrix(point, metric)

    return Tractable(mx_provider=provider, name=f'tractable[{metric.label}]')
