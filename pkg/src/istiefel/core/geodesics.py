"""
Quasi-geodesic curves and the quasi-geodesic retraction.

For a tangent Z at X, with W₀ = XᵀAZ, V₀ = ZᵀAZ and
Ψ = [[JW₀, −JV₀], [I, JW₀]], the curve

    Y(t) = [X Z]·expm(tΨ)·[I; 0]·expm(−tJW₀)

stays on the manifold, starts at X with velocity Z and solves
Ÿ + Y·J·(ẎᵀAẎ) = 0. The retraction is R_X(Z) = Y(1), and since
R_X(τZ) = Y_Z(τ), one curve serves every trial step of a line search.

Features:
- `QuasiGeodesic` value with an optional cached eigendecomposition of Ψ
- curve, velocity and conserved quantities at any t
- RK4 integrator of the second-order ODE (test oracle)
- `Retraction` interface and the `RETRACTIONS` registry

Dependencies:
- numpy / scipy.linalg
- config.settings for the refusal threshold on t·‖Ψ‖_F
"""

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from config.logging import setup_logging
from config.settings import settings
from istiefel.core.errors import BasePointMismatchError, NotTangentError, RangeError, ShapeError
from istiefel.core.linalg import as_matrix, as_square, expm
from istiefel.core.manifold import ManifoldSpec, Point, TangentVector, is_tangent

setup_logging()
logger = logging.getLogger(__name__)

# eigenvector matrices worse conditioned than this go through the Padé kernel
SPECTRAL_COND_MAX = 1e2


@dataclass(frozen=True)
class _Spectral:
    Q: np.ndarray
    lam: np.ndarray
    Q_inv: np.ndarray

    @classmethod
    def build(cls, M: np.ndarray) -> '_Spectral | None':
        if M.shape[0] == 0:
            return None
        lam, Q = np.linalg.eig(M)
        if not np.all(np.isfinite(Q)) or np.linalg.cond(Q) > SPECTRAL_COND_MAX:
            return None
        return cls(Q=Q, lam=lam, Q_inv=np.linalg.inv(Q))

    def exp(self, t: float, cols: slice = slice(None)) -> np.ndarray:
        return ((self.Q * np.exp(t * self.lam)) @ self.Q_inv[:, cols]).real


@dataclass(frozen=True, eq=False)
class QuasiGeodesic:
    base: Point
    Z: np.ndarray
    W0: np.ndarray
    V0: np.ndarray
    Psi: np.ndarray
    psi_norm: float
    _psi_eig: _Spectral | None = field(default=None, repr=False)
    _jw_eig: _Spectral | None = field(default=None, repr=False)

    @classmethod
    def from_tangent(cls, point: Point, Z, spectral: bool = False) -> 'QuasiGeodesic':
        """
        Build the curve through `point` with initial velocity Z.

        With `spectral=True` the eigendecompositions of Ψ and JW₀ are cached
        when well conditioned, so later evaluations cost no matrix exponential.
        """
        Z = _direction(point, Z)
        spec, X = point.spec, point.X
        k = spec.k
        AZ = spec.A @ Z
        W0 = X.T @ AZ
        V0 = Z.T @ AZ
        V0 = 0.5 * (V0 + V0.T)
        JW0 = spec.J @ W0
        Psi = np.block([[JW0, -spec.J @ V0], [np.eye(k), JW0]])

        psi_eig = jw_eig = None
        if spectral:
            psi_eig = _Spectral.build(Psi)
            jw_eig = _Spectral.build(JW0)
            if psi_eig is None:
                logger.debug('Ψ is ill conditioned for diagonalization, using expm per evaluation')
        return cls(point, Z, W0, V0, Psi, float(np.linalg.norm(Psi)), psi_eig, jw_eig)

    @property
    def spec(self) -> ManifoldSpec:
        return self.base.spec

    def _check_range(self, t: float):
        if not math.isfinite(t):
            raise RangeError(f'curve parameter must be finite, got {t}')
        if abs(t) * self.psi_norm > settings.qgeo_max_norm:
            raise RangeError(
                f't·‖Ψ‖_F = {abs(t) * self.psi_norm:.3e} exceeds {settings.qgeo_max_norm}'
            )

    def _exp_psi(self, t: float, cols: slice) -> np.ndarray:
        if self._psi_eig is not None:
            return self._psi_eig.exp(t, cols)
        return expm(t * self.Psi)[:, cols]

    def _exp_minus_jw(self, t: float) -> np.ndarray:
        if self._jw_eig is not None:
            return self._jw_eig.exp(-t)
        return expm(-t * (self.spec.J @ self.W0))

    def _frame(self, t: float, cols: slice) -> np.ndarray:
        self._check_range(t)
        return np.hstack([self.base.X, self.Z]) @ self._exp_psi(t, cols) @ self._exp_minus_jw(t)

    def point_at(self, t: float) -> np.ndarray:
        return self._frame(t, slice(0, self.spec.k))

    def velocity_at(self, t: float) -> np.ndarray:
        return self._frame(t, slice(self.spec.k, 2 * self.spec.k))


def _direction(point: Point, Z) -> np.ndarray:
    if isinstance(Z, TangentVector):
        if Z.base is not point and not np.array_equal(Z.base.X, point.X):
            raise BasePointMismatchError('tangent vector belongs to a different base point')
        return Z.Z
    Z = as_matrix(Z, 'Z')
    if Z.shape != point.X.shape:
        raise ShapeError(f'Z must have the shape of X {point.X.shape}, got {Z.shape}')
    check = is_tangent(point, Z)
    if not check.is_tangent:
        raise NotTangentError(f'‖sym(XᵀAZ)‖_F = {check.residual:.3e} is not zero')
    return Z


def qgeo_eval(g: QuasiGeodesic, t: float, check: bool = False) -> Point:
    """Y(t); `check=True` validates feasibility of the result."""
    Y = g.point_at(t)
    return Point(g.spec, Y) if check else Point.unchecked(g.spec, Y)


def qgeo_velocity(g: QuasiGeodesic, t: float) -> np.ndarray:
    """Ẏ(t) = [X Z]·expm(tΨ)·[0; I]·expm(−tJW₀)."""
    return g.velocity_at(t)


def qgeo_conserved(g: QuasiGeodesic, t: float) -> tuple[np.ndarray, np.ndarray]:
    """W(t) = YᵀAẎ and V(t) = ẎᵀAẎ evaluated on the curve."""
    Y = g.point_at(t)
    dY = g.velocity_at(t)
    A_dY = g.spec.A @ dY
    return Y.T @ A_dY, dY.T @ A_dY


def expected_conserved(g: QuasiGeodesic, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Closed forms W(t) = W₀ and V(t) = expm(−tW₀ᵀJ)·V₀·expm(−tJW₀)."""
    E = expm(-t * (g.spec.J @ g.W0))
    return g.W0.copy(), E.T @ g.V0 @ E


def check_symplectic_like_invariance(Theta, Gamma, J, t: float) -> float:
    """
    ‖expm(tΛ)ᵀ Ω expm(tΛ) − Ω‖_F with Λ = [[JΘ, JΓ], [I, JΘ]] and
    Ω = [[0, J], [−J, 0]], for Θ skew and Γ symmetric.
    """
    Theta = as_square(Theta, 'Theta')
    Gamma = as_square(Gamma, 'Gamma')
    J = as_square(J, 'J')
    k = J.shape[0]
    if Theta.shape != (k, k) or Gamma.shape != (k, k):
        raise ShapeError('Theta, Gamma and J must share the same size')

    zero = np.zeros((k, k))
    Lam = np.block([[J @ Theta, J @ Gamma], [np.eye(k), J @ Theta]])
    Omega = np.block([[zero, J], [-J, zero]])
    E = expm(t * Lam)
    return float(np.linalg.norm(E.T @ Omega @ E - Omega))


def rk4_quasi_geodesic(
    spec: ManifoldSpec, X, Z, t: float, step: float = 1e-3
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate Ÿ = −Y·J·(ẎᵀAẎ) from (X, Z) to time t with classical RK4."""
    Y = as_matrix(X, 'X').copy()
    V = as_matrix(Z, 'Z').copy()
    if t == 0:
        return Y, V
    n_steps = max(1, int(math.ceil(abs(t) / step)))
    h = t / n_steps
    A, J = spec.A, spec.J

    def accel(Y, V):
        return -Y @ (J @ (V.T @ (A @ V)))

    for _ in range(n_steps):
        k1y, k1v = V, accel(Y, V)
        k2y, k2v = V + 0.5 * h * k1v, accel(Y + 0.5 * h * k1y, V + 0.5 * h * k1v)
        k3y, k3v = V + 0.5 * h * k2v, accel(Y + 0.5 * h * k2y, V + 0.5 * h * k2v)
        k4y, k4v = V + h * k3v, accel(Y + h * k3y, V + h * k3v)
        Y = Y + h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        V = V + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return Y, V


def retract_qgeo(point: Point, Z, check: bool = True) -> Point:
    """R_X(Z) = Y_Z(1)."""
    return qgeo_eval(QuasiGeodesic.from_tangent(point, Z), 1.0, check=check)


class Retraction(ABC):
    name: str

    @abstractmethod
    def retract(self, point: Point, Z) -> Point:
        """Map the tangent Z at `point` back to the manifold."""

    def along(self, point: Point, Z) -> Callable[[float], Point]:
        """τ ↦ R_X(τZ), unchecked points for the line search."""
        Z = _direction(point, Z)
        return lambda tau: self.retract(point, TangentVector.unchecked(point, tau * Z))


class QuasiGeodesicRetraction(Retraction):
    name = 'qgeo'

    def retract(self, point: Point, Z) -> Point:
        return retract_qgeo(point, Z, check=False)

    def along(self, point: Point, Z) -> Callable[[float], Point]:
        g = QuasiGeodesic.from_tangent(point, Z, spectral=True)
        return lambda tau: qgeo_eval(g, tau)


RETRACTIONS: dict[str, type[Retraction]] = {
    QuasiGeodesicRetraction.name: QuasiGeodesicRetraction,
}
