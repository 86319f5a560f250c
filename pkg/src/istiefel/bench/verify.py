"""
Property checks of the geometry, run by `istiefel-opt verify`.

Each check sweeps random instances, keeps the worst scaled residual and
compares it with its tolerance.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from config.logging import setup_logging
from istiefel.bench.problems import gen_random_instance
from istiefel.core.geodesics import (
    QuasiGeodesic,
    check_symplectic_like_invariance,
    expected_conserved,
    qgeo_conserved,
    retract_qgeo,
    rk4_quasi_geodesic,
)
from istiefel.core.linalg import (
    expm,
    expm_series,
    inertia,
    lyap_kronecker,
    lyap_spd,
    make_rng,
    skew,
    sym,
)
from istiefel.core.manifold import TangentVector, random_tangent
from istiefel.core.metrics import (
    Euclidean,
    Gamma3Choice,
    GeneralizedCanonical,
    inner,
    project_normal_gcan,
    project_tangent_gcan,
    riemannian_gradient,
    tractable_from,
)

setup_logging()
logger = logging.getLogger(__name__)

GCAN = GeneralizedCanonical(rho=2.0, gamma3=Gamma3Choice.B)


@dataclass(frozen=True)
class CheckResult:
    name: str
    worst: float
    tolerance: float
    samples: int

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.worst) and self.worst <= self.tolerance)


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(1.0, float(np.linalg.norm(b))))


def _instances(seed: int, count: int, n_max: int = 12, k_max: int = 4):
    rng = make_rng(seed)
    for _ in range(count):
        n = int(rng.integers(3, n_max + 1))
        k = int(rng.integers(1, min(n, k_max) + 1))
        k_neg = int(rng.integers(0, k + 1))
        yield gen_random_instance(n, k, k_neg, int(rng.integers(2**31)))


def check_projections(seed: int, count: int) -> CheckResult:
    worst = 0.0
    rng = make_rng(seed + 1)
    for spec, point in _instances(seed, count):
        Y = rng.standard_normal(point.X.shape)
        P = project_tangent_gcan(point, Y).Z
        N = project_normal_gcan(point, Y)
        scale = 1.0 + float(np.linalg.norm(Y)) * (1.0 + spec.a_norm * point.norm**2)
        tangency = np.linalg.norm(sym(point.X.T @ spec.A @ P))
        idempotence = np.linalg.norm(project_tangent_gcan(point, P).Z - P)
        decomposition = np.linalg.norm(P + N - Y)
        orthogonality = abs(inner(point, P, N, GCAN)) / scale
        worst = max(worst, float(max(tangency, idempotence, decomposition) / scale), orthogonality)
    return CheckResult('projection algebra', worst, 1e-9, count)


def check_closed_form_vs_lyapunov(seed: int, count: int) -> CheckResult:
    worst = 0.0
    rng = make_rng(seed + 2)
    lyapunov = tractable_from(GCAN)
    for _, point in _instances(seed, count):
        G = rng.standard_normal(point.X.shape)
        closed = riemannian_gradient(point, G, GCAN)
        solved = riemannian_gradient(point, G, lyapunov)
        if closed.lyapunov_solves != 0 or solved.lyapunov_solves < 1:
            return CheckResult('closed form vs Lyapunov', float('inf'), 1e-8, count)
        worst = max(worst, _rel(closed.gradient.Z, solved.gradient.Z))
    return CheckResult('closed form vs Lyapunov', worst, 1e-8, count)


def check_gradient_duality(seed: int, count: int, directions: int = 5) -> CheckResult:
    """g(grad f, Z) against central differences of f along the retraction."""
    worst = 0.0
    rng = make_rng(seed + 3)
    metrics = (Euclidean(), GeneralizedCanonical(2.0, Gamma3Choice.A), GCAN)
    h = 1e-6
    for spec, point in _instances(seed, count):
        S = sym(rng.standard_normal((spec.n, spec.n)))

        def f(X):
            return float(np.sum(X * (S @ X)))

        egrad = 2.0 * S @ point.X
        for metric in metrics:
            grad = riemannian_gradient(point, egrad, metric).gradient
            for _ in range(directions):
                Z = random_tangent(point, int(rng.integers(2**31)))
                g = QuasiGeodesic.from_tangent(point, Z)
                fd = (f(g.point_at(h)) - f(g.point_at(-h))) / (2.0 * h)
                exact = inner(point, grad, Z, metric)
                worst = max(worst, abs(fd - exact) / max(1.0, abs(exact)))
    return CheckResult('gradient duality', worst, 1e-5, count * directions * len(metrics))


def check_quasi_geodesic(seed: int, count: int) -> CheckResult:
    """Worst residual/tolerance ratio over the ODE, feasibility and conservation identities."""
    worst = 0.0
    for spec, point in _instances(seed, count, n_max=8, k_max=3):
        Z = random_tangent(point, seed)
        g = QuasiGeodesic.from_tangent(point, Z)
        Y_ode, _ = rk4_quasi_geodesic(spec, point.X, Z.Z, 1.0)
        worst = max(worst, _rel(g.point_at(1.0), Y_ode) / 1e-6)
        for t in np.linspace(0.0, 2.0, 9):
            Y = g.point_at(float(t))
            feas = np.linalg.norm(Y.T @ spec.A @ Y - spec.J) / (1.0 + spec.a_norm * np.linalg.norm(Y) ** 2)
            worst = max(worst, float(feas) / 1e-9)
        for t in (0.3, 1.0, 2.5):
            W, V = qgeo_conserved(g, t)
            W_ref, V_ref = expected_conserved(g, t)
            worst = max(worst, _rel(W, W_ref) / 1e-9, _rel(V, V_ref) / 1e-9)
    return CheckResult('quasi-geodesic fidelity', worst, 1.0, count)


def check_retraction(seed: int, count: int) -> CheckResult:
    worst = 0.0
    h1, h2 = 1e-4, 1e-5
    for _, point in _instances(seed, count):
        Z = random_tangent(point, seed)
        r0 = retract_qgeo(point, TangentVector(point, np.zeros_like(point.X)), check=False)
        worst = max(worst, float(np.linalg.norm(r0.X - point.X)))
        d1 = (retract_qgeo(point, Z.scaled(h1), check=False).X - point.X) / h1
        d2 = (retract_qgeo(point, Z.scaled(h2), check=False).X - point.X) / h2
        slope = (h1 * d2 - h2 * d1) / (h1 - h2)
        worst = max(worst, _rel(slope, Z.Z))
    return CheckResult('retraction axioms', worst, 1e-6, count)


def check_kernels(seed: int, count: int) -> CheckResult:
    """Worst residual/tolerance ratio of the Lyapunov, expm, inertia and invariance oracles."""
    worst = 0.0
    rng = make_rng(seed + 4)
    for _ in range(count):
        k = int(rng.integers(1, 9))
        B = rng.standard_normal((k, k))
        C = B @ B.T + k * np.eye(k)
        R = sym(rng.standard_normal((k, k)))
        worst = max(worst, _rel(lyap_spd(C, R), lyap_kronecker(C, R)) / 1e-10)

        M = rng.standard_normal((k, k)) / np.sqrt(k)
        worst = max(worst, _rel(expm(M), expm_series(M)) / 1e-12)

        S = sym(rng.standard_normal((k, k)))
        T = rng.standard_normal((k, k)) + 3.0 * np.eye(k)
        if inertia(S) != inertia(T.T @ S @ T):
            worst = float('inf')

        Theta = skew(rng.standard_normal((k, k)))
        Gamma = sym(rng.standard_normal((k, k)))
        J = np.diag(np.where(rng.random(k) < 0.5, 1.0, -1.0))
        E = expm(np.block([[J @ Theta, J @ Gamma], [np.eye(k), J @ Theta]]))
        residual = check_symplectic_like_invariance(Theta, Gamma, J, 1.0)
        worst = max(worst, residual / (1.0 + float(np.linalg.norm(E)) ** 2) / 1e-10)
    return CheckResult('kernel oracles', worst, 1.0, count)


CHECKS: dict[str, Callable[[int, int], CheckResult]] = {
    'projections': check_projections,
    'closed_form': check_closed_form_vs_lyapunov,
    'duality': check_gradient_duality,
    'quasi_geodesic': check_quasi_geodesic,
    'retraction': check_retraction,
    'kernels': check_kernels,
}


def verify(seed: int = 0, instances: int = 20, only: list[str] | None = None) -> list[CheckResult]:
    results = []
    for name, check in CHECKS.items():
        if only and name not in only:
            continue
        res = check(seed, instances)
        level = logging.INFO if res.passed else logging.WARNING
        logger.log(
            level,
            f'{res.name}: worst {res.worst:.3e} (tol {res.tolerance:.1e}, {res.samples} samples) '
            f'{"ok" if res.passed else "FAILED"}',
        )
        results.append(res)
    return results
