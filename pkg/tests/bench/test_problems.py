import numpy as np
import pytest

from istiefel.bench.problems import (
    PROBLEMS,
    ProcrustesObjective,
    TraceObjective,
    check_egrad,
    gen_procrustes_problem,
    gen_random_instance,
    gen_trace_problem,
)
from istiefel.core.errors import InvalidParameterError
from istiefel.core.linalg import Inertia
from istiefel.core.manifold import Point
from istiefel.core.metrics import GeneralizedCanonical, riemannian_gradient, riemannian_norm


def test_trace_problem_at_desk_scale():
    problem = gen_trace_problem()
    spec = problem.spec
    assert (spec.n, spec.k) == (100, 20)
    assert spec.inertia_a == Inertia(75, 25, 0)
    assert spec.inertia_j == Inertia(10, 10, 0)
    assert problem.x0.residual <= 1e-12
    assert problem.metadata == {'n': 100, 'k': 20, 'p': 75, 'm': 25, 'k_p': 10, 'k_m': 10, 'seed': 0}


def test_trace_matrix_is_psd_with_five_dimensional_kernel():
    problem = gen_trace_problem(n=20, k=4, p=15, m=5, k_p=2, k_m=2)
    lam = np.linalg.eigvalsh(problem.objective.M)
    assert np.allclose(lam[:5], 0.0, atol=1e-12)
    assert np.allclose(lam[5:], 1.0, atol=1e-12)
    assert problem.f(problem.x0.X) >= 0.0


def test_trace_problem_is_seeded():
    a = gen_trace_problem(n=12, k=4, p=9, m=3, k_p=2, k_m=2, seed=5)
    b = gen_trace_problem(n=12, k=4, p=9, m=3, k_p=2, k_m=2, seed=5)
    c = gen_trace_problem(n=12, k=4, p=9, m=3, k_p=2, k_m=2, seed=6)
    assert np.array_equal(a.objective.M, b.objective.M)
    assert not np.array_equal(a.objective.M, c.objective.M)


@pytest.mark.parametrize(
    'kwargs',
    [
        {'n': 10, 'k': 4, 'p': 5, 'm': 4, 'k_p': 2, 'k_m': 2},
        {'n': 10, 'k': 4, 'p': 8, 'm': 2, 'k_p': 1, 'k_m': 2},
        {'n': 10, 'k': 4, 'p': 8, 'm': 2, 'k_p': 1, 'k_m': 3},
        {'n': 5, 'k': 2, 'p': 4, 'm': 1, 'k_p': 1, 'k_m': 1},
    ],
    ids=['p+m', 'k_p+k_m', 'k_m>m', 'n<=5'],
)
def test_trace_problem_rejects_dimensions(kwargs):
    with pytest.raises(InvalidParameterError):
        gen_trace_problem(**kwargs)


def test_procrustes_problem_at_desk_scale():
    problem = gen_procrustes_problem()
    spec = problem.spec
    assert (spec.n, spec.k) == (60, 60)
    assert spec.inertia_j == Inertia(45, 15, 0)
    assert problem.objective.G.shape == (56, 60)
    assert np.array_equal(problem.x0.X, np.eye(60))
    assert problem.f(problem.x0.X) > 0


def test_procrustes_planted_minimizer(small_procrustes):
    X_star = small_procrustes.x_star
    point = Point(small_procrustes.spec, X_star)
    assert small_procrustes.f(X_star) <= 1e-20
    report = riemannian_gradient(point, small_procrustes.egrad(X_star), GeneralizedCanonical())
    assert riemannian_norm(point, report.gradient, GeneralizedCanonical()) <= 1e-8
    p = small_procrustes.metadata['p']
    assert np.isclose(np.linalg.det(X_star[:p, :p]), 1.0)
    assert np.isclose(np.linalg.det(X_star[p:, p:]), 1.0)


def test_procrustes_rejects_dimensions():
    with pytest.raises(InvalidParameterError):
        gen_procrustes_problem(n=10, p=6, m=3)
    with pytest.raises(InvalidParameterError):
        gen_procrustes_problem(n=10, p=6, m=4, rank_deficit=10)


@pytest.mark.parametrize(
    'problem',
    [
        gen_trace_problem(n=12, k=4, p=9, m=3, k_p=2, k_m=2),
        gen_procrustes_problem(n=8, p=6, m=2, rank_deficit=2),
    ],
    ids=['trace', 'procrustes'],
)
def test_euclidean_gradients_match_finite_differences(problem):
    rng = np.random.default_rng(0)
    X = problem.x0.X + 0.1 * rng.standard_normal(problem.x0.X.shape)
    for seed in range(3):
        assert check_egrad(problem.f, problem.egrad, X, seed=seed) <= 1e-6


def test_objectives_are_plain_callables():
    M = np.diag([1.0, 2.0])
    X = np.array([[1.0], [1.0]])
    assert TraceObjective(M).f(X) == 3.0
    assert np.array_equal(TraceObjective(M).egrad(X), np.array([[2.0], [4.0]]))
    obj = ProcrustesObjective(G=np.eye(2), B=np.zeros((2, 1)))
    assert obj.f(X) == 2.0


def test_random_instance(instances):
    spec, point = instances
    assert spec.inertia_a.n_zero == 0
    assert spec.inertia_j.n_pos <= spec.inertia_a.n_pos
    assert spec.inertia_j.n_neg <= spec.inertia_a.n_neg
    assert point.residual <= 1e-10 * (1.0 + spec.a_norm * point.norm**2)


def test_random_instance_eigenvalue_band():
    spec, _ = gen_random_instance(9, 3, 1, seed=2)
    lam = np.abs(np.linalg.eigvalsh(spec.A))
    assert lam.min() >= 1.0 - 1e-12
    assert lam.max() <= 3.0 + 1e-12


def test_random_instance_rejects_dimensions():
    with pytest.raises(InvalidParameterError):
        gen_random_instance(3, 4, 0, seed=0)
    with pytest.raises(InvalidParameterError):
        gen_random_instance(5, 2, 3, seed=0)


def test_problem_registry():
    assert set(PROBLEMS) == {'trace', 'procrustes'}
