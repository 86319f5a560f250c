import numpy as np
import pytest
import scipy.linalg as spla

from istiefel.core.errors import (
    AsymmetricMatrixError,
    DefinitenessError,
    DegenerateInputError,
    NonFiniteError,
    RangeError,
    ShapeError,
)
from istiefel.core.linalg import (
    Inertia,
    as_matrix,
    expm,
    expm_series,
    inertia,
    lyap_kronecker,
    lyap_spd,
    make_rng,
    nullspace_basis,
    orthonormal_columns,
    skew,
    sym,
)


def rel(a, b):
    return np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b))


def test_sym_and_skew_split_the_matrix(rng):
    M = rng.standard_normal((5, 5))
    assert np.allclose(sym(M) + skew(M), M)
    assert np.allclose(sym(M), sym(M).T)
    assert np.allclose(skew(M), -skew(M).T)


def test_as_matrix_rejects_vectors_and_nan():
    with pytest.raises(ShapeError):
        as_matrix(np.ones(3))
    with pytest.raises(NonFiniteError):
        as_matrix(np.array([[1.0, np.nan]]))


def test_sym_requires_square():
    with pytest.raises(ShapeError):
        sym(np.ones((2, 3)))


def test_expm_of_zero_and_diagonal():
    assert np.array_equal(expm(np.zeros((3, 3))), np.eye(3))
    D = np.diag([0.5, -1.0, 3.0])
    assert np.allclose(expm(D), np.diag(np.exp([0.5, -1.0, 3.0])), rtol=1e-13)


def test_expm_matches_series_oracle(rng):
    for _ in range(10):
        M = rng.standard_normal((6, 6))
        M /= np.linalg.norm(M, 2)
        assert rel(expm(M), expm_series(M)) <= 1e-12


def test_expm_matches_scipy_with_scaling(rng):
    M = 3.0 * rng.standard_normal((6, 6))
    assert rel(expm(M), spla.expm(M)) <= 1e-10


def test_expm_of_skew_is_orthogonal(rng):
    Q = expm(skew(4.0 * rng.standard_normal((5, 5))))
    assert np.allclose(Q.T @ Q, np.eye(5), atol=1e-12)


def test_expm_overflow_raises_range_error():
    with pytest.raises(RangeError):
        expm(np.array([[1000.0]]))


def test_lyap_spd_residual_and_kronecker_oracle(rng):
    for k in range(1, 9):
        B = rng.standard_normal((k, k))
        C = B @ B.T + k * np.eye(k)
        R = sym(rng.standard_normal((k, k)))
        U = lyap_spd(C, R)
        residual = np.linalg.norm(C @ U + U @ C - R)
        assert residual <= 1e-10 * (np.linalg.norm(C) * np.linalg.norm(U) + np.linalg.norm(R))
        assert rel(U, lyap_kronecker(C, R)) <= 1e-10
        assert np.allclose(U, U.T)


def test_lyap_spd_rejects_indefinite_coefficient():
    with pytest.raises(DefinitenessError):
        lyap_spd(-np.eye(3), np.eye(3))


def test_lyap_spd_shape_mismatch():
    with pytest.raises(ShapeError):
        lyap_spd(np.eye(3), np.eye(2))


def test_lyap_spd_empty():
    assert lyap_spd(np.zeros((0, 0)), np.zeros((0, 0))).shape == (0, 0)


def test_inertia_counts_signs():
    assert inertia(np.diag([3.0, -1.0, 0.0, 2.0])) == Inertia(2, 1, 1)


def test_inertia_ignores_rounding_level_eigenvalues():
    assert inertia(np.diag([1.0, 1e-14, -1.0])) == Inertia(1, 1, 1)


def test_inertia_congruence_invariance(rng):
    for _ in range(50):
        S = sym(rng.standard_normal((6, 6)))
        T = rng.standard_normal((6, 6)) + 4.0 * np.eye(6)
        assert inertia(S) == inertia(T.T @ S @ T)


def test_inertia_rejects_asymmetric():
    with pytest.raises(AsymmetricMatrixError):
        inertia(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_nullspace_basis_is_orthonormal_complement(rng):
    X = rng.standard_normal((7, 3))
    P = nullspace_basis(X)
    assert P.shape == (7, 4)
    assert np.allclose(P.T @ P, np.eye(4), atol=1e-12)
    assert np.linalg.norm(X.T @ P) <= 1e-12 * np.linalg.norm(X)


def test_nullspace_basis_rank_deficient():
    X = np.ones((5, 2))
    with pytest.raises(DegenerateInputError):
        nullspace_basis(X)


def test_nullspace_basis_too_many_columns():
    with pytest.raises(ShapeError):
        nullspace_basis(np.ones((2, 3)))


def test_orthonormal_columns_positive_r(rng):
    M = rng.standard_normal((6, 3))
    Q = orthonormal_columns(M)
    assert np.allclose(Q.T @ Q, np.eye(3), atol=1e-12)
    R = Q.T @ M
    assert np.all(np.diag(R) > 0)
    assert np.allclose(np.tril(R, -1), 0.0, atol=1e-12)


def test_make_rng_is_reproducible():
    a = make_rng(42).standard_normal(5)
    b = make_rng(42).standard_normal(5)
    c = make_rng(43).standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_expm_of_commuting_pair_factors(rng):
    M = 0.4 * rng.standard_normal((6, 6))
    N = 0.5 * M @ M - 0.3 * M + 0.2 * np.eye(6)
    assert np.allclose(M @ N, N @ M)
    assert rel(expm(M + N), expm(M) @ expm(N)) <= 1e-10


def test_nullspace_basis_of_square_matrix_is_empty(rng):
    basis = nullspace_basis(rng.standard_normal((5, 5)))
    assert basis.shape == (5, 0)
