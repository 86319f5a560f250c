"""
Dense real-matrix kernels used by the manifold geometry.

Features:
- symmetric / skew-symmetric parts
- matrix exponential (scaling and squaring with a degree-13 Padé approximant)
  plus a truncated-Taylor oracle
- spectral solver for C U + U C = R with spd C, plus a Kronecker oracle
- inertia of a symmetric matrix, orthonormal nullspace bases and a
  sign-normalised orthonormalisation

Dependencies:
- numpy / scipy.linalg for the factorizations

All functions are pure: inputs are never modified.
"""

import logging
import math
from typing import NamedTuple

import numpy as np
import scipy.linalg as spla

from config.logging import setup_logging
from istiefel.core.errors import (
    AsymmetricMatrixError,
    DefinitenessError,
    DegenerateInputError,
    NonFiniteError,
    RangeError,
    ShapeError,
)

setup_logging()
logger = logging.getLogger(__name__)

# |λ| <= INERTIA_TOL * max(1, ||S||_2) counts as a zero eigenvalue
INERTIA_TOL = 1e-10
SYMMETRY_TOL = 1e-10

# Padé(13) coefficients and the 1-norm bound below which no scaling is needed
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152


class Inertia(NamedTuple):
    n_pos: int
    n_neg: int
    n_zero: int


def as_matrix(M, name: str = 'M') -> np.ndarray:
    """Return `M` as a finite 2-D float array or raise."""
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2:
        raise ShapeError(f'{name} must be a 2-D matrix, got shape {arr.shape}')
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f'{name} contains NaN or Inf entries')
    return arr


def as_square(M, name: str = 'M') -> np.ndarray:
    arr = as_matrix(M, name)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError(f'{name} must be square, got shape {arr.shape}')
    return arr


def sym(M) -> np.ndarray:
    """½(M + Mᵀ)."""
    M = as_square(M)
    return 0.5 * (M + M.T)


def skew(M) -> np.ndarray:
    """½(M − Mᵀ)."""
    M = as_square(M)
    return 0.5 * (M - M.T)


def is_symmetric(M: np.ndarray, tol: float = SYMMETRY_TOL) -> bool:
    scale = max(1.0, float(np.linalg.norm(M)))
    return float(np.linalg.norm(M - M.T)) <= tol * scale


def _pade13(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    b = _PADE13
    ident = np.eye(M.shape[0])
    M2 = M @ M
    M4 = M2 @ M2
    M6 = M2 @ M4
    U = M @ (
        M6 @ (b[13] * M6 + b[11] * M4 + b[9] * M2)
        + b[7] * M6
        + b[5] * M4
        + b[3] * M2
        + b[1] * ident
    )
    V = (
        M6 @ (b[12] * M6 + b[10] * M4 + b[8] * M2)
        + b[6] * M6
        + b[4] * M4
        + b[2] * M2
        + b[0] * ident
    )
    return U, V


def expm(M) -> np.ndarray:
    """
    Matrix exponential by scaling and squaring.

    The matrix is scaled by 2^-s so that its 1-norm is below θ₁₃, the
    degree-13 Padé approximant is evaluated, and the result is squared s
    times. A single fixed degree is used for every input.

    :raises RangeError: when the result overflows
    """
    M = as_square(M)
    if M.shape[0] == 0:
        return np.zeros((0, 0))

    norm = float(np.linalg.norm(M, ord=1))
    if not math.isfinite(norm):
        raise RangeError('expm input norm overflows')
    s = max(0, int(math.ceil(math.log2(norm / _THETA13)))) if norm > 0 else 0
    if s > 1000:
        raise RangeError(f'expm input 1-norm {norm:.3e} is out of range')
    scaled = M / 2.0**s

    U, V = _pade13(scaled)
    try:
        R = spla.solve(V - U, V + U)
    except spla.LinAlgError as e:
        raise RangeError(f'expm: Padé denominator is singular ({e})') from e

    with np.errstate(over='ignore', invalid='ignore'):
        for _ in range(s):
            R = R @ R

    if not np.all(np.isfinite(R)):
        raise RangeError(f'expm overflowed for input with 1-norm {norm:.3e}')
    return R


def expm_series(M, terms: int = 50) -> np.ndarray:
    """Truncated Taylor series on the scaled matrix followed by squaring (oracle)."""
    M = as_square(M)
    norm = float(np.linalg.norm(M, ord=1))
    s = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0 else 0
    scaled = M / 2.0**s

    term = np.eye(M.shape[0])
    total = term.copy()
    for i in range(1, terms + 1):
        term = term @ scaled / i
        total = total + term
    for _ in range(s):
        total = total @ total
    return total


def lyap_spd(C, R) -> np.ndarray:
    """
    Solve C U + U C = R for symmetric U, with C symmetric positive-definite.

    Spectral method: C = Q Λ Qᵀ, then Ũ_ij = (QᵀRQ)_ij / (λ_i + λ_j).

    :raises DefinitenessError: when C is not positive-definite
    """
    C = as_square(C, 'C')
    R = as_square(R, 'R')
    if C.shape != R.shape:
        raise ShapeError(f'C and R must have the same shape, got {C.shape} and {R.shape}')
    if C.shape[0] == 0:
        return np.zeros((0, 0))

    lam, Q = np.linalg.eigh(sym(C))
    if lam[-1] <= 0 or lam[0] <= 1e-13 * lam[-1]:
        raise DefinitenessError(
            f'Lyapunov coefficient is not positive-definite (eigenvalues in [{lam[0]:.3e}, {lam[-1]:.3e}])'
        )

    R_tilde = Q.T @ sym(R) @ Q
    U_tilde = R_tilde / (lam[:, None] + lam[None, :])
    return sym(Q @ U_tilde @ Q.T)


def lyap_kronecker(C, R) -> np.ndarray:
    """Brute-force (I⊗C + C⊗I) vec(U) = vec(R) solve, O(k⁶); test oracle only."""
    C = as_square(C, 'C')
    R = as_square(R, 'R')
    k = C.shape[0]
    ident = np.eye(k)
    # column-major vec: vec(CU) = (I⊗C)vec(U), vec(UC) = (Cᵀ⊗I)vec(U)
    system = np.kron(ident, C) + np.kron(C.T, ident)
    vec_u = np.linalg.solve(system, R.reshape(-1, order='F'))
    return vec_u.reshape((k, k), order='F')


def inertia(S) -> Inertia:
    """Count positive, negative and numerically zero eigenvalues of a symmetric matrix."""
    S = as_square(S, 'S')
    if not is_symmetric(S):
        raise AsymmetricMatrixError('inertia requires a symmetric matrix')
    if S.shape[0] == 0:
        return Inertia(0, 0, 0)

    lam = np.linalg.eigvalsh(sym(S))
    tol = INERTIA_TOL * max(1.0, float(np.max(np.abs(lam))))
    n_pos = int(np.sum(lam > tol))
    n_neg = int(np.sum(lam < -tol))
    return Inertia(n_pos, n_neg, S.shape[0] - n_pos - n_neg)


def nullspace_basis(X) -> np.ndarray:
    """
    Orthonormal basis X⊥ of the Euclidean orthogonal complement of range(X).

    :raises DegenerateInputError: if X is rank deficient
    """
    X = as_matrix(X, 'X')
    n, k = X.shape
    if k > n:
        raise ShapeError(f'X must have at most as many columns as rows, got {X.shape}')
    if k == 0:
        return np.eye(n)

    Q, R, _ = spla.qr(X, mode='full', pivoting=True)
    diag = np.abs(np.diag(R))
    if diag[0] == 0 or diag[-1] <= 1e-12 * diag[0]:
        raise DegenerateInputError(f'X is rank deficient (|R_kk|/|R_11| = {diag[-1] / max(diag[0], 1e-300):.3e})')
    return Q[:, k:]


def orthonormal_columns(M) -> np.ndarray:
    """Thin QR orthogonal factor with the diagonal of R made positive."""
    M = as_matrix(M)
    Q, R = np.linalg.qr(M)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def make_rng(seed: int | None) -> np.random.Generator:
    """Seeded generator over the counter-based Philox bit generator."""
    return np.random.Generator(np.random.Philox(seed))
