"""
Exception hierarchy of the toolkit.

Every failure the geometry or the solver can signal derives from
`IStiefelError` and from the closest builtin exception, so callers may catch
either the specific kind, the package root, or a plain `ValueError`.
"""


class IStiefelError(Exception):
    """Root of all toolkit errors."""


# --- linalg kernels ---
class ShapeError(IStiefelError, ValueError):
    """Operand has the wrong dimensions."""


class NonFiniteError(IStiefelError, ValueError):
    """Operand contains NaN or Inf."""


class DefinitenessError(IStiefelError, ArithmeticError):
    """A matrix required to be symmetric positive-definite is not."""


class RangeError(IStiefelError, OverflowError):
    """Result would overflow or the input norm is outside the supported range."""


class DegenerateInputError(IStiefelError, ValueError):
    """Operand is rank deficient."""


# --- manifold ---
class AsymmetricMatrixError(IStiefelError, ValueError):
    """A matrix required to be symmetric is not."""


class SingularMatrixError(IStiefelError, ArithmeticError):
    """A matrix required to be nonsingular is (numerically) singular."""


class NonInvolutoryError(IStiefelError, ValueError):
    """J does not satisfy J @ J = I."""


class InertiaViolationError(IStiefelError, ValueError):
    """The signature of J does not fit into the signature of A: the manifold is empty."""


class InfeasiblePointError(IStiefelError, ValueError):
    """X^T A X differs from J by more than the feasibility tolerance."""


class NotTangentError(IStiefelError, ValueError):
    """sym(X^T A Z) is not (numerically) zero."""


class BasePointMismatchError(IStiefelError, ValueError):
    """A tangent vector was used at a point it does not belong to."""


# --- metrics / solver ---
class InvalidParameterError(IStiefelError, ValueError):
    """A metric or solver parameter is outside its admissible range."""


class LineSearchFailure(IStiefelError, ArithmeticError):
    """Backtracking hit max_backtracks without satisfying the nonmonotone condition."""

    def __init__(
        self,
        message: str,
        *,
        backtracks: int,
        tau: float,
        f_trial: float,
        reference: float,
        evaluations: int = 0,
    ):
        super().__init__(message)
        self.evaluations = evaluations
        self.backtracks = backtracks
        self.tau = tau
        self.f_trial = f_trial
        self.reference = reference
