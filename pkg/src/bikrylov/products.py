"""Weighted inner products and the paired 2n-dimensional system.

A nonsymmetric system ``A x = b`` and its transposed companion
``A.T xt = bt`` can be treated as one block-diagonal system acting on
primal/shadow vector pairs.  Under the swap-weighted bilinear form

    quasi_inner((x, xt), (y, yt)) = dot(xt, y) + dot(x, yt)

the block operator is self-adjoint, which is what lets symmetric-matrix
algorithms (CG, CR) be applied formally to the pair.  The form is symmetric
and bilinear but indefinite, so it induces no norm.

Neither the block operator nor the swap weight is ever materialized as a
2n-by-2n matrix; everything is evaluated blockwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SparseMatrix, as_vector, dot, matvec, matvec_transpose

__all__ = [
    "ExtendedSystem",
    "PairedVector",
    "extend_system",
    "h_inner",
    "quasi_inner",
]


@dataclass(frozen=True)
class PairedVector:
    """A primal/shadow pair of equal-length vectors.

    Supports the small amount of linear arithmetic needed to run blockwise
    recursions: ``u + v``, ``u - v`` and scalar multiplication.
    """

    primal: np.ndarray
    shadow: np.ndarray

    def __post_init__(self):
        p = as_vector(self.primal)
        s = as_vector(self.shadow, p.shape[0])
        object.__setattr__(self, "primal", p)
        object.__setattr__(self, "shadow", s)

    @property
    def n(self) -> int:
        return self.primal.shape[0]

    def __add__(self, other: "PairedVector") -> "PairedVector":
        return PairedVector(self.primal + other.primal, self.shadow + other.shadow)

    def __sub__(self, other: "PairedVector") -> "PairedVector":
        return PairedVector(self.primal - other.primal, self.shadow - other.shadow)

    def __rmul__(self, a: float) -> "PairedVector":
        return PairedVector(a * self.primal, a * self.shadow)

    def copy(self) -> "PairedVector":
        return PairedVector(self.primal.copy(), self.shadow.copy())


def h_inner(x, y, H: SparseMatrix | None = None) -> float:
    """Weighted inner product ``x.T @ H @ y``.

    ``H`` must be symmetric positive definite when supplied (caller-asserted,
    not verified); ``H=None`` is the identity marker and reduces to ``dot``.
    """
    if H is None:
        return dot(x, y)
    return dot(x, matvec(H, y))


def quasi_inner(xhat: PairedVector, yhat: PairedVector) -> float:
    """Swap-weighted bilinear form of two paired vectors.

    Evaluates ``dot(xhat.shadow, yhat.primal) + dot(xhat.primal, yhat.shadow)``.
    Symmetric and bilinear, but indefinite: pairing a vector with itself can
    be negative, so no norm is associated with this form.
    """
    return dot(xhat.shadow, yhat.primal) + dot(xhat.primal, yhat.shadow)


@dataclass(frozen=True)
class ExtendedSystem:
    """The paired system ``A x = b`` / ``A.T xt = bt`` held blockwise.

    ``apply`` gives the action of the block-diagonal operator
    ``diag(A, A.T)`` on a :class:`PairedVector`; the operator itself is never
    formed.
    """

    operator: SparseMatrix
    rhs: PairedVector
    start: PairedVector

    def __post_init__(self):
        n = self.operator.n_rows
        if self.operator.n_cols != n:
            raise ValueError("extended system requires a square operator")
        if self.rhs.n != n or self.start.n != n:
            raise ValueError("rhs/start length must equal the operator dimension")

    @property
    def n(self) -> int:
        return self.operator.n_rows

    def apply(self, v: PairedVector) -> PairedVector:
        """Block action: ``(A @ v.primal, A.T @ v.shadow)``."""
        return PairedVector(
            matvec(self.operator, v.primal),
            matvec_transpose(self.operator, v.shadow),
        )

    def initial_residual(self) -> PairedVector:
        """Residual of ``start``: ``rhs - apply(start)`` blockwise."""
        return self.rhs - self.apply(self.start)


def extend_system(
    A: SparseMatrix,
    b,
    btilde=None,
    x0=None,
    xtilde0=None,
) -> ExtendedSystem:
    """Package ``A``, right-hand sides and starting guesses as a block pair.

    ``x0`` and ``xtilde0`` default to zero vectors.  ``btilde`` defaults to a
    copy of the initial primal residual ``b - A @ x0``, which makes the
    initial shadow residual equal the initial primal residual; the shadow
    right-hand side has no independent role beyond fixing that residual.
    """
    n = A.n_rows
    if A.n_cols != n:
        raise ValueError("extend_system requires a square matrix")
    b = as_vector(b, n)
    x0 = np.zeros(n) if x0 is None else as_vector(x0, n)
    xtilde0 = np.zeros(n) if xtilde0 is None else as_vector(xtilde0, n)
    if btilde is None:
        btilde = b - matvec(A, x0) + matvec_transpose(A, xtilde0)
    else:
        btilde = as_vector(btilde, n)
    return ExtendedSystem(A, PairedVector(b, btilde), PairedVector(x0, xtilde0))
