"""Dense symmetric linear algebra for small matrices.

Everything here is sized for desk-scale problems (dimension <= 64): graph
Laplacians of small agent networks and the 3x3 certificate blocks used by
the feasibility checks. The eigensolver is a hand-rolled cyclic Jacobi
iteration rather than a LAPACK call so that results are deterministic down
to the bit and the module carries no numerical dependency beyond numpy
array storage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_DIM = 64

__all__ = [
    "SymMatrix",
    "EigenDecomposition",
    "ComplementBasis",
    "sym_eigen",
    "is_negative_definite",
    "leading_principal_minors",
    "complement_basis",
    "centering_matrix",
]


@dataclass(frozen=True)
class SymMatrix:
    """Dense real symmetric matrix; symmetry is enforced by averaging."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("SymMatrix requires a square 2-d array")
        if a.shape[0] < 1:
            raise ValueError("SymMatrix dimension must be >= 1")
        a = 0.5 * (a + a.T)
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def frobenius(self) -> float:
        return float(np.sqrt(np.sum(self.entries * self.entries)))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted ascending with column-orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=float)
        v = np.asarray(self.eigenvectors, dtype=float)
        w.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "eigenvalues", w)
        object.__setattr__(self, "eigenvectors", v)


@dataclass(frozen=True)
class ComplementBasis:
    """Orthonormal basis of the subspace orthogonal to the all-ones vector."""

    n: int
    columns: np.ndarray

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=float)
        if cols.shape != (self.n, self.n - 1):
            raise ValueError("ComplementBasis columns must have shape (n, n-1)")
        cols.flags.writeable = False
        object.__setattr__(self, "columns", cols)


def _off_diagonal_norm(mat: np.ndarray) -> float:
    # summed from the entries themselves; a total-minus-diagonal difference
    # would bottom out at ||A||*sqrt(eps) from cancellation
    stripped = mat.copy()
    np.fill_diagonal(stripped, 0.0)
    return float(np.sqrt(np.sum(stripped * stripped)))


def sym_eigen(a: SymMatrix) -> EigenDecomposition:
    """Full eigendecomposition by cyclic Jacobi rotations.

    Sweeps run until the off-diagonal Frobenius norm drops below
    1e-12 * (1 + ||A||_F), with a hard cap of 100 sweeps (an error past the
    cap, which unconditional convergence of cyclic Jacobi makes unreachable
    for well-formed input). Eigenvalues are returned ascending; each
    eigenvector's sign is fixed so its first nonzero component is positive,
    which keeps downstream traces reproducible.
    """
    n = a.dim
    if n > MAX_DIM:
        raise ValueError(f"sym_eigen supports dim <= {MAX_DIM}, got {n}")
    mat = np.array(a.entries, dtype=float)
    vec = np.eye(n)
    threshold = 1e-12 * (1.0 + a.frobenius())

    converged = False
    for _ in range(100):
        if _off_diagonal_norm(mat) < threshold:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = mat[p, q]
                if apq == 0.0:
                    continue
                diff = mat[q, q] - mat[p, p]
                if abs(apq) < 1e-200 * abs(diff):
                    # the rotation angle underflows; the entry is dead weight
                    mat[p, q] = 0.0
                    mat[q, p] = 0.0
                    continue
                tau = diff / (2.0 * apq)
                if abs(tau) > 1.0e10:
                    # sqrt(1 + tau^2) == |tau| at this magnitude; avoids overflow
                    t = 0.5 / tau
                elif tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # two-sided rotation J^T A J on the (p, q) plane
                col_p = mat[:, p].copy()
                col_q = mat[:, q].copy()
                mat[:, p] = c * col_p - s * col_q
                mat[:, q] = s * col_p + c * col_q
                row_p = mat[p, :].copy()
                row_q = mat[q, :].copy()
                mat[p, :] = c * row_p - s * row_q
                mat[q, :] = s * row_p + c * row_q
                mat[p, q] = 0.0
                mat[q, p] = 0.0
                vec_p = vec[:, p].copy()
                vec_q = vec[:, q].copy()
                vec[:, p] = c * vec_p - s * vec_q
                vec[:, q] = s * vec_p + c * vec_q
    if not converged and _off_diagonal_norm(mat) >= threshold:
        raise ArithmeticError("Jacobi iteration did not converge in 100 sweeps")

    order = np.argsort(np.diag(mat), kind="stable")
    values = np.diag(mat)[order].copy()
    vectors = vec[:, order].copy()
    for k in range(n):
        col = vectors[:, k]
        scale = np.max(np.abs(col))
        nz = np.flatnonzero(np.abs(col) > 1e-12 * scale)
        if nz.size and col[nz[0]] < 0.0:
            vectors[:, k] = -col
    return EigenDecomposition(eigenvalues=values, eigenvectors=vectors)


def _det(mat: np.ndarray) -> float:
    """Determinant by Gaussian elimination with partial pivoting."""
    a = np.array(mat, dtype=float)
    k = a.shape[0]
    sign = 1.0
    det = 1.0
    for col in range(k):
        pivot = col + int(np.argmax(np.abs(a[col:, col])))
        if a[pivot, col] == 0.0:
            return 0.0
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            sign = -sign
        det *= a[col, col]
        a[col + 1 :, col:] -= np.outer(a[col + 1 :, col] / a[col, col], a[col, col:])
    return sign * det


def leading_principal_minors(a: SymMatrix) -> np.ndarray:
    """Determinants of the k x k leading principal submatrices, k = 1..dim."""
    return np.array([_det(a.entries[:k, :k]) for k in range(1, a.dim + 1)])


def _sylvester_negative_definite(a: SymMatrix) -> bool:
    # minors alternate sign starting negative: (-1)^k det(A_k) > 0
    minors = leading_principal_minors(a)
    for k, d in enumerate(minors, start=1):
        if d == 0.0 or math.copysign(1.0, d) != (-1.0) ** k:
            return False
    return True


def is_negative_definite(a: SymMatrix, tol: float = 0.0) -> tuple[bool, float]:
    """Strict negative-definiteness test with built-in cross-validation.

    Returns (verdict, margin) where margin is the largest eigenvalue and the
    verdict is True iff margin < -tol. The eigenvalue route is cross-checked
    against Sylvester's criterion computed from leading principal minors;
    disagreement away from the numerical tie zone raises, since it would
    indicate an eigensolver defect.
    """
    dec = sym_eigen(a)
    margin = float(dec.eigenvalues[-1])
    sylvester = _sylvester_negative_definite(a)
    if sylvester != (margin < 0.0) and abs(margin) > 1e-9 * (1.0 + a.frobenius()):
        raise ArithmeticError(
            "eigenvalue and Sylvester definiteness tests disagree "
            f"(margin={margin!r})"
        )
    return margin < -tol, margin


def complement_basis(n: int) -> ComplementBasis:
    """Orthonormal n x (n-1) basis of the complement of span{1_n}.

    Built from the Householder reflection that maps e_n to 1_n/sqrt(n); the
    first n-1 columns of that reflection span the complement. The
    construction is deterministic, so repeated calls agree bitwise.
    """
    if n < 2:
        raise ValueError("complement_basis requires n >= 2")
    u = np.full(n, 1.0 / math.sqrt(n))
    v = u.copy()
    v[n - 1] -= 1.0
    beta = 2.0 / float(v @ v)
    h = np.eye(n) - beta * np.outer(v, v)
    return ComplementBasis(n=n, columns=h[:, : n - 1])


def centering_matrix(n: int) -> SymMatrix:
    """The projector I - (1/n) 1 1^T onto the disagreement subspace."""
    if n < 1:
        raise ValueError("centering_matrix requires n >= 1")
    return SymMatrix(np.eye(n) - np.full((n, n), 1.0 / n))
