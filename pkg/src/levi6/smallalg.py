"""Small linear algebra for 2-forms on a 4-space and binary quadratic forms.

The formulas are written with plain ``+ - *`` so the same functions accept
floats, complex numbers, numpy arrays (elementwise over sample points) and
Expr entries.  A 4x4 antisymmetric matrix is anything indexable as
``A[i][j]`` (nested lists, numpy arrays).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


class NotSimpleError(ValueError):
    """A 2-form expected to be decomposable has a non-negligible Pfaffian."""


class ZeroFormError(ValueError):
    pass


class ZeroPolynomialError(ValueError):
    pass


class RankDeficientError(np.linalg.LinAlgError):
    pass


class InconsistentError(np.linalg.LinAlgError):
    pass


def antisym(entries: dict, zero=0) -> list[list]:
    """4x4 antisymmetric matrix from ``{(i, j): a_ij}`` with 1-based i < j."""
    A = [[zero] * 4 for _ in range(4)]
    for (i, j), v in entries.items():
        if not 1 <= i < j <= 4:
            raise ValueError(f"bad index pair {(i, j)}")
        A[i - 1][j - 1] = v
        A[j - 1][i - 1] = -v
    return A


def _get(A, i, j):
    return A[i][j]


def pfaffian(A):
    """a12*a34 - a13*a24 + a14*a23."""
    g = _get
    return g(A, 0, 1) * g(A, 2, 3) - g(A, 0, 2) * g(A, 1, 3) + g(A, 0, 3) * g(A, 1, 2)


def polar_pfaffian(A, B):
    """Coefficient of st in Pf(sA + tB), i.e. Pf(A+B) - Pf(A) - Pf(B)."""
    g = _get
    return (
        g(A, 0, 1) * g(B, 2, 3) + g(B, 0, 1) * g(A, 2, 3)
        - g(A, 0, 2) * g(B, 1, 3) - g(B, 0, 2) * g(A, 1, 3)
        + g(A, 0, 3) * g(B, 1, 2) + g(B, 0, 3) * g(A, 1, 2)
    )


def dual_form(A, zero=0) -> list[list]:
    """The antisymmetric matrix D with A @ D = -Pf(A) * I.

    For a simple (Pf = 0) form the columns of D lie in the kernel of A.
    """
    g = _get
    return antisym(
        {
            (1, 2): g(A, 2, 3),
            (1, 3): -g(A, 1, 3),
            (1, 4): g(A, 1, 2),
            (2, 3): g(A, 0, 3),
            (2, 4): -g(A, 0, 2),
            (3, 4): g(A, 0, 1),
        },
        zero,
    )


@dataclass(frozen=True)
class QuadraticForm:
    """q(s, t) = a s^2 + b s t + c t^2."""

    a: object
    b: object
    c: object

    def __call__(self, s, t):
        return self.a * s * s + self.b * s * t + self.c * t * t

    @property
    def discriminant(self):
        return self.b * self.b - 4 * self.a * self.c


def pfaffian_quadratic(A, B) -> QuadraticForm:
    """The quadratic form (s, t) -> Pf(sA + tB)."""
    return QuadraticForm(pfaffian(A), polar_pfaffian(A, B), pfaffian(B))


@dataclass(frozen=True)
class QuadraticRoots:
    """Projective roots of a real binary quadratic.

    ``kind`` is "complex" (conjugate pair, positive imaginary part of the
    free coordinate first), "real" (two distinct real roots) or "degenerate"
    (|discriminant| within tolerance; ``roots`` then holds the double root
    when the form is nonzero).
    """

    kind: str
    roots: tuple
    discriminant: float


def normalize_projective(v: Sequence[complex]) -> tuple:
    """Scale so the largest-magnitude coordinate (first on ties) equals 1."""
    mags = [abs(x) for x in v]
    k = max(range(len(v)), key=lambda i: (mags[i], -i))
    if mags[k] == 0:
        raise ValueError("zero vector has no projective class")
    return tuple(x / v[k] for x in v)


def quadratic_roots(q: QuadraticForm, tol: float = 1e-9) -> QuadraticRoots:
    a, b, c = float(q.a), float(q.b), float(q.c)
    scale = abs(a) + abs(b) + abs(c)
    if scale == 0:
        raise ZeroPolynomialError("the zero polynomial has no roots")
    disc = b * b - 4 * a * c
    sign_b = 1.0 if b >= 0 else -1.0
    if abs(disc) <= tol * scale * scale:
        # double root: 2a s + b t = 0 (or b s + 2c t = 0 when a = 0)
        root = (-b, 2 * a) if abs(a) >= abs(c) else (2 * c, -b)
        return QuadraticRoots("degenerate", (normalize_projective(root),), disc)
    if disc > 0:
        w = -(b + sign_b * np.sqrt(disc)) / 2
        # s/t = w/a and s/t = c/w, written projectively so a = 0 or c = 0 is fine
        r1 = normalize_projective((w, a))
        r2 = normalize_projective((c, w))
        return QuadraticRoots("real", (tuple(map(float, r1)), tuple(map(float, r2))), disc)
    w = -(b + 1j * sign_b * np.sqrt(-disc)) / 2
    r1 = normalize_projective((complex(w), complex(a)))
    r2 = tuple(x.conjugate() for x in r1)
    free = 1 if r1[0] == 1 else 0
    if r1[free].imag < r2[free].imag:
        r1, r2 = r2, r1
    return QuadraticRoots("complex", (r1, r2), disc)


# ---------------------------------------------------------------------------
# pivoted elimination


def _full_pivot_echelon(M: np.ndarray, tol: float):
    """Row-reduce a copy of M with full pivoting.

    Returns (R, cols, rank, ops) where R is the reduced matrix, ``cols`` the
    column permutation and ``ops`` the row operations for replaying on a
    right-hand side.
    """
    R = np.array(M, dtype=complex if np.iscomplexobj(M) else float, copy=True)
    m, n = R.shape
    cols = list(range(n))
    scale = np.max(np.abs(R)) if R.size else 0.0
    rank = 0
    ops = []
    for k in range(min(m, n)):
        sub = np.abs(R[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[i, j] <= tol * max(scale, np.finfo(float).tiny):
            break
        i += k
        j += k
        R[[k, i]] = R[[i, k]]
        R[:, [k, j]] = R[:, [j, k]]
        cols[k], cols[j] = cols[j], cols[k]
        ops.append(("swap", k, i))
        for r in range(k + 1, m):
            f = R[r, k] / R[k, k]
            if f != 0:
                R[r] -= f * R[k]
                ops.append(("axpy", r, k, f))
        rank += 1
    return R, cols, rank, ops


def solve_linear(M, rhs, tol: float = 1e-9) -> np.ndarray:
    """Solve an m x n system of full column rank by full-pivot elimination.

    Overdetermined systems must be consistent:
    ||Mx - rhs|| <= tol * (||M|| ||x|| + ||rhs||).
    """
    M = np.asarray(M)
    rhs = np.asarray(rhs)
    complex_ = np.iscomplexobj(M) or np.iscomplexobj(rhs)
    M = M.astype(complex if complex_ else float)
    rhs = rhs.astype(M.dtype)
    m, n = M.shape
    R, cols, rank, ops = _full_pivot_echelon(M, tol)
    y = rhs.copy()
    for op in ops:
        if op[0] == "swap":
            _, k, i = op
            y[[k, i]] = y[[i, k]]
        else:
            _, r, k, f = op
            y[r] -= f * y[k]
    if rank < n:
        if rank == 0 and np.linalg.norm(rhs) > 0:
            raise InconsistentError("zero matrix with nonzero right-hand side")
        raise RankDeficientError(f"matrix has rank {rank} < {n} columns")
    z = np.zeros(n, dtype=M.dtype)
    for k in range(n - 1, -1, -1):
        z[k] = (y[k] - R[k, k + 1:n] @ z[k + 1:n]) / R[k, k]
    x = np.zeros(n, dtype=M.dtype)
    x[cols] = z
    resid = np.linalg.norm(M @ x - rhs)
    if resid > tol * (np.linalg.norm(M) * np.linalg.norm(x) + np.linalg.norm(rhs)):
        raise InconsistentError(f"system is inconsistent (residual {resid:.3g})")
    return x


def null_space(M, tol: float = 1e-9) -> np.ndarray:
    """Basis of ker M (as columns) by full-pivot elimination."""
    M = np.asarray(M)
    R, cols, rank, _ = _full_pivot_echelon(M, tol)
    n = M.shape[1]
    basis = []
    for free in range(rank, n):
        z = np.zeros(n, dtype=R.dtype)
        z[free] = 1
        for k in range(rank - 1, -1, -1):
            z[k] = -(R[k, k + 1:n] @ z[k + 1:n]) / R[k, k]
        v = np.zeros(n, dtype=R.dtype)
        v[cols] = z
        basis.append(v)
    return np.array(basis).T if basis else np.zeros((n, 0), dtype=R.dtype)


def two_form_kernel(omega, tol: float = 1e-9) -> np.ndarray:
    """Two independent vectors v with omega(v, .) = 0, as a 4x2 array.

    ``omega`` is a (complex) antisymmetric 4x4 matrix that must be simple:
    |Pf(omega)| <= tol * ||omega||^2.
    """
    W = np.asarray(omega, dtype=complex)
    norm = np.linalg.norm(W)
    if norm == 0:
        raise ZeroFormError("the zero form has a 4-dimensional kernel")
    pf = pfaffian(W)
    if abs(pf) > tol * norm * norm:
        raise NotSimpleError(f"form is not simple (Pf = {pf:.3g})")
    # omega(v, .) = v^T W = -(W v)^T, so the kernel is ker W
    K = null_space(W, tol=np.sqrt(tol))
    if K.shape[1] != 2:
        raise NotSimpleError(f"kernel has dimension {K.shape[1]}, expected 2")
    return K
