"""The canonical splitting H = H+ (+) H- of a hyperbolic (M, H).

The Levi quadratic has two real projective roots psi.  Each root form
psi o L is a simple real 2-form on H whose kernel is a 2-plane; the two
kernels are transverse and the bracket of one with the other stays in H,
since L(xi, eta) is killed by both roots.  Labels are fixed by the sign of
xi1 ^ xi2 ^ [xi1, xi2] ^ eta1 ^ eta2 ^ [eta1, eta2] against the chart.

Kernel sections come from the dual matrix of the root form (its columns
span the kernel of a simple form), so every field below is an expression
tree and brackets are exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import smallalg
from .distribution import (
    DEFAULT_TOL,
    HYPERBOLIC,
    LeviForm,
    Structure6,
    VectorField,
    classify_many,
    frobenius_residual,
    levi_form,
    levi_quadratic,
)
from .elliptic import matrix_values
from .scalar_field import ZERO, Expr, add, as_expr, div, evaluate_many, mul, neg, sqrt, sub


class NotHyperbolicError(ValueError):
    pass


class SplittingError(ValueError):
    """Kernels not transverse, orientation form vanishing, or a singular adapted basis."""


def _vals(exprs, chart, points):
    return evaluate_many([as_expr(e) for e in exprs], chart, points)


def _det2(u, v):
    return sub(mul(u[0], v[1]), mul(u[1], v[0]))


def root_covectors(L: LeviForm, chart, points) -> list[tuple[Expr, Expr]]:
    """Two symbolic real roots psi of q(s, t) = a s^2 + b st + c t^2.

    Each root has two projective representatives, (2c, -b + r sqrt(disc))
    and (-b - r sqrt(disc), 2a); at any hyperbolic point at least one is
    nonzero, and the one bounded furthest from zero on ``points`` is kept.
    """
    q = levi_quadratic(L)
    a, b, c = as_expr(q.a), as_expr(q.b), as_expr(q.c)
    disc = sub(mul(b, b), mul(4, mul(a, c)))
    root = sqrt(disc)
    out = []
    for r in (1, -1):
        rr = mul(r, root)
        forms = [(mul(2, c), add(neg(b), rr)), (sub(neg(b), rr), mul(2, a))]
        best, best_size = None, -1.0
        for psi in forms:
            v = _vals(list(psi), chart, points)
            size = float(np.nanmin(np.hypot(v[0], v[1])))
            if size > best_size:
                best, best_size = psi, size
        if not best_size > 1e-12:
            raise SplittingError("root covector degenerates on the working points")
        out.append(best)
    return out


def root_form(L: LeviForm, psi) -> list[list[Expr]]:
    return [[add(mul(psi[0], L.L1[i][j]), mul(psi[1], L.L2[i][j])) for j in range(4)]
            for i in range(4)]


def kernel_sections(omega, chart, points) -> tuple[list[Expr], list[Expr]]:
    """Two columns of dual(omega) spanning ker(omega) on all of ``points``."""
    dual = smallalg.dual_form(omega, ZERO)
    cols = [[dual[i][j] for i in range(4)] for j in range(4)]
    vals = matrix_values(dual, chart, points)  # (n, 4, 4), columns
    best, best_score = None, -1.0
    for i, j in itertools.combinations(range(4), 2):
        u, v = vals[:, :, i], vals[:, :, j]
        minors = np.abs(u[:, :, None] * v[:, None, :] - u[:, None, :] * v[:, :, None])
        wedge = minors.max(axis=(1, 2))
        scale = np.maximum(np.linalg.norm(vals, axis=(1, 2)) ** 2, 1e-300)
        score = float(np.nanmin(wedge / scale))
        if score > best_score:
            best, best_score = (i, j), score
    if not best_score > 1e-10:
        raise SplittingError("root form kernel is not 2-dimensional on the working points")
    return cols[best[0]], cols[best[1]]


def _h6(v4):
    return [as_expr(x) for x in v4] + [ZERO, ZERO]


@dataclass
class HyperbolicSplitting:
    """Frames of H+-, Q+-, T+- in frame coefficients of the structure."""

    structure: Structure6
    L: LeviForm
    h_plus: tuple[list[Expr], list[Expr]]
    h_minus: tuple[list[Expr], list[Expr]]
    bracket_plus: list[Expr]  # [xi1, xi2], a lift of Q+
    bracket_minus: list[Expr]

    @property
    def q_plus(self) -> list[Expr]:
        return self.bracket_plus[4:]

    @property
    def q_minus(self) -> list[Expr]:
        return self.bracket_minus[4:]

    @property
    def t_plus(self):
        return (*self.h_plus, self.bracket_plus)

    @property
    def t_minus(self):
        return (*self.h_minus, self.bracket_minus)

    def chart_fields(self, frames) -> list[VectorField]:
        return [self.structure.to_chart(x) for x in frames]

    def values(self, frames, points) -> np.ndarray:
        """Frame coefficients of the given fields, shape (n, 6, k)."""
        flat = [x for f in frames for x in f]
        v = _vals(flat, self.structure.chart, points).T.reshape(len(points), len(frames), 6)
        return np.transpose(v, (0, 2, 1))


def orientation_form(s: Structure6, xi, eta, brackets, points) -> np.ndarray:
    """det(xi1, xi2, [xi1, xi2], eta1, eta2, [eta1, eta2]) in chart coordinates."""
    F = s.frame_values(points)
    cols = [xi[0], xi[1], brackets[0], eta[0], eta[1], brackets[1]]
    C = np.transpose(_vals([x for c in cols for x in c], s.chart, points).T.reshape(
        len(points), 6, 6), (0, 2, 1))
    return np.linalg.det(F @ C)


def require_hyperbolic(s: Structure6, L: LeviForm, points, tol: float):
    for pt, cls in zip(points, classify_many(s, points, tol, L)):
        if cls.variant != HYPERBOLIC:
            raise NotHyperbolicError(f"structure is {cls.variant} at {tuple(np.round(pt, 6))}")


def hyperbolic_splitting(s: Structure6, points, tol: float = DEFAULT_TOL,
                         L: LeviForm | None = None) -> HyperbolicSplitting:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    L = L or levi_form(s)
    require_hyperbolic(s, L, points, tol)
    kernels = []
    for psi in root_covectors(L, s.chart, points):
        k1, k2 = kernel_sections(root_form(L, psi), s.chart, points)
        kernels.append((_h6(k1), _h6(k2)))
    (A1, A2), (B1, B2) = kernels
    # matrix_values puts row k of its argument in row k, so rows are the vectors
    basis = matrix_values([v[:4] for v in (A1, A2, B1, B2)], s.chart, points)
    dets = np.linalg.det(basis)
    scale = np.prod(np.linalg.norm(basis, axis=2), axis=1)
    if np.any(np.abs(dets) <= 1e-8 * scale):
        raise SplittingError("root kernels are not transverse at some working point")
    brA = s.bracket(A1, A2)
    brB = s.bracket(B1, B2)
    form = orientation_form(s, (A1, A2), (B1, B2), (brA, brB), points)
    fscale = np.max(np.abs(form))
    nonzero = np.abs(form) > 1e-12 * max(fscale, 1.0)
    if not nonzero.any():
        raise SplittingError("orientation 6-form vanishes at every working point")
    signs = np.sign(form[nonzero])
    if not (signs == signs[0]).all():
        raise SplittingError("orientation 6-form changes sign across the working points")
    if int(signs[0]) == s.orientation:
        return HyperbolicSplitting(s, L, (A1, A2), (B1, B2), brA, brB)
    return HyperbolicSplitting(s, L, (B1, B2), (A1, A2), brB, brA)


# ---------------------------------------------------------------------------
# obstructions


def S_plus_general(split: HyperbolicSplitting, xi, eta) -> Expr:
    """Q- coefficient of [xi, eta] modulo T+ (+) H-."""
    V = split.structure.bracket(xi, eta, components=(4, 5))
    return div(_det2(split.q_plus, V), _det2(split.q_plus, split.q_minus))


def S_minus_general(split: HyperbolicSplitting, xi, eta) -> Expr:
    """Q+ coefficient of [xi, eta] modulo T- (+) H+."""
    V = split.structure.bracket(xi, eta, components=(4, 5))
    return div(_det2(V, split.q_minus), _det2(split.q_plus, split.q_minus))


@dataclass
class ObstructionSpm:
    """S+[i][j] = S+(t+_i, h+_j) for the 3 frame fields of T+ and 2 of H+."""

    plus: list[list[Expr]]
    minus: list[list[Expr]]

    def values(self, chart, points) -> tuple[np.ndarray, np.ndarray]:
        flat = [x for M in (self.plus, self.minus) for row in M for x in row]
        v = _vals(flat, chart, points).T.reshape(len(points), 2, 3, 2)
        return v[:, 0], v[:, 1]


def obstruction_S_pm(split: HyperbolicSplitting) -> ObstructionSpm:
    plus = [[S_plus_general(split, xi, eta) for eta in split.h_plus] for xi in split.t_plus]
    minus = [[S_minus_general(split, xi, eta) for eta in split.h_minus] for xi in split.t_minus]
    return ObstructionSpm(plus, minus)


def adapted_coefficients(split: HyperbolicSplitting, V: Sequence[Expr], points) -> np.ndarray:
    """Coefficients of V in (t+, h-, [h-, h-]) by a pointwise solve.

    An independent route to S+: the last coefficient is the Q- component.
    """
    basis = [*split.t_plus, *split.h_minus, split.bracket_minus]
    B = split.values(basis, points)
    Vv = split.values([list(V)], points)[:, :, 0]
    out = np.empty((len(points), 6))
    for p in range(len(points)):
        try:
            out[p] = smallalg.solve_linear(B[p], Vv[p])
        except np.linalg.LinAlgError as exc:
            raise SplittingError(f"adapted basis singular at {tuple(points[p])}") from exc
    return out


# ---------------------------------------------------------------------------
# the full pipeline


@dataclass
class HyperbolicInvariants:
    split: HyperbolicSplitting
    S: ObstructionSpm
    points: np.ndarray
    tol: float

    @property
    def structure(self) -> Structure6:
        return self.split.structure

    def S_values(self, points=None):
        return self.S.values(self.structure.chart, self.points if points is None else points)

    def max_S(self, points=None) -> tuple[float, float]:
        sp, sm = self.S_values(points)
        return float(np.nanmax(np.abs(sp))), float(np.nanmax(np.abs(sm)))

    def mixed_bracket_residual(self, points=None) -> float:
        """max |[h+_i, h-_j] mod H| over the frames and points."""
        pts = self.points if points is None else points
        s = self.structure
        comps = [x for xi in self.split.h_plus for eta in self.split.h_minus
                 for x in s.bracket(xi, eta, components=(4, 5))]
        return float(np.nanmax(np.abs(_vals(comps, s.chart, pts))))

    def t_rank(self, points=None) -> tuple[int, int]:
        pts = self.points if points is None else points
        ranks = []
        for frames in (self.split.t_plus, self.split.t_minus):
            V = self.split.values(list(frames), pts)
            ranks.append(int(min(np.linalg.matrix_rank(V[p], tol=1e-9 * max(1, np.abs(V[p]).max()))
                                 for p in range(len(pts)))))
        return tuple(ranks)

    def q_split_determinant(self, points=None) -> np.ndarray:
        pts = self.points if points is None else points
        return _vals([_det2(self.split.q_plus, self.split.q_minus)], self.structure.chart, pts)[0]

    def frobenius_residuals(self, points=None) -> tuple[float, float]:
        pts = self.points if points is None else points
        return (frobenius_residual(self.split.chart_fields(self.split.t_plus), pts, self.tol),
                frobenius_residual(self.split.chart_fields(self.split.t_minus), pts, self.tol))

    def integrable(self, points=None) -> tuple[bool, bool]:
        rp, rm = self.frobenius_residuals(points)
        return rp <= self.tol, rm <= self.tol

    def is_flat(self) -> bool:
        return max(self.max_S()) <= self.tol


def hyperbolic_invariants(s: Structure6, points, tol: float = DEFAULT_TOL,
                          L: LeviForm | None = None) -> HyperbolicInvariants:
    split = hyperbolic_splitting(s, points, tol, L)
    return HyperbolicInvariants(split, obstruction_S_pm(split), np.atleast_2d(points), tol)


def hyperbolic_flatness_verdict(s: Structure6, points, tol: float = DEFAULT_TOL) -> bool:
    """True iff S+ and S- vanish (<= tol) at every point."""
    return hyperbolic_invariants(s, points, tol).is_flat()
