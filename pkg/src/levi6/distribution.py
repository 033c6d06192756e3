"""Vector fields, adapted frames, the Levi form and the L^L classification.

A :class:`Structure6` fixes a frame ``e1..e4`` of the rank-4 distribution H
and two complement fields ``f1, f2`` lifting a basis of Q = TM/H.  Everything
downstream works with *frame coefficients*: a vector field is a 6-vector of
expressions (c_1..c_4, d_1, d_2) meaning sum c_a e_a + sum d_alpha f_alpha.
Brackets of such fields are expanded through the structure functions
[F_i, F_j] = sum_m c^m_ij F_m, which are computed once, symbolically, from an
exact inverse of the frame matrix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import smallalg
from .scalar_field import (
    ONE,
    ZERO,
    Chart,
    Expr,
    add,
    as_expr,
    differentiate,
    div,
    evaluate_many,
    mul,
    neg,
    parse_expr,
    sample_points,
    sub,
    to_text,
    total,
)

DEFAULT_TOL = 1e-9
H_SLOTS = range(4)
Q_SLOTS = range(4, 6)


class FrameSingularError(np.linalg.LinAlgError):
    pass


class DependentFieldsError(np.linalg.LinAlgError):
    pass


# ---------------------------------------------------------------------------
# vector fields in chart coordinates


@dataclass(frozen=True)
class VectorField:
    chart: Chart
    components: tuple[Expr, ...]

    def __post_init__(self):
        comps = tuple(as_expr(c) for c in self.components)
        if len(comps) != 6:
            raise ValueError("a vector field on a 6-chart has 6 components")
        object.__setattr__(self, "components", comps)

    @classmethod
    def parse(cls, chart: Chart, texts: Sequence[str], aliases=None) -> VectorField:
        return cls(chart, tuple(parse_expr(t, chart, aliases) for t in texts))

    @classmethod
    def coordinate(cls, chart: Chart, name: str) -> VectorField:
        k = chart.index(name)
        return cls(chart, tuple(ONE if i == k else ZERO for i in range(6)))

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other: VectorField) -> VectorField:
        return VectorField(self.chart, tuple(add(a, b) for a, b in zip(self, other)))

    def __sub__(self, other: VectorField) -> VectorField:
        return VectorField(self.chart, tuple(sub(a, b) for a, b in zip(self, other)))

    def __neg__(self) -> VectorField:
        return VectorField(self.chart, tuple(neg(a) for a in self))

    def scaled(self, g) -> VectorField:
        return VectorField(self.chart, tuple(mul(g, a) for a in self))

    def __rmul__(self, g) -> VectorField:
        return self.scaled(g)

    def derivative(self, g: Expr) -> Expr:
        """X(g) = sum_l X^l d_l g."""
        return total(mul(c, differentiate(g, n)) for c, n in zip(self, self.chart.names))

    def values(self, points) -> np.ndarray:
        """Components at the points, shape (n, 6)."""
        return evaluate_many(self.components, self.chart, points).T

    def texts(self) -> list[str]:
        return [to_text(c) for c in self]


def combine(chart: Chart, coeffs: Sequence, fields: Sequence[VectorField]) -> VectorField:
    """sum_k coeffs[k] * fields[k]."""
    comps = []
    for i in range(6):
        comps.append(total(mul(c, f[i]) for c, f in zip(coeffs, fields)))
    return VectorField(chart, tuple(comps))


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^i = sum_j X^j d_j Y^i - Y^j d_j X^i."""
    if X.chart.names != Y.chart.names:
        raise ValueError("vector fields live on different charts")
    return VectorField(X.chart, tuple(sub(X.derivative(Y[i]), Y.derivative(X[i])) for i in range(6)))


# ---------------------------------------------------------------------------
# exact inversion of the frame matrix


def invert_symbolic(F: list[list[Expr]], chart: Chart, probe: np.ndarray) -> list[list[Expr]]:
    """Gauss-Jordan inverse of a square Expr matrix.

    Pivots are chosen by evaluating candidates at the probe points and taking
    the one whose smallest magnitude there is largest, so the inverse is
    well defined across the probed region.  Zero entries fold away, which
    keeps structured (e.g. unit-triangular) frames cheap.
    """
    n = len(F)
    A = [list(row) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(F)]
    for k in range(n):
        candidates = [r for r in range(k, n) if A[r][k] is not ZERO]
        if not candidates:
            raise FrameSingularError("frame matrix is singular")
        vals = evaluate_many([A[r][k] for r in candidates], chart, probe)
        vals = np.where(np.isnan(vals), 0.0, np.abs(vals))
        best = int(np.argmax(vals.min(axis=1)))
        if vals[best].min() <= 1e-12:
            raise FrameSingularError("no pivot is bounded away from zero on the sample region")
        p = candidates[best]
        A[k], A[p] = A[p], A[k]
        piv = A[k][k]
        if piv is not ONE:
            A[k] = [div(x, piv) for x in A[k]]
        for r in range(n):
            if r == k or A[r][k] is ZERO:
                continue
            f = A[r][k]
            A[r] = [sub(x, mul(f, y)) for x, y in zip(A[r], A[k])]
    return [row[n:] for row in A]


# ---------------------------------------------------------------------------
# the structure


@dataclass(frozen=True)
class Structure6:
    """A chart with a frame (e1..e4) of H and complement fields (f1, f2)."""

    chart: Chart
    h_frame: tuple[VectorField, ...]
    complement: tuple[VectorField, ...]
    probe_seed: int = field(default=12345, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "h_frame", tuple(self.h_frame))
        object.__setattr__(self, "complement", tuple(self.complement))
        if len(self.h_frame) != 4 or len(self.complement) != 2:
            raise ValueError("need 4 frame fields for H and 2 complement fields")
        for X in self.fields:
            if X.chart.names != self.chart.names:
                raise ValueError("frame field on a different chart")

    @property
    def fields(self) -> tuple[VectorField, ...]:
        return self.h_frame + self.complement

    @property
    def orientation(self) -> int:
        return self.chart.orientation

    def with_orientation(self, orientation: int) -> Structure6:
        return Structure6(Chart(self.chart.names, orientation), self.h_frame, self.complement,
                          self.probe_seed)

    # -- numeric views ---------------------------------------------------
    def frame_matrix(self) -> list[list[Expr]]:
        """Rows are chart components, columns the frame fields."""
        return [[X[i] for X in self.fields] for i in range(6)]

    def frame_values(self, points) -> np.ndarray:
        """Frame matrices at the points, shape (n, 6, 6), columns = fields."""
        flat = [X[i] for i in range(6) for X in self.fields]
        vals = evaluate_many(flat, self.chart, points)
        return vals.T.reshape(-1, 6, 6)

    def check_frame(self, points, tol: float = DEFAULT_TOL) -> np.ndarray:
        """Boolean mask of the points where the frame is invertible."""
        F = self.frame_values(points)
        ok = ~np.isnan(F).any(axis=(1, 2))
        dets = np.zeros(len(F))
        dets[ok] = np.linalg.det(F[ok])
        norms = np.prod(np.linalg.norm(np.nan_to_num(F), axis=1), axis=1)
        return ok & (np.abs(dets) > tol * norms)

    @cached_property
    def probe(self) -> np.ndarray:
        return sample_points(24, seed=self.probe_seed)

    # -- symbolic calculus ----------------------------------------------
    @cached_property
    def coframe(self) -> list[list[Expr]]:
        """Rows are the dual 1-forms of the frame, in chart components."""
        return invert_symbolic(self.frame_matrix(), self.chart, self.probe)

    def frame_coefficients(self, V: VectorField) -> list[Expr]:
        """Symbolic coefficients of V in the frame."""
        return [total(mul(w, v) for w, v in zip(row, V)) for row in self.coframe]

    @cached_property
    def structure_functions(self) -> dict[tuple[int, int], list[Expr]]:
        """c[(i, j)] = frame coefficients of [F_i, F_j] for i < j."""
        F = self.fields
        return {
            (i, j): self.frame_coefficients(lie_bracket(F[i], F[j]))
            for i, j in itertools.combinations(range(6), 2)
        }

    def along(self, i: int, g: Expr) -> Expr:
        """Derivative of g along frame field i."""
        if g.is_const:
            return ZERO
        return self.fields[i].derivative(g)

    def bracket(self, x: Sequence, y: Sequence, components: Sequence[int] = range(6)) -> list[Expr]:
        """Frame coefficients of [X, Y] for X, Y given by frame coefficients.

        [fF_i, gF_j] = fg[F_i, F_j] + f F_i(g) F_j - g F_j(f) F_i, summed.
        Only the requested components are built.
        """
        x = [as_expr(a) for a in x]
        y = [as_expr(a) for a in y]
        c = self.structure_functions
        out = []
        for m in components:
            terms = []
            for (i, j), cij in c.items():
                if cij[m] is ZERO:
                    continue
                w = sub(mul(x[i], y[j]), mul(x[j], y[i]))
                if w is not ZERO:
                    terms.append(mul(w, cij[m]))
            for i in range(6):
                if x[i] is not ZERO:
                    terms.append(mul(x[i], self.along(i, y[m])))
                if y[i] is not ZERO:
                    terms.append(neg(mul(y[i], self.along(i, x[m]))))
            out.append(total(terms))
        return out

    def to_chart(self, coeffs: Sequence) -> VectorField:
        """The chart vector field with the given frame coefficients."""
        return combine(self.chart, coeffs, self.fields)

    def describe(self) -> dict:
        return {
            "chart": list(self.chart.names),
            "orientation": self.chart.orientation,
            "h_frame": [X.texts() for X in self.h_frame],
            "complement": [X.texts() for X in self.complement],
        }


def unit(k: int) -> list[Expr]:
    return [ONE if i == k else ZERO for i in range(6)]


def express_in_frame(V: VectorField, s: Structure6, pt, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Numeric frame coefficients of V at one point."""
    pt = np.asarray(pt, dtype=float)[None, :]
    if not s.check_frame(pt, tol)[0]:
        raise FrameSingularError(f"frame is singular at {tuple(pt[0])}")
    F = s.frame_values(pt)[0]
    v = V.values(pt)[0]
    return smallalg.solve_linear(F, v, tol)


# ---------------------------------------------------------------------------
# Levi form


@dataclass(frozen=True)
class LeviForm:
    """L(e_a, e_b) = L1[a][b] f1 + L2[a][b] f2 (mod H), symbolic."""

    L1: tuple[tuple[Expr, ...], ...]
    L2: tuple[tuple[Expr, ...], ...]

    @property
    def components(self):
        return (self.L1, self.L2)

    def values(self, chart: Chart, points) -> np.ndarray:
        """Shape (n, 2, 4, 4)."""
        flat = [L[a][b] for L in self.components for a in range(4) for b in range(4)]
        return evaluate_many(flat, chart, points).T.reshape(-1, 2, 4, 4)

    def apply(self, x: Sequence, y: Sequence) -> list[Expr]:
        """Q-components of L(X, Y) for H-vectors given by 4 coefficients."""
        out = []
        for L in self.components:
            out.append(total(
                mul(mul(x[a], y[b]), L[a][b])
                for a in range(4) for b in range(4)
                if a != b and x[a] is not ZERO and y[b] is not ZERO and L[a][b] is not ZERO
            ))
        return out


def levi_form(s: Structure6) -> LeviForm:
    c = s.structure_functions
    mats = []
    for alpha in (4, 5):
        entries = {(a + 1, b + 1): c[(a, b)][alpha] for a, b in itertools.combinations(H_SLOTS, 2)}
        mats.append(tuple(tuple(row) for row in smallalg.antisym(entries, ZERO)))
    return LeviForm(*mats)


def levi_quadratic(L: LeviForm) -> smallalg.QuadraticForm:
    """a = Pf(L1), b = polar(L1, L2), c = Pf(L2)."""
    return smallalg.pfaffian_quadratic(L.L1, L.L2)


# ---------------------------------------------------------------------------
# classification

ELLIPTIC, HYPERBOLIC, DEGENERATE = "Elliptic", "Hyperbolic", "Degenerate"


@dataclass(frozen=True)
class Classification:
    variant: str
    a: float
    b: float
    c: float
    discriminant: float

    def as_dict(self) -> dict:
        return {"variant": self.variant, "a": self.a, "b": self.b, "c": self.c,
                "discriminant": self.discriminant}


def classify_values(a, b, c, tol: float = DEFAULT_TOL) -> Classification:
    a, b, c = float(a), float(b), float(c)
    disc = b * b - 4 * a * c
    scale = (abs(a) + abs(b) + abs(c)) ** 2
    if disc < -tol * scale:
        variant = ELLIPTIC
    elif disc > tol * scale:
        variant = HYPERBOLIC
    else:
        variant = DEGENERATE
    return Classification(variant, a, b, c, disc)


def quadratic_values(s: Structure6, points, L: LeviForm | None = None) -> np.ndarray:
    """(a, b, c) at each point, shape (n, 3)."""
    q = levi_quadratic(L or levi_form(s))
    return evaluate_many([as_expr(q.a), as_expr(q.b), as_expr(q.c)], s.chart, points).T


def classify(s: Structure6, pt, tol: float = DEFAULT_TOL, L: LeviForm | None = None) -> Classification:
    pt = np.asarray(pt, dtype=float)[None, :]
    if not s.check_frame(pt, tol)[0]:
        raise FrameSingularError(f"frame is singular at {tuple(pt[0])}")
    a, b, c = quadratic_values(s, pt, L)[0]
    if np.isnan([a, b, c]).any():
        from .scalar_field import DomainError

        raise DomainError(f"Levi form undefined at {tuple(pt[0])}")
    return classify_values(a, b, c, tol)


def classify_many(s: Structure6, points, tol: float = DEFAULT_TOL, L: LeviForm | None = None):
    vals = quadratic_values(s, points, L)
    return [classify_values(*row, tol) for row in vals]


# ---------------------------------------------------------------------------
# Frobenius


def span_residuals(fields: Sequence[VectorField], targets: Sequence[VectorField], points,
                   tol: float = DEFAULT_TOL) -> np.ndarray:
    """Relative distance of each target from span(fields), per point.

    Shape (n, len(targets)); raises DependentFieldsError when the fields are
    not independent at some point.
    """
    n = len(points)
    M = np.stack([X.values(points) for X in fields], axis=2)  # (n, 6, k)
    T = np.stack([Y.values(points) for Y in targets], axis=2)
    out = np.zeros((n, len(targets)))
    for p in range(n):
        sv = np.linalg.svd(M[p], compute_uv=False)
        if sv[-1] <= tol * sv[0]:
            raise DependentFieldsError(f"fields are dependent at {tuple(points[p])}")
        coef, *_ = np.linalg.lstsq(M[p], T[p], rcond=None)
        resid = T[p] - M[p] @ coef
        scale = np.linalg.norm(M[p]) * np.linalg.norm(coef, axis=0) + np.linalg.norm(T[p], axis=0)
        out[p] = np.linalg.norm(resid, axis=0) / np.maximum(scale, 1.0)
    return out


def frobenius_residual(fields: Sequence[VectorField], points, tol: float = DEFAULT_TOL) -> float:
    brackets = [lie_bracket(X, Y) for X, Y in itertools.combinations(fields, 2)]
    if not brackets:
        return 0.0
    return float(span_residuals(fields, brackets, points, tol).max())


def frobenius_integrable(fields: Sequence[VectorField], s: Structure6 | None, points,
                         tol: float = DEFAULT_TOL) -> bool:
    """True iff every pairwise bracket stays in span(fields) at every point."""
    return frobenius_residual(fields, np.atleast_2d(points), tol) <= tol
