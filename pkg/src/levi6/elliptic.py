"""The canonical almost complex structure of an elliptic (M, H).

At each point the Levi quadratic q(s, t) = Pf(s L1 + t L2) has a conjugate
pair of roots psi = (1, x +- i y).  For either root the complex 2-form
psi o L = A + iB is simple and its kernel is declared the -i eigenspace of
J on H, which gives J_H = -A^{-1} B; psi o J_Q = i psi fixes J on Q.  With
D = 4ac - b^2 > 0 and sigma = +-1 selecting the root, both have closed forms

    J_Q = sigma / sqrt(D) * [[b, -2a], [2c, -b]]
    J_H = sigma / sqrt(D) * (2 dual(L1) L2 + b I)

so J is an expression tree and can be differentiated exactly.  sigma is
pinned by requiring the orientation of (v1, Jv1, v2, Jv2, f1, Jf1) to match
the chart.  The zero-H-part lift of J_Q is then corrected by K: TM -> H so
that the obstruction S becomes conjugate linear in its second slot.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import smallalg
from .distribution import (
    DEFAULT_TOL,
    ELLIPTIC,
    LeviForm,
    Structure6,
    classify_many,
    levi_form,
    levi_quadratic,
    unit,
)
from .scalar_field import (
    ONE,
    ZERO,
    Expr,
    add,
    as_expr,
    div,
    evaluate_many,
    mul,
    neg,
    sqrt,
    sub,
    total,
)


class NotEllipticError(ValueError):
    pass


class OrientationError(ValueError):
    pass


class DefKError(np.linalg.LinAlgError):
    """The correction system is singular or inconsistent at a working point."""


# ---------------------------------------------------------------------------
# small symbolic matrix helpers (lists of lists of Expr)


def _matmul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    return [[total(mul(A[i][t], B[t][j]) for t in range(k)) for j in range(m)] for i in range(n)]


def _matvec(A, v):
    return [total(mul(A[i][t], v[t]) for t in range(len(v))) for i in range(len(A))]


def _scale(g, A):
    return [[mul(g, x) for x in row] for row in A]


def _values(exprs, chart, points):
    return evaluate_many([as_expr(e) for e in exprs], chart, points)


def matrix_values(M, chart, points) -> np.ndarray:
    """Evaluate an Expr matrix at the points, shape (n, rows, cols)."""
    rows, cols = len(M), len(M[0])
    flat = [M[i][j] for i in range(rows) for j in range(cols)]
    return _values(flat, chart, points).T.reshape(-1, rows, cols)


# ---------------------------------------------------------------------------
# J on H and Q


@dataclass(frozen=True)
class RootData:
    """Symbolic pieces of the Levi quadratic used by every later step."""

    a: Expr
    b: Expr
    c: Expr
    D: Expr  # 4ac - b^2, positive on elliptic points
    sqrtD: Expr


def root_data(L: LeviForm) -> RootData:
    q = levi_quadratic(L)
    a, b, c = as_expr(q.a), as_expr(q.b), as_expr(q.c)
    D = sub(mul(4, mul(a, c)), mul(b, b))
    return RootData(a, b, c, D, sqrt(D))


def j_candidates(L: LeviForm, sigma: int = 1, rd: RootData | None = None):
    """(J_H, J_Q) as Expr matrices for the root with sign ``sigma``.

    Columns are images: J_H[b][a] is the e_b-coefficient of J e_a.
    """
    rd = rd or root_data(L)
    k = div(sigma, rd.sqrtD)
    JQ = [[mul(k, rd.b), mul(k, mul(-2, rd.a))],
          [mul(k, mul(2, rd.c)), mul(k, neg(rd.b))]]
    DL = _matmul(smallalg.dual_form(L.L1, ZERO), [list(r) for r in L.L2])
    JH = [[mul(k, add(mul(2, DL[i][j]), rd.b if i == j else ZERO)) for j in range(4)]
          for i in range(4)]
    return JH, JQ


def root_covector(rd_values, sigma: int) -> tuple[complex, complex]:
    """psi = (1, x + i sigma y0) from numeric (a, b, c); normalized."""
    a, b, c = rd_values
    D = 4 * a * c - b * b
    tau = complex(-b / (2 * c), sigma * np.sqrt(D) / (2 * c))
    return smallalg.normalize_projective((1.0 + 0j, tau))


def j_on_H(psi: Sequence[complex], L_at_point) -> np.ndarray:
    """J on H at one point from the kernel of psi o L (pointwise route).

    ``L_at_point`` has shape (2, 4, 4).  The kernel is the -i eigenspace:
    for w = u + iv in the kernel, J u = v and J v = -u.
    """
    L1, L2 = np.asarray(L_at_point)
    omega = psi[0] * L1 + psi[1] * L2
    W = smallalg.two_form_kernel(omega)
    # the real and imaginary parts of the two kernel vectors span H
    U = np.column_stack([W[:, 0].real, W[:, 0].imag, W[:, 1].real, W[:, 1].imag])
    JU = np.column_stack([W[:, 0].imag, -W[:, 0].real, W[:, 1].imag, -W[:, 1].real])
    return JU @ np.linalg.inv(U)


def j_on_Q(psi: Sequence[complex]) -> np.ndarray:
    """The 2x2 matrix M with psi(M v) = i psi(v)."""
    p1, p2 = psi
    # real 2x2 M solves [p1 p2] M = i [p1 p2]; split into real/imag rows
    lhs = np.array([[p1.real, p2.real], [p1.imag, p2.imag]])
    rhs = np.array([[(1j * p1).real, (1j * p2).real], [(1j * p1).imag, (1j * p2).imag]])
    return np.linalg.solve(lhs, rhs)


def check_JL(s: Structure6, L: LeviForm, JH, JQ, points) -> float:
    """max || L(J e_a, e_b) - J_Q L(e_a, e_b) || over frame pairs and points."""
    Lv = L.values(s.chart, points)  # (n, 2, 4, 4)
    JHv = JH if isinstance(JH, np.ndarray) else matrix_values(JH, s.chart, points)
    JQv = JQ if isinstance(JQ, np.ndarray) else matrix_values(JQ, s.chart, points)
    if JHv.ndim == 2:
        JHv = np.broadcast_to(JHv, (len(Lv), 4, 4))
    if JQv.ndim == 2:
        JQv = np.broadcast_to(JQv, (len(Lv), 2, 2))
    # L(J e_a, e_b)^c = sum_d JH[d, a] L^c[d, b]
    lhs = np.einsum("nda,ncdb->ncab", JHv, Lv)
    rhs = np.einsum("nce,neab->ncab", JQv, Lv)
    return float(np.nanmax(np.linalg.norm(lhs - rhs, axis=1)))


# ---------------------------------------------------------------------------
# the almost complex structure on TM


@dataclass(frozen=True)
class AcsField:
    """J in frame coefficients.

    ``JH`` (4x4) acts on e1..e4, ``JQ`` (2x2) on f1, f2 modulo H and ``K``
    (4x2) holds the H-components of J f1, J f2; ``lift`` is the H-part that
    was put into the initial extension before correction.
    """

    JH: list
    JQ: list
    K: list
    sigma: int
    lift: list | None = None

    def matrix(self) -> list[list[Expr]]:
        """6x6 frame-basis matrix; column i is J F_i."""
        M = [[ZERO] * 6 for _ in range(6)]
        for i in range(4):
            for j in range(4):
                M[i][j] = self.JH[i][j]
        for al in range(2):
            for be in range(2):
                M[4 + be][4 + al] = self.JQ[be][al]
            for a in range(4):
                M[a][4 + al] = self.K[a][al]
        return M

    def apply(self, x: Sequence) -> list[Expr]:
        return _matvec(self.matrix(), [as_expr(t) for t in x])

    def column(self, i: int) -> list[Expr]:
        return [row[i] for row in self.matrix()]

    def values(self, chart, points) -> np.ndarray:
        return matrix_values(self.matrix(), chart, points)


def _lift_columns(JQ, lift):
    """Frame coefficients of the initial extension applied to f1, f2."""
    cols = []
    for al in range(2):
        h = [lift[a][al] if lift is not None else ZERO for a in range(4)]
        cols.append(h + [JQ[0][al], JQ[1][al]])
    return cols


def tilde_S(s: Structure6, JQ, lift=None) -> list[list[list[Expr]]]:
    """S~(f_alpha, e_a) = [f_alpha, e_a] + J[J~ f_alpha, e_a] mod H.

    Indexed [alpha][a] -> 2 Q-components.
    """
    out = []
    for al, Jf in enumerate(_lift_columns(JQ, lift)):
        row = []
        for a in range(4):
            plain = s.bracket(unit(4 + al), unit(a), components=(4, 5))
            turned = s.bracket(Jf, unit(a), components=(4, 5))
            row.append([add(plain[c], total(mul(JQ[c][d], turned[d]) for d in range(2)))
                        for c in range(2)])
        out.append(row)
    return out


def defk_rhs(St, JH, JQ):
    """T(f_alpha, e_b) = (J S~(f_alpha, e_b) + S~(f_alpha, J e_b)) / 2.

    K f_alpha is the unique X in H with L(X, e_b) = T(f_alpha, e_b).
    """
    out = []
    for al in range(2):
        row = []
        for b in range(4):
            Jside = [total(mul(JQ[c][d], St[al][b][d]) for d in range(2)) for c in range(2)]
            # S~(f, J e_b) = sum_d JH[d][b] S~(f, e_d)
            turned = [total(mul(JH[d][b], St[al][d][c]) for d in range(4)) for c in range(2)]
            row.append([div(add(Jside[c], turned[c]), 2) for c in range(2)])
        out.append(row)
    return out


def solve_K(L: LeviForm, rd: RootData, T) -> list[list[Expr]]:
    """Closed-form solution of L(X, e_b) = T_b for X in H.

    With A' = 2c L1 - b L2 (twice c times the real part of psi o L) and
    r = 2c T^1 - b T^2, the real part of the complexified system reads
    A'^T X = r, hence X = dual(A') r / (c D).
    """
    a, b, c, D = rd.a, rd.b, rd.c, rd.D
    Ap = [[sub(mul(mul(2, c), L.L1[i][j]), mul(b, L.L2[i][j])) for j in range(4)] for i in range(4)]
    dual = smallalg.dual_form(Ap, ZERO)
    den = mul(c, D)
    K = [[ZERO, ZERO] for _ in range(4)]
    for al in range(2):
        r = [sub(mul(mul(2, c), T[al][bb][0]), mul(b, T[al][bb][1])) for bb in range(4)]
        X = _matvec(dual, r)
        for i in range(4):
            K[i][al] = div(X[i], den)
    return K


def defk_residual(s: Structure6, L: LeviForm, T, K, points, tol: float = DEFAULT_TOL) -> float:
    """Solve the full 8x4 system L(X, e_b) = T_b pointwise and compare with K.

    Returns the largest relative discrepancy; raises DefKError when the
    overdetermined system is singular or inconsistent.
    """
    Lv = L.values(s.chart, points)
    Tv = np.stack([matrix_values([[T[al][bb][c] for bb in range(4)] for c in range(2)], s.chart,
                                 points) for al in range(2)], axis=1)  # (n, 2, 2, 4)
    Kv = matrix_values(K, s.chart, points)
    worst = 0.0
    for p in range(len(points)):
        # row (c, b): sum_a X_a L^c[a, b]
        M = np.concatenate([Lv[p, 0].T, Lv[p, 1].T])
        for al in range(2):
            rhs = np.concatenate([Tv[p, al, 0], Tv[p, al, 1]])
            try:
                X = smallalg.solve_linear(M, rhs, tol)
            except (smallalg.RankDeficientError, smallalg.InconsistentError) as exc:
                raise DefKError(f"correction system fails at {tuple(points[p])}: {exc}") from exc
            scale = max(1.0, np.linalg.norm(X))
            worst = max(worst, float(np.linalg.norm(X - Kv[p, :, al]) / scale))
    return worst


def extend_j(s: Structure6, L: LeviForm, JH, JQ, lift=None, rd: RootData | None = None,
             sigma: int = 1, points=None, tol: float = DEFAULT_TOL) -> AcsField:
    """J = J~ + K starting from the lift J~ f_alpha = J_Q f_alpha + lift_alpha.

    When ``points`` are given the closed-form K is cross-checked against a
    pivoted solve of all 8 real equations at each point.
    """
    rd = rd or root_data(L)
    St = tilde_S(s, JQ, lift)
    T = defk_rhs(St, JH, JQ)
    K = solve_K(L, rd, T)
    if points is not None and len(points):
        err = defk_residual(s, L, T, K, points, tol)
        if err > 1e3 * tol:
            raise DefKError(f"closed-form correction disagrees with pointwise solve ({err:.3g})")
    if lift is not None:
        K = [[add(lift[a][al], K[a][al]) for al in range(2)] for a in range(4)]
    return AcsField(JH, JQ, K, sigma, lift)


# ---------------------------------------------------------------------------
# orientation and the canonical root


def orientation_determinants(s: Structure6, JH, JQ, points, tol: float = 1e-6) -> np.ndarray:
    """det(v1, Jv1, v2, Jv2, f1, Jf1) in chart coordinates, per point.

    v1 = e1, v2 is whichever of e2, e3, e4 is most independent of {e1, Je1}.  The
    H-part of J f1 does not change the determinant, so J_H and J_Q suffice.
    """
    F = s.frame_values(points)
    JHv = matrix_values(JH, s.chart, points)
    JQv = matrix_values(JQ, s.chart, points)
    dets = np.empty(len(points))
    for p in range(len(points)):
        H = np.eye(4)
        v1 = H[:, 0]
        Jv1 = JHv[p] @ v1
        # any v2 outside span{v1, Jv1} gives the same sign; take the best conditioned
        conds = []
        for k in (1, 2, 3):
            sv = np.linalg.svd(np.column_stack([v1, Jv1, H[:, k]]), compute_uv=False)
            conds.append(sv[-1] / sv[0])
        k = int(np.argmax(conds))
        if conds[k] <= tol:
            dets[p] = 0.0
            continue
        v2 = H[:, k + 1]
        Jv2 = JHv[p] @ v2
        w = np.array([1.0, 0.0])
        Jw = JQv[p] @ w
        cols = [np.concatenate([v, np.zeros(2)]) for v in (v1, Jv1, v2, Jv2)]
        cols += [np.concatenate([np.zeros(4), w]), np.concatenate([np.zeros(4), Jw])]
        dets[p] = np.linalg.det(F[p] @ np.column_stack(cols))
    return dets


def choose_sigma(s: Structure6, L: LeviForm, points, rd: RootData | None = None) -> int:
    """Root sign whose J orients the chart as declared, checked at all points."""
    JH, JQ = j_candidates(L, 1, rd)
    dets = orientation_determinants(s, JH, JQ, points)
    good = np.abs(dets) > 1e-12
    if not good.any():
        raise OrientationError("orientation determinant vanishes at every working point")
    signs = np.sign(dets[good])
    if not (signs == signs[0]).all():
        raise OrientationError("J-induced orientation changes sign across the working points")
    return int(signs[0]) * s.orientation


def canonical_root(s: Structure6, L: LeviForm, pt, tol: float = DEFAULT_TOL):
    """The root psi of L^L at ``pt`` whose J induces the chart orientation."""
    pt = np.atleast_2d(np.asarray(pt, dtype=float))
    cls = classify_many(s, pt, tol, L)[0]
    if cls.variant != ELLIPTIC:
        raise NotEllipticError(f"structure is {cls.variant} at {tuple(pt[0])}")
    sigma = choose_sigma(s, L, pt)
    return root_covector((cls.a, cls.b, cls.c), sigma)


# ---------------------------------------------------------------------------
# obstruction S and the Nijenhuis tensor


def S_general(s: Structure6, J: AcsField, xi: Sequence, eta: Sequence) -> list[Expr]:
    """S(xi, eta) = [xi, eta] + J[J xi, eta] mod H, for frame-coefficient fields."""
    plain = s.bracket(xi, eta, components=(4, 5))
    turned = s.bracket(J.apply(xi), eta, components=(4, 5))
    return [add(plain[c], total(mul(J.JQ[c][d], turned[d]) for d in range(2))) for c in range(2)]


@dataclass(frozen=True)
class ObstructionS:
    """S(f_alpha, e_a) components: ``components[alpha][a]`` is a Q 2-vector."""

    components: list

    def flat(self) -> list[Expr]:
        return [self.components[al][a][c] for al in range(2) for a in range(4) for c in range(2)]

    def values(self, chart, points) -> np.ndarray:
        """Shape (n, 2, 4, 2)."""
        return _values(self.flat(), chart, points).T.reshape(-1, 2, 4, 2)


def obstruction_S(s: Structure6, L: LeviForm, J: AcsField) -> ObstructionS:
    return ObstructionS([[S_general(s, J, unit(4 + al), unit(a)) for a in range(4)]
                         for al in range(2)])


@dataclass(frozen=True)
class NijenhuisN:
    """N(F_i, F_j) for i < j as frame-coefficient 6-vectors."""

    components: dict

    def values(self, chart, points) -> np.ndarray:
        """Shape (n, 15, 6) in combinations order."""
        keys = sorted(self.components)
        flat = [x for k in keys for x in self.components[k]]
        return _values(flat, chart, points).T.reshape(-1, len(keys), 6)


def nijenhuis_general(s: Structure6, J: AcsField, x: Sequence, y: Sequence) -> list[Expr]:
    """N(X, Y) = [X,Y] + J[JX,Y] + J[X,JY] - [JX,JY]."""
    Jx, Jy = J.apply(x), J.apply(y)
    t1 = s.bracket(x, y)
    t2 = J.apply(s.bracket(Jx, y))
    t3 = J.apply(s.bracket(x, Jy))
    t4 = s.bracket(Jx, Jy)
    return [sub(add(add(t1[m], t2[m]), t3[m]), t4[m]) for m in range(6)]


def nijenhuis(s: Structure6, J: AcsField) -> NijenhuisN:
    return NijenhuisN({(i, j): nijenhuis_general(s, J, unit(i), unit(j))
                       for i, j in itertools.combinations(range(6), 2)})


# ---------------------------------------------------------------------------
# the full pipeline


@dataclass
class EllipticInvariants:
    structure: Structure6
    L: LeviForm
    roots: RootData
    J: AcsField
    S: ObstructionS
    points: np.ndarray
    tol: float
    _N: NijenhuisN | None = field(default=None, repr=False)

    @property
    def N(self) -> NijenhuisN:
        if self._N is None:
            self._N = nijenhuis(self.structure, self.J)
        return self._N

    def S_values(self, points=None) -> np.ndarray:
        return self.S.values(self.structure.chart, self.points if points is None else points)

    def max_S(self, points=None) -> float:
        return float(np.nanmax(np.abs(self.S_values(points))))

    def N_values(self, points=None) -> np.ndarray:
        return self.N.values(self.structure.chart, self.points if points is None else points)

    def max_N(self, points=None) -> float:
        return float(np.nanmax(np.linalg.norm(self.N_values(points), axis=2)))

    def is_flat(self) -> bool:
        return self.max_S() <= self.tol

    def canonical_root(self, pt) -> tuple:
        vals = _values([self.roots.a, self.roots.b, self.roots.c], self.structure.chart,
                       np.atleast_2d(pt))[:, 0]
        return root_covector(vals, self.J.sigma)


def require_elliptic(s: Structure6, L: LeviForm, points, tol: float):
    for pt, cls in zip(points, classify_many(s, points, tol, L)):
        if cls.variant != ELLIPTIC:
            raise NotEllipticError(f"structure is {cls.variant} at {tuple(np.round(pt, 6))}")


def elliptic_invariants(s: Structure6, points, tol: float = DEFAULT_TOL, lift=None,
                        L: LeviForm | None = None) -> EllipticInvariants:
    """Run J, K and S on ``s`` after checking ellipticity at ``points``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    L = L or levi_form(s)
    require_elliptic(s, L, points, tol)
    rd = root_data(L)
    sigma = choose_sigma(s, L, points, rd)
    JH, JQ = j_candidates(L, sigma, rd)
    J = extend_j(s, L, JH, JQ, lift=lift, rd=rd, sigma=sigma, points=points, tol=tol)
    return EllipticInvariants(s, L, rd, J, obstruction_S(s, L, J), points, tol)


def flatness_verdict(s: Structure6, points, tol: float = DEFAULT_TOL) -> bool:
    """True iff S vanishes (<= tol) at every point."""
    return elliptic_invariants(s, points, tol).is_flat()
