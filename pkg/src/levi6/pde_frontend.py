"""Rank-4 distributions induced by a pair of first-order PDEs in solved form.

Two of the four jet coordinates (u_x, u_y, v_x, v_y) are given as functions
of x, y, u, v and the other two jets; the system is then a 6-dimensional
submanifold of the jet space and inherits the common kernel of
du - u_x dx - u_y dy and dv - v_x dx - v_y dy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .distribution import Structure6, VectorField
from .scalar_field import (
    ONE,
    ZERO,
    Chart,
    Expr,
    UnknownIdentifierError,
    is_zero,
    parse_expr,
    sub,
    total,
    mul,
)

JETS = ("u_x", "u_y", "v_x", "v_y")
ALIASES = {"p": "u_x", "q": "u_y", "r": "v_x", "s": "v_y"}
_SHORT = {v: k for k, v in ALIASES.items()}
BASE = ("x", "y", "u", "v")


class MalformedSystemError(ValueError):
    pass


def canonical_jet(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in JETS:
        raise MalformedSystemError(f"{name!r} is not one of {JETS} (or p, q, r, s)")
    return name


@dataclass(frozen=True)
class SolvedSystem:
    """``solved[k] = rhs[k]`` for two distinct jet variables."""

    chart: Chart
    solved: tuple[str, str]
    rhs: tuple[Expr, Expr]

    @property
    def unsolved(self) -> tuple[str, str]:
        return tuple(j for j in JETS if j not in self.solved)

    def jet_values(self) -> dict[str, Expr]:
        """u_x, u_y, v_x, v_y as expressions on the chart."""
        out = {}
        free = iter(self.chart.names[4:])
        for j in JETS:
            if j in self.solved:
                out[j] = self.rhs[self.solved.index(j)]
            else:
                out[j] = parse_expr(next(free), self.chart)
        return out


def default_chart(solved: Sequence[str], orientation: int = 1) -> Chart:
    free = [_SHORT[j] for j in JETS if j not in solved]
    return Chart(BASE + tuple(free), orientation)


def solved_system(equations: Mapping[str, str | Expr], chart: Chart | Sequence[str] | None = None,
                  orientation: int = 1) -> SolvedSystem:
    """Build a SolvedSystem from ``{jet: rhs}``.

    Jets may be written u_x/u_y/v_x/v_y or p/q/r/s.  The chart defaults to
    (x, y, u, v, j1, j2) with the unsolved jets named by their short alias;
    an explicit chart renames these six coordinates positionally.
    """
    if len(equations) != 2:
        raise MalformedSystemError("exactly two equations are required")
    solved = tuple(canonical_jet(k) for k in equations)
    if solved[0] == solved[1]:
        raise MalformedSystemError("the two solved jet variables must differ")
    if chart is None:
        chart = default_chart(solved, orientation)
    elif not isinstance(chart, Chart):
        chart = Chart(tuple(chart), orientation)
    unsolved = [j for j in JETS if j not in solved]
    # unsolved jets may be referred to by chart name, long or short spelling
    aliases = {}
    for j, name in zip(unsolved, chart.names[4:]):
        aliases[j] = name
        aliases[_SHORT[j]] = name
    for role, name in zip(BASE, chart.names[:4]):
        aliases[role] = name
    solved_spellings = {s for j in solved for s in (j, _SHORT[j])} - set(chart.names)
    rhs = []
    for key, text in equations.items():
        if isinstance(text, Expr):
            rhs.append(text)
            continue
        try:
            rhs.append(parse_expr(str(text), chart, {k: v for k, v in aliases.items()
                                                      if k not in solved_spellings}))
        except UnknownIdentifierError as exc:
            bad = str(text)[exc.position:].split()[0] if exc.position < len(str(text)) else ""
            if any(bad.startswith(sp) for sp in solved_spellings):
                raise MalformedSystemError(
                    f"right-hand side of {key} refers to a solved variable: {text!r}") from exc
            raise
    for e in rhs:
        extra = e.free_vars() - set(chart.names)
        if extra:
            raise MalformedSystemError(f"unknown variables {sorted(extra)}")
    return SolvedSystem(chart, solved, tuple(rhs))


def build_jet_structure(sys: SolvedSystem) -> Structure6:
    """Frame D_x, D_y, d_j1, d_j2 of H with complement (d_u, d_v)."""
    ch = sys.chart
    jets = sys.jet_values()
    P, Q, R, S = (jets[j] for j in JETS)
    Dx = VectorField(ch, (ONE, ZERO, P, R, ZERO, ZERO))
    Dy = VectorField(ch, (ZERO, ONE, Q, S, ZERO, ZERO))
    d = lambda k: VectorField.coordinate(ch, ch.names[k])  # noqa: E731
    return Structure6(ch, (Dx, Dy, d(4), d(5)), (d(2), d(3)))


def contact_pairings(sys: SolvedSystem, s: Structure6) -> list[Expr]:
    """<theta_k, X> for both contact forms and every frame field of H."""
    jets = sys.jet_values()
    theta = [
        (ONE, ZERO, jets["u_x"], jets["u_y"]),  # du - u_x dx - u_y dy
        (ZERO, ONE, jets["v_x"], jets["v_y"]),  # dv - v_x dx - v_y dy
    ]
    out = []
    for du, dv, jx, jy in theta:
        for X in s.h_frame:
            out.append(total([mul(du, X[2]), mul(dv, X[3]),
                              mul(-1, mul(jx, X[0])), mul(-1, mul(jy, X[1]))]))
    return out


def certify(sys: SolvedSystem, s: Structure6) -> bool:
    return is_zero(contact_pairings(sys, s), s.chart)


def from_equations(equations: Mapping[str, str], chart=None, orientation: int = 1) -> Structure6:
    sys = solved_system(equations, chart, orientation)
    s = build_jet_structure(sys)
    if not certify(sys, s):
        raise AssertionError("frame does not annihilate the contact forms")
    return s


# the two models the theory is anchored on
CAUCHY_RIEMANN = {"v_x": "-u_y", "v_y": "u_x"}
DECOUPLED = {"u_y": "0", "v_x": "0"}
