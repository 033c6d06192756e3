"""Differentiation, evaluation and probabilistic zero testing."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .expr import (
    ONE,
    ZERO,
    Chart,
    Expr,
    add,
    cos,
    div,
    mul,
    neg,
    postorder,
    power,
    sin,
    sub,
)

# |denominator| below this is treated as a pole
POLE_TOL = 1e-12
SAMPLE_HALF_WIDTH = 0.5


class DomainError(ArithmeticError):
    """Evaluation hit a pole, a negative square root or an overflow."""


class InconclusiveError(RuntimeError):
    """Too few valid sample points to decide a zero test."""


def differentiate(e: Expr, name: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to the variable ``name``.

    Results are cached on each node, so repeated differentiation of shared
    subtrees costs one pass over the DAG.
    """
    if name in e._dcache:
        return e._dcache[name]
    for node in postorder([e]):
        if name in node._dcache:
            continue
        node._dcache[name] = _derive(node, name)
    return e._dcache[name]


def _derive(node: Expr, name: str) -> Expr:
    op, args = node.op, node.args
    d = lambda child: child._dcache[name]  # noqa: E731
    if op == "const":
        return ZERO
    if op == "var":
        return ONE if args[0] == name else ZERO
    if op == "add":
        return add(d(args[0]), d(args[1]))
    if op == "sub":
        return sub(d(args[0]), d(args[1]))
    if op == "neg":
        return neg(d(args[0]))
    if op == "mul":
        a, b = args
        return add(mul(d(a), b), mul(a, d(b)))
    if op == "div":
        a, b = args
        da, db = d(a), d(b)
        if db is ZERO:
            return div(da, b)
        return sub(div(da, b), div(mul(a, db), power(b, 2)))
    if op == "pow":
        base, n = args
        return mul(mul(n, power(base, n - 1)), d(base))
    if op == "sqrt":
        (a,) = args
        return div(d(a), mul(2, node))
    if op == "sin":
        (a,) = args
        return mul(cos(a), d(a))
    if op == "cos":
        (a,) = args
        return neg(mul(sin(a), d(a)))
    if op == "exp":
        (a,) = args
        return mul(node, d(a))
    raise ValueError(f"unknown node {op}")


def gradient(e: Expr, chart: Chart) -> list[Expr]:
    return [differentiate(e, n) for n in chart.names]


# ---------------------------------------------------------------------------
# evaluation


def evaluate_many(exprs: Sequence[Expr], chart: Chart, points) -> np.ndarray:
    """Evaluate every expression at every point in one shared DAG pass.

    ``points`` has shape (n, 6). Returns shape (len(exprs), n); entries are NaN
    where the evaluation left the domain (pole, negative sqrt, overflow).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[1] != 6:
        raise ValueError("points must have 6 coordinates")
    n = pts.shape[0]
    cols = {name: pts[:, i] for i, name in enumerate(chart.names)}
    values: dict[int, np.ndarray] = {}
    with np.errstate(all="ignore"):
        for node in postorder(exprs):
            op, args = node.op, node.args
            if op == "const":
                v = np.full(n, float(args[0]))
            elif op == "var":
                try:
                    v = cols[args[0]]
                except KeyError:
                    raise ValueError(f"variable {args[0]!r} is not a chart coordinate") from None
            elif op == "add":
                v = values[id(args[0])] + values[id(args[1])]
            elif op == "sub":
                v = values[id(args[0])] - values[id(args[1])]
            elif op == "mul":
                v = values[id(args[0])] * values[id(args[1])]
            elif op == "div":
                den = values[id(args[1])]
                v = values[id(args[0])] / den
                v = np.where(np.abs(den) < POLE_TOL, np.nan, v)
            elif op == "neg":
                v = -values[id(args[0])]
            elif op == "pow":
                base = values[id(args[0])]
                k = args[1]
                if k < 0:
                    v = np.where(np.abs(base) < POLE_TOL, np.nan, base ** float(k))
                else:
                    v = base**k
            elif op == "sqrt":
                a = values[id(args[0])]
                v = np.where(a < 0, np.nan, np.sqrt(np.abs(a)))
            elif op == "sin":
                v = np.sin(values[id(args[0])])
            elif op == "cos":
                v = np.cos(values[id(args[0])])
            elif op == "exp":
                v = np.exp(values[id(args[0])])
            else:
                raise ValueError(f"unknown node {op}")
            values[id(node)] = v
    out = np.empty((len(exprs), n))
    for i, e in enumerate(exprs):
        out[i] = values[id(e)]
    out[~np.isfinite(out)] = np.nan
    return out


def _is_rational(e: Expr) -> bool:
    return all(node.op not in ("sqrt", "sin", "cos", "exp") for node in postorder([e]))


def _evaluate_exact(e: Expr, chart: Chart, pt: Sequence[Fraction]) -> Fraction:
    env = dict(zip(chart.names, pt))
    values: dict[int, Fraction] = {}
    for node in postorder([e]):
        op, args = node.op, node.args
        if op == "const":
            v = args[0]
        elif op == "var":
            v = env[args[0]]
        elif op == "add":
            v = values[id(args[0])] + values[id(args[1])]
        elif op == "sub":
            v = values[id(args[0])] - values[id(args[1])]
        elif op == "mul":
            v = values[id(args[0])] * values[id(args[1])]
        elif op == "neg":
            v = -values[id(args[0])]
        elif op == "div":
            den = values[id(args[1])]
            if den == 0:
                raise DomainError(f"division by zero in {node}")
            v = values[id(args[0])] / den
        else:  # pow
            base = values[id(args[0])]
            if base == 0 and args[1] < 0:
                raise DomainError(f"division by zero in {node}")
            v = base ** args[1]
        values[id(node)] = v
    return values[id(e)]


def evaluate(e: Expr, chart: Chart, pt) -> float | Fraction:
    """Value of ``e`` at one point.

    An all-rational point on a rational expression is evaluated exactly and
    returns a Fraction; anything else is evaluated in double precision.
    Raises DomainError at poles (|den| < 1e-12) and negative sqrt arguments.
    """
    if len(pt) != 6:
        raise ValueError("a point has 6 coordinates")
    if all(isinstance(c, (int, Fraction)) for c in pt) and _is_rational(e):
        return _evaluate_exact(e, chart, [Fraction(c) for c in pt])
    v = evaluate_many([e], chart, np.asarray(pt, dtype=float)[None, :])[0, 0]
    if np.isnan(v):
        raise DomainError(f"{e} is not defined at {tuple(pt)}")
    return float(v)


# ---------------------------------------------------------------------------
# sampling and zero tests


def sample_points(n: int, seed: int = 0, half_width: float = SAMPLE_HALF_WIDTH) -> np.ndarray:
    """``n`` uniform points of the box [-w, w]^6 from a seeded generator."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-half_width, half_width, size=(n, 6))


def valid_samples(exprs: Sequence[Expr], chart: Chart, trials: int, seed: int = 0):
    """Draw ``trials`` points at which every expression evaluates.

    Points hitting a domain error are redrawn; after ``10 * trials`` draws
    without enough valid points an InconclusiveError is raised.
    Returns (points, values).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    budget = 10 * trials
    kept_pts, kept_vals = [], []
    have = 0
    while have < trials:
        want = min(trials - have, budget)
        if want <= 0:
            raise InconclusiveError(
                f"only {have} of {trials} sample points were in the domain"
            )
        pts = rng.uniform(-SAMPLE_HALF_WIDTH, SAMPLE_HALF_WIDTH, size=(want, 6))
        budget -= want
        vals = evaluate_many(exprs, chart, pts)
        ok = ~np.isnan(vals).any(axis=0)
        kept_pts.append(pts[ok])
        kept_vals.append(vals[:, ok])
        have += int(ok.sum())
    return np.concatenate(kept_pts)[:trials], np.concatenate(kept_vals, axis=1)[:, :trials]


def is_zero(e: Expr | Iterable[Expr], chart: Chart, trials: int = 16, tol: float = 1e-9,
            seed: int = 0) -> bool:
    """Probabilistic identity test: |e| < tol at ``trials`` random points.

    Accepts one expression or several (all must vanish).
    """
    exprs = [e] if isinstance(e, Expr) else list(e)
    if all(x.is_const for x in exprs):
        return all(abs(x.value) < tol for x in exprs)
    _, vals = valid_samples(exprs, chart, trials, seed)
    return bool(np.all(np.abs(vals) < tol))
