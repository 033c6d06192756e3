"""Expression trees for scalar fields on a 6-dimensional chart.

Nodes are hash-consed: building the same tree twice returns the same object,
so structural equality is identity and every cache below keys on ``id``.
The smart constructors apply only local rewrites (constant folding, 0 and 1
absorption, double negation) to keep repeated bracket computations small.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

__all__ = [
    "Chart",
    "Expr",
    "const",
    "var",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "power",
    "sqrt",
    "sin",
    "cos",
    "exp",
    "as_expr",
    "ZERO",
    "ONE",
    "FUNCTIONS",
]

FUNCTIONS = ("sqrt", "sin", "cos", "exp")


@dataclass(frozen=True)
class Chart:
    """Ordered coordinate names of a 6-dimensional chart plus its orientation."""

    names: tuple[str, ...]
    orientation: int = 1

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) != 6:
            raise ValueError(f"a chart needs exactly 6 coordinates, got {len(self.names)}")
        if len(set(self.names)) != 6:
            raise ValueError(f"chart coordinates must be distinct: {self.names}")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    def __len__(self):
        return 6

    def __iter__(self):
        return iter(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def variables(self) -> tuple[Expr, ...]:
        return tuple(var(n) for n in self.names)

    def flipped(self) -> Chart:
        return Chart(self.names, -self.orientation)


class Expr:
    """Immutable, interned expression node.

    ``op`` is one of ``const, var, add, sub, mul, div, neg, pow`` or a unary
    function name; ``args`` holds child nodes, except for ``const`` (a
    Fraction), ``var`` (a name) and the integer exponent of ``pow``.
    """

    __slots__ = ("op", "args", "_dcache", "__weakref__")

    _table: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()

    def __new__(cls, op: str, args: tuple):
        key = (op, args)
        node = cls._table.get(key)
        if node is None:
            node = object.__new__(cls)
            node.op = op
            node.args = args
            node._dcache = {}
            cls._table[key] = node
        return node

    def __reduce__(self):
        return (Expr, (self.op, self.args))

    # -- arithmetic sugar ------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        return power(self, n)

    # -- inspection ------------------------------------------------------
    @property
    def is_const(self) -> bool:
        return self.op == "const"

    @property
    def value(self) -> Fraction:
        if self.op != "const":
            raise TypeError("not a constant")
        return self.args[0]

    @property
    def name(self) -> str:
        if self.op != "var":
            raise TypeError("not a variable")
        return self.args[0]

    def children(self) -> tuple[Expr, ...]:
        if self.op in ("const", "var"):
            return ()
        if self.op == "pow":
            return (self.args[0],)
        return self.args

    def free_vars(self) -> set[str]:
        return {n.args[0] for n in postorder([self]) if n.op == "var"}

    def size(self) -> int:
        """Number of distinct nodes in the DAG."""
        return len(postorder([self]))

    def __str__(self):
        from .printer import to_text

        return to_text(self)

    def __repr__(self):
        return f"Expr({self})"

    def __bool__(self):
        raise TypeError("truth value of an Expr is ambiguous; use is_zero()")


def postorder(roots: Iterable[Expr]) -> list[Expr]:
    """Distinct nodes reachable from ``roots``, children before parents."""
    order: list[Expr] = []
    seen: set[int] = set()
    for root in roots:
        if id(root) in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for child in reversed(node.children()):
                if id(child) not in seen:
                    stack.append((child, False))
    return order


def const(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, float):
        value = Fraction(value)
    if not isinstance(value, Rational):
        raise TypeError(f"cannot make a rational constant from {value!r}")
    return Expr("const", (Fraction(value),))


ZERO = const(0)
ONE = const(1)


def as_expr(x) -> Expr:
    return x if isinstance(x, Expr) else const(x)


def var(name: str) -> Expr:
    return Expr("var", (name,))


def _c(e: Expr, v) -> bool:
    return e.op == "const" and e.args[0] == v


def add(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if a.is_const and b.is_const:
        return const(a.value + b.value)
    if _c(a, 0):
        return b
    if _c(b, 0):
        return a
    return Expr("add", (a, b))


def sub(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if a.is_const and b.is_const:
        return const(a.value - b.value)
    if _c(b, 0):
        return a
    if _c(a, 0):
        return neg(b)
    if a is b:
        return ZERO
    return Expr("sub", (a, b))


def mul(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if a.is_const and b.is_const:
        return const(a.value * b.value)
    if _c(a, 0) or _c(b, 0):
        return ZERO
    if _c(a, 1):
        return b
    if _c(b, 1):
        return a
    if _c(a, -1):
        return neg(b)
    if _c(b, -1):
        return neg(a)
    return Expr("mul", (a, b))


def div(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if a.is_const and b.is_const and b.value != 0:
        return const(a.value / b.value)
    if _c(b, 1):
        return a
    if _c(a, 0) and not _c(b, 0):
        return ZERO
    return Expr("div", (a, b))


def neg(a) -> Expr:
    a = as_expr(a)
    if a.is_const:
        return const(-a.value)
    if a.op == "neg":
        return a.args[0]
    return Expr("neg", (a,))


def power(a, n) -> Expr:
    a = as_expr(a)
    if isinstance(n, Expr):
        if not n.is_const or n.value.denominator != 1:
            raise ValueError("exponent must be an integer constant")
        n = n.value.numerator
    if int(n) != n:
        raise ValueError("exponent must be an integer")
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return a
    if a.is_const and (a.value != 0 or n > 0):
        return const(a.value**n)
    return Expr("pow", (a, n))


def _isqrt_fraction(q: Fraction):
    if q < 0:
        return None
    from math import isqrt

    rn, rd = isqrt(q.numerator), isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def sqrt(a) -> Expr:
    a = as_expr(a)
    if a.is_const:
        root = _isqrt_fraction(a.value)
        if root is not None:
            return const(root)
    return Expr("sqrt", (a,))


def sin(a) -> Expr:
    a = as_expr(a)
    if _c(a, 0):
        return ZERO
    return Expr("sin", (a,))


def cos(a) -> Expr:
    a = as_expr(a)
    if _c(a, 0):
        return ONE
    return Expr("cos", (a,))


def exp(a) -> Expr:
    a = as_expr(a)
    if _c(a, 0):
        return ONE
    return Expr("exp", (a,))


UNARY = {"sqrt": sqrt, "sin": sin, "cos": cos, "exp": exp}


def rebuild(op: str, args: Sequence) -> Expr:
    """Re-apply the smart constructor for ``op`` to new arguments."""
    if op == "const":
        return const(args[0])
    if op == "var":
        return var(args[0])
    if op == "pow":
        return power(args[0], args[1])
    if op in UNARY:
        return UNARY[op](args[0])
    return {"add": add, "sub": sub, "mul": mul, "div": div, "neg": neg}[op](*args)


def substitute(e: Expr, mapping: dict[str, Expr]) -> Expr:
    """Replace variables by expressions (applied simultaneously)."""
    out: dict[int, Expr] = {}
    for node in postorder([e]):
        if node.op == "var":
            out[id(node)] = as_expr(mapping.get(node.args[0], node))
        elif node.op == "const":
            out[id(node)] = node
        elif node.op == "pow":
            out[id(node)] = power(out[id(node.args[0])], node.args[1])
        else:
            out[id(node)] = rebuild(node.op, [out[id(c)] for c in node.args])
    return out[id(e)]


def total(terms: Iterable) -> Expr:
    """Sum of an iterable of expressions (0 when empty)."""
    acc = ZERO
    for t in terms:
        acc = add(acc, t)
    return acc
