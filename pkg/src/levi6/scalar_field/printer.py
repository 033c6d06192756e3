"""Text rendering of expressions in the input grammar.

Parentheses are emitted wherever re-parsing could otherwise build a
different tree, so ``parse_expr(to_text(e), chart) is e`` for every tree
built by the smart constructors.
"""

from __future__ import annotations

from .expr import Expr, UNARY, postorder

# binding strength of each node as it appears in text
_PREC = {"add": 10, "sub": 10, "mul": 20, "div": 20, "neg": 25, "pow": 30}
_ATOM = 100


def _const_text(value) -> tuple[str, int]:
    if value.denominator == 1:
        text = str(value.numerator)
    else:
        text = f"{value.numerator}/{value.denominator}"
    if value < 0 or value.denominator != 1:
        # "-3" parses as neg(3) and "1/2" as div(1, 2); both fold back to the
        # constant, but only when they are not split by a neighbouring operator.
        return text, 0
    return text, _ATOM


def _wrap(text: str, prec: int, need: int) -> str:
    return text if prec >= need else f"({text})"


def to_text(e: Expr) -> str:
    rendered: dict[int, tuple[str, int]] = {}
    for node in postorder([e]):
        op = node.op
        if op == "const":
            rendered[id(node)] = _const_text(node.args[0])
        elif op == "var":
            rendered[id(node)] = (node.args[0], _ATOM)
        elif op in UNARY:
            inner, _ = rendered[id(node.args[0])]
            rendered[id(node)] = (f"{op}({inner})", _ATOM)
        elif op == "neg":
            inner, p = rendered[id(node.args[0])]
            rendered[id(node)] = ("-" + _wrap(inner, p, _PREC["pow"]), _PREC["neg"])
        elif op == "pow":
            base, p = rendered[id(node.args[0])]
            n = node.args[1]
            exponent = str(n) if n >= 0 else f"({n})"
            rendered[id(node)] = (f"{_wrap(base, p, _ATOM)}^{exponent}", _PREC["pow"])
        else:
            lhs, lp = rendered[id(node.args[0])]
            rhs, rp = rendered[id(node.args[1])]
            mine = _PREC[op]
            symbol = {"add": " + ", "sub": " - ", "mul": "*", "div": "/"}[op]
            # left-associative: the left operand may share our level, the
            # right one must bind strictly tighter; a leading minus on the
            # right would read as a separate unary term, so wrap it too.
            left = _wrap(lhs, lp, mine) if lp != _PREC["neg"] else f"({lhs})"
            right = _wrap(rhs, rp, mine + 1) if rp != _PREC["neg"] else f"({rhs})"
            rendered[id(node)] = (left + symbol + right, mine)
    return rendered[id(e)][0]
