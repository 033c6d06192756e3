"""Exact symbolic scalar fields on a 6-variable chart."""

from .calculus import (
    DomainError,
    InconclusiveError,
    differentiate,
    evaluate,
    evaluate_many,
    gradient,
    is_zero,
    sample_points,
    valid_samples,
)
from .expr import (
    ONE,
    ZERO,
    Chart,
    Expr,
    add,
    as_expr,
    const,
    cos,
    div,
    exp,
    mul,
    neg,
    postorder,
    power,
    sin,
    sqrt,
    sub,
    substitute,
    total,
    var,
)
from .parser import ParseError, UnknownIdentifierError, parse_expr
from .printer import to_text

__all__ = [
    "Chart", "Expr", "ONE", "ZERO", "add", "as_expr", "const", "cos", "div", "exp",
    "mul", "neg", "postorder", "power", "sin", "sqrt", "sub", "substitute", "total",
    "var", "ParseError", "UnknownIdentifierError", "parse_expr", "to_text",
    "DomainError", "InconclusiveError", "differentiate", "evaluate", "evaluate_many",
    "gradient", "is_zero", "sample_points", "valid_samples",
]
