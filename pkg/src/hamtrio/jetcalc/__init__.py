"""Differential algebra on the jet space of m field variables."""

from .calculus import (
    DEFAULT_MAX_JET_ORDER,
    Dx,
    JetContext,
    dependent_variables,
    euler,
    eval_numeric,
    homogeneous_degree,
    is_total_derivative,
    jet_order,
    jet_order_of,
    max_jet_order,
    total_derivative,
    variational_gradient,
)
from .expression import (
    REGISTRY,
    Expression,
    Var,
    const,
    numeric_zero,
    one,
    param,
    psi,
    sqrt,
    u,
    zero,
)
from .grammar import format_expression, parse_expression

__all__ = [
    "DEFAULT_MAX_JET_ORDER",
    "Dx",
    "Expression",
    "JetContext",
    "REGISTRY",
    "Var",
    "const",
    "dependent_variables",
    "euler",
    "eval_numeric",
    "format_expression",
    "homogeneous_degree",
    "is_total_derivative",
    "jet_order",
    "jet_order_of",
    "max_jet_order",
    "numeric_zero",
    "one",
    "param",
    "parse_expression",
    "psi",
    "sqrt",
    "total_derivative",
    "u",
    "variational_gradient",
    "zero",
]
