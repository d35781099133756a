"""Symbolic and numerical analysis of u_t + eps u_txx + f u_x + g u_x u_xx + h u_xxx = 0."""

from .adjoint import adjoint, check_power_law_family, strict_self_adjointness, unified_family
from .currents import ConservedVector, characteristic_of, ibragimov_vector, strip_trivial, table_row
from .equations import EquationSpec, formal_lagrangian
from .grammar import format_expr, parse_expr, parse_spec
from .jet import JetExpr, total_derivative, variational_derivative
from .symmetry import Generator, classify_scaling, invariance_residual, prolong, scaling

__all__ = [
    "ConservedVector",
    "EquationSpec",
    "Generator",
    "JetExpr",
    "adjoint",
    "characteristic_of",
    "check_power_law_family",
    "classify_scaling",
    "format_expr",
    "formal_lagrangian",
    "ibragimov_vector",
    "invariance_residual",
    "parse_expr",
    "parse_spec",
    "prolong",
    "scaling",
    "strict_self_adjointness",
    "strip_trivial",
    "table_row",
    "total_derivative",
    "unified_family",
    "variational_derivative",
]
