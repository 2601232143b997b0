"""Invariant algebraic curves of planar polynomial vector fields via Puiseux series."""

from .algebra import Poly, parse_poly, format_poly, exact_divide, resultant, rational_roots
from .puiseux import (
    PlanarSystem,
    ImplicitODE,
    ExpansionPoint,
    INFINITY,
    PuiseuxSeries,
    dominant_balances,
    expand_series,
    fuchs_indices,
    ode_from_system,
)

__all__ = [
    "Poly", "parse_poly", "format_poly", "exact_divide", "resultant", "rational_roots",
    "PlanarSystem", "ImplicitODE", "ExpansionPoint", "INFINITY", "PuiseuxSeries",
    "dominant_balances", "expand_series", "fuchs_indices", "ode_from_system",
]
