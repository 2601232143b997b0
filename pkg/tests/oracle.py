"""Independent checks through sympy, used as oracles by the tests."""

import sympy

from invariant_curves.algebra import Poly, format_poly


def to_sympy(p: Poly):
    return sympy.sympify(format_poly(p).replace("^", "**"))


def invariance_residue(P, Q, F, lam, modulus=None, var=None):
    """P F_x + Q F_y - lam F computed by sympy, optionally reduced modulo ``modulus`` in ``var``."""
    x, y = sympy.symbols("x y")
    P, Q, F, lam = (to_sympy(v) if isinstance(v, Poly) else sympy.sympify(v) for v in (P, Q, F, lam))
    r = sympy.expand(P * sympy.diff(F, x) + Q * sympy.diff(F, y) - lam * F)
    if modulus is not None:
        r = sympy.rem(r, sympy.sympify(modulus), sympy.Symbol(var))
    return sympy.expand(r)


def series_polynomial_part(f, g, m):
    """Solve y y' + f y + g = 0 for y = sum_{j<=m} a_j x^{m+1-j} order by order (no constant term)."""
    x = sympy.Symbol("x")
    f, g = to_sympy(f), to_sympy(g)
    a = sympy.symbols(f"a0:{m + 1}")
    y = sum(a[j] * x ** (m + 1 - j) for j in range(m + 1))
    expr = sympy.expand(y * sympy.diff(y, x) + f * y + g)
    lead = sympy.Poly(f, x).LC()
    values = {a[0]: -lead / (m + 1)}
    for j in range(1, m + 1):
        coeff = expr.coeff(x, 2 * m + 1 - j).subs(values)
        (values[a[j]],) = sympy.solve(coeff, a[j])
    return sympy.expand(y.subs(values))


def sylvester_resultant(f, g, var="x"):
    """det of the Sylvester matrix with the rows of ``f`` first."""
    x = sympy.Symbol(var)
    a = sympy.Poly(to_sympy(f), x).all_coeffs()
    b = sympy.Poly(to_sympy(g), x).all_coeffs()
    m, n = len(a) - 1, len(b) - 1
    rows = [[0] * i + a + [0] * (n - 1 - i) for i in range(n)]
    rows += [[0] * i + b + [0] * (m - 1 - i) for i in range(m)]
    return sympy.Matrix(rows).det()
