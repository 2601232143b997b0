from fractions import Fraction

import pytest

from invariant_curves.algebra import (
    Indivisible,
    ParseError,
    Poly,
    exact_divide,
    format_grouped,
    format_poly,
    parse_poly,
    rational_roots,
    resultant,
)

XY = ["x", "y"]


def P(text, names=("x", "y", "a", "b", "alpha", "e", "sigma", "delta")):
    return parse_poly(text, list(names))


def test_parse_single_symbol():
    assert parse_poly("y", XY) == Poly.symbol("y")


def test_parse_lienard_right_hand_side():
    q = P("-(3*x^2+alpha)*y + 3*x^4 + 2*x^3 - e*x^2 - sigma*x - delta")
    assert q.degree("x") == 4 and q.degree("y") == 1
    assert q.coefficient({"x": 2, "y": 1}) == Poly.const(-3)
    assert q.coefficient({"y": 1}) == P("-3*x^2 - alpha")


def test_parse_cancellation():
    assert parse_poly("(x+1)^2 - (x^2+2*x+1)", XY).is_zero


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse_poly("x + * y", XY)
    assert "position" in str(info.value)


def test_parse_rejects_undeclared_symbol():
    with pytest.raises(ParseError):
        parse_poly("x + z", XY)


def test_derivative_and_substitution():
    assert P("x*y^2").diff("y") == P("2*x*y")
    assert P("y - x^2").subs({"y": P("x^2")}).is_zero
    assert P("y - x^2 + (alpha + e)/3").diff("x") == P("-2*x")


def test_exact_division():
    assert exact_divide(P("x^2 - 1"), P("x - 1")) == P("x + 1")
    with pytest.raises(Indivisible):
        exact_divide(P("x^2 + 1"), P("x - 1"))


def test_exact_division_recovers_cofactor():
    F = P("y - x^2 + (alpha + e)/3")
    x_, y_ = Poly.symbol("x"), Poly.symbol("y")
    alpha, e = Poly.symbol("alpha"), Poly.symbol("e")
    values = {"delta": alpha * (e + alpha) * Fraction(1, 3), "sigma": (e + alpha) * Fraction(2, 3)}
    Q = P("-(3*x^2+alpha)*y + 3*x^4 + 2*x^3 - e*x^2 - sigma*x - delta").subs(values)
    XF = y_ * F.diff("x") + Q * F.diff("y")
    assert exact_divide(XF, F) == P("-3*x^2 - 2*x - alpha")
    assert x_ is not None


def test_resultant_sign_convention():
    assert resultant(P("x - 1"), P("x - 2"), "x") == Poly.const(-1)
    assert resultant(P("x - a"), P("x - b"), "x") == P("a - b")
    assert resultant(P("x^2 - 1"), P("x - 1"), "x").is_zero


def test_rational_roots():
    assert sorted(rational_roots(P("x^2 - 1"), "x")) == [(Fraction(-1), 1), (Fraction(1), 1)]
    assert rational_roots(P("x^2 - 4975/486*x + 4225/144"), "x") == []
    assert rational_roots(P("(x - 5/2)^2"), "x") == [(Fraction(5, 2), 2)]


def test_format_round_trip():
    p = P("3*x^4 - 1/2*x*y + alpha*y - 7")
    assert P(format_poly(p)) == p


def test_grouped_printing():
    p = P("y^2 + (x^3 + 1/2*x^2 - 37/4*x)*y - x^5 + 2")
    assert format_grouped(p, ["y", "x"]) == "y^2 + (x^3 + 1/2*x^2 - 37/4*x)*y - x^5 + 2"
    assert P(format_grouped(P("(alpha - 5/2)*x*y + y"), ["y", "x"])) == P("(alpha - 5/2)*x*y + y")
