from fractions import Fraction

import pytest

from invariant_curves.algebra import Poly, parse_poly
from invariant_curves.lienard import LienardSystem
from invariant_curves.puiseux import (
    INFINITY,
    Adjoined,
    ExpansionPoint,
    NoSeries,
    PlanarSystem,
    PuiseuxSeries,
    dominant_balances,
    expand_series,
    finite_point_negative_series,
    fuchs_indices,
    ode_from_system,
    residual,
    residual_order,
)

from conftest import quartic


def ode(P, Q):
    return ode_from_system(PlanarSystem.parse(P, Q))


def test_ode_forms():
    l = LienardSystem.parse("3*x^2 + 1", "x^3")
    E = ode_from_system(l.planar)
    assert E.poly == parse_poly("y*y_x + (3*x^2 + 1)*y + x^3", ["x", "y", "y_x"])
    assert ode("1", "0").poly == Poly.symbol("y_x")
    assert ode("x", "y").poly == parse_poly("x*y_x - y", ["x", "y", "y_x"])


def test_no_balance_for_constant_field():
    assert dominant_balances(ode("1", "0")) == []


def test_lienard_balances_at_infinity():
    l = LienardSystem.parse("2*x^2 + x", "5*x^4 - 1")
    bals = {b.exponent: b for b in dominant_balances(ode_from_system(l.planar))}
    assert set(bals) == {3, 2}
    s1 = expand_series(ode_from_system(l.planar), bals[3], depth=0)
    s2 = expand_series(ode_from_system(l.planar), bals[2], depth=0)
    assert s1.coefficients[0] == Poly.const(Fraction(-2, 3))  # -f0/(m+1)
    assert s2.coefficients[0] == Poly.const(Fraction(-5, 2))  # -g0/f0


def test_quartic_fuchs_indices():
    E = ode_from_system(quartic().planar)
    bals = {b.exponent: b for b in dominant_balances(E)}
    assert fuchs_indices(E, bals[3]) == [3]
    assert fuchs_indices(E, bals[2]) == []


def test_quartic_series_with_xi_minus_two():
    E = ode_from_system(quartic().planar)
    bals = {b.exponent: b for b in dominant_balances(E)}
    s = expand_series(E, bals[2], depth=2)
    names = ["alpha", "e"]
    assert [c for _, c in s.terms()] == [Poly.const(1), Poly.const(0), parse_poly("-(alpha + e)/3", names)]


def test_small_lienard_second_balance():
    # f = x^2, g = x^3: y = -x + ... solves y y' + x^2 y + x^3 to leading order
    E = ode_from_system(LienardSystem.parse("x^2", "x^3").planar)
    (bal,) = [b for b in dominant_balances(E) if b.exponent == 1]
    s = expand_series(E, bal, depth=0)
    assert s.terms() == [(Fraction(1), Poly.const(-1))]


def test_residual_order_bound():
    l = LienardSystem.parse("3*x^2 + 1", "-3*x^4 - 2*x^3 + x^2 + x + 1")
    E = ode_from_system(l.planar)
    (bal,) = [b for b in dominant_balances(E) if b.exponent == 2]
    for d in range(0, 6):
        s = expand_series(E, bal, depth=d)
        # dominant weight x^4 (f y and g); d further terms push the residual below 4 - d
        assert residual_order(s, E) <= 4 - d - 1


def test_terminating_series_has_zero_residual():
    # alpha = 1, sigma = 0 on the first-kind line: y = -x^3 - 3/2 x^2 + 3/2 x + 5/4 exactly
    l = quartic().subs({"alpha": Poly.const(1), "e": Poly.const(Fraction(33, 4)),
                        "sigma": Poly.const(0), "delta": Poly.const(Fraction(-25, 8))})
    E = ode_from_system(l.planar)
    (bal,) = [b for b in dominant_balances(E) if b.exponent == 3]
    s = expand_series(E, bal, depth=12).subs({"c3": Poly.const(Fraction(5, 4))})
    assert s.polynomial_part() == parse_poly("-x^3 - 3/2*x^2 + 3/2*x + 5/4", ["x"])
    assert residual_order(s, E) is None
    assert not any(residual(s, E).values())


def test_no_series_when_compatibility_fails():
    l = quartic().subs({"alpha": Poly.const(1), "e": Poly.const(1)})
    E = ode_from_system(l.planar)
    (bal,) = [b for b in dominant_balances(E) if b.exponent == 3]
    out = expand_series(E, bal, depth=5)
    assert isinstance(out, NoSeries)
    assert out.condition.is_constant and not out.condition.is_zero


def test_adjoined_leading_coefficient():
    # y' = y^3/x + ...: balance c^2 = -1 forces an adjoined root
    E = ode("x", "y^3 + y")
    bal = dominant_balances(E)[0]
    s = expand_series(E, bal, "theta", depth=2)
    assert isinstance(s, PuiseuxSeries)
    assert s.adjoined is not None
    assert s.adjoined.defining_poly.free_symbols == {"theta"}


def test_adjoined_arithmetic():
    a = Adjoined.from_poly("t", parse_poly("t^2 + 1", ["t"]))
    t = Poly.symbol("t")
    assert a.reduce(t * t) == Poly.const(-1)
    assert a.reduce(a.inverse(t + 1) * (t + 1)) == Poly.const(1)


def test_finite_points():
    assert finite_point_negative_series(LienardSystem.parse("3*x^2 + 1", "x^3").planar) == []
    assert finite_point_negative_series(PlanarSystem.parse("x", "y")) == []
    poles = finite_point_negative_series(PlanarSystem.parse("x^2", "y^2"))
    # y' = y^2/x^2 has y = -x^2/(x - x0) ... poles only over x0 = 0 in the polygon sense
    assert poles and all(p.balance.exponent < 0 for p in poles)


def test_series_serialization_round_trip():
    E = ode_from_system(quartic().planar)
    (bal,) = [b for b in dominant_balances(E) if b.exponent == 3]
    s = expand_series(E, bal, depth=5)
    back = PuiseuxSeries.from_dict(s.to_dict(), ["alpha", "e", "sigma", "delta", "c3"])
    assert back.terms() == s.terms()
    assert back.compatibility_conditions == s.compatibility_conditions


def test_expansion_points():
    assert INFINITY.is_infinity
    assert not ExpansionPoint.finite(Fraction(1, 2)).is_infinity


@pytest.mark.parametrize("depth", [0, 3, 8])
def test_depth_controls_term_count(depth):
    E = ode_from_system(quartic().planar)
    (bal,) = [b for b in dominant_balances(E) if b.exponent == 2]
    assert len(expand_series(E, bal, depth=depth).terms()) == depth + 1
