import sympy
from hypothesis import given, settings, strategies as st

from invariant_curves.algebra import (
    Poly,
    exact_divide,
    format_grouped,
    format_poly,
    parse_poly,
    rational_roots,
    resultant,
)
from invariant_curves.curves import verify_invariant
from invariant_curves.puiseux import Adjoined, PlanarSystem
from invariant_curves.solver import symmetric_to_power_sums

from oracle import sylvester_resultant, to_sympy

NAMES = ["x", "y", "a"]
small = st.fractions(min_value=-5, max_value=5, max_denominator=3)


@st.composite
def polys(draw, names=NAMES, max_terms=5, max_exp=3):
    terms = draw(st.dictionaries(st.tuples(*[st.integers(0, max_exp)] * len(names)), small, max_size=max_terms))
    return Poly(names, terms)


@st.composite
def univariate(draw, min_degree=0, max_degree=4):
    coeffs = draw(st.lists(st.integers(-6, 6), min_size=min_degree + 1, max_size=max_degree + 1))
    return Poly(["x"], {(i,): c for i, c in enumerate(coeffs)})


SETTINGS = settings(max_examples=60, deadline=None)


@SETTINGS
@given(polys(), polys())
def test_ring_operations_match_sympy(p, q):
    assert to_sympy(p + q) == sympy.expand(to_sympy(p) + to_sympy(q))
    assert to_sympy(p * q) == sympy.expand(to_sympy(p) * to_sympy(q))
    assert to_sympy(p.diff("x")) == sympy.expand(sympy.diff(to_sympy(p), sympy.Symbol("x")))


@SETTINGS
@given(polys(), polys(max_terms=3, max_exp=2))
def test_substitution_matches_sympy(p, q):
    got = to_sympy(p.subs({"y": q}))
    assert got == sympy.expand(to_sympy(p).subs(sympy.Symbol("y"), to_sympy(q)))


@SETTINGS
@given(polys())
def test_printing_round_trips(p):
    assert parse_poly(format_poly(p), NAMES) == p
    assert parse_poly(format_grouped(p, ["y", "x"]), NAMES) == p


@SETTINGS
@given(polys(), polys())
def test_exact_division_inverts_multiplication(p, q):
    if not q.is_zero:
        assert exact_divide(p * q, q) == p


@SETTINGS
@given(univariate(1), univariate(1))
def test_resultant_matches_sympy(p, q):
    if p.degree("x") >= 1 and q.degree("x") >= 1:
        assert to_sympy(resultant(p, q, "x")) == sylvester_resultant(p, q)
        # agrees with sympy's resultant up to sign
        assert abs(to_sympy(resultant(p, q, "x"))) == abs(sympy.resultant(to_sympy(p), to_sympy(q)))


@SETTINGS
@given(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=3), min_size=1, max_size=4),
       univariate(0, 2))
def test_rational_roots_contain_planted(roots, extra):
    x = Poly.symbol("x")
    p = Poly.const(1)
    for r in roots:
        p = p * (x - r)
    if not extra.is_zero:
        p = p * extra
    found = dict(rational_roots(p, "x"))
    for r in set(roots):
        assert found.get(r, 0) >= roots.count(r)
    for r in found:
        assert p.evaluate({"x": r}) == 0


@SETTINGS
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), small), min_size=1, max_size=3),
       st.tuples(small, small))
def test_power_sum_rewrite_preserves_values(terms, point):
    c1, c2 = Poly.symbol("c1"), Poly.symbol("c2")
    sym = Poly.const(0)
    for i, j, k in terms:  # symmetrize each monomial
        sym = sym + (c1 ** i * c2 ** j + c1 ** j * c2 ** i).scale(k)
    rewritten = symmetric_to_power_sums(sym, ["c1", "c2"], "C")
    u, v = point
    sums = {f"C{k}": u ** k + v ** k for k in range(1, 7)}
    assert rewritten.evaluate({k: s for k, s in sums.items() if k in rewritten.free_symbols}) == \
        sym.evaluate({"c1": u, "c2": v})


@SETTINGS
@given(polys(names=["x", "y"], max_terms=3, max_exp=2), polys(names=["x", "y"], max_terms=3, max_exp=1))
def test_verification_is_linear_in_the_cofactor(F, mu):
    system = PlanarSystem.parse("x*y - 1", "x^2 + y")
    if F.is_constant:
        return
    lam = Poly.const(0)
    a = verify_invariant(system, F, lam)
    b = verify_invariant(system, F, lam + mu)
    residue = lambda r: Poly.const(0) if r else r.residue  # noqa: E731
    assert residue(b) == residue(a) - mu * F


@SETTINGS
@given(st.integers(-5, 5), st.integers(1, 5), polys(names=["t"], max_terms=3, max_exp=3))
def test_adjoined_inverse(b, c, p):
    # t^2 + b t + c with negative discriminant is irreducible over Q
    if b * b - 4 * c >= 0:
        return
    adj = Adjoined.from_poly("t", parse_poly(f"t^2 + ({b})*t + {c}", ["t"]))
    r = adj.reduce(p)
    if not r.is_zero:
        assert adj.reduce(adj.inverse(r) * r) == Poly.const(1)
    assert r.degree("t") <= 1
