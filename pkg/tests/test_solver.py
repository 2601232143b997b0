import random
from fractions import Fraction

import pytest

from invariant_curves.algebra import Poly, parse_poly
from invariant_curves.solver import (
    BudgetExceeded,
    ConstraintSystem,
    NotSymmetric,
    TooManyUnknowns,
    brute_force_oracle,
    elementary_from_power_sums,
    groebner,
    power_sum_reduce,
    random_system,
    solve,
    symmetric_to_power_sums,
)


def system(unknowns, *eqs):
    return ConstraintSystem(unknowns, [parse_poly(e, unknowns) for e in eqs])


def test_linear_system():
    (br,) = solve(system(["a", "b"], "a + b - 3", "a - b - 1"))
    assert br.is_rational_point
    assert (br.value("a"), br.value("b")) == (2, 1)


def test_irreducible_quadratic_gives_algebraic_branch():
    (br,) = solve(system(["x"], "x^2 + 1"))
    assert not br.is_rational_point
    assert br.adjoined is not None
    assert br.adjoined.defining_poly == parse_poly(f"{br.adjoined.symbol}^2 + 1", [br.adjoined.symbol])


def test_inconsistent_system_has_no_branch():
    assert solve(system(["a"], "a - 1", "a - 2")) == []


def test_free_unknown_is_reported():
    (br,) = solve(system(["a", "b"], "a - 2*b"))
    assert len(br.free) == 1
    assert br.satisfies([parse_poly("a - 2*b", ["a", "b"])])


def test_undeclared_symbol_rejected():
    with pytest.raises(ValueError):
        ConstraintSystem(["a"], [parse_poly("a + b", ["a", "b"])])


def test_power_sums_verbatim():
    cs = system(["c1", "c2"], "c1 + c2", "c1^2 + c2^2")
    out = power_sum_reduce(cs, ["c1", "c2"], "C")
    assert set(out.equations) == {Poly.symbol("C1"), Poly.symbol("C2")}


def test_newton_identity():
    p = parse_poly("c1*c2", ["c1", "c2"])
    want = parse_poly("(C1^2 - C2)/2", ["C1", "C2"])
    assert symmetric_to_power_sums(p, ["c1", "c2"], "C") == want


def test_non_symmetric_rejected():
    with pytest.raises(NotSymmetric):
        symmetric_to_power_sums(parse_poly("c1 + 2*c2", ["c1", "c2"]), ["c1", "c2"], "C")


def test_elementary_functions_of_three():
    e = elementary_from_power_sums(3, "C")
    c = {f"c{i}": Fraction(i + 1) for i in range(3)}  # 1, 2, 3
    sums = {f"C{k}": sum(v ** k for v in c.values()) for k in (1, 2, 3)}
    assert [e[k].evaluate(sums) for k in (1, 2, 3)] == [6, 11, 6]


def test_brute_force_examples():
    found = brute_force_oracle(system(["a"], "a^2 - 25/4"), box=6, denominator_bound=2)
    assert sorted(p["a"] for p in found) == [Fraction(-5, 2), Fraction(5, 2)]
    assert brute_force_oracle(system(["a"], "a - 1", "a - 2"), box=3, denominator_bound=1) == []
    with pytest.raises(TooManyUnknowns):
        brute_force_oracle(system(["a", "b", "c", "d"], "a"), box=1, denominator_bound=1)


def test_brute_force_line_condition():
    # the first-kind line's condition at alpha = 1, sigma = 0
    names = ["delta"]
    cs = ConstraintSystem(names, [parse_poly("delta - 25/12 + 5/6*0 + 125/24", names)])
    assert brute_force_oracle(cs, box=75, denominator_bound=24) == [{"delta": Fraction(-25, 8)}]


def test_groebner_of_intersecting_circles():
    names = ["x", "y"]
    gb = groebner([parse_poly("x^2 + y^2 - 1", names), parse_poly("x - y", names)], names)
    assert parse_poly("y^2 - 1/2", names) in gb


def test_groebner_budget():
    rng = random.Random(3)
    cs, _ = random_system(rng, ["a", "b", "c"], max_degree=3, terms=5)
    with pytest.raises(BudgetExceeded):
        groebner(list(cs.equations), ["a", "b", "c"], budget=1)


@pytest.mark.parametrize("seed", range(10))
def test_planted_point_is_recovered(seed):
    rng = random.Random(seed)
    cs, point = random_system(rng, ["a", "b"])
    branches = solve(cs)
    assert any(br.contains(point) for br in branches)
    assert all(br.satisfies(cs.equations) for br in branches)
