"""Small polynomial systems over Q: triangularization, roots and branches.

The solver works recursively.  Unknowns that occur linearly with a constant
coefficient are eliminated first; a univariate equation then splits the
problem into rational-root branches plus at most one branch over an adjoined
algebraic root.  When neither applies, a lex Groebner basis (Buchberger with a
step budget) or, on budget exhaustion, successive resultants produce the
univariate eliminant.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import sympy

from .algebra import (
    Poly,
    rational_roots,
    resultant,
    ugcd,
    univariate_coeffs,
    udivmod,
)
from .puiseux import Adjoined


class NotSymmetric(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    def __init__(self, message: str, partial: Sequence[Poly] = ()):
        super().__init__(message)
        self.partial = list(partial)


class TooManyUnknowns(ValueError):
    pass


def _primitive(p: Poly) -> Poly:
    """Scale to integer coefficients with positive leading (graded-lex) coefficient."""
    c = p.content_fraction()
    q = p.scale(1 / c)
    return -q if q.leading_coefficient() < 0 else q


@dataclass(frozen=True)
class ConstraintSystem:
    """Polynomial equations ``eq == 0`` in the ordered ``unknowns`` (first = highest)."""

    unknowns: tuple
    equations: tuple

    def __init__(self, unknowns: Iterable[str], equations: Iterable[Poly]):
        unknowns = tuple(unknowns)
        seen, eqs = set(), []
        for eq in equations:
            if not eq:
                continue
            extra = eq.free_symbols - set(unknowns)
            if extra:
                raise ValueError(f"equation {eq} involves undeclared symbols {sorted(extra)}")
            norm = _primitive(eq.compact())
            if norm not in seen:
                seen.add(norm)
                eqs.append(norm)
        object.__setattr__(self, "unknowns", unknowns)
        object.__setattr__(self, "equations", tuple(eqs))

    def __len__(self):
        return len(self.equations)

    def subs(self, values) -> "ConstraintSystem":
        return ConstraintSystem([u for u in self.unknowns if u not in values],
                                [eq.subs(values) for eq in self.equations])

    def with_equations(self, extra: Iterable[Poly]) -> "ConstraintSystem":
        return ConstraintSystem(self.unknowns, list(self.equations) + list(extra))


@dataclass
class SolutionBranch:
    """A solution family: ``assignment`` values are polynomials in ``free`` unknowns
    and, when ``adjoined`` is set, in the adjoined root (itself one of the unknowns).
    ``residual`` lists equations left unresolved (empty for fully solved branches)."""

    assignment: dict
    adjoined: Adjoined | None = None
    free: tuple = ()
    residual: tuple = ()
    unresolved: tuple = ()  # extra defining polynomials that could not be adjoined

    @property
    def is_rational_point(self) -> bool:
        return (self.adjoined is None and not self.free and not self.residual
                and not self.unresolved
                and all(v.is_constant for v in self.assignment.values()))

    def value(self, name: str) -> Fraction:
        return self.assignment[name].constant_value()

    def substitute(self, p: Poly) -> Poly:
        out = p.subs(self.assignment)
        if self.adjoined is not None:
            out = self.adjoined.reduce(out)
        return out

    def satisfies(self, equations: Iterable[Poly]) -> bool:
        """Every equation vanishes on the branch (modulo residual/defining relations)."""
        basis = None
        for eq in equations:
            r = self.substitute(eq)
            if not r:
                continue
            if not self.residual and not self.unresolved:
                return False
            if basis is None:
                basis = groebner(list(self.residual) + list(self.unresolved),
                                 _order_for(list(self.residual) + list(self.unresolved)))
            if _reduce_poly(r, basis, _order_for([r] + basis)):
                return False
        return True

    def contains(self, point: dict) -> bool:
        """Whether a rational point lies on this branch."""
        values = {k: Poly.const(v) for k, v in point.items()}
        if self.adjoined is not None:
            if self.adjoined.defining_poly.subs(values):
                return False
        for name, expr in self.assignment.items():
            if name not in point:
                return False
            if expr.subs(values) != Poly.const(point[name]):
                return False
        return all(not r.subs(values) for r in itertools.chain(self.residual, self.unresolved))

    def describe(self) -> dict:
        out = {name: str(v) for name, v in sorted(self.assignment.items())}
        data = {"assignment": out}
        if self.adjoined is not None:
            data["root_of"] = {self.adjoined.symbol: str(self.adjoined.defining_poly)}
        if self.free:
            data["free"] = list(self.free)
        if self.residual:
            data["residual"] = [str(r) for r in self.residual]
        if self.unresolved:
            data["unresolved"] = [str(r) for r in self.unresolved]
        return data


# -- Groebner bases (lex) ----------------------------------------------------------------

def _order_for(polys) -> list:
    names = set()
    for p in polys:
        names |= p.free_symbols
    return sorted(names)


def _to_internal(p: Poly, order: Sequence[str]) -> dict:
    idx = [order.index(v) if v in order else None for v in p.variables]
    out = {}
    n = len(order)
    for e, c in p._terms.items():
        key = [0] * n
        for i, k in zip(idx, e):
            if k:
                key[i] = k
        out[tuple(key)] = c
    return out


def _from_internal(d: dict, order: Sequence[str]) -> Poly:
    return Poly(tuple(order), d).compact() if d else Poly.const(0)


def _monic(d: dict) -> dict:
    lc = d[max(d)]
    if lc == 1:
        return d
    return {e: c / lc for e, c in d.items()}


def _sub_scaled(a: dict, b: dict, coef: Fraction, shift: tuple) -> dict:
    out = dict(a)
    for e, c in b.items():
        m = tuple(p + q for p, q in zip(e, shift))
        v = out.get(m, 0) - coef * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _divides(a: tuple, b: tuple) -> bool:
    return all(p <= q for p, q in zip(a, b))


def _reduce_internal(f: dict, basis: list) -> dict:
    """Full reduction of ``f`` by monic polynomials ``basis``."""
    rem = {}
    f = dict(f)
    leads = [(max(g), g) for g in basis]
    while f:
        lt = max(f)
        c = f[lt]
        for lg, g in leads:
            if _divides(lg, lt):
                shift = tuple(p - q for p, q in zip(lt, lg))
                f = _sub_scaled(f, g, c, shift)
                break
        else:
            rem[lt] = c
            del f[lt]
    return rem


def _reduce_poly(p: Poly, basis: Sequence[Poly], order: Sequence[str]) -> Poly:
    internal = [_monic(_to_internal(g, order)) for g in basis if g]
    return _from_internal(_reduce_internal(_to_internal(p, order), internal), order)


def groebner(polys: Sequence[Poly], order: Sequence[str], budget: int = 4000) -> list[Poly]:
    """Reduced lex Groebner basis (``order[0]`` largest); ``[1]`` if inconsistent.

    ``budget`` bounds the number of S-polynomial reductions; on exhaustion
    :class:`BudgetExceeded` carries the partial basis.
    """
    order = list(order)
    G = [_monic(_to_internal(p, order)) for p in polys if p]
    if not G:
        return []
    G = [g for g in G if g]
    basis: list[dict] = []
    pairs: list[tuple[int, int]] = []

    def lcm_exp(a, b):
        return tuple(max(p, q) for p, q in zip(a, b))

    def add(g):
        basis.append(g)
        j = len(basis) - 1
        for i in range(j):
            pairs.append((i, j))

    for g in G:
        r = _reduce_internal(g, basis)
        if r:
            if all(not any(e) for e in r):
                return [Poly.const(1)]
            add(_monic(r))
    steps = 0
    while pairs:
        pairs.sort(key=lambda ij: (sum(lcm_exp(max(basis[ij[0]]), max(basis[ij[1]]))), ij))
        i, j = pairs.pop(0)
        gi, gj = basis[i], basis[j]
        if gi is None or gj is None:
            continue
        li, lj = max(gi), max(gj)
        L = lcm_exp(li, lj)
        # product criterion
        if all(p == 0 or q == 0 for p, q in zip(li, lj)):
            continue
        # chain criterion
        if any(k not in (i, j) and basis[k] is not None and _divides(max(basis[k]), L)
               and (min(i, k), max(i, k)) not in pairs and (min(j, k), max(j, k)) not in pairs
               for k in range(len(basis))):
            continue
        steps += 1
        if steps > budget:
            raise BudgetExceeded("Groebner basis step budget exhausted",
                                 [_from_internal(g, order) for g in basis if g is not None])
        si = tuple(p - q for p, q in zip(L, li))
        sj = tuple(p - q for p, q in zip(L, lj))
        s = {}
        for e, c in gi.items():
            s[tuple(p + q for p, q in zip(e, si))] = c
        s = _sub_scaled(s, gj, Fraction(1), sj)
        r = _reduce_internal(s, [g for g in basis if g is not None])
        if r:
            if all(not any(e) for e in r):
                return [Poly.const(1)]
            add(_monic(r))
    # minimal + reduced
    live = [g for g in basis if g is not None]
    minimal = []
    for g in sorted(live, key=max):
        lg = max(g)
        if not any(_divides(max(h), lg) for h in minimal):
            minimal = [h for h in minimal if not _divides(lg, max(h))]
            minimal.append(g)
    reduced = []
    for k, g in enumerate(minimal):
        others = minimal[:k] + minimal[k + 1:]
        lg = max(g)
        tail = {e: c for e, c in g.items() if e != lg}
        r = _reduce_internal(tail, others)
        r[lg] = Fraction(1)
        reduced.append(r)
    reduced.sort(key=max, reverse=True)
    return [_from_internal(g, order) for g in reduced]


# -- recursive solving ------------------------------------------------------------------

def _linear_pivot(eqs: Sequence[Poly], unknowns: Sequence[str], adj: Adjoined | None):
    """Find ``(var, value)`` from an equation linear in ``var`` with invertible coefficient."""
    best = None
    for rank, v in enumerate(unknowns):
        if adj is not None and v == adj.symbol:
            continue
        for eq in eqs:
            if v not in eq.free_symbols or eq.degree(v) != 1:
                continue
            coeffs = eq.coefficients(v)
            a = coeffs[1]
            if a.is_constant:
                inv = Poly.const(1 / a.constant_value())
            elif adj is not None and a.free_symbols == {adj.symbol}:
                try:
                    inv = adj.inverse(a)
                except ZeroDivisionError:
                    continue
            else:
                continue
            rest = coeffs.get(0, Poly.const(0))
            value = -(rest * inv)
            if adj is not None:
                value = adj.reduce(value)
            key = (rank, len(eq))
            if best is None or key < best[0]:
                best = (key, v, value)
        if best is not None:
            return best[1], best[2]
    return None


def _irreducible_factors(coeffs: list[Fraction], var: str) -> list[list[Fraction]]:
    x = sympy.Symbol(var)
    expr = sum(sympy.Rational(c.numerator, c.denominator) * x ** (len(coeffs) - 1 - i)
               for i, c in enumerate(coeffs))
    _, factors = sympy.factor_list(expr, x)
    out = []
    for fac, _ in factors:
        fc = [Fraction(int(c.p), int(c.q)) for c in sympy.Poly(fac, x).all_coeffs()]
        out.append([c / fc[0] for c in fc])
    out.sort(key=lambda f: (len(f), f))
    return out


@dataclass
class _Context:
    budget: int
    steps: int = 0


def _clean(eqs, adj):
    out, seen = [], set()
    for eq in eqs:
        if adj is not None:
            eq = adj.reduce(eq)
        if not eq:
            continue
        eq = _primitive(eq.compact())
        if eq not in seen:
            seen.add(eq)
            out.append(eq)
    out.sort(key=lambda p: (len(p), p.degree(), str(p)))
    return out


def _solve(eqs, unknowns, adj, ctx) -> list[SolutionBranch]:
    eqs = _clean(eqs, adj)
    for eq in eqs:
        if eq.is_constant:
            return []
        if adj is not None and eq.free_symbols == {adj.symbol}:
            return []  # non-zero element of the field
    if not eqs:
        free = tuple(u for u in unknowns if adj is None or u != adj.symbol)
        return [SolutionBranch({}, adj, free)]

    pivot = _linear_pivot(eqs, unknowns, adj)
    if pivot is not None:
        v, value = pivot
        rest = [u for u in unknowns if u != v]
        branches = _solve([eq.subs({v: value}) for eq in eqs], rest, adj, ctx)
        for b in branches:
            val = value.subs(b.assignment)
            if b.adjoined is not None:
                val = b.adjoined.reduce(val)
            b.assignment = {v: val, **b.assignment}
        return branches

    # a univariate equation in one unknown
    for v in reversed(unknowns):
        if adj is not None and v == adj.symbol:
            continue
        uni = [eq for eq in eqs if eq.free_symbols == {v}]
        if uni:
            return _split_on(v, uni, eqs, unknowns, adj, ctx)

    if adj is not None:
        return [SolutionBranch({}, adj, (), tuple(eqs))]

    order = [u for u in unknowns if any(u in eq.free_symbols for eq in eqs)]
    try:
        basis = groebner(eqs, order, budget=ctx.budget)
    except BudgetExceeded as exc:
        eliminant = _resultant_eliminant(eqs, order)
        if eliminant is None:
            raise BudgetExceeded("solver budget exhausted; resultants vanish", exc.partial)
        v = order[-1]
        return _split_on(v, [eliminant], eqs, unknowns, adj, ctx)
    if basis == [Poly.const(1)]:
        return []
    for v in reversed(order):
        uni = [g for g in basis if g.free_symbols == {v}]
        if uni:
            return _split_on(v, uni, basis, unknowns, adj, ctx)
    # positive-dimensional and not linear: keep as residual
    leading_vars = set()
    for g in basis:
        lead, _ = g.leading()
        leading_vars |= set(lead)
    free = tuple(u for u in unknowns if u not in leading_vars)
    return [SolutionBranch({}, None, free, tuple(basis))]


def _split_on(v, uni, eqs, unknowns, adj, ctx):
    g = None
    for p in uni:
        c = univariate_coeffs(p, v)
        g = c if g is None else ugcd(g, c)
    if len(g) == 1:
        return []
    branches = []
    rest = [u for u in unknowns if u != v]
    remaining = list(g)
    for root, mult in rational_roots(from_coeffs(g, v), v):
        sub = _solve([eq.subs({v: Poly.const(root)}) for eq in eqs], rest, adj, ctx)
        for b in sub:
            b.assignment = {v: Poly.const(root), **b.assignment}
        branches.extend(sub)
        for _ in range(mult):
            remaining = udivmod(remaining, [Fraction(1), -root])[0]
    if len(remaining) > 1:
        for factor in _irreducible_factors(remaining, v):
            if len(factor) <= 2:
                continue
            if adj is not None:
                branches.append(SolutionBranch({}, adj, (), tuple(eqs),
                                               (from_coeffs(factor, v),)))
                continue
            new_adj = Adjoined(v, tuple(factor))
            sub = _solve(list(eqs), unknowns, new_adj, ctx)
            branches.extend(sub)
    return branches


def from_coeffs(coeffs: Sequence[Fraction], var: str) -> Poly:
    t = Poly.symbol(var)
    out = Poly.const(0)
    for c in coeffs:
        out = out * t + c
    return out


def _resultant_eliminant(eqs: Sequence[Poly], order: Sequence[str]) -> Poly | None:
    """Univariate polynomial in ``order[-1]`` vanishing on all solutions (or None)."""
    current = [eq for eq in eqs if eq]
    for v in order[:-1]:
        with_v = sorted((p for p in current if v in p.free_symbols), key=lambda p: (p.degree(v), len(p)))
        without = [p for p in current if v not in p.free_symbols]
        if len(with_v) >= 2:
            pivot = with_v[0]
            new = [resultant(pivot, q, v) for q in with_v[1:]]
            new = [_primitive(p.compact()) for p in new if p]
            current = without + new
        else:
            current = without
        if not current:
            return None
    last = order[-1]
    uni = [p for p in current if p.free_symbols == {last}]
    if not uni:
        return None
    g = None
    for p in uni:
        c = univariate_coeffs(p, last)
        g = c if g is None else ugcd(g, c)
    return from_coeffs(g, last)


def solve(cs: ConstraintSystem, max_unknowns: int = 8, budget: int = 4000) -> list[SolutionBranch]:
    """All solution branches of ``cs``: complete for rational solutions.

    Each branch's assignment substitutes every equation to zero, exactly or
    modulo the defining polynomial of an adjoined root.  Unknowns not fixed
    by the system appear in ``free``.
    """
    if len(cs.unknowns) > max_unknowns:
        raise TooManyUnknowns(f"{len(cs.unknowns)} unknowns exceed the limit {max_unknowns}")
    branches = _solve(list(cs.equations), list(cs.unknowns), None, _Context(budget))
    for b in branches:
        if b.adjoined is not None:
            b.free = tuple(f for f in b.free if f != b.adjoined.symbol)
    return branches


# -- power sums -----------------------------------------------------------------------

def newton_power_sum_relations(count: int, top: int, prefix: str) -> dict[int, Poly]:
    """Power sums ``p_k`` (k <= top) of ``count`` variables as polys in ``p_1..p_count``."""
    P = {k: Poly.symbol(f"{prefix}{k}") for k in range(1, count + 1)}
    P[0] = Poly.const(count)
    # elementary symmetric functions from power sums: k e_k = sum (-1)^(i-1) e_(k-i) p_i
    e = {0: Poly.const(1)}
    for k in range(1, count + 1):
        acc = Poly.const(0)
        for i in range(1, k + 1):
            term = e[k - i] * P[i]
            acc = acc + term if i % 2 == 1 else acc - term
        e[k] = acc.scale(Fraction(1, k))
    for k in range(count + 1, top + 1):
        acc = Poly.const(0)
        for i in range(1, count + 1):
            term = e[i] * P[k - i]
            acc = acc + term if i % 2 == 1 else acc - term
        P[k] = acc
    return P


def elementary_from_power_sums(count: int, prefix: str) -> dict[int, Poly]:
    P = {k: Poly.symbol(f"{prefix}{k}") for k in range(1, count + 1)}
    e = {0: Poly.const(1)}
    for k in range(1, count + 1):
        acc = Poly.const(0)
        for i in range(1, k + 1):
            term = e[k - i] * P[i]
            acc = acc + term if i % 2 == 1 else acc - term
        e[k] = acc.scale(Fraction(1, k))
    return e


def _is_symmetric(p: Poly, family: Sequence[str]) -> bool:
    for a, b in zip(family, family[1:]):
        swapped = p.subs({a: Poly.symbol(b), b: Poly.symbol(a)})
        if swapped != p:
            return False
    return True


def symmetric_to_power_sums(p: Poly, family: Sequence[str], prefix: str) -> Poly:
    """Rewrite a polynomial symmetric in ``family`` via power sums ``prefix1..prefixk``."""
    family = list(family)
    k = len(family)
    E = elementary_from_power_sums(k, prefix)
    elem = {}
    for j in range(1, k + 1):
        acc = Poly.const(0)
        for combo in itertools.combinations(family, j):
            m = Poly.const(1)
            for v in combo:
                m = m * Poly.symbol(v)
            acc = acc + m
        elem[j] = acc
    # leading-term algorithm on the family exponents
    result = Poly.const(0)
    work = p
    while work:
        best = None
        for mono, c in work.terms():
            key = tuple(mono.get(v, 0) for v in family)
            if best is None or key > best[0]:
                best = (key, mono)
        key = best[0]
        coeff = work.coefficient({v: key[i] for i, v in enumerate(family)})
        powers = [key[i] - (key[i + 1] if i + 1 < k else 0) for i in range(k)]
        if any(pw < 0 for pw in powers):
            raise NotSymmetric("polynomial is not symmetric in the family")
        prod_e = Poly.const(1)
        prod_new = Poly.const(1)
        for i, pw in enumerate(powers):
            if pw:
                prod_e = prod_e * elem[i + 1] ** pw
                prod_new = prod_new * E[i + 1] ** pw
        work = work - coeff * prod_e
        result = result + coeff * prod_new
    return result


def power_sum_reduce(cs: ConstraintSystem, family: Sequence[str], new_prefix: str) -> ConstraintSystem:
    """Rewrite equations symmetric in ``family`` through power sums ``new_prefix1..``."""
    family = list(family)
    for eq in cs.equations:
        if not _is_symmetric(eq, family):
            raise NotSymmetric(f"equation {eq} is not symmetric in {family}")
    new_eqs = [symmetric_to_power_sums(eq, family, new_prefix) for eq in cs.equations]
    new_unknowns = [u for u in cs.unknowns if u not in family]
    # power sums go where the family stood in the order
    pos = min(cs.unknowns.index(v) for v in family) if family else len(new_unknowns)
    sums = [f"{new_prefix}{i}" for i in range(1, len(family) + 1)]
    new_unknowns = new_unknowns[:pos] + sums + new_unknowns[pos:]
    return ConstraintSystem(new_unknowns, new_eqs)


# -- brute force --------------------------------------------------------------------

def brute_force_oracle(cs: ConstraintSystem, box: int, denominator_bound: int) -> list[dict]:
    """Every rational point ``p/q`` (``|p| <= box``, ``q <= denominator_bound``) solving ``cs``."""
    if len(cs.unknowns) > 3:
        raise TooManyUnknowns("brute force is limited to three unknowns")
    values = sorted({Fraction(p, q) for q in range(1, denominator_bound + 1)
                     for p in range(-box, box + 1)})
    found = []
    for combo in itertools.product(values, repeat=len(cs.unknowns)):
        point = dict(zip(cs.unknowns, combo))
        if all(eq.evaluate(point) == 0 for eq in cs.equations):
            found.append(point)
    return found


def random_system(rng: random.Random, unknowns: Sequence[str], equations: int | None = None,
                  max_degree: int = 2, terms: int = 3, coeff_bound: int = 4) -> tuple[ConstraintSystem, dict]:
    """Random small system with one planted rational solution (for tests)."""
    equations = equations or len(unknowns)
    point = {u: Fraction(rng.randint(-3, 3), rng.choice([1, 1, 2])) for u in unknowns}
    eqs = []
    while len(eqs) < equations:
        p = Poly.const(0)
        for _ in range(terms):
            mono = Poly.const(rng.choice([c for c in range(-coeff_bound, coeff_bound + 1) if c]))
            budget = rng.randint(1, max_degree)
            for _ in range(budget):
                mono = mono * Poly.symbol(rng.choice(list(unknowns)))
            p = p + mono
        p = p - p.evaluate(point)
        if p.free_symbols:
            eqs.append(p)
    return ConstraintSystem(unknowns, eqs), point
