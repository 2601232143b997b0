"""Invariant curves assembled from Puiseux series near infinity.

An irreducible invariant curve ``F(x, y) = 0`` with ``F_y != 0`` factors over
Puiseux series as ``mu(x) * prod_j (y - y_j(x))``.  Its polynomial part gives
``F`` once the series are known to enough terms; every coefficient of a
negative (or fractional) power of ``x`` must vanish, which gives algebraic
constraints on the free coefficients and the parameters.  The cofactor follows
from the series alone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import sympy

from .algebra import Indivisible, Poly, exact_divide, format_poly, rational_roots, univariate_coeffs
from .puiseux import (
    LEAD,
    Adjoined,
    PlanarSystem,
    PuiseuxSeries,
    NoSeries,
    _to_sympy,
    dominant_balances,
    expand_series,
    free_leading_exponents,
    fuchs_indices,
    ode_from_system,
)
from .solver import ConstraintSystem, newton_power_sum_relations

UNBOUNDED = math.inf
NEG_INF = None  # marker for an exactly known series


class DepthInsufficient(ValueError):
    """The series were not computed far enough to certify a result."""

    def __init__(self, message: str, required: Fraction | None = None):
        super().__init__(message)
        self.required = required


class MixedExpansionPoints(ValueError):
    pass


# -- truncated Laurent-Puiseux series in x (near infinity) ----------------------------

@dataclass
class _Trunc:
    """``sum c_e x^e``, exact for every exponent above ``lower`` (``None``: exact)."""

    terms: dict
    lower: Fraction | None = None

    @classmethod
    def const(cls, p: Poly) -> "_Trunc":
        return cls({Fraction(0): p} if p else {}, None)

    @classmethod
    def from_series(cls, s: PuiseuxSeries) -> "_Trunc":
        return cls({e: c for e, c in s.terms() if c}, s.error_exponent)

    @classmethod
    def from_poly(cls, p: Poly, x: str) -> "_Trunc":
        return cls({Fraction(k): c for k, c in p.coefficients(x).items() if c}, None)

    def top(self) -> Fraction | None:
        return max(self.terms) if self.terms else None

    def __bool__(self):
        return bool(self.terms)


def _max_lower(*values):
    known = [v for v in values if v is not None]
    return max(known) if known else None


def _tadd(a: _Trunc, b: _Trunc, sign: int = 1) -> _Trunc:
    out = dict(a.terms)
    for e, c in b.terms.items():
        v = out.get(e, Poly.const(0)) + (c if sign > 0 else -c)
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    lower = _max_lower(a.lower, b.lower)
    if lower is not None:
        out = {e: c for e, c in out.items() if e > lower}
    return _Trunc(out, lower)


def _tscale(a: _Trunc, p: Poly) -> _Trunc:
    return _Trunc({e: c * p for e, c in a.terms.items() if c * p}, a.lower)


def _tmul(a: _Trunc, b: _Trunc, floor: Fraction, adj: Adjoined | None = None) -> _Trunc:
    """Product keeping exponents above ``floor``, with certified precision."""
    if not a.terms or not b.terms:
        lower = _max_lower(a.lower, b.lower, floor)
        return _Trunc({}, lower)
    ta, tb = a.top(), b.top()
    candidates = [floor]
    if a.lower is not None:
        candidates.append(a.lower + tb)
    if b.lower is not None:
        candidates.append(b.lower + ta)
    lower = max(candidates)
    out: dict = {}
    for e1, c1 in a.terms.items():
        if e1 + tb <= lower:
            continue
        for e2, c2 in b.terms.items():
            e = e1 + e2
            if e <= lower:
                continue
            prod = c1 * c2
            out[e] = out[e] + prod if e in out else prod
    if adj is not None:
        out = {e: adj.reduce(c) for e, c in out.items()}
    return _Trunc({e: c for e, c in out.items() if c}, lower)


def _tderiv(a: _Trunc) -> _Trunc:
    return _Trunc({e - 1: c.scale(e) for e, c in a.terms.items() if e != 0},
                  None if a.lower is None else a.lower - 1)


def _tmap(a: _Trunc, fn) -> _Trunc:
    out = {}
    for e, c in a.terms.items():
        v = fn(c)
        if v:
            out[e] = v
    return _Trunc(out, a.lower)


def _polynomial_part(a: _Trunc, x: str, what: str) -> Poly:
    if a.lower is not None and a.lower >= 0:
        raise DepthInsufficient(f"series precision x^{a.lower} does not determine {what}", a.lower)
    xs = Poly.symbol(x)
    out = Poly.const(0)
    for e, c in a.terms.items():
        if e >= 0 and e.denominator == 1:
            out = out + c * xs ** int(e)
    return out


def _power_sum_map(poly: Poly, symbol: str, table: dict) -> Poly:
    """Replace ``symbol^i`` by ``table[i]`` (a linear map, used for power sums)."""
    if symbol not in poly.free_symbols:
        return poly * table[0]
    out = Poly.const(0)
    for k, c in poly.coefficients(symbol).items():
        out = out + c * table[k]
    return out


# -- mu ----------------------------------------------------------------------------

@dataclass(frozen=True)
class MuFactor:
    """The ``x``-only factor ``mu(x)`` of the Puiseux factorization (monic)."""

    poly: Poly
    x: str = "x"

    @classmethod
    def constant(cls, x: str = "x") -> "MuFactor":
        return cls(Poly.const(1), x)

    @classmethod
    def from_roots(cls, roots: Iterable[tuple], x: str = "x") -> "MuFactor":
        p = Poly.const(1)
        for x0, mult in roots:
            p = p * (Poly.symbol(x) - x0) ** mult
        return cls(p, x)

    @property
    def degree(self) -> int:
        return self.poly.degree(self.x)

    def check_multiplicities(self, bound: Fraction) -> None:
        """Each zero may have multiplicity at most ``bound`` (sum of pole orders there)."""
        if self.poly.free_symbols - {self.x}:
            return
        for root, mult in rational_roots(self.poly, self.x):
            if mult > bound:
                raise ValueError(f"zero {root} of mu has multiplicity {mult} > {bound}")


# -- candidates ----------------------------------------------------------------------

@dataclass(frozen=True)
class Family:
    """``count`` distinct members of a one-parameter series family, via power sums."""

    series: PuiseuxSeries
    count: int
    prefix: str = "C"

    @property
    def symbol(self) -> str:
        if len(self.series.free_symbols) != 1:
            raise ValueError("a family needs exactly one free coefficient")
        return self.series.free_symbols[0]

    @property
    def power_sums(self) -> tuple:
        return tuple(f"{self.prefix}{i}" for i in range(1, self.count + 1))


@dataclass(frozen=True)
class Residue:
    ypower: int
    exponent: Fraction
    coeff: Poly


@dataclass
class CurveCandidate:
    F: Poly
    N: int
    mu: MuFactor
    residues: list
    conditions: tuple  # compatibility conditions of the series used
    unknowns: tuple  # free series coefficients and power sums appearing in F
    adjoined: Adjoined | None = None

    @property
    def constraints(self) -> list[Poly]:
        return [r.coeff for r in self.residues]

    def constraint_system(self, unknowns: Sequence[str], top_only: bool = False,
                          limit: int | None = None) -> ConstraintSystem:
        res = self.residues
        if top_only:
            res = [r for r in res if r.ypower == self.N - 1]
        eqs = list(self.conditions) + [r.coeff for r in res[:limit]]
        return ConstraintSystem(unknowns, eqs)


def _family_elementary(fam: Family, floor: Fraction, adj) -> list[_Trunc]:
    """Elementary symmetric functions of the family members, coefficients in power sums."""
    y = _Trunc.from_series(fam.series)
    top_deg = 0
    for c in fam.series.coefficients:
        top_deg = max(top_deg, c.degree(fam.symbol) if fam.symbol in c.free_symbols else 0)
    table = newton_power_sum_relations(fam.count, top_deg * fam.count + 1, fam.prefix)
    powers = {}
    acc = _Trunc.const(Poly.const(1))
    for k in range(1, fam.count + 1):
        acc = _tmul(acc, y, floor - (fam.count - k) * (y.top() or 0) - 1, adj)
        powers[k] = _tmap(acc, lambda c: _power_sum_map(c, fam.symbol, table))
    e = {0: _Trunc.const(Poly.const(1))}
    for k in range(1, fam.count + 1):
        total = _Trunc({}, None)
        for i in range(1, k + 1):
            term = _tmul(e[k - i], powers[i], floor, adj)
            total = _tadd(total, term, 1 if i % 2 == 1 else -1)
        e[k] = _tmap(total, lambda c: c.scale(Fraction(1, k)))
    return [e[k] for k in range(fam.count + 1)]


def _product(mu: MuFactor, factors, family: Family | None, floor: Fraction, x: str, adj):
    """Coefficients (by y-power) of ``mu * prod (y - y_j)^mult * prod_family (y - y_i)``."""
    # intermediate products must stay exact below ``floor`` by the remaining factors' growth
    growth = max(mu.degree, 0) + sum(m * max(s.exponent(0), 0) for s, m in factors)
    if family is not None:
        growth += family.count * max(family.series.exponent(0), 0)
    floor = floor - growth
    A = [_Trunc.from_poly(mu.poly, x)]
    for s, mult in factors:
        ys = _Trunc.from_series(s)
        for _ in range(mult):
            new = []
            for k in range(len(A) + 1):
                lower_part = A[k - 1] if k >= 1 else _Trunc({}, None)
                times = _tmul(A[k], ys, floor, adj) if k < len(A) else _Trunc({}, None)
                new.append(_tadd(lower_part, times, -1))
            A = new
    if family is not None:
        e = _family_elementary(family, floor, adj)
        r = family.count
        B = _polyseries_from_elementary(e, r)
        new = [_Trunc({}, None) for _ in range(len(A) + r)]
        for i, a in enumerate(A):
            for j, b in enumerate(B):
                new[i + j] = _tadd(new[i + j], _tmul(a, b, floor, adj))
        A = new
    return A


def _polyseries_from_elementary(e: list[_Trunc], r: int) -> list[_Trunc]:
    # prod (y - y_i) = sum_i (-1)^i e_i y^(r-i); index by y-power
    out = [None] * (r + 1)
    for i in range(r + 1):
        out[r - i] = e[i] if i % 2 == 0 else _tadd(_Trunc({}, None), e[i], -1)
    return out


def default_residue_depth(system: PlanarSystem, N: int) -> int:
    return N * (system.degree + 1) + 5


def assemble_candidate(system: PlanarSystem, factors: Sequence[tuple], mu: MuFactor | None = None,
                       family: Family | None = None, residue_depth: int | None = None,
                       adjoined: Adjoined | None = None) -> CurveCandidate:
    """``F = {mu * prod (y - y_j)}_+`` and the vanishing conditions on the rest.

    ``factors`` lists ``(series, multiplicity)``; ``family`` adds distinct members
    of a one-parameter family through their power sums.  All series must be
    expanded at infinity.  Residue constraints are certified down to exponent
    ``-residue_depth``; shallower series raise :class:`DepthInsufficient`.
    """
    x = system.x
    mu = mu or MuFactor.constant(x)
    all_series = [s for s, _ in factors] + ([family.series] if family else [])
    if any(not s.point.is_infinity for s in all_series):
        raise MixedExpansionPoints("curve assembly uses series at infinity only")
    N = sum(m for _, m in factors) + (family.count if family else 0)
    if residue_depth is None:
        residue_depth = default_residue_depth(system, N)
    floor = Fraction(-residue_depth) - 1
    for s in all_series:
        if s.adjoined is not None:
            adjoined = adjoined or s.adjoined
    coeffs = _product(mu, factors, family, floor, x, adjoined)
    ys = Poly.symbol(system.y)
    F = Poly.const(0)
    residues = []
    for k, a in enumerate(coeffs):
        if a.lower is not None and a.lower >= -residue_depth:
            raise DepthInsufficient(
                f"coefficient of y^{k} known only above x^{a.lower}; "
                f"residues down to x^{-residue_depth} required", a.lower)
        F = F + _polynomial_part(a, x, f"the y^{k} coefficient") * ys ** k
        for e, c in a.terms.items():
            if (e < 0 or e.denominator != 1) and e >= -residue_depth:
                residues.append(Residue(k, e, c))
    residues.sort(key=lambda r: (-r.exponent, -r.ypower))
    conditions = []
    unknowns = []
    for s, _ in factors:
        conditions.extend(s.compatibility_conditions)
        unknowns.extend(s.free_symbols)
    if family is not None:
        conditions.extend(c for c in family.series.compatibility_conditions
                          if family.symbol not in c.free_symbols)
        unknowns.extend(family.power_sums)
    return CurveCandidate(F, N, mu, residues, tuple(dict.fromkeys(conditions)),
                          tuple(dict.fromkeys(unknowns)), adjoined)


# -- cofactors ----------------------------------------------------------------------

def _laurent_quotient(num: Poly, den: Poly, x: str, floor: int) -> _Trunc:
    """``num/den`` expanded at infinity down to ``x^floor`` (den monic in x)."""
    dc = den.coefficients(x)
    d = max(dc)
    lead = dc[d]
    if not lead.is_constant:
        raise ValueError("mu must have a constant leading coefficient")
    inv = 1 / lead.constant_value()
    rem = {k: c for k, c in num.coefficients(x).items() if c}
    out = {}
    while rem:
        top = max(rem)
        if top - d < floor:
            break
        q = rem[top].scale(inv)
        out[Fraction(top - d)] = q
        for k, c in dc.items():
            key = top - d + k
            v = rem.get(key, Poly.const(0)) - q * c
            if v:
                rem[key] = v
            else:
                rem.pop(key, None)
    return _Trunc(out, Fraction(floor) - 1 if rem else None)


def cofactor_from_series(system: PlanarSystem, factors: Sequence[tuple], mu: MuFactor | None = None,
                         family: Family | None = None, adjoined: Adjoined | None = None) -> Poly:
    """The cofactor of ``{mu * prod (y - y_j)}_+`` computed from the series alone.

    ``lambda = {P mu'/mu + sum_j sum_m (Q - P y_j') y_j^m / y^(m+1)}_+``.
    """
    x, y = system.x, system.y
    mu = mu or MuFactor.constant(x)
    P, Q = system.P, system.Q
    ys = Poly.symbol(y)
    lam = Poly.const(0)
    degx = P.degree(x)
    if mu.degree > 0:
        ratio = _laurent_quotient(mu.poly.diff(x), mu.poly, x, -(degx + 1))
        for k, Pk in P.coefficients(y).items():
            part = _tmul(_Trunc.from_poly(Pk, x), ratio, Fraction(-1))
            lam = lam + _polynomial_part(part, x, "the cofactor") * ys ** k
    Pc, Qc = P.coefficients(y), Q.coefficients(y)
    top = max(list(Pc) + list(Qc))
    members = [(s, m, None) for s, m in factors]
    if family is not None:
        members.append((family.series, 1, family))
    for s, mult, fam in members:
        yj = _Trunc.from_series(s)
        dyj = _tderiv(yj)
        table = None
        if fam is not None:
            deg = max((c.degree(fam.symbol) for c in s.coefficients
                       if fam.symbol in c.free_symbols), default=0)
            table = newton_power_sum_relations(fam.count, deg * (top + 1) + 2, fam.prefix)
        power = _Trunc.const(Poly.const(1))  # y_j^m
        for m in range(top):
            for i in range(m + 1, top + 1):
                Ri = _tadd(_Trunc.from_poly(Qc.get(i, Poly.const(0)), x),
                           _tmul(_Trunc.from_poly(Pc.get(i, Poly.const(0)), x), dyj, Fraction(-1), adjoined), -1)
                term = _tmul(Ri, power, Fraction(-1), adjoined)
                if table is not None:
                    term = _tmap(term, lambda c: _power_sum_map(c, fam.symbol, table))
                part = _polynomial_part(term, x, "the cofactor")
                lam = lam + part.scale(mult) * ys ** (i - m - 1)
            power = _tmul(power, yj, Fraction(-1) - top * (yj.top() or 0), adjoined)
    if adjoined is not None:
        lam = adjoined.reduce(lam)
    return lam


# -- verification -------------------------------------------------------------------

@dataclass(frozen=True)
class Verified:
    F: Poly
    cofactor: Poly

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Counterexample:
    F: Poly
    cofactor: Poly
    residue: Poly

    def __bool__(self):
        return False


def verify_invariant(system: PlanarSystem, F: Poly, cofactor: Poly,
                     adjoined: Adjoined | None = None) -> Verified | Counterexample:
    """Exact check of ``P F_x + Q F_y - lambda F == 0`` (modulo an adjoined root)."""
    res = system.apply(F) - cofactor * F
    if adjoined is not None:
        res = adjoined.reduce(res)
    return Verified(F, cofactor) if not res else Counterexample(F, cofactor, res)


def _split(p: Poly, main: Sequence[str]) -> dict:
    out: dict = {}
    for mono, c in p.terms():
        key = tuple(mono.get(v, 0) for v in main)
        rest = {v: k for v, k in mono.items() if v not in main}
        out[key] = out.get(key, Poly.const(0)) + Poly.from_monomials({tuple(sorted(rest.items())): c})
    return {k: v for k, v in out.items() if v}


def divide_in_extension(numer: Poly, denom: Poly, main: Sequence[str], adj: Adjoined) -> Poly:
    """Exact division in ``Q(theta)[main]`` (coefficients reduced modulo the defining poly)."""
    N = _split(adj.reduce(numer), main)
    D = _split(adj.reduce(denom), main)
    if not D:
        raise ZeroDivisionError("division by zero")
    lead = max(D)
    inv = adj.inverse(D[lead])
    quotient = Poly.const(0)
    mains = [Poly.symbol(v) for v in main]

    def mono(key):
        m = Poly.const(1)
        for v, k in zip(mains, key):
            m = m * v ** k
        return m

    while N:
        top = max(N)
        if any(a < b for a, b in zip(top, lead)):
            raise Indivisible(f"{denom} does not divide the numerator")
        shift = tuple(a - b for a, b in zip(top, lead))
        q = adj.reduce(N[top] * inv)
        quotient = quotient + q * mono(shift)
        for key, c in D.items():
            k2 = tuple(a + b for a, b in zip(key, shift))
            v = adj.reduce(N.get(k2, Poly.const(0)) - q * c)
            if v:
                N[k2] = v
            else:
                N.pop(k2, None)
    return quotient


def cofactor_by_division(system: PlanarSystem, F: Poly, adjoined: Adjoined | None = None) -> Poly:
    """``(P F_x + Q F_y) / F``; raises :class:`Indivisible` if ``F`` is not invariant."""
    numer = system.apply(F)
    if adjoined is None:
        return exact_divide(numer, F)
    return divide_in_extension(numer, F, [system.x, system.y], adjoined)


# -- counting and obstructions ---------------------------------------------------------

def _irreducible_leading_factors(lead: Poly) -> list[Poly]:
    c = sympy.Symbol(LEAD)
    _, factors = sympy.factor_list(_to_sympy(lead, {LEAD: c}), c)
    out = []
    for fac, _ in factors:
        coeffs = [Fraction(int(v.p), int(v.q)) for v in sympy.Poly(fac, c).all_coeffs()]
        p = Poly.const(0)
        for v in coeffs:
            p = p * Poly.symbol(LEAD) + v / coeffs[0]
        out.append(p)
    return out


def curve_count_bound(system: PlanarSystem) -> int | float:
    """Upper bound on irreducible invariant curves with ``F_y != 0``.

    Finite (the number of Puiseux series near infinity) when no series has a
    free coefficient; ``UNBOUNDED`` (``math.inf``) otherwise.
    """
    if system.parameters:
        raise ValueError("curve counting needs a parameter-free system")
    E = ode_from_system(system)
    if free_leading_exponents(E):
        return UNBOUNDED
    total = 0
    for bal in dominant_balances(E):
        for factor in _irreducible_leading_factors(bal.leading_coeff_poly):
            d = factor.degree(LEAD)
            if d == 1:
                lead, adj = -factor.coefficients(LEAD).get(0, Poly.const(0)), None
            else:
                adj = Adjoined.from_poly("theta_", factor.subs({LEAD: Poly.symbol("theta_")}))
                lead = Poly.symbol("theta_")
            idx = fuchs_indices(E, bal, lead, adj)
            if idx:
                s = expand_series(E, bal, lead, depth=max(idx), adjoined=adj)
                if not isinstance(s, NoSeries) and all(
                        (adj.reduce(c) if adj else c).is_zero for c in s.compatibility_conditions):
                    return UNBOUNDED
                if isinstance(s, NoSeries):
                    continue
            total += d
    return total


def rational_integral_obstruction(cofactors: Sequence[Poly], bound: int = 10):
    """First integer vector ``d != 0`` with ``sum d_i lambda_i == 0``, or None.

    Vectors are tried by increasing max-norm, then lexicographically, with the
    first non-zero entry positive.
    """
    K = len(cofactors)
    if K == 0:
        return None
    monos = {}
    cols = []
    for lam in cofactors:
        col = {}
        for mono, c in lam.terms():
            key = tuple(sorted(mono.items()))
            monos.setdefault(key, len(monos))
            col[monos[key]] = c
        cols.append(col)
    M = sympy.Matrix(len(monos) or 1, K,
                     lambda i, j: sympy.Rational(cols[j].get(i, Fraction(0)).numerator,
                                                 cols[j].get(i, Fraction(0)).denominator))
    if len(monos) and M.rank() == K:
        return None
    rows = [[cols[j].get(i, Fraction(0)) for j in range(K)] for i in range(len(monos))]
    for norm in range(1, bound + 1):
        values = range(-norm, norm + 1)
        for d in itertools.product(values, repeat=K):
            if max(abs(v) for v in d) != norm:
                continue
            first = next(v for v in d if v)
            if first < 0:
                continue
            if all(sum(r[j] * d[j] for j in range(K)) == 0 for r in rows):
                return d
    return None


# -- x-only curves and irreducibility ---------------------------------------------------

def x_only_curves(system: PlanarSystem) -> list[tuple[Poly, Poly]]:
    """Invariant lines ``x - x0`` (rational ``x0``) with their cofactors."""
    if system.parameters:
        raise ValueError("needs a parameter-free system")
    x = system.x
    coeffs = [c for c in system.P.coefficients(system.y).values() if c]
    if not coeffs:
        return []
    from .algebra import ugcd, from_coefficient_list

    g = None
    for c in coeffs:
        u = univariate_coeffs(c, x)
        g = u if g is None else ugcd(g, u)
    out = []
    xs = Poly.symbol(x)
    for r, _ in rational_roots(from_coefficient_list([Poly.const(v) for v in g], x), x) if len(g) > 1 else []:
        F = xs - r
        out.append((F, exact_divide(system.P, F)))
    return out


def is_reducible(F: Poly, known: Iterable[Poly], x: str = "x", y: str = "y",
                 adjoined: Adjoined | None = None) -> bool:
    """Probe reducibility: content in ``y``, division by known curves, and (if
    parameter-free) factorization over Q."""
    others = [G for G in known if G.degree(y) < F.degree(y) or G.degree() < F.degree()]
    for G in others:
        if G.is_constant:
            continue
        try:
            if adjoined is not None:
                divide_in_extension(F, G, [x, y], adjoined)
            else:
                exact_divide(F, G)
            return True
        except (Indivisible, ZeroDivisionError):
            continue
    if F.free_symbols <= {x, y}:
        sx, sy = sympy.symbols(f"{x} {y}")
        _, factors = sympy.factor_list(_to_sympy(F, {x: sx, y: sy}))
        return sum(m for _, m in factors) > 1
    return False


def normalize_curve(F: Poly, y: str = "y", adjoined: Adjoined | None = None) -> Poly:
    """Scale so the coefficient of the top power of ``y`` is 1 (or monic in x if y-free)."""
    coeffs = F.coefficients(y)
    lead = coeffs[max(coeffs)]
    if lead.is_constant:
        return F.scale(1 / lead.constant_value())
    if adjoined is not None and lead.free_symbols <= {adjoined.symbol}:
        return adjoined.reduce(F * adjoined.inverse(lead))
    return F.scale(1 / lead.leading_coefficient())


def describe_curve(F: Poly, cofactor: Poly) -> str:
    return f"F = {format_poly(F)};  lambda = {format_poly(cofactor)}"
