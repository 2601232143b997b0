"""Newton-polygon balances and truncated Puiseux series for ``P*y' - Q = 0``.

All series are computed in a local coordinate ``tau`` where the expansion is
ascending: ``tau = 1/x`` near infinity and ``tau = x - x0`` near a finite point.
A series with ramification ``n0`` and leading index ``l0`` is

* at infinity:  ``y = sum_l c_l x^((l0 - l)/n0)``
* at ``x0``:    ``y = sum_l c_l (x - x0)^((l0 + l)/n0)``

which is the numbering used for Fuchs indices throughout the package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from .algebra import (
    Indivisible,
    Poly,
    exact_divide,
    parse_poly,
    rational_roots,
    uinverse,
    univariate_coeffs,
)

LEAD = "c"  # symbol used for the unknown leading coefficient in balance polynomials


# -- systems and ODEs ------------------------------------------------------------

@dataclass(frozen=True)
class PlanarSystem:
    """``x_t = P(x, y)``, ``y_t = Q(x, y)`` with optional parameter symbols."""

    P: Poly
    Q: Poly
    x: str = "x"
    y: str = "y"
    coprime_checked: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not self.P and not self.Q:
            raise ValueError("the vector field vanishes identically")
        if not self.parameters:
            if _have_common_factor(self.P, self.Q, self.x, self.y):
                raise ValueError("P and Q share a non-constant common factor")
            object.__setattr__(self, "coprime_checked", True)

    @property
    def parameters(self) -> frozenset:
        return (self.P.free_symbols | self.Q.free_symbols) - {self.x, self.y}

    @property
    def degree(self) -> int:
        return max(self.P.degree_in((self.x, self.y)), self.Q.degree_in((self.x, self.y)))

    def apply(self, F: Poly) -> Poly:
        """The vector field applied to ``F``: ``P*F_x + Q*F_y``."""
        return self.P * F.diff(self.x) + self.Q * F.diff(self.y)

    def subs(self, values) -> "PlanarSystem":
        return PlanarSystem(self.P.subs(values), self.Q.subs(values), self.x, self.y)

    @classmethod
    def parse(cls, P: str, Q: str, parameters: Iterable[str] = (), x="x", y="y"):
        names = [x, y, *parameters]
        return cls(parse_poly(P, names), parse_poly(Q, names), x, y)


def _have_common_factor(P: Poly, Q: Poly, x: str, y: str) -> bool:
    import sympy

    if not P or not Q:
        return not (P.is_constant or Q.is_constant)
    sx, sy = sympy.symbols(f"{x} {y}")
    g = sympy.gcd(_to_sympy(P, {x: sx, y: sy}), _to_sympy(Q, {x: sx, y: sy}))
    return bool(g.free_symbols)


def _to_sympy(p: Poly, table: dict):
    import sympy

    expr = sympy.Integer(0)
    for mono, c in p.terms():
        term = sympy.Rational(c.numerator, c.denominator)
        for v, k in mono.items():
            term *= table.setdefault(v, sympy.Symbol(v)) ** k
        expr += term
    return expr


@dataclass(frozen=True)
class ImplicitODE:
    """``E(x, y, y')`` as a polynomial in the symbols ``x``, ``y`` and ``dy``."""

    poly: Poly
    x: str = "x"
    y: str = "y"
    dy: str = "y_x"

    @property
    def parameters(self) -> frozenset:
        return self.poly.free_symbols - {self.x, self.y, self.dy}

    def monomials(self) -> list[tuple[tuple[int, int, int], Poly]]:
        """Group terms by ``(deg_x, deg_y, deg_dy)`` with parameter coefficients."""
        groups: dict = {}
        for mono, c in self.poly.terms():
            key = (mono.get(self.x, 0), mono.get(self.y, 0), mono.get(self.dy, 0))
            rest = {v: k for v, k in mono.items() if v not in (self.x, self.y, self.dy)}
            groups.setdefault(key, {})[tuple(sorted(rest.items()))] = c
        return sorted((k, Poly.from_monomials(v)) for k, v in groups.items())

    def __str__(self):
        return str(self.poly)


def ode_from_system(system: PlanarSystem, dy: str | None = None) -> ImplicitODE:
    """``P * y' - Q`` for the planar system."""
    dy = dy or f"{system.y}_{system.x}"
    E = system.P * Poly.symbol(dy) - system.Q
    return ImplicitODE(E, system.x, system.y, dy)


# -- expansion points and algebraic contexts ----------------------------------------

@dataclass(frozen=True)
class ExpansionPoint:
    """Either ``x = infinity`` (``x0 is None``) or a finite point ``x0``."""

    x0: Poly | None = None

    @classmethod
    def infinity(cls) -> "ExpansionPoint":
        return cls(None)

    @classmethod
    def finite(cls, x0) -> "ExpansionPoint":
        if isinstance(x0, str):
            x0 = Poly.symbol(x0)
        elif not isinstance(x0, Poly):
            x0 = Poly.const(x0)
        return cls(x0)

    @property
    def is_infinity(self) -> bool:
        return self.x0 is None

    def __str__(self):
        return "infinity" if self.x0 is None else f"x0 = {self.x0}"


INFINITY = ExpansionPoint.infinity()


@dataclass(frozen=True)
class Adjoined:
    """A root ``symbol`` of a parameter-free polynomial, for exact work in Q(theta)."""

    symbol: str
    defining: tuple  # rational coefficients, highest power first, monic

    @classmethod
    def from_poly(cls, symbol: str, poly: Poly) -> "Adjoined":
        coeffs = univariate_coeffs(poly, symbol)
        return cls(symbol, tuple(c / coeffs[0] for c in coeffs))

    @property
    def defining_poly(self) -> Poly:
        t = Poly.symbol(self.symbol)
        out = Poly.const(0)
        for c in self.defining:
            out = out * t + c
        return out

    def reduce(self, p: Poly) -> Poly:
        d = len(self.defining) - 1
        coeffs = p.coefficients(self.symbol)
        if not coeffs or max(coeffs) < d:
            return p
        top = max(coeffs)
        work = [coeffs.get(k, Poly.const(0)) for k in range(top + 1)]
        for k in range(top, d - 1, -1):
            c = work[k]
            if not c:
                continue
            work[k] = Poly.const(0)
            # theta^k = -theta^(k-d) * sum_{i<d} a_i theta^i
            for i, a in enumerate(self.defining[1:]):
                if a:
                    work[k - 1 - i] = work[k - 1 - i] - c.scale(a)
        t = Poly.symbol(self.symbol)
        out = Poly.const(0)
        for k in range(min(top, d - 1), -1, -1):
            out = out * t + work[k]
        return out

    def inverse(self, p: Poly) -> Poly:
        if p.free_symbols - {self.symbol}:
            raise NotImplementedError("cannot invert a parameter-dependent algebraic number")
        inv = uinverse(univariate_coeffs(p, self.symbol), list(self.defining))
        t = Poly.symbol(self.symbol)
        out = Poly.const(0)
        for c in inv:
            out = out * t + c
        return out


# -- local form of the ODE --------------------------------------------------------

@dataclass(frozen=True)
class _LocalTerm:
    shift: int  # power of tau
    ydeg: int
    ddeg: int  # power of dy/dtau
    coeff: Poly
    source: tuple  # monomial identifier in the original ODE (or local one at finite points)

    @property
    def a(self) -> int:
        return self.shift - self.ddeg

    @property
    def b(self) -> int:
        return self.ydeg + self.ddeg


def _local_terms(E: ImplicitODE, point: ExpansionPoint) -> list[_LocalTerm]:
    out = []
    if point.is_infinity:
        # x = 1/tau, dy/dx = -tau^2 dy/dtau
        for (q1, q2, q3), c in E.monomials():
            coeff = c if q3 % 2 == 0 else -c
            out.append(_LocalTerm(2 * q3 - q1, q2, q3, coeff, (q1, q2, q3)))
        return out
    groups: dict = {}
    for (q1, q2, q3), c in E.monomials():
        for i in range(q1 + 1):
            part = c * (point.x0 ** (q1 - i)) if q1 - i else c
            part = part.scale(comb(q1, i))
            key = (i, q2, q3)
            groups[key] = groups[key] + part if key in groups else part
    for (i, q2, q3), c in sorted(groups.items()):
        if c:
            out.append(_LocalTerm(i, q2, q3, c, (i, q2, q3)))
    return out


def _x_exponent(point: ExpansionPoint, local: Fraction) -> Fraction:
    return -local if point.is_infinity else local


# -- balances -----------------------------------------------------------------------

@dataclass(frozen=True)
class Balance:
    """An edge of the Newton polygon: ``y ~ c * x^exponent`` (or ``(x-x0)^exponent``)."""

    point: ExpansionPoint
    exponent: Fraction
    leading_coeff_poly: Poly  # in the symbol LEAD, no zero root
    dominant_terms: frozenset
    assumptions: tuple = ()  # parameter polynomials assumed non-zero

    @property
    def ramification(self) -> int:
        return self.exponent.denominator

    @property
    def leading_index(self) -> int:
        return self.exponent.numerator

    @property
    def local_exponent(self) -> Fraction:
        return -self.exponent if self.point.is_infinity else self.exponent

    @property
    def series_count(self) -> int:
        return self.leading_coeff_poly.degree(LEAD)


@dataclass(frozen=True)
class FreeLeading:
    """An exponent at which the leading coefficient is arbitrary (char. poly vanishes)."""

    point: ExpansionPoint
    exponent: Fraction


def _char_coefficient(term: _LocalTerm, rho: Fraction) -> Poly:
    # leading contribution of a*tau^j*y^q2*(y_tau)^q3 with y = c*tau^rho is a*rho^q3*c^(q2+q3)
    if term.ddeg == 0:
        return term.coeff
    return term.coeff.scale(rho ** term.ddeg)


def _polygon(terms: list[_LocalTerm]):
    points: dict = {}
    for t in terms:
        points.setdefault((t.a, t.b), []).append(t)
    return points


def _candidate_rhos(points) -> set:
    keys = list(points)
    rhos = set()
    for i, (a1, b1) in enumerate(keys):
        for a2, b2 in keys[i + 1:]:
            if b1 != b2:
                rhos.add(Fraction(a2 - a1, b1 - b2))
    return rhos


def _vertex_free_rhos(points) -> set:
    """Exponents where a single polygon point's own coefficient vanishes (e.g. x*y' - y)."""
    rhos = set()
    for (a, b), ts in points.items():
        if b == 0 or not any(t.ddeg for t in ts):
            continue
        # sum_t coeff_t * rho^ddeg_t, rational roots only for parameter-free coefficients
        poly = Poly.const(0)
        r = Poly.symbol("rho_")
        for t in ts:
            poly = poly + t.coeff * r ** t.ddeg
        if poly.free_symbols - {"rho_"}:
            continue
        if poly.is_zero:
            continue
        for root, _ in rational_roots(poly, "rho_"):
            rhos.add(root)
    return rhos


def _edge_at(points, rho: Fraction):
    weights = {k: k[0] + rho * k[1] for k in points}
    low = min(weights.values())
    return low, [k for k, w in weights.items() if w == low]


def _char_poly(points, keys, rho) -> Poly:
    c = Poly.symbol(LEAD)
    out = Poly.const(0)
    for k in keys:
        for t in points[k]:
            out = out + _char_coefficient(t, rho) * c ** t.b
    return out


def _strip_zero_root(poly: Poly) -> Poly:
    coeffs = poly.coefficients(LEAD)
    low = min(coeffs)
    if low == 0:
        return poly
    return exact_divide(poly, Poly.symbol(LEAD) ** low)


def _balances_from_terms(terms, point, negative_only=False):
    points = _polygon(terms)
    balances, free = [], []
    for rho in sorted(_candidate_rhos(points) | _vertex_free_rhos(points)):
        if negative_only and rho >= 0:
            continue
        _, keys = _edge_at(points, rho)
        char = _char_poly(points, keys, rho)
        exponent = _x_exponent(point, rho)
        if char.is_zero:
            free.append(FreeLeading(point, exponent))
            continue
        if len(keys) < 2:
            continue
        lead = _strip_zero_root(char)
        if lead.degree(LEAD) < 1:
            continue
        coeffs = lead.coefficients(LEAD)
        assumptions = tuple(
            coeffs[k] for k in (max(coeffs), min(coeffs)) if not coeffs[k].is_constant)
        dominant = frozenset(t.source for k in keys for t in points[k])
        balances.append(Balance(point, exponent, lead, dominant, assumptions))
    order = (lambda b: -b.exponent) if point.is_infinity else (lambda b: b.exponent)
    balances.sort(key=order)
    return balances, free


def dominant_balances(E: ImplicitODE, point: ExpansionPoint = INFINITY,
                      negative_only: bool = False) -> list[Balance]:
    """Series-producing Newton-polygon edges of ``E`` at ``point``.

    At infinity the balances are sorted by decreasing exponent.  With
    ``negative_only`` only finite-point balances with a pole are returned.
    """
    balances, _ = _balances_from_terms(_local_terms(E, point), point, negative_only)
    return balances


def free_leading_exponents(E: ImplicitODE, point: ExpansionPoint = INFINITY) -> list[FreeLeading]:
    """Exponents at which every leading coefficient solves the characteristic equation."""
    return _balances_from_terms(_local_terms(E, point), point)[1]


def leading_coefficient_value(balance: Balance) -> Poly | None:
    """The unique leading coefficient if the balance polynomial is linear in ``c``."""
    coeffs = balance.leading_coeff_poly.coefficients(LEAD)
    if max(coeffs) != 1:
        return None
    A, B = coeffs[1], coeffs.get(0, Poly.const(0))
    if A.is_constant:
        return (-B).scale(1 / A.constant_value())
    try:
        return exact_divide(-B, A)
    except Indivisible:
        return None


def rational_leading_coefficients(balance: Balance) -> list[Fraction]:
    if balance.leading_coeff_poly.free_symbols - {LEAD}:
        raise ValueError("leading coefficient polynomial depends on parameters")
    return [r for r, _ in rational_roots(balance.leading_coeff_poly, LEAD)]


# -- indicial polynomial and Fuchs indices ---------------------------------------------

def _indicial(terms, balance: Balance, c0: Poly, r: Poly,
              adjoined: Adjoined | None = None) -> Poly:
    rho0 = balance.local_exponent
    points = _polygon(terms)
    _, keys = _edge_at(points, rho0)
    out = Poly.const(0)
    for k in keys:
        for t in points[k]:
            # d/dd of (c tau^rho0 + d tau^r)^q2 (rho0 c tau^(rho0-1) + r d tau^(r-1))^q3
            base = c0 ** (t.b - 1) if t.b >= 1 else Poly.const(0)
            lin = Poly.const(0)
            if t.ydeg:
                lin = lin + Poly.const(t.ydeg * rho0 ** t.ddeg)
            if t.ddeg:
                lin = lin + r.scale(t.ddeg * rho0 ** (t.ddeg - 1))
            out = out + t.coeff * base * lin
    if adjoined is not None:
        out = adjoined.reduce(out)
    return out


def _index_of(balance: Balance, rho: Fraction) -> Fraction:
    return (rho - balance.local_exponent) * balance.ramification


def fuchs_indices(E: ImplicitODE, balance: Balance, leading_coeff=None,
                  adjoined: Adjoined | None = None) -> list[int]:
    """Positive indices ``l`` at which the series coefficient is undetermined."""
    c0 = _resolve_leading(balance, leading_coeff, adjoined)[0]
    terms = _local_terms(E, balance.point)
    r = Poly.symbol("r_")
    ind = _indicial(terms, balance, c0, r, adjoined)
    if ind.is_zero:
        raise NotImplementedError("indicial polynomial vanishes identically (multiple root)")
    coeffs = ind.coefficients("r_")
    if max(coeffs) == 0:
        return []
    lead = coeffs[max(coeffs)]
    if adjoined is not None and not (lead.free_symbols - {adjoined.symbol}):
        inv = adjoined.inverse(lead)
        ind = adjoined.reduce(ind * inv)
    elif not lead.is_constant:
        ind = sum((exact_divide(c, lead) * r ** k for k, c in coeffs.items()), Poly.const(0))
    else:
        ind = ind.scale(1 / lead.constant_value())
    if ind.free_symbols - {"r_"}:
        raise NotImplementedError(f"indicial polynomial {ind} depends on parameters")
    found = []
    for root, _ in rational_roots(ind, "r_"):
        idx = _index_of(balance, root)
        if idx > 0 and idx.denominator == 1:
            found.append(int(idx))
    return found


def _resolve_leading(balance: Balance, leading_coeff, adjoined):
    lead = balance.leading_coeff_poly
    if isinstance(leading_coeff, str):
        if lead.free_symbols - {LEAD}:
            raise NotImplementedError("cannot adjoin a root of a parametric polynomial")
        adj = Adjoined.from_poly(leading_coeff, lead.subs({LEAD: Poly.symbol(leading_coeff)}))
        return Poly.symbol(leading_coeff), adj
    if leading_coeff is None:
        if adjoined is not None:
            return Poly.symbol(adjoined.symbol), adjoined
        value = leading_coefficient_value(balance)
        if value is None:
            raise ValueError("balance has several leading coefficients; choose one")
        return value, None
    c0 = leading_coeff if isinstance(leading_coeff, Poly) else Poly.const(leading_coeff)
    check = lead.subs({LEAD: c0})
    if adjoined is not None:
        check = adjoined.reduce(check)
    if check:
        raise ValueError(f"{c0} is not a root of {lead}")
    return c0, adjoined


# -- truncated local series arithmetic ---------------------------------------------------

def _smul(a: dict, b: dict, upto: Fraction, adj: Adjoined | None) -> dict:
    out: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = e1 + e2
            if e > upto:
                continue
            prod = c1 * c2
            out[e] = out[e] + prod if e in out else prod
    if adj is not None:
        out = {e: adj.reduce(c) for e, c in out.items()}
    return {e: c for e, c in out.items() if c}


def _spow(a: dict, k: int, upto: Fraction, adj) -> dict:
    if k == 0:
        return {Fraction(0): Poly.const(1)}
    low = min(a)
    result = {e: c for e, c in a.items() if e <= upto - (k - 1) * low}
    for i in range(1, k):
        remaining = k - 1 - i
        result = _smul(result, a, upto - remaining * low, adj)
    return result


def _sderiv(a: dict) -> dict:
    return {e - 1: c.scale(e) for e, c in a.items() if e != 0}


def _evaluate_local(terms, y: dict, upto: Fraction, adj) -> dict:
    """Local ODE at the truncated series, all exponents <= upto."""
    dy = _sderiv(y)
    low_y = min(y)
    low_d = min(dy) if dy else None
    ypows: dict = {}
    dpows: dict = {}
    total: dict = {}
    for t in terms:
        cut = Fraction(upto - t.shift)
        if t.ddeg and not dy:
            continue
        d_low = t.ddeg * low_d if t.ddeg else 0
        y_low = t.ydeg * low_y
        part = {Fraction(0): Poly.const(1)}
        if t.ydeg:
            key = (t.ydeg, cut - d_low)
            if key not in ypows:
                ypows[key] = _spow(y, t.ydeg, cut - d_low, adj)
            part = ypows[key]
        if t.ddeg:
            key = (t.ddeg, cut - y_low)
            if key not in dpows:
                dpows[key] = _spow(dy, t.ddeg, cut - y_low, adj)
            part = _smul(part, dpows[key], cut, adj)
        for e, c in part.items():
            if e + t.shift <= upto:
                e2 = e + t.shift
                v = c * t.coeff
                total[e2] = total[e2] + v if e2 in total else v
    if adj is not None:
        total = {e: adj.reduce(c) for e, c in total.items()}
    return {e: c for e, c in total.items() if c}


# -- Puiseux series --------------------------------------------------------------------

@dataclass(frozen=True)
class PuiseuxSeries:
    point: ExpansionPoint
    ramification: int
    leading_index: int
    coefficients: tuple
    truncation_depth: int
    fuchs_indices: tuple = ()
    free_symbols: tuple = ()
    compatibility_conditions: tuple = ()
    adjoined: Adjoined | None = None
    branch_conditions: tuple = ()

    def exponent(self, index: int) -> Fraction:
        step = Fraction(index, self.ramification)
        lead = Fraction(self.leading_index, self.ramification)
        return lead - step if self.point.is_infinity else lead + step

    def terms(self) -> list[tuple[Fraction, Poly]]:
        """``(exponent, coefficient)`` pairs in expansion order, zeros included."""
        return [(self.exponent(i), c) for i, c in enumerate(self.coefficients)]

    @property
    def local(self) -> dict:
        out = {}
        for i, c in enumerate(self.coefficients):
            if c:
                e = self.exponent(i)
                out[-e if self.point.is_infinity else e] = c
        return out

    @property
    def error_exponent(self) -> Fraction:
        """Exponent of the first uncomputed term."""
        return self.exponent(self.truncation_depth + 1)

    def polynomial_part(self, x: str = "x") -> Poly:
        """Terms with non-negative integer exponent (at infinity)."""
        xs = Poly.symbol(x)
        out = Poly.const(0)
        for e, c in self.terms():
            if e >= 0 and e.denominator == 1:
                out = out + c * xs ** int(e)
        return out

    def subs(self, values) -> "PuiseuxSeries":
        return PuiseuxSeries(
            self.point, self.ramification, self.leading_index,
            tuple(c.subs(values) for c in self.coefficients), self.truncation_depth,
            self.fuchs_indices, self.free_symbols,
            tuple(c.subs(values) for c in self.compatibility_conditions), self.adjoined,
            tuple(c.subs(values) for c in self.branch_conditions))

    def to_dict(self) -> dict:
        return {
            "point": "infinity" if self.point.is_infinity else str(self.point.x0),
            "ramification": self.ramification,
            "leading_index": self.leading_index,
            "truncation_depth": self.truncation_depth,
            "terms": [[str(e), str(c)] for e, c in self.terms()],
            "fuchs_indices": list(self.fuchs_indices),
            "free_symbols": list(self.free_symbols),
            "compatibility_conditions": [str(c) for c in self.compatibility_conditions],
            "branch_conditions": [str(c) for c in self.branch_conditions],
            "adjoined": None if self.adjoined is None else {
                "symbol": self.adjoined.symbol,
                "defining_polynomial": str(self.adjoined.defining_poly)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict, symbols: Sequence[str]) -> "PuiseuxSeries":
        names = list(symbols) + list(data["free_symbols"])
        adj = None
        if data.get("adjoined"):
            a = data["adjoined"]
            names.append(a["symbol"])
            adj = Adjoined.from_poly(a["symbol"], parse_poly(a["defining_polynomial"], [a["symbol"]]))
        point = INFINITY if data["point"] == "infinity" else ExpansionPoint.finite(
            parse_poly(data["point"], names))
        return cls(
            point, data["ramification"], data["leading_index"],
            tuple(parse_poly(c, names) for _, c in data["terms"]), data["truncation_depth"],
            tuple(data["fuchs_indices"]), tuple(data["free_symbols"]),
            tuple(parse_poly(c, names) for c in data["compatibility_conditions"]), adj,
            tuple(parse_poly(c, names) for c in data.get("branch_conditions", [])))

    def __str__(self):
        var = "x" if self.point.is_infinity else f"(x - {self.point.x0})"
        parts = []
        for e, c in self.terms():
            if c:
                parts.append(f"({c})*{var}^({e})")
        order = self.error_exponent
        return " + ".join(parts or ["0"]) + f" + O({var}^({order}))"


@dataclass(frozen=True)
class NoSeries:
    """The balance produces no series (an order equation is inconsistent)."""

    balance: Balance
    index: int
    condition: Poly


def expand_series(E: ImplicitODE, balance: Balance, leading_coeff=None, depth: int = 10,
                  symbol_prefix: str = "c", max_ramification: int = 4,
                  adjoined: Adjoined | None = None) -> PuiseuxSeries | NoSeries:
    """Undetermined-coefficients expansion of a balance to ``depth`` further terms.

    ``leading_coeff`` may be a rational root of the balance polynomial, a
    polynomial in the parameters, a new symbol name (adjoined as an algebraic
    root of the balance polynomial), or ``None`` when the root is unique.
    At a Fuchs index a fresh symbol ``<prefix><index>`` is introduced and the
    order's remaining term is recorded as a compatibility condition.
    """
    n0 = balance.ramification
    if n0 > max_ramification:
        raise NotImplementedError(f"ramification {n0} exceeds the supported {max_ramification}")
    c0, adj = _resolve_leading(balance, leading_coeff, adjoined)
    terms = _local_terms(E, balance.point)
    rho0 = balance.local_exponent
    omega, _ = _edge_at(_polygon(terms), rho0)
    r = Poly.symbol("r_")
    ind = _indicial(terms, balance, c0, r, adj)
    if ind.is_zero:
        raise NotImplementedError("indicial polynomial vanishes identically (multiple root)")
    y = {rho0: c0}
    coefficients = [c0]
    fuchs, free, compat, branches = [], [], [], []
    step = Fraction(1, n0)
    for k in range(1, depth + 1):
        rho = rho0 + k * step
        target = omega + k * step
        residual = _evaluate_local(terms, y, target, adj).get(target, Poly.const(0))
        lin = ind.subs({"r_": Poly.const(rho)})
        if adj is not None:
            lin = adj.reduce(lin)
        if lin.is_zero:
            name = f"{symbol_prefix}{k}"
            fuchs.append(k)
            free.append(name)
            if residual:
                if residual.is_constant:
                    return NoSeries(balance, k, residual)
                compat.append(residual)
            coeff = Poly.symbol(name)
        else:
            coeff = _divide_coefficient(-residual, lin, adj, branches)
        coefficients.append(coeff)
        if coeff:
            y[rho] = coeff
    return PuiseuxSeries(balance.point, n0, int(balance.exponent * n0), tuple(coefficients),
                         depth, tuple(fuchs), tuple(free), tuple(compat), adj, tuple(branches))


def _divide_coefficient(numer: Poly, denom: Poly, adj, branches) -> Poly:
    if not numer:
        return numer
    if denom.is_constant:
        return numer.scale(1 / denom.constant_value())
    if adj is not None and not (denom.free_symbols - {adj.symbol}):
        return adj.reduce(numer * adj.inverse(denom))
    try:
        q = exact_divide(numer, denom)
    except Indivisible:
        raise NotImplementedError(
            f"coefficient requires division by the parameter expression {denom}") from None
    if denom not in branches:
        branches.append(denom)
    return q


def residual(s: PuiseuxSeries, E: ImplicitODE) -> dict:
    """``E`` evaluated exactly at the truncated series, as ``{x-exponent: coeff}``."""
    terms = _local_terms(E, s.point)
    y = s.local
    if not y:
        local = {Fraction(t.shift): t.coeff for t in terms if t.ydeg == 0 and t.ddeg == 0}
    else:
        top_y = max(y)
        dy = _sderiv(y)
        top_d = max(dy) if dy else Fraction(0)
        bound = max(t.shift + t.ydeg * top_y + t.ddeg * top_d for t in terms)
        local = _evaluate_local(terms, y, Fraction(bound), s.adjoined)
    return {_x_exponent(s.point, e): c for e, c in local.items() if c}


def residual_order(s: PuiseuxSeries, E: ImplicitODE) -> Fraction | None:
    """Leading exponent of ``E(x, s, s')``; ``None`` if the residual is exactly zero.

    At infinity this is the largest surviving exponent, at a finite point the smallest.
    """
    res = residual(s, E)
    if not res:
        return None
    return max(res) if s.point.is_infinity else min(res)


def guaranteed_residual_order(s: PuiseuxSeries, E: ImplicitODE) -> Fraction:
    """Bound the expansion guarantees: every surviving term lies at or beyond it."""
    terms = _local_terms(E, s.point)
    rho0 = Fraction(s.leading_index, s.ramification)
    rho0 = -rho0 if s.point.is_infinity else rho0
    omega, _ = _edge_at(_polygon(terms), rho0)
    local = omega + Fraction(s.truncation_depth + 1, s.ramification)
    return _x_exponent(s.point, local)


# -- finite points and Lemma-1 style data -------------------------------------------------

@dataclass(frozen=True)
class PoleData:
    """Finite points (roots of ``condition``; zero = generic point) with a pole balance."""

    condition: Poly
    balance: Balance

    @property
    def pole_order(self) -> Fraction:
        return -self.balance.exponent


X0 = "x0"


def finite_point_negative_series(system: PlanarSystem, x0: str = X0) -> list[PoleData]:
    """Finite points admitting Puiseux series with a negative leading exponent.

    The local ODE is built at a symbolic point ``x0``.  Generic points give
    entries with the zero condition; special points are the roots of the
    coefficient polynomials in ``x0`` (factored over Q when parameter-free).
    """
    E = ode_from_system(system)
    point = ExpansionPoint.finite(x0)
    terms = _local_terms(E, point)
    results = []
    generic, _ = _balances_from_terms(terms, point, negative_only=True)
    results.extend(PoleData(Poly.const(0), b) for b in generic)
    for cond in _special_conditions(terms, x0):
        reduced = []
        for t in terms:
            c = _reduce_mod(t.coeff, cond, x0)
            if c:
                reduced.append(_LocalTerm(t.shift, t.ydeg, t.ddeg, c, t.source))
        special, _ = _balances_from_terms(reduced, point, negative_only=True)
        generic_keys = {(b.exponent, b.dominant_terms) for b in generic}
        for b in special:
            if (b.exponent, b.dominant_terms) not in generic_keys:
                lead = _reduce_mod(b.leading_coeff_poly, cond, x0)
                results.append(PoleData(cond, Balance(point, b.exponent, lead,
                                                      b.dominant_terms, b.assumptions)))
    return results


def _special_conditions(terms, x0: str) -> list[Poly]:
    import sympy

    polys = []
    for t in terms:
        if x0 in t.coeff.free_symbols and t.coeff not in polys:
            polys.append(t.coeff)
    conditions = []
    for p in polys:
        if p.free_symbols == {x0}:
            sx = sympy.Symbol(x0)
            _, factors = sympy.factor_list(_to_sympy(p, {x0: sx}), sx)
            for fac, _ in factors:
                coeffs = [Fraction(int(c.p), int(c.q)) for c in sympy.Poly(fac, sx).all_coeffs()]
                poly = Poly.const(0)
                for c in coeffs:
                    poly = poly * Poly.symbol(x0) + c / coeffs[0]
                if poly not in conditions:
                    conditions.append(poly)
        elif p not in conditions:
            conditions.append(p)
    return conditions


def _reduce_mod(p: Poly, cond: Poly, x0: str) -> Poly:
    if cond.free_symbols == {x0}:
        return Adjoined.from_poly(x0, cond).reduce(p)
    try:
        exact_divide(p, cond)
        return Poly.const(0)
    except Indivisible:
        return p


def mu_multiplicity_bound(poles: Iterable[PoleData]) -> Fraction:
    """Upper bound on the multiplicity of a zero of mu(x) at one point: sum of pole orders."""
    return sum((p.pole_order * p.balance.series_count for p in poles), Fraction(0))
