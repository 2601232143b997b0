"""Lienard systems ``x_t = y, y_t = -f(x) y - g(x)`` with ``deg f < deg g < 2 deg f + 1``.

Near infinity the ODE ``y y' + f y + g = 0`` has exactly two balances: type (I),
``y ~ -f0/(m+1) x^(m+1)``, carrying one free coefficient at ``x^0`` behind a
compatibility condition, and type (II), ``y ~ -(g0/f0) x^(n-m)``, fully
determined.  Every irreducible curve is ``{prod (y - y_j) (y - y_N)^k}_+`` with
``k`` in {0, 1}, ``mu = 1`` and cofactor ``-N f - (N - k) q' - k p'``; for
``k = 0`` only ``y - q(x) - z0`` is possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import Indivisible, Poly, exact_divide, format_poly, parse_poly, resultant
from .curves import (
    Family,
    MuFactor,
    _power_sum_map,
    assemble_candidate,
    cofactor_from_series,
    divide_in_extension,
    is_reducible,
    normalize_curve,
    verify_invariant,
)
from .puiseux import (
    Adjoined,
    NoSeries,
    PlanarSystem,
    PuiseuxSeries,
    dominant_balances,
    expand_series,
    leading_coefficient_value,
    ode_from_system,
)
from .solver import (
    BudgetExceeded,
    ConstraintSystem,
    SolutionBranch,
    _solve,
    _Context,
    newton_power_sum_relations,
    solve,
)


class WindowError(ValueError):
    """Degrees outside ``m < n < 2m + 1`` (n = m+1 and n <= m are different regimes)."""


@dataclass(frozen=True)
class LienardSystem:
    f: Poly
    g: Poly
    x: str = "x"
    y: str = "y"

    def __post_init__(self):
        m, n = self.f.degree(self.x), self.g.degree(self.x)
        if not self.f or not self.g or not (m < n < 2 * m + 1):
            raise WindowError(
                f"need deg f < deg g < 2 deg f + 1, got deg f = {max(m, 0)}, deg g = {max(n, 0)}")
        if not self.f0.is_constant:
            raise ValueError("the leading coefficient of f must be a non-zero number")

    @classmethod
    def parse(cls, f: str, g: str, parameters: Iterable[str] = (), x: str = "x") -> "LienardSystem":
        names = [x, *parameters]
        return cls(parse_poly(f, names), parse_poly(g, names), x)

    @property
    def m(self) -> int:
        return self.f.degree(self.x)

    @property
    def n(self) -> int:
        return self.g.degree(self.x)

    def f_coeff(self, k: int) -> Poly:
        """``f_k``, the coefficient of ``x^(m-k)`` (zero outside ``0..m``)."""
        if k < 0 or k > self.m:
            return Poly.const(0)
        return self.f.coefficients(self.x).get(self.m - k, Poly.const(0))

    def g_coeff(self, k: int) -> Poly:
        if k < 0 or k > self.n:
            return Poly.const(0)
        return self.g.coefficients(self.x).get(self.n - k, Poly.const(0))

    @property
    def f0(self) -> Poly:
        return self.f.coefficients(self.x)[self.m]

    @property
    def g0(self) -> Poly:
        return self.g.coefficients(self.x)[self.n]

    @property
    def assumptions(self) -> tuple:
        """Parameter expressions assumed non-zero (``g0`` when symbolic)."""
        return () if self.g0.is_constant else (self.g0,)

    @property
    def parameters(self) -> frozenset:
        return (self.f.free_symbols | self.g.free_symbols) - {self.x}

    @property
    def planar(self) -> PlanarSystem:
        ys = Poly.symbol(self.y)
        return PlanarSystem(ys, -self.f * ys - self.g, self.x, self.y)

    def subs(self, values) -> "LienardSystem":
        return LienardSystem(self.f.subs(values), self.g.subs(values), self.x, self.y)


def q_polynomial(sys: LienardSystem) -> Poly:
    """Polynomial part (without constant) of the type-(I) series, by recurrence."""
    m, n = sys.m, sys.n
    f0 = sys.f0.constant_value()
    q = [Poly.const(-f0 / (m + 1))]
    for l in range(1, m + 1):
        acc = sys.g_coeff(n + l - (2 * m + 1))
        for k in range(l):
            acc = acc + q[k] * sys.f_coeff(l - k)
        for k in range(1, l):
            acc = acc + q[k] * q[l - k] * (m + 1 - k)
        q.append(acc.scale(Fraction(m + 1) / ((m - l + 1) * f0)))
    xs = Poly.symbol(sys.x)
    return sum((c * xs ** (m + 1 - l) for l, c in enumerate(q)), Poly.const(0))


@dataclass
class LienardStructure:
    q: Poly
    p: Poly
    compatibility: tuple  # conditions for series (I) to exist; () if automatic
    series_I: PuiseuxSeries | None  # None when the compatibility condition is violated
    series_II: PuiseuxSeries
    free_symbol: str = "c"


def _balance_series(sys: LienardSystem, exponent: int, depth: int, adj: Adjoined | None):
    E = ode_from_system(sys.planar)
    for bal in dominant_balances(E):
        if bal.exponent == exponent:
            lead = leading_coefficient_value(bal)
            if adj is not None:
                lead = adj.reduce(lead)
            return expand_series(E, bal, lead, depth=depth, adjoined=adj)
    raise AssertionError(f"no balance with exponent {exponent}")


def structure(sys: LienardSystem, depth: int = 12, adjoined: Adjoined | None = None) -> LienardStructure:
    """Both series at infinity, ``q``, ``p`` and the compatibility condition."""
    m, n = sys.m, sys.n
    s1 = _balance_series(sys, m + 1, max(depth, m + 1), adjoined)
    s2 = _balance_series(sys, n - m, max(depth, n - m), adjoined)
    xs = Poly.symbol(sys.x)
    p = sum((c * xs ** int(e) for e, c in s2.terms() if e > 0), Poly.const(0))
    if isinstance(s1, NoSeries):
        return LienardStructure(q_polynomial(sys), p, (s1.condition,), None, s2)
    q = sum((c * xs ** int(e) for e, c in s1.terms() if e > 0), Poly.const(0))
    return LienardStructure(q, p, s1.compatibility_conditions, s1, s2, s1.free_symbols[0])


def p_polynomial(sys: LienardSystem, depth: int = 12) -> tuple[Poly, PuiseuxSeries]:
    st = structure(sys, depth)
    return st.p, st.series_II


def transform_system(sys: LienardSystem, s: str = "s", z: str = "z") -> PlanarSystem:
    """``s_t = z + q(s)``, ``z_t = -(q_s + f)(z + q) - g`` (``z = y - q(x)``)."""
    q = q_polynomial(sys).subs({sys.x: Poly.symbol(s)})
    f = sys.f.subs({sys.x: Poly.symbol(s)})
    g = sys.g.subs({sys.x: Poly.symbol(s)})
    zs = Poly.symbol(z)
    return PlanarSystem(zs + q, -(q.diff(s) + f) * (zs + q) - g, s, z)


def pull_back(sys: LienardSystem, F: Poly, s: str = "s", z: str = "z") -> Poly:
    """``G(s, z) = F(s, z + q(s))``."""
    q = q_polynomial(sys).subs({sys.x: Poly.symbol(s)})
    return F.subs({sys.x: Poly.symbol(s), sys.y: Poly.symbol(z) + q})


def closed_form_cofactor(sys: LienardSystem, N: int, k: int, q: Poly | None = None,
                         p: Poly | None = None) -> Poly:
    q = q if q is not None else q_polynomial(sys)
    p = p if p is not None else structure(sys).p
    return (-sys.f.scale(N) - q.diff(sys.x).scale(N - k) - p.diff(sys.x).scale(k))


# -- x-only curves ---------------------------------------------------------------------

@dataclass(frozen=True)
class XOnlyCertificate:
    """An invariant ``F(x)`` needs ``F | P_i(x)`` for every ``y``-coefficient ``P_i`` of ``P``;
    here the ``P_i`` have no common factor, so no such curve exists."""

    coefficients: tuple  # y-coefficients of P

    def check(self) -> bool:
        from .algebra import ugcd, univariate_coeffs

        g = None
        for c in self.coefficients:
            if c.free_symbols - {"x"}:
                return False
            u = univariate_coeffs(c, "x") if c.free_symbols else [c.constant_value()]
            g = u if g is None else ugcd(g, u)
        return g is not None and len(g) == 1


def no_x_only_curves(sys: LienardSystem) -> XOnlyCertificate:
    cert = XOnlyCertificate(tuple(c for _, c in sorted(sys.planar.P.coefficients(sys.y).items())))
    if not cert.check():
        raise AssertionError("x-only curve certificate failed")
    return cert


# -- classification ------------------------------------------------------------------

@dataclass
class VerifiedCurve:
    F: Poly
    cofactor: Poly
    assignment: dict  # unknown -> Poly in free unknowns (and the adjoined root)
    adjoined: Adjoined | None
    free: tuple
    N: int
    k: int
    provenance: str
    series_values: dict = field(default_factory=dict)  # power sums C_i, or the free c for k = 0

    @property
    def degree_y(self) -> int:
        return self.F.degree("y")

    def conditions(self) -> list[str]:
        out = []
        if self.adjoined is not None:
            out.append(f"{format_poly(self.adjoined.defining_poly)} = 0")
        for name, v in self.assignment.items():
            out.append(f"{name} = {format_poly(v)}")
        return out

    def to_dict(self) -> dict:
        return {
            "F": format_poly(self.F),
            "cofactor": format_poly(self.cofactor),
            "conditions": self.conditions(),
            "free_parameters": list(self.free),
            "provenance": {"N": self.N, "k": self.k, "series": self.provenance},
            "verified": True,
        }


@dataclass
class Classification:
    curves: list
    explored_N: tuple
    closed: bool
    notes: list = field(default_factory=list)


def _order_unknowns(sys: LienardSystem, unknowns: Sequence[str]) -> list[str]:
    """Constant terms of ``g`` first, then higher ``g`` coefficients, then ``f``."""
    def key(u):
        for i in range(sys.n + 1):
            if u in sys.g.coefficients(sys.x).get(i, Poly.const(0)).free_symbols:
                return (0, i, u)
        for i in range(sys.m + 1):
            if u in sys.f.coefficients(sys.x).get(i, Poly.const(0)).free_symbols:
                return (1, i, u)
        return (2, 0, u)
    return sorted(unknowns, key=key)


def _negative_coefficients(s: PuiseuxSeries, count: int) -> list[Poly]:
    """Coefficients of ``x^-1 .. x^-count`` (zero entries included)."""
    table = {e: c for e, c in s.terms()}
    if s.error_exponent > -count:
        raise ValueError("series too short for the requested relations")
    return [table.get(Fraction(-l), Poly.const(0)) for l in range(1, count + 1)]


def _series_depth(s_exponent: int, relations: int) -> int:
    return s_exponent + relations


def _branch_values(branch: SolutionBranch) -> dict:
    return dict(branch.assignment)


class _Classifier:
    def __init__(self, sys: LienardSystem, unknowns: Sequence[str], max_N: int, relations: int,
                 budget: int):
        extra = sys.parameters - set(unknowns)
        if extra:
            raise ValueError(f"symbols {sorted(extra)} must be declared unknowns")
        self.sys = sys
        self.unknowns = _order_unknowns(sys, unknowns)
        self.max_N = max_N
        self.L = relations
        self.budget = budget
        self.m, self.n = sys.m, sys.n
        self.curves: list[VerifiedCurve] = []
        self.notes: list[str] = []
        self.closed = True  # cleared whenever some constraint system is left unresolved

    # -- helpers ---------------------------------------------------------------

    def _structure(self, sys: LienardSystem, N: int, adj=None) -> LienardStructure:
        depth = self.L + (N + 1) * (self.m + 1) + 2
        return structure(sys, depth, adj)

    def _solve(self, unknowns, equations, adj=None) -> list[SolutionBranch]:
        if adj is not None and adj.symbol not in unknowns:
            unknowns = [*unknowns, adj.symbol]
        cs = ConstraintSystem(unknowns, equations)
        try:
            if adj is None:
                branches = solve(cs, max_unknowns=max(8, len(unknowns)), budget=self.budget)
            else:
                branches = _solve(list(cs.equations), list(cs.unknowns), adj, _Context(self.budget))
        except BudgetExceeded:
            self._open(f"solver budget exhausted on {len(cs.equations)} equations in {list(cs.unknowns)}")
            return []
        for br in branches:
            if br.unresolved:
                self._open(f"branch with unresolved conditions {br.describe()}")
        return branches

    def _open(self, note: str):
        self.closed = False
        self.notes.append(note)

    def _specialize(self, branch: SolutionBranch) -> LienardSystem:
        return self.sys.subs(branch.assignment)

    def _finish(self, branch: SolutionBranch, F: Poly, N: int, k: int, sys: LienardSystem,
                st: LienardStructure, provenance: str, series_values: dict,
                depth: int = 0) -> list[VerifiedCurve]:
        """Verify exactly; on failure turn the invariance residue into new constraints."""
        adj = branch.adjoined
        lam = closed_form_cofactor(sys, N, k, st.q, st.p)
        check = verify_invariant(sys.planar, F, lam, adj)
        if check:
            F_n = normalize_curve(F, sys.y, adj)
            return [VerifiedCurve(F_n, lam, dict(branch.assignment), adj,
                                  tuple(branch.free), N, k, provenance, dict(series_values))]
        residue = check.residue
        eqs = [c for _, c in _coefficients_xy(residue, sys.x, sys.y)]
        if not branch.free:
            return []
        if depth > 2:
            self._open(f"N={N}: refinement gave up at {branch.describe()}")
            return []
        out = []
        for sub in self._solve(list(branch.free), eqs, adj):
            merged = _merge(branch, sub)
            values = {name: v.subs(sub.assignment) for name, v in series_values.items()}
            out.extend(self._finish(merged, F.subs(sub.assignment), N, k,
                                    sys.subs(sub.assignment), _subs_structure(st, sub.assignment),
                                    provenance, values, depth + 1))
        return out

    # -- N = 1 -----------------------------------------------------------------

    def k1_single(self):
        st = self._structure(self.sys, 1)
        eqs = _negative_coefficients(st.series_II, self.L)
        for br in self._solve(self.unknowns, eqs):
            sys = self._specialize(br)
            st_b = _subs_structure(st, br.assignment, br.adjoined)
            F = Poly.symbol(sys.y) - st_b.series_II.polynomial_part(sys.x)
            self.curves.extend(self._finish(br, F, 1, 1, sys, st_b, "(II)", {}))

    def k0_single(self):
        st = self._structure(self.sys, 1)
        if st.series_I is None:
            self.notes.append("type-(I) series absent: compatibility condition fails")
            return
        c = st.free_symbol
        eqs = list(st.compatibility) + _negative_coefficients(st.series_I, self.L)
        for br in self._solve([c, *self.unknowns], eqs):
            if c not in br.assignment:
                continue
            sys = self._specialize(br)
            st_b = _subs_structure(st, br.assignment, br.adjoined)
            F = Poly.symbol(sys.y) - st_b.series_I.polynomial_part(sys.x)
            z0 = br.assignment[c]
            br.assignment = {k: v for k, v in br.assignment.items() if k != c}
            self.curves.extend(self._finish(br, F, 1, 0, sys, st_b, "(I)", {c: z0}))

    # -- N >= 2, k = 1 ---------------------------------------------------------------

    def k1_multi(self, N: int):
        r = N - 1
        st = self._structure(self.sys, N)
        if st.series_I is None:
            return
        c = st.free_symbol
        sums = [f"C{i}" for i in range(1, r + 1)]
        deg = max((co.degree(c) for co in st.series_I.coefficients if c in co.free_symbols), default=1)
        table = newton_power_sum_relations(r, deg + 1, "C")
        sI = {e: co for e, co in st.series_I.terms()}
        sII = {e: co for e, co in st.series_II.terms()}
        eqs = list(st.compatibility)
        for l in range(1, self.L + 1):
            e = Fraction(-l)
            total = _power_sum_map(sI.get(e, Poly.const(0)), c, table) + sII.get(e, Poly.const(0))
            eqs.append(total)
        for br in self._solve([*sums, *self.unknowns], eqs):
            if any(s not in br.assignment for s in sums):
                self._open(f"N={N}: unresolved power sums in branch {br.describe()}")
                continue
            out = self._realize(br, N, sums)
            self.curves.extend(out)

    def _realize(self, br: SolutionBranch, N: int, sums) -> list[VerifiedCurve]:
        r = N - 1
        adj = br.adjoined
        values = {s: br.assignment[s] for s in sums}
        params = {k: v for k, v in br.assignment.items() if k not in sums}
        if r >= 2 and not _distinct_members(values, r, adj):
            return []
        sys = self.sys.subs(params)
        st = self._structure(sys, N, adj)
        if st.series_I is None:
            return []
        fam = Family(st.series_I, r, "C")
        cand = assemble_candidate(sys.planar, [(st.series_II, 1)], MuFactor.constant(sys.x),
                                  family=fam, residue_depth=self.L, adjoined=adj)
        F = cand.F.subs(values)
        if adj is not None:
            F = adj.reduce(F)
        bad = [res for res in (x.coeff.subs(values) for x in cand.residues)
               if (adj.reduce(res) if adj else res)]
        base = SolutionBranch(params, adj, tuple(br.free), (), ())
        if bad:
            if not br.free:
                return []
        if self._reducible(F, sys, adj):
            self.notes.append(f"N={N}: discarded a reducible product at {base.describe()}")
            return []
        return self._finish(base, F, N, 1, sys, st, f"(II) + {r} x (I)", values)

    def _reducible(self, F: Poly, sys: LienardSystem, adj) -> bool:
        """A reducible k=1 product contains a factor ``y - q - z0`` made of type-(I) series."""
        st = self._structure(sys, 1, adj)
        if st.series_I is None:
            return False
        c = st.free_symbol
        eqs = list(st.compatibility) + _negative_coefficients(st.series_I, self.L)
        free = sorted(sys.parameters - ({adj.symbol} if adj else set()))
        branches = self._solve([c, *free], eqs, adj)
        for br in branches:
            if c not in br.assignment or br.free:
                continue
            line = Poly.symbol(sys.y) - st.series_I.polynomial_part(sys.x).subs(br.assignment)
            try:
                if adj is not None:
                    divide_in_extension(F, line, [sys.x, sys.y], adj)
                else:
                    exact_divide(F, line)
                return True
            except Indivisible:
                continue
        if adj is None and not F.free_symbols - {sys.x, sys.y}:
            return is_reducible(F, [], sys.x, sys.y)
        return False

    def run(self) -> Classification:
        self.k1_single()
        self.k0_single()
        explored = [1]
        for N in range(2, self.max_N + 1):
            self.k1_multi(N)
            explored.append(N)
        self.curves.sort(key=lambda c: (c.N, -c.k if c.N == 1 else 0, c.adjoined is not None,
                                        format_poly(c.F)))
        return Classification(self.curves, tuple(explored), self.closed, self.notes)


def _coefficients_xy(p: Poly, x: str, y: str) -> list:
    out = {}
    for mono, c in p.terms():
        key = (mono.get(x, 0), mono.get(y, 0))
        rest = tuple(sorted((v, k) for v, k in mono.items() if v not in (x, y)))
        out.setdefault(key, {})[rest] = c
    return [(k, Poly.from_monomials(v)) for k, v in sorted(out.items())]


def _merge(branch: SolutionBranch, sub: SolutionBranch) -> SolutionBranch:
    adj = sub.adjoined or branch.adjoined
    assignment = {}
    for k, v in branch.assignment.items():
        v = v.subs(sub.assignment)
        assignment[k] = adj.reduce(v) if adj else v
    assignment.update(sub.assignment)
    return SolutionBranch(assignment, adj, tuple(sub.free), (), ())


def _subs_structure(st: LienardStructure, values: dict, adj: Adjoined | None = None) -> LienardStructure:
    def red(p):
        p = p.subs(values)
        return adj.reduce(p) if adj else p

    def series(s):
        if s is None:
            return None
        out = s.subs(values)
        if adj is not None:
            out = PuiseuxSeries(out.point, out.ramification, out.leading_index,
                                tuple(adj.reduce(c) for c in out.coefficients), out.truncation_depth,
                                out.fuchs_indices, out.free_symbols,
                                tuple(adj.reduce(c) for c in out.compatibility_conditions), adj,
                                out.branch_conditions)
        return out

    return LienardStructure(red(st.q), red(st.p), tuple(red(c) for c in st.compatibility),
                            series(st.series_I), series(st.series_II), st.free_symbol)


def _distinct_members(values: dict, r: int, adj: Adjoined | None) -> bool:
    """Power sums of ``r`` pairwise distinct numbers: the monic polynomial is squarefree."""
    from .solver import elementary_from_power_sums

    e = elementary_from_power_sums(r, "C")
    t = Poly.symbol("t_")
    poly = Poly.const(0)
    for i in range(r + 1):
        coeff = e[i].subs(values)
        term = coeff * t ** (r - i)
        poly = poly + term if i % 2 == 0 else poly - term
    disc = resultant(poly, poly.diff("t_"), "t_")
    if adj is not None:
        disc = adj.reduce(disc)
    return bool(disc)


def series_cofactor(sys: LienardSystem, curve: VerifiedCurve, relations: int = 15) -> Poly:
    """The cofactor of ``curve`` from its Puiseux series (independent of the closed form)."""
    adj = curve.adjoined
    spec = sys.subs(curve.assignment)
    st = structure(spec, relations + (curve.N + 1) * (spec.m + 1) + 2, adj)
    if curve.k == 0:
        s = st.series_I.subs(curve.series_values)
        lam = cofactor_from_series(spec.planar, [(s, 1)], adjoined=adj)
    elif curve.N == 1:
        lam = cofactor_from_series(spec.planar, [(st.series_II, 1)], adjoined=adj)
    else:
        fam = Family(st.series_I, curve.N - 1, "C")
        lam = cofactor_from_series(spec.planar, [(st.series_II, 1)], family=fam, adjoined=adj)
        lam = lam.subs(curve.series_values)
    return adj.reduce(lam) if adj else lam


def classify(sys: LienardSystem, unknowns: Sequence[str] = (), max_N: int | None = None,
             relations: int = 15, budget: int = 4000) -> Classification:
    """All irreducible invariant curves, as parameter-conditioned families.

    ``unknowns`` lists the parameter symbols to solve for.  Degrees ``N`` in
    ``y`` up to ``max_N`` (default ``m + 2``) are searched; every reported
    curve is verified exactly.
    """
    max_N = max_N if max_N is not None else sys.m + 2
    return _Classifier(sys, unknowns, max_N, relations, budget).run()


# -- normalization of the quartic family --------------------------------------------------

@dataclass(frozen=True)
class QuarticNormalization:
    """``x = X (u + x0)``, ``y = Y v``, ``t = T tau`` taking ``f = zeta x^2 + beta x + alpha``,
    ``g = eps x^4 + ...`` to ``f = 3u^2 + ...``, ``g = -3u^4 + ...``."""

    X: Fraction
    x0: Fraction
    Y: Fraction
    T: Fraction
    system: LienardSystem


def normalize_quartic(f: Poly, g: Poly, x: str = "x") -> QuarticNormalization:
    fc, gc = f.coefficients(x), g.coefficients(x)
    if f.degree(x) != 2 or g.degree(x) != 4:
        raise WindowError("expected deg f = 2 and deg g = 4")
    zeta, eps = fc[2].constant_value(), gc[4].constant_value()
    beta = fc.get(1, Poly.const(0)).constant_value()
    X = -3 * eps / zeta ** 2
    T = zeta ** 3 / (3 * eps ** 2)
    Y = X / T
    x0 = beta * zeta / (6 * eps)
    u = Poly.symbol(x)
    arg = (u + x0).scale(X)
    f_new = f.subs({x: arg}).scale(T)
    g_new = g.subs({x: arg}).scale(T / Y)
    return QuarticNormalization(X, x0, Y, T, LienardSystem(f_new, g_new, x))
