"""Exact sparse polynomials over the rationals in named symbols.

A :class:`Poly` carries an ordered tuple of symbol names and a mapping from
exponent vectors to :class:`fractions.Fraction` coefficients.  Dynamical
variables and parameters are treated uniformly; binary operations extend the
symbol context by union.  Values are immutable.

The canonical symbol order is ``x < y < everything else`` (the rest sorted by
name, digit runs compared numerically), and the printer lists terms in
graded-lex order, largest first.
"""

from __future__ import annotations

import contextlib
import contextvars
import re
from fractions import Fraction
from itertools import islice
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence, Union

from sympy import divisors

Rational = Fraction
Number = Union[int, Fraction]

_DEGREE_CAP = contextvars.ContextVar("degree_cap", default=64)


@contextlib.contextmanager
def degree_cap(limit: int):
    """Temporarily change the per-variable degree cap for multiplication."""
    token = _DEGREE_CAP.set(limit)
    try:
        yield
    finally:
        _DEGREE_CAP.reset(token)


class DegreeOverflow(ArithmeticError):
    pass


class Indivisible(ArithmeticError):
    """Raised by :func:`exact_divide` when the quotient is not a polynomial."""


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        pointer = ""
        if text:
            pointer = "\n  " + text + "\n  " + " " * position + "^"
        super().__init__(f"{message} at position {position}{pointer}")


class UndeclaredSymbol(ParseError):
    pass


_DIGITS = re.compile(r"(\d+)")


def var_key(name: str):
    if name == "x":
        return (0,)
    if name == "y":
        return (1,)
    parts = _DIGITS.split(name)
    return (2, tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p))


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class Poly:
    """Sparse multivariate polynomial with rational coefficients."""

    __slots__ = ("_vars", "_terms", "_hash")

    def __init__(self, variables: Iterable[str] = (), terms: Mapping | None = None):
        vs = tuple(variables)
        if len(set(vs)) != len(vs):
            raise ValueError(f"duplicate symbols in {vs}")
        order = tuple(sorted(vs, key=var_key))
        clean = {}
        if terms:
            perm = [vs.index(v) for v in order]
            for exps, coeff in terms.items():
                exps = tuple(exps)
                if len(exps) != len(vs) or any(e < 0 for e in exps):
                    raise ValueError(f"bad exponent vector {exps} for symbols {vs}")
                c = _as_fraction(coeff)
                if c:
                    key = tuple(exps[i] for i in perm)
                    c = clean.get(key, 0) + c
                    if c:
                        clean[key] = c
                    else:
                        del clean[key]
        self._vars = order
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, variables: tuple, terms: dict) -> "Poly":
        obj = object.__new__(cls)
        obj._vars = variables
        obj._terms = terms
        obj._hash = None
        return obj

    # -- constructors -------------------------------------------------------

    @classmethod
    def const(cls, value: Number) -> "Poly":
        c = _as_fraction(value)
        return cls._raw((), {(): c} if c else {})

    @classmethod
    def symbol(cls, name: str) -> "Poly":
        return cls._raw((name,), {(1,): Fraction(1)})

    @classmethod
    def from_monomials(cls, mapping: Mapping) -> "Poly":
        """Build from ``{((name, exp), ...): coeff}``."""
        names = sorted({n for mono in mapping for n, _ in mono}, key=var_key)
        index = {n: i for i, n in enumerate(names)}
        terms = {}
        for mono, coeff in mapping.items():
            e = [0] * len(names)
            for n, k in mono:
                e[index[n]] += k
            key = tuple(e)
            c = terms.get(key, 0) + _as_fraction(coeff)
            if c:
                terms[key] = c
            else:
                terms.pop(key, None)
        return cls._raw(tuple(names), terms)

    # -- basic accessors ----------------------------------------------------

    @property
    def variables(self) -> tuple:
        return self._vars

    @property
    def free_symbols(self) -> frozenset:
        used = [False] * len(self._vars)
        for e in self._terms:
            for i, k in enumerate(e):
                if k:
                    used[i] = True
        return frozenset(v for v, u in zip(self._vars, used) if u)

    def terms(self) -> Iterable[tuple[dict, Fraction]]:
        """Yield ``({name: exp}, coeff)`` pairs (zero exponents omitted)."""
        for e, c in self._terms.items():
            yield {v: k for v, k in zip(self._vars, e) if k}, c

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_value(self) -> Fraction:
        """The value of a constant polynomial; raises if not constant."""
        if not self._terms:
            return Fraction(0)
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return next(iter(self._terms.values()))

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * len(self._vars), Fraction(0))

    def degree(self, var: str | None = None) -> int:
        """Total degree, or degree in ``var``; the zero polynomial has degree -1."""
        if not self._terms:
            return -1
        if var is None:
            return max(sum(e) for e in self._terms)
        if var not in self._vars:
            return 0
        i = self._vars.index(var)
        return max(e[i] for e in self._terms)

    def degree_in(self, names: Iterable[str]) -> int:
        names = set(names)
        idx = [i for i, v in enumerate(self._vars) if v in names]
        if not self._terms:
            return -1
        return max(sum(e[i] for i in idx) for e in self._terms)

    # -- context handling ---------------------------------------------------

    def with_variables(self, variables: tuple) -> "Poly":
        """Re-express in a (sorted) superset of the current symbols."""
        if variables == self._vars:
            return self
        pos = [variables.index(v) for v in self._vars]
        n = len(variables)
        terms = {}
        for e, c in self._terms.items():
            new = [0] * n
            for p, k in zip(pos, e):
                new[p] = k
            terms[tuple(new)] = c
        return Poly._raw(variables, terms)

    def compact(self) -> "Poly":
        """Drop symbols that do not occur."""
        used = self.free_symbols
        if len(used) == len(self._vars):
            return self
        keep = [i for i, v in enumerate(self._vars) if v in used]
        terms = {tuple(e[i] for i in keep): c for e, c in self._terms.items()}
        return Poly._raw(tuple(self._vars[i] for i in keep), terms)

    @staticmethod
    def _unify(a: "Poly", b: "Poly"):
        if a._vars == b._vars:
            return a._vars, a._terms, b._terms
        if not b._vars:
            return a._vars, a._terms, b.with_variables(a._vars)._terms
        if not a._vars:
            return b._vars, a.with_variables(b._vars)._terms, b._terms
        merged = tuple(sorted(set(a._vars) | set(b._vars), key=var_key))
        return merged, a.with_variables(merged)._terms, b.with_variables(merged)._terms

    @staticmethod
    def _coerce(value) -> "Poly":
        if isinstance(value, Poly):
            return value
        if isinstance(value, (int, Fraction)):
            return Poly.const(value)
        return NotImplemented

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "Poly":
        other = Poly._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        vs, ta, tb = Poly._unify(self, other)
        if len(ta) < len(tb):
            ta, tb = tb, ta
        out = dict(ta)
        for e, c in tb.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s += c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Poly._raw(vs, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self._vars, {e: -c for e, c in self._terms.items()})

    def __pos__(self) -> "Poly":
        return self

    def __sub__(self, other) -> "Poly":
        other = Poly._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        other = Poly._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def scale(self, factor: Number) -> "Poly":
        f = _as_fraction(factor)
        if not f:
            return Poly._raw(self._vars, {})
        return Poly._raw(self._vars, {e: c * f for e, c in self._terms.items()})

    def _max_exponents(self, terms: dict, n: int) -> list:
        top = [0] * n
        for e in terms:
            for i, k in enumerate(e):
                if k > top[i]:
                    top[i] = k
        return top

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Poly):
            return NotImplemented
        if not self._terms or not other._terms:
            return Poly._raw(Poly._unify(self, other)[0], {})
        vs, ta, tb = Poly._unify(self, other)
        cap = _DEGREE_CAP.get()
        n = len(vs)
        if n:
            da = self._max_exponents(ta, n)
            db = self._max_exponents(tb, n)
            for i in range(n):
                if da[i] + db[i] > cap:
                    raise DegreeOverflow(
                        f"degree {da[i] + db[i]} in {vs[i]} exceeds cap {cap}")
        if len(ta) < len(tb):
            ta, tb = tb, ta
        out: dict = {}
        get = out.get
        if n == 0:
            c = ta[()] * tb[()]
            return Poly._raw(vs, {(): c})
        for e2, c2 in tb.items():
            for e1, c1 in ta.items():
                e = tuple([p + q for p, q in zip(e1, e2)])
                s = get(e)
                out[e] = c1 * c2 if s is None else s + c1 * c2
        return Poly._raw(vs, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.is_constant and other:
                return self.scale(1 / other.constant_value())
            return exact_divide(self, other)
        f = _as_fraction(other)
        if not f:
            raise ZeroDivisionError("polynomial division by zero")
        return self.scale(1 / f)

    def __pow__(self, n: int) -> "Poly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Poly._raw(self._vars, {(0,) * len(self._vars): Fraction(1)})
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- comparison ---------------------------------------------------------

    def _normal_items(self) -> frozenset:
        vs = self._vars
        return frozenset(
            (tuple((v, k) for v, k in zip(vs, e) if k), c) for e, c in self._terms.items())

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        if self._vars == other._vars:
            return self._terms == other._terms
        return self._normal_items() == other._normal_items()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._normal_items())
        return self._hash

    # -- calculus and substitution -------------------------------------------

    def diff(self, var: str) -> "Poly":
        if var not in self._vars:
            return Poly._raw(self._vars, {})
        i = self._vars.index(var)
        out = {}
        for e, c in self._terms.items():
            k = e[i]
            if k:
                ne = e[:i] + (k - 1,) + e[i + 1:]
                out[ne] = c * k
        return Poly._raw(self._vars, out)

    def subs(self, mapping: Mapping[str, "Poly | Number"]) -> "Poly":
        """Simultaneously substitute polynomials (or numbers) for symbols."""
        targets = [(self._vars.index(v), Poly._coerce(val))
                   for v, val in mapping.items() if v in self._vars]
        if not targets:
            return self
        idx = [i for i, _ in targets]
        keep = [i for i in range(len(self._vars)) if i not in idx]
        keep_vars = tuple(self._vars[i] for i in keep)
        powers: list[dict] = [{} for _ in targets]

        def power(j: int, k: int) -> Poly:
            cache = powers[j]
            if k not in cache:
                cache[k] = targets[j][1] ** k
            return cache[k]

        # group by exponents of the substituted symbols
        groups: dict = {}
        for e, c in self._terms.items():
            sub_e = tuple(e[i] for i in idx)
            rest = tuple(e[i] for i in keep)
            groups.setdefault(sub_e, {})[rest] = c
        result = Poly._raw(keep_vars, {})
        for sub_e, rest_terms in groups.items():
            part = Poly._raw(keep_vars, rest_terms)
            for j, k in enumerate(sub_e):
                if k:
                    part = part * power(j, k)
            result = result + part
        return result

    def evaluate(self, values: Mapping[str, Number]) -> Fraction:
        """Evaluate at rational values for every occurring symbol."""
        total = Fraction(0)
        vals = [None if v not in values else _as_fraction(values[v]) for v in self._vars]
        for e, c in self._terms.items():
            t = c
            for val, k in zip(vals, e):
                if k:
                    if val is None:
                        raise KeyError("no value for a symbol in " + str(self))
                    t *= val ** k
            total += t
        return total

    def coefficients(self, var: str) -> dict[int, "Poly"]:
        """View as a polynomial in ``var``: map from power to coefficient."""
        if var not in self._vars:
            return {0: self} if self._terms else {}
        i = self._vars.index(var)
        groups: dict = {}
        for e, c in self._terms.items():
            ne = e[:i] + (0,) + e[i + 1:]
            groups.setdefault(e[i], {})[ne] = c
        return {k: Poly._raw(self._vars, t) for k, t in groups.items()}

    def coefficient(self, monomial: Mapping[str, int]) -> "Poly":
        """Coefficient of a monomial in the given symbols (others kept)."""
        p = self
        for v, k in monomial.items():
            p = p.coefficients(v).get(k, Poly.const(0))
        return p

    def content_fraction(self) -> Fraction:
        """Positive rational ``c`` with ``self / c`` primitive with integer coefficients."""
        if not self._terms:
            return Fraction(0)
        den = 1
        for c in self._terms.values():
            den = lcm(den, c.denominator)
        num = 0
        for c in self._terms.values():
            num = gcd(num, c.numerator * (den // c.denominator))
        return Fraction(num, den)

    def leading(self) -> tuple[dict, Fraction]:
        """Leading term in graded-lex order (largest symbol is the last in context)."""
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self._terms, key=_grlex_key)
        return {v: k for v, k in zip(self._vars, e) if k}, self._terms[e]

    def leading_coefficient(self) -> Fraction:
        return self.leading()[1]

    # -- printing -----------------------------------------------------------

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"Poly('{self}')"


def _grlex_key(e: tuple):
    return (sum(e), e[::-1])


def _fmt_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: Poly) -> str:
    """Canonical text: graded-lex descending, explicit ``*`` and ``^``."""
    if not p._terms:
        return "0"
    pieces = []
    for e in sorted(p._terms, key=_grlex_key, reverse=True):
        c = p._terms[e]
        mono = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(p._vars, e) if k)
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if not mono:
            body = _fmt_fraction(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_fmt_fraction(a)}*{mono}"
        pieces.append((sign, body))
    first_sign, first = pieces[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


def format_grouped(p: Poly, outer: Sequence[str]) -> str:
    """Text grouped by powers of ``outer[0]`` (highest first), coefficients grouped
    recursively by the remaining ``outer`` symbols, e.g.
    ``y^2 + (x^3 + (alpha - 5/2)*x)*y - x^5``."""
    if not outer:
        return format_poly(p)
    if not p:
        return "0"
    var, rest = outer[0], outer[1:]
    pieces = []
    for k, coeff in sorted(p.coefficients(var).items(), reverse=True):
        mono = "" if k == 0 else var if k == 1 else f"{var}^{k}"
        text = format_grouped(coeff.compact(), rest)
        sign = "+"
        if text.startswith("-") and (len(coeff) == 1 or not mono or
                                     (rest and len(coeff.coefficients(rest[0])) == 1
                                      and not text.startswith("-(") and " " not in text)):
            sign, text = "-", text[1:]
        if not mono:
            body = text
        elif text == "1":
            body = mono
        elif len(coeff) == 1 or (rest and len(coeff.coefficients(rest[0])) == 1 and "(" not in text
                                 and " " not in text):
            body = f"{text}*{mono}"
        else:
            body = f"({text})*{mono}"
        pieces.append((sign, body))
    first_sign, first = pieces[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in pieces[1:]:
        if body.startswith("-") and sign == "+" and not body.startswith("-("):
            sign, body = "-", body[1:]
        out += f" {sign} {body}"
    return out


def symbols(names: str) -> tuple[Poly, ...]:
    """``symbols("x y alpha")`` -> tuple of symbol polynomials."""
    return tuple(Poly.symbol(n) for n in names.replace(",", " ").split())


# -- parser ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([^\W\d]\w*)|(\*\*|[-+*/^()]))", re.UNICODE)


def _tokenize(text: str):
    pos = 0
    tokens = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("num", int(m.group(1)), start))
        elif m.group(2):
            tokens.append(("name", m.group(2), start))
        else:
            op = m.group(3)
            tokens.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text: str, variables):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.declared = set(variables)
        self.context = tuple(sorted(self.declared, key=var_key))

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, tok[2], self.text)

    def parse(self) -> Poly:
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        result = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected token {self.peek()[1]!r}")
        return result.with_variables(self.context)

    def expr(self) -> Poly:
        left = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            right = self.term()
            left = left + right if op == "+" else left - right
        return left

    def term(self) -> Poly:
        left = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op_tok = self.take()
            right = self.unary()
            if op_tok[1] == "*":
                left = left * right
            else:
                if not right.is_constant:
                    raise self.error("division by a non-constant expression", op_tok)
                if not right:
                    raise self.error("division by zero", op_tok)
                left = left.scale(1 / right.constant_value())
        return left

    def unary(self) -> Poly:
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            operand = self.unary()
            return -operand if tok[1] == "-" else operand
        return self.power()

    def power(self) -> Poly:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.peek()
            if tok[0] == "num":
                self.take()
                exponent = tok[1]
            elif tok[0] == "op" and tok[1] == "(":
                inner = self.atom()
                if not inner.is_constant or inner.constant_value().denominator != 1:
                    raise self.error("exponent must be a non-negative integer", tok)
                exponent = int(inner.constant_value())
            else:
                raise self.error("exponent must be a non-negative integer literal", tok)
            if exponent < 0:
                raise self.error("negative exponent", tok)
            try:
                return base ** exponent
            except DegreeOverflow as exc:
                raise self.error(str(exc), tok) from exc
        return base

    def atom(self) -> Poly:
        tok = self.take()
        kind, value, _ = tok
        if kind == "num":
            return Poly.const(value)
        if kind == "name":
            if value not in self.declared:
                raise UndeclaredSymbol(f"undeclared symbol {value!r}", tok[2], self.text)
            return Poly.symbol(value)
        if kind == "op" and value == "(":
            inner = self.expr()
            close = self.take()
            if close[0] != "op" or close[1] != ")":
                raise ParseError("expected ')'", close[2], self.text)
            return inner
        if kind == "end":
            raise ParseError("unexpected end of input", tok[2], self.text)
        raise ParseError(f"unexpected token {value!r}", tok[2], self.text)


def parse_poly(text: str, variables: Iterable[str]) -> Poly:
    """Parse ``+ - * / ^`` expressions over declared symbols into canonical form.

    Division is only allowed by non-zero constants, so ``3/2*x`` is the
    rational literal ``3/2`` times ``x``.
    """
    return _Parser(text, variables).parse()


# -- division ------------------------------------------------------------------

def exact_divide(numer: Poly, denom: Poly) -> Poly:
    """Return ``q`` with ``numer == q * denom``, or raise :class:`Indivisible`."""
    if not denom:
        raise ZeroDivisionError("division by the zero polynomial")
    vs, ta, tb = Poly._unify(numer, denom)
    if not ta:
        return Poly._raw(vs, {})
    lead_b = max(tb)
    lc_b = tb[lead_b]
    rest_b = [(e, c) for e, c in tb.items() if e != lead_b]
    rem = dict(ta)
    quot = {}
    while rem:
        lead = max(rem)
        q_e = tuple(p - q for p, q in zip(lead, lead_b))
        if any(k < 0 for k in q_e):
            raise Indivisible(f"{numer} is not divisible by {denom}")
        q_c = rem.pop(lead) / lc_b
        quot[q_e] = q_c
        for e, c in rest_b:
            m = tuple(p + q for p, q in zip(e, q_e))
            s = rem.get(m, 0) - q_c * c
            if s:
                rem[m] = s
            else:
                rem.pop(m, None)
    return Poly._raw(vs, quot)


def divides(denom: Poly, numer: Poly) -> bool:
    try:
        exact_divide(numer, denom)
    except Indivisible:
        return False
    return True


# -- univariate helpers ----------------------------------------------------------

def coefficient_list(p: Poly, var: str) -> list[Poly]:
    """Dense coefficients of ``p`` in ``var``, highest power first."""
    coeffs = p.coefficients(var)
    if not coeffs:
        return [Poly.const(0)]
    d = max(coeffs)
    zero = Poly._raw(p.variables, {})
    return [coeffs.get(k, zero).compact() for k in range(d, -1, -1)]


def from_coefficient_list(coeffs: list, var: str) -> Poly:
    """Inverse of :func:`coefficient_list` (highest power first)."""
    x = Poly.symbol(var)
    result = Poly.const(0)
    for c in coeffs:
        result = result * x + c
    return result


def _bareiss_det(matrix: list[list[Poly]]) -> Poly:
    n = len(matrix)
    if n == 0:
        return Poly.const(1)
    a = [row[:] for row in matrix]
    sign = 1
    prev = Poly.const(1)
    for k in range(n - 1):
        if not a[k][k]:
            for r in range(k + 1, n):
                if a[r][k]:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return Poly.const(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                a[i][j] = exact_divide(num, prev) if not prev.is_constant else num.scale(1 / prev.constant_value())
            a[i][k] = Poly.const(0)
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return det if sign > 0 else -det


def sylvester_matrix(a: Poly, b: Poly, var: str) -> list[list[Poly]]:
    ca, cb = coefficient_list(a, var), coefficient_list(b, var)
    da, db = len(ca) - 1, len(cb) - 1
    size = da + db
    zero = Poly.const(0)
    rows = []
    for i in range(db):
        rows.append([zero] * i + ca + [zero] * (size - da - 1 - i))
    for i in range(da):
        rows.append([zero] * i + cb + [zero] * (size - db - 1 - i))
    return rows


def resultant(a: Poly, b: Poly, var: str) -> Poly:
    """Determinant of the Sylvester matrix of ``a`` and ``b`` in ``var`` (``a``'s rows first)."""
    if not a or not b:
        return Poly.const(0)
    ca, cb = coefficient_list(a, var), coefficient_list(b, var)
    da, db = len(ca) - 1, len(cb) - 1
    if da == 0:
        return ca[0] ** db
    if db == 0:
        return cb[0] ** da
    return _bareiss_det(sylvester_matrix(a, b, var))


def univariate_coeffs(p: Poly, var: str | None = None) -> list[Fraction]:
    """Rational coefficients, highest power first, of a parameter-free univariate poly."""
    syms = p.free_symbols
    if var is None:
        if len(syms) > 1:
            raise ValueError(f"{p} is not univariate")
        var = next(iter(syms)) if syms else "x"
    elif syms - {var}:
        raise ValueError(f"{p} involves symbols other than {var}")
    return [c.constant_value() for c in coefficient_list(p, var)]


def _horner(coeffs: list[Fraction], value: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in coeffs:
        acc = acc * value + c
    return acc


def _synthetic_divide(coeffs: list[Fraction], root: Fraction) -> list[Fraction]:
    out = []
    acc = Fraction(0)
    for c in coeffs[:-1]:
        acc = acc * root + c
        out.append(acc)
    return out


def rational_roots(p: Poly, var: str | None = None) -> list[tuple[Fraction, int]]:
    """All rational roots of a non-zero parameter-free univariate polynomial.

    Returns ``(root, multiplicity)`` pairs in increasing order of root.
    """
    coeffs = univariate_coeffs(p, var)
    if not any(coeffs):
        raise ValueError("the zero polynomial has every number as a root")
    roots: dict[Fraction, int] = {}
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
        roots[Fraction(0)] = roots.get(Fraction(0), 0) + 1
    while len(coeffs) > 1:
        den = 1
        for c in coeffs:
            den = lcm(den, c.denominator)
        ints = [int(c * den) for c in coeffs]
        lead, tail = abs(ints[0]), abs(ints[-1])
        f1 = sum(ints)
        fm1 = sum(c if (len(ints) - 1 - i) % 2 == 0 else -c for i, c in enumerate(ints))
        found = None
        for q in divisors(lead):
            for pnum in divisors(tail):
                if gcd(pnum, q) != 1:
                    continue
                for s in (pnum, -pnum):
                    # cheap necessary conditions: (q - p) | f(1), (q + p) | f(-1)
                    if q != s and f1 % (q - s):
                        continue
                    if q != -s and fm1 % (q + s):
                        continue
                    r = Fraction(s, q)
                    if _horner(coeffs, r) == 0:
                        found = r
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            break
        while len(coeffs) > 1 and _horner(coeffs, found) == 0:
            coeffs = _synthetic_divide(coeffs, found)
            roots[found] = roots.get(found, 0) + 1
    return sorted(roots.items())


# dense univariate arithmetic over Q, lists highest power first

def _strip(a: list[Fraction]) -> list[Fraction]:
    i = 0
    while i < len(a) - 1 and a[i] == 0:
        i += 1
    return a[i:] if a else [Fraction(0)]


def udivmod(a: list[Fraction], b: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    a, b = _strip(list(a)), _strip(list(b))
    if b == [0]:
        raise ZeroDivisionError("univariate division by zero")
    if len(a) < len(b):
        return [Fraction(0)], a
    quot = []
    rem = list(a)
    lead = b[0]
    for _ in range(len(a) - len(b) + 1):
        q = rem[0] / lead
        quot.append(q)
        for j, c in enumerate(b):
            rem[j] -= q * c
        rem.pop(0)
    return _strip(quot), _strip(rem) if rem else [Fraction(0)]


def ugcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    """Monic gcd of two univariate polynomials (``[0]`` if both vanish)."""
    a, b = _strip(list(a)), _strip(list(b))
    while b != [0]:
        a, b = b, udivmod(a, b)[1]
    if a == [0]:
        return a
    return [c / a[0] for c in a]


def uinverse(a: list[Fraction], modulus: list[Fraction]) -> list[Fraction]:
    """Inverse of ``a`` modulo ``modulus``; raises ZeroDivisionError if not a unit."""
    r0, r1 = _strip(list(modulus)), udivmod(a, modulus)[1]
    s0, s1 = [Fraction(0)], [Fraction(1)]
    while r1 != [0]:
        q, r = udivmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _usub(s0, _umul(q, s1))
    if len(r0) != 1:
        raise ZeroDivisionError("element is not invertible modulo the defining polynomial")
    inv = [c / r0[0] for c in s0]
    return udivmod(inv, modulus)[1]


def _umul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _strip(out)


def _usub(a, b):
    n = max(len(a), len(b))
    a = [Fraction(0)] * (n - len(a)) + list(a)
    b = [Fraction(0)] * (n - len(b)) + list(b)
    return _strip([x - y for x, y in zip(a, b)])


def squarefree_part(coeffs: list[Fraction]) -> list[Fraction]:
    """Monic squarefree part of a univariate polynomial."""
    coeffs = _strip(list(coeffs))
    n = len(coeffs) - 1
    if n <= 0:
        return [Fraction(1)]
    deriv = [c * (n - i) for i, c in enumerate(coeffs[:-1])]
    g = ugcd(coeffs, deriv)
    q = udivmod(coeffs, g)[0]
    return [c / q[0] for c in q]


def first_terms(p: Poly, count: int) -> str:
    """Abbreviated printing for long polynomials in reports."""
    text = str(p)
    parts = text.split(" ")
    if len(parts) <= 2 * count:
        return text
    return " ".join(islice(parts, 2 * count)) + " ..."
