import random
from fractions import Fraction

import pytest

from invariant_curves.algebra import Poly
from invariant_curves.lienard import LienardSystem, classify

QUARTIC_PARAMS = ["alpha", "e", "sigma", "delta"]
X = Poly.symbol("x")

# Lines recorded by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES: dict[int, str] = {}


def quartic(xi="-2") -> LienardSystem:
    """x' = y, y' = -(3x^2 + alpha) y + 3x^4 - xi x^3 - e x^2 - sigma x - delta."""
    params = QUARTIC_PARAMS if xi != "xi" else QUARTIC_PARAMS + ["xi"]
    return LienardSystem.parse("3*x^2 + alpha", f"-3*x^4 + ({xi})*x^3 + e*x^2 + sigma*x + delta", params)


def at(system: LienardSystem, **values) -> LienardSystem:
    return system.subs({k: Poly.const(Fraction(v)) for k, v in values.items()})


def _rpoly(rng, degree, lead=None):
    cs = [Fraction(rng.randint(-4, 4), rng.choice([1, 1, 2, 3])) for _ in range(degree + 1)]
    if lead is not None:
        cs[degree] = Fraction(lead)
    while cs[degree] == 0:
        cs[degree] = Fraction(rng.randint(1, 4))
    return sum((Poly.const(c) * X ** i for i, c in enumerate(cs)), Poly.const(0))


def planted_window_system(rng: random.Random, max_m: int = 4):
    """A random window system carrying a known invariant line.

    kind "II": g = -p (p' + f) makes y - p(x) invariant (the series of the
    second kind terminates).  kind "I": f = h - Q', g = -Q h makes y - Q(x)
    invariant with Q of degree m + 1 (the first kind terminates).
    """
    m = rng.randint(1, max_m)
    n = rng.randint(m + 1, 2 * m)
    kind = rng.choice(["I", "II"])
    if kind == "II":
        f = _rpoly(rng, m)
        p = _rpoly(rng, n - m)
        g = -(p * (p.diff("x") + f))
        line = Poly.symbol("y") - p
    else:
        f0 = Fraction(rng.randint(1, 4) * rng.choice([1, -1]))
        Q = _rpoly(rng, m + 1, -f0 / (m + 1))
        h = _rpoly(rng, n - m - 1)
        f = h - Q.diff("x")
        g = -(Q * h)
        line = Poly.symbol("y") - Q
    return LienardSystem(f, g), kind, line


def random_window_system(rng: random.Random, max_m: int = 4) -> LienardSystem:
    m = rng.randint(1, max_m)
    n = rng.randint(m + 1, 2 * m)
    return LienardSystem(_rpoly(rng, m), _rpoly(rng, n))


@pytest.fixture(scope="session")
def quartic_classification():
    """Full symbolic classification of the quartic family at xi = -2 (about a minute)."""
    return classify(quartic(), QUARTIC_PARAMS)


@pytest.fixture(scope="session")
def planted_runs():
    """Classifier results on planted window systems, shared by the acceptance checks."""
    rng = random.Random(20240)
    runs = []
    while len(runs) < 50:
        system, kind, line = planted_window_system(rng)
        result = classify(system, max_N=2)
        if result.curves:
            runs.append((system, kind, line, result))
    return runs


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
