"""Known irreducible invariant curves of

    x' = y,  y' = -(3x^2 + alpha) y + 3x^4 + 2x^3 - e x^2 - sigma x - delta.

Each entry: curve, cofactor, parameter conditions (``name -> value``), and the
defining polynomial of alpha when alpha is algebraic.
"""

from dataclasses import dataclass

from invariant_curves.algebra import Poly, parse_poly

NAMES = ["x", "y", "alpha", "e", "sigma", "delta"]


@dataclass(frozen=True)
class Entry:
    F: str
    cofactor: str
    conditions: dict
    alpha_root_of: str | None = None

    def poly(self, text: str) -> Poly:
        return parse_poly(text, NAMES)

    @property
    def curve(self) -> Poly:
        return self.poly(self.F)

    @property
    def lam(self) -> Poly:
        return self.poly(self.cofactor)

    @property
    def assignment(self) -> dict:
        return {k: self.poly(v) for k, v in self.conditions.items()}

    @property
    def degree_y(self) -> int:
        return self.curve.degree("y")


CATALOGUE = [
    Entry("y - x^2 + (alpha + e)/3", "-3*x^2 - 2*x - alpha",
          {"delta": "alpha*(e + alpha)/3", "sigma": "2*(e + alpha)/3"}),
    Entry("y + x^3 + 3/2*x^2 + (alpha - 5/2)*x + 5*alpha/6 - sigma/3 - 25/12", "3*x - 5/2",
          {"delta": "25*alpha/12 - 5*sigma/6 - 125/24", "e": "45/4 - 3*alpha"}),
    Entry("y^2 + (x^3 + 1/2*x^2 - 37/4*x + 35/8)*y - x^5 - 3/2*x^4 + 35/2*x^3 + 37/4*x^2"
          " - 1365/16*x + 1225/32", "-3*x^2 + x + 17/4",
          {"alpha": "-27/4", "e": "63/2", "delta": "-595/16", "sigma": "-9/2"}),
    Entry("y^2 + (x^3 + 1/2*x^2 + 11/4*x + 51/8)*y - x^5 - 3/2*x^4 - 5/2*x^3 - 35/4*x^2"
          " - 69/16*x + 153/32", "-3*x^2 + x - 31/4",
          {"alpha": "21/4", "e": "-9/2", "delta": "93/16", "sigma": "-17/2"}),
    Entry("y^2 + (x^3 + 1/2*x^2 - 95/12*x + 1505/216)*y - x^5 - 3/2*x^4 + 275/18*x^3"
          " + 335/108*x^2 - 31175/432*x + 508475/7776", "-3*x^2 + x + 35/12",
          {"alpha": "-65/12", "e": "55/2", "delta": "-11825/432", "sigma": "-185/18"}),
    Entry("y^3 + (2*x^3 + 2*x^2 - 1/2*x + 35/2)*y^2 + (x^6 + x^5 - 5/4*x^4 + 39/2*x^3"
          " + 103/16*x^2 - 335/16*x + 7325/64)*y - x^8 - 3*x^7 + 1/2*x^6 - 63/4*x^5 - 47*x^4"
          " + 519/16*x^3 - 2065/32*x^2 - 16325/64*x + 36625/256", "-3*x^2 + 4*x - 29/4",
          {"alpha": "9/4", "e": "9/2", "delta": "145/16", "sigma": "-39/2"}),
    Entry("y^2 + (x^3 + 1/2*x^2 + (alpha - 5/2)*x + 5/6*(5 - alpha/27))*y - x^5 - 3/2*x^4"
          " + 5/12*(15 - 4*alpha)*x^3 + (35/24 - 187/162*alpha)*x^2"
          " + (11327/14580*alpha - 353/108)*x + 131545/34992 - 93553/472392*alpha",
          "-3*x^2 + x - alpha - 5/2",
          {"e": "45/4 - 3*alpha", "sigma": "alpha/9 - 15/4", "delta": "5101*alpha/14580 + 193/54"},
          alpha_root_of="alpha^2 - 4975/486*alpha + 4225/144"),
]

# Concrete members of the two positive-dimensional families, for specialization tests.
FAMILY_POINTS = [
    {"alpha": 1, "e": 2, "sigma": 2, "delta": 1},
    {"alpha": 1, "e": "33/4", "sigma": 0, "delta": "-25/8"},
]

# Parameter points where both lines coexist; their product is reducible.
LINE_PAIR_POINTS = [
    {"alpha": "-15/4", "e": "45/2", "sigma": "25/2", "delta": "-375/16"},
    {"alpha": "55/12", "e": "-5/2", "sigma": "25/18", "delta": "1375/432"},
]
