"""Command-line front end.

Input files hold one declaration per line::

    # comments start with '#'
    vars x y
    params alpha e sigma delta
    P = y
    Q = -(3*x^2 + alpha)*y + 3*x^4 + 2*x^3 - e*x^2 - sigma*x - delta

Lienard systems may give ``f = ...`` and ``g = ...`` instead of ``P``/``Q``.
Other lines: ``unknowns ...`` (parameters to solve for), ``let alpha = 21/4``
(parameter values), ``F = ...`` and ``lambda = ...`` (for verify mode), and
repeated ``cofactor = ...`` lines (for obstruction mode).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import ParseError, Poly, format_grouped, format_poly, parse_poly
from .curves import (
    Family,
    MuFactor,
    DepthInsufficient,
    assemble_candidate,
    cofactor_by_division,
    default_residue_depth,
    is_reducible,
    curve_count_bound,
    normalize_curve,
    rational_integral_obstruction,
    verify_invariant,
)
from .puiseux import (
    NoSeries,
    PlanarSystem,
    dominant_balances,
    expand_series,
    finite_point_negative_series,
    free_leading_exponents,
    fuchs_indices,
    LEAD,
    ode_from_system,
    rational_leading_coefficients,
)
from .solver import BudgetExceeded, ConstraintSystem, solve

MODES = ("series", "construct", "classify-lienard", "verify", "obstruction")
WORKERS_ENV = "INVARIANT_CURVES_WORKERS"


class InputError(ValueError):
    pass


@dataclass
class JobInput:
    variables: list = field(default_factory=lambda: ["x", "y"])
    params: list = field(default_factory=list)
    unknowns: list | None = None
    exprs: dict = field(default_factory=dict)  # raw text for P, Q, f, g, F, lambda
    cofactors: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    @property
    def names(self) -> list:
        return self.variables + self.params

    def poly(self, key: str) -> Poly:
        text, line = self.exprs[key]
        return _parse(text, self.names, line)

    def assignment(self) -> dict:
        return {k: Poly.const(v) for k, v in self.values.items()}


def _parse(text: str, names, line: int) -> Poly:
    try:
        return parse_poly(text, names)
    except ParseError as exc:
        raise InputError(f"line {line}: {exc}") from None


def read_job(text: str) -> JobInput:
    job = JobInput()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split(None, 1)
        word = head[0]
        rest = head[1] if len(head) > 1 else ""
        if word in ("vars", "params", "unknowns"):
            names = rest.replace(",", " ").split()
            if word == "vars":
                if len(names) != 2:
                    raise InputError(f"line {lineno}: 'vars' needs exactly two names")
                job.variables = names
            elif word == "params":
                job.params = names
            else:
                job.unknowns = names
        elif word == "let":
            name, _, value = rest.partition("=")
            try:
                job.values[name.strip()] = Fraction(value.strip().replace(" ", ""))
            except ValueError:
                raise InputError(f"line {lineno}: 'let' needs a rational value") from None
        elif "=" in line:
            key, _, expr = line.partition("=")
            key = key.strip()
            if key in ("cofactor",):
                job.cofactors.append((expr.strip(), lineno))
            elif key in ("P", "Q", "f", "g", "F", "lambda"):
                job.exprs[key] = (expr.strip(), lineno)
            else:
                raise InputError(f"line {lineno}: unknown declaration '{key}'")
        else:
            raise InputError(f"line {lineno}: cannot read '{line}'")
    return job


def _system(job: JobInput) -> PlanarSystem:
    x, y = job.variables
    if "P" in job.exprs and "Q" in job.exprs:
        P, Q = job.poly("P"), job.poly("Q")
    elif "f" in job.exprs and "g" in job.exprs:
        f, g = job.poly("f"), job.poly("g")
        if y in (f.free_symbols | g.free_symbols):
            raise InputError("f and g must not involve the second variable")
        ys = Poly.symbol(y)
        P, Q = ys, -f * ys - g
    else:
        raise InputError("the input needs 'P =' and 'Q =' (or 'f =' and 'g =') lines")
    sys_ = PlanarSystem(P, Q, x, y)
    return sys_.subs(job.assignment()) if job.values else sys_


# -- modes --------------------------------------------------------------------------

def _series_report(job: JobInput, args) -> tuple[int, dict]:
    system = _system(job)
    E = ode_from_system(system)
    out = {"ode": format_poly(E.poly), "balances": [], "finite_points": []}
    for bal in dominant_balances(E):
        entry = {"exponent": str(bal.exponent),
                 "leading_polynomial": format_poly(bal.leading_coeff_poly),
                 "series": []}
        choices, note = _leading_choices(bal)
        if note:
            entry["note"] = note
        for choice in choices:
            try:
                idx = fuchs_indices(E, bal, choice)
                s = expand_series(E, bal, choice, depth=args.depth)
            except (NotImplementedError, ValueError) as exc:
                entry["series"].append({"error": str(exc)})
                continue
            if isinstance(s, NoSeries):
                entry["series"].append({"fuchs_indices": idx,
                                        "no_series": format_poly(s.condition)})
            else:
                d = s.to_dict()
                d["fuchs_indices"] = idx
                entry["series"].append(d)
        out["balances"].append(entry)
    out["free_leading_exponents"] = [str(f.exponent) for f in free_leading_exponents(E)]
    try:
        for pole in finite_point_negative_series(system):
            out["finite_points"].append({"condition": format_poly(pole.condition),
                                         "exponent": str(pole.balance.exponent)})
    except NotImplementedError as exc:
        out["finite_points"].append({"error": str(exc)})
    if not system.parameters:
        bound = curve_count_bound(system)
        out["curve_count_bound"] = "unbounded" if bound == float("inf") else bound
    return 0, out


def _leading_choices(bal) -> tuple[list, str | None]:
    """Leading coefficients worth expanding: the unique one, rational roots, or an adjoined root."""
    lead = bal.leading_coeff_poly
    if max(lead.coefficients(LEAD)) == 1:
        return [None], None
    if lead.free_symbols - {LEAD}:
        return [], "parametric leading polynomial of degree > 1; not expanded"
    roots = rational_leading_coefficients(bal)
    if not roots:
        return ["theta"], None
    if len(roots) < lead.degree(LEAD):
        return roots, "irrational leading coefficients skipped"
    return roots, None


def _text_series(report: dict) -> str:
    lines = [f"ODE: {report['ode']} = 0", ""]
    for b in report["balances"]:
        lines.append(f"balance y ~ c*x^({b['exponent']}),  {b['leading_polynomial']} = 0")
        for s in b["series"]:
            if "error" in s:
                lines.append(f"  not expanded: {s['error']}")
            elif "no_series" in s:
                lines.append(f"  Fuchs indices {s['fuchs_indices']}; no series: {s['no_series']} != 0")
            else:
                lines.append(f"  Fuchs indices {s['fuchs_indices']}, free {s['free_symbols']}")
                for e, c in s["terms"]:
                    lines.append(f"    x^({e}): {c}")
                for c in s["compatibility_conditions"]:
                    lines.append(f"    compatibility: {c} = 0")
    if report["free_leading_exponents"]:
        lines.append(f"free leading coefficients at exponents {report['free_leading_exponents']}")
    if report["finite_points"]:
        lines.append("finite points with pole series:")
        for p in report["finite_points"]:
            lines.append(f"  {p}")
    else:
        lines.append("no finite point admits a pole series: mu(x) is constant")
    if "curve_count_bound" in report:
        lines.append(f"curves with F_y != 0: at most {report['curve_count_bound']}")
    return "\n".join(lines)


def _construct(job: JobInput, args) -> tuple[int, dict]:
    """Series -> candidates -> solve -> verify for small systems (mu = 1)."""
    system = _system(job)
    x, y = system.x, system.y
    E = ode_from_system(system)
    notes = []
    if finite_point_negative_series(system):
        notes.append("finite points admit pole series; only mu = 1 is searched")
    determined, families = [], []
    # deep enough that every residue the candidate needs is certified
    depth = default_residue_depth(system, args.max_n) + (args.max_n + 1) * (system.degree + 1) + args.depth
    for bal in dominant_balances(E):
        choices, note = _leading_choices(bal)
        if note:
            notes.append(f"balance x^({bal.exponent}): {note}")
        for choice in choices:
            if choice == "theta":
                notes.append(f"balance x^({bal.exponent}): algebraic leading coefficient skipped")
                continue
            s = expand_series(E, bal, choice, depth=depth)
            if isinstance(s, NoSeries):
                continue
            (families if s.free_symbols else determined).append(s)
    unknowns = list(job.unknowns if job.unknowns is not None else sorted(system.parameters))
    tasks = [(system, N, combo, unknowns, args.budget)
             for N in range(1, args.max_n + 1) for combo in _combinations(determined, families, N)]
    workers = _worker_count()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_candidate_task, tasks))  # map keeps candidate order
    else:
        results = [_candidate_task(t) for t in tasks]
    curves, candidates, found = [], [], []
    for N, record, note, solved in results:
        if note:
            notes.append(note)
            continue
        for br, F, lam, ok in solved:
            if F is None:
                record["solutions"].append({"branch": br.describe(), "verified": False})
                continue
            entry = {"branch": br.describe(), "F": format_grouped(F, [y, x]),
                     "cofactor": format_poly(lam), "verified": ok,
                     "reducible": is_reducible(F, found, x, y, br.adjoined)}
            record["solutions"].append(entry)
            if ok and not entry["reducible"]:
                curves.append(entry)
                found.append(F)
        candidates.append(record)
    return 0, {"candidates": candidates, "curves": curves, "notes": notes}


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None


def _candidate_task(task):
    """Assemble, solve and verify one series combination (runs in a worker process)."""
    system, N, combo, unknowns, budget = task
    x, y = system.x, system.y
    factors, fam = combo
    try:
        cand = assemble_candidate(system, factors, MuFactor.constant(x), family=fam)
    except DepthInsufficient as exc:
        return N, None, f"N={N}: {exc}", []
    equations = cand.conditions + tuple(cand.constraints)
    cs_unknowns = list(cand.unknowns) + unknowns
    try:
        branches = solve(ConstraintSystem(cs_unknowns, equations),
                         max_unknowns=max(8, len(cs_unknowns)), budget=budget)
    except BudgetExceeded:
        return N, None, f"N={N}: solver budget exhausted for {_describe_combo(combo)}", []
    record = {"N": N, "series": _describe_combo(combo),
              "constraints": [format_poly(c) for c in equations], "solutions": []}
    solved = []
    for br in branches:
        F = br.substitute(cand.F)
        if y not in F.free_symbols:
            continue
        spec = system.subs(br.assignment)
        try:
            lam = cofactor_by_division(spec, F, br.adjoined)
        except ArithmeticError:
            solved.append((br, None, None, False))
            continue
        ok = bool(verify_invariant(spec, F, lam, br.adjoined))
        solved.append((br, normalize_curve(F, y, br.adjoined), lam, ok))
    return N, record, None, solved


def _combinations(determined, families, N):
    import itertools

    pools = []
    for k in range(0, min(N, len(determined)) + 1):
        for subset in itertools.combinations(determined, k):
            rest = N - k
            if rest == 0:
                pools.append(([(s, 1) for s in subset], None))
            elif families:
                for fam in families:
                    if len(fam.free_symbols) == 1:
                        pools.append(([(s, 1) for s in subset], Family(fam, rest, "C")))
    return pools


def _describe_combo(combo):
    factors, fam = combo
    parts = [f"x^({s.exponent(0)})" for s, _ in factors]
    if fam is not None:
        parts.append(f"{fam.count} x family x^({fam.series.exponent(0)})")
    return " * ".join(parts)


def _classify(job: JobInput, args) -> tuple[int, dict]:
    from .lienard import LienardSystem, WindowError, classify

    if "f" not in job.exprs or "g" not in job.exprs:
        raise InputError("classify-lienard needs 'f =' and 'g =' lines")
    try:
        lsys = LienardSystem(job.poly("f"), job.poly("g"), *job.variables)
    except WindowError as exc:
        raise InputError(str(exc)) from None
    if job.values:
        lsys = lsys.subs(job.assignment())
    unknowns = job.unknowns if job.unknowns is not None else sorted(lsys.parameters)
    result = classify(lsys, unknowns, max_N=args.max_n, budget=args.budget)
    x, y = job.variables
    curves = []
    for c in result.curves:
        d = c.to_dict()
        d["F"] = format_grouped(c.F, [y, x])
        d["cofactor"] = format_grouped(c.cofactor, [x])
        d["F_canonical"] = format_poly(c.F)
        curves.append(d)
    return 0, {"curves": curves, "explored_N": list(result.explored_N), "closed": result.closed,
               "notes": result.notes}


def _verify(job: JobInput, args) -> tuple[int, dict]:
    system = _system(job)
    if "F" not in job.exprs:
        raise InputError("verify needs an 'F =' line")
    F = job.poly("F").subs(job.assignment())
    if F.is_constant:
        raise InputError("F must be non-constant")
    if "lambda" in job.exprs:
        lam = job.poly("lambda").subs(job.assignment())
    else:
        try:
            lam = cofactor_by_division(system, F)
        except ArithmeticError:
            return 2, {"verified": False, "F": format_poly(F), "reason": "F does not divide P*F_x + Q*F_y"}
    check = verify_invariant(system, F, lam)
    out = {"verified": bool(check), "F": format_poly(F), "cofactor": format_poly(lam)}
    if not check:
        out["residue"] = format_poly(check.residue)
        return 2, out
    return 0, out


def _obstruction(job: JobInput, args) -> tuple[int, dict]:
    if not job.cofactors:
        raise InputError("obstruction needs 'cofactor =' lines")
    cofs = [_parse(t, job.names, line).subs(job.assignment()) for t, line in job.cofactors]
    d = rational_integral_obstruction(cofs, bound=args.bound)
    return 0, {"cofactors": [format_poly(c) for c in cofs],
               "null_combination": list(d) if d else None}


def _text(mode: str, report: dict) -> str:
    if mode == "series":
        return _text_series(report)
    if mode == "classify-lienard":
        lines = []
        for i, c in enumerate(report["curves"], 1):
            lines.append(f"[{i}] F = {c['F']}")
            lines.append(f"    lambda = {c['cofactor']}")
            for cond in c["conditions"]:
                lines.append(f"    {cond}")
            if c["free_parameters"]:
                lines.append(f"    free: {', '.join(c['free_parameters'])}")
            p = c["provenance"]
            lines.append(f"    N = {p['N']}, k = {p['k']}, series {p['series']}; verified")
        state = "complete" if report["closed"] else "INCOMPLETE (see notes)"
        lines.append(f"searched N = {', '.join(map(str, report['explored_N']))}: {state}")
        lines.extend(f"note: {n}" for n in report["notes"])
        return "\n".join(lines)
    if mode == "construct":
        lines = []
        for c in report["candidates"]:
            lines.append(f"candidate N = {c['N']} from {c['series']}: {len(c['constraints'])} constraints")
            for sol in c["solutions"]:
                verdict = "verified" if sol["verified"] else "FAILED"
                if sol.get("reducible"):
                    verdict += ", reducible"
                lines.append(f"  solution {sol['branch']}: {verdict}")
        lines.append("")
        for c in report["curves"]:
            lines.append(f"F = {c['F']}\n    lambda = {c['cofactor']}")
        if not report["curves"]:
            lines.append("no curves found")
        lines.extend(f"note: {n}" for n in report["notes"])
        return "\n".join(lines)
    if mode == "verify":
        if report["verified"]:
            return f"verified: F = {report['F']}\n    lambda = {report['cofactor']}"
        return "NOT invariant: " + report.get("residue", report.get("reason", ""))
    if mode == "obstruction":
        d = report["null_combination"]
        return "no null combination within the bound" if d is None else f"null combination d = {tuple(d)}"
    return json.dumps(report)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="invariant-curves",
                                description="Invariant algebraic curves of planar polynomial systems.")
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--input", required=True, help="input file path, or '-' for stdin")
    p.add_argument("--depth", type=int, default=10, help="series terms beyond the leading one")
    p.add_argument("--max-n", type=int, default=None, help="largest degree in y to search")
    p.add_argument("--budget", type=int, default=4000, help="Groebner step budget")
    p.add_argument("--bound", type=int, default=10, help="coefficient bound for obstruction search")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    return p


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    if args.depth < 1 or args.depth > 200:
        print("error: --depth must be in 1..200", file=sys.stderr)
        return 1
    if args.max_n is not None and args.max_n < 1:
        print("error: --max-n must be positive", file=sys.stderr)
        return 1
    try:
        text = sys.stdin.read() if args.input == "-" else open(args.input, encoding="utf-8").read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        job = read_job(text)
        if args.mode == "construct" and args.max_n is None:
            args.max_n = 2
        handler = {"series": _series_report, "construct": _construct, "classify-lienard": _classify,
                   "verify": _verify, "obstruction": _obstruction}[args.mode]
        status, report = handler(job, args)
    except (InputError, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.format == "structured":
        stdout.write(json.dumps({"mode": args.mode, "status": status, "report": report},
                                indent=2, sort_keys=True) + "\n")
    else:
        stdout.write(_text(args.mode, report) + "\n")
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
