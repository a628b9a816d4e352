"""Command-line front end.

Universe files are JSON documents tagged ``"format": "qst-universe/1"``::

    {
      "format": "qst-universe/1",
      "dimension": 2,
      "projections": {"P": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},
      "observables": {"Z": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]},
      "states": {"psi": [[0.7071067811865476, 0], [0.7071067811865476, 0]]},
      "grid": ["-2", "-1", "0", "1"],
      "qsets": {
        "e": {"entries": []},
        "u": {"entries": [{"child": "e", "value": "P"}]},
        "w": {"entries": [{"child": {"entries": [{"child": "e", "value": "1"}]}, "value": "1"}]},
        "two": {"check": [[], [[]]]},
        "half": {"rational": "1/2"},
        "z": {"real": "Z"}
      },
      "settings": {"tolerance": 1e-9, "connective": "sasaki", "fragment": ["e", "u"]}
    }

Matrices are nested arrays of ``[re, im]`` pairs.  An entry child is a QSet
name or an inline QSet description.  An entry value names a projection, or
is ``"0"`` or ``"1"``.  ``{"check": ...}`` embeds a hereditarily finite set
written as nested lists.  ``{"rational": "p/q"}`` embeds a grid rational.
``{"real": NAME}`` embeds the spectral ladder of an observable over ``grid``.
When ``grid`` is absent, an adequate grid is derived from the spectrum.

Exit codes: 0 success, 1 internal error or inconsistency, 2 parse error,
3 semantic error (unknown names, dimensions, malformed universe files).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib.resources import files
from itertools import product
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, ParseError, QuantumSetError, SemanticError
from .evaluation import Environment, check_transfer, load_corpus, truth_value
from .lang import free_vars, is_delta0, parse, to_text
from .logic import boolean_domain, generate_logic, is_boolean
from .projmath import CONNECTIVES, Projection, StateVector, Tolerance, identity, zero
from .reals import (
    Interval,
    Observable,
    RationalGrid,
    adequate_grid,
    as_qset,
    in_interval_value,
    joint_prob,
    perfectly_correlated,
    prob,
    to_qreal,
)
from .universe import QSet, check_embed, make_qset, rational_hf

FORMAT = "qst-universe/1"
BUILTIN = ("demo", "bell")
EXIT_OK, EXIT_INTERNAL, EXIT_PARSE, EXIT_SEMANTIC = 0, 1, 2, 3

__all__ = [
    "FORMAT",
    "Universe",
    "UniverseError",
    "encode_matrix",
    "decode_matrix",
    "load_universe",
    "main",
]


class UniverseError(SemanticError):
    pass


def encode_matrix(m) -> list:
    """Nested [re, im] pairs at full precision, so that loading gives ``m`` back."""
    r = np.asarray(m, dtype=complex) + 0.0
    if r.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in r]
    return [[[float(z.real), float(z.imag)] for z in row] for row in r]


def decode_matrix(data, what="matrix") -> np.ndarray:
    try:
        a = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise UniverseError(f"{what}: expected nested [re, im] pairs") from exc
    if a.ndim < 2 or a.shape[-1] != 2:
        raise UniverseError(f"{what}: expected nested [re, im] pairs, got shape {a.shape}")
    return a[..., 0] + 1j * a[..., 1]


@dataclass
class Universe:
    dim: int
    projections: dict = field(default_factory=dict)
    observables: dict = field(default_factory=dict)
    states: dict = field(default_factory=dict)
    qsets: dict = field(default_factory=dict)
    grid: RationalGrid | None = None
    tolerance: Tolerance = field(default_factory=Tolerance)
    connective: str = "sasaki"
    fragment: list = field(default_factory=list)

    def projection(self, name: str) -> Projection:
        if name == "1":
            return identity(self.dim)
        if name == "0":
            return zero(self.dim)
        try:
            return self.projections[name]
        except KeyError:
            raise UniverseError(f"unknown projection {name!r}") from None

    def observable(self, name: str) -> Observable:
        try:
            return self.observables[name]
        except KeyError:
            raise UniverseError(f"unknown observable {name!r}") from None

    def state(self, name: str) -> StateVector:
        try:
            return self.states[name]
        except KeyError:
            raise UniverseError(f"unknown state {name!r}") from None

    def grid_for(self, a: Observable) -> RationalGrid:
        return self.grid if self.grid is not None else adequate_grid(a)

    def environment(self, connective: str | None = None) -> Environment:
        return Environment(
            dict(self.qsets),
            [self.qsets[n] for n in self.fragment],
            connective or self.connective,
            self.tolerance,
            self.dim,
        )


def _rational(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise UniverseError(f"not a rational: {text!r}") from exc


def _hf_from_lists(x):
    if not isinstance(x, list):
        raise UniverseError(f"check sets are nested lists, got {x!r}")
    return frozenset(_hf_from_lists(m) for m in x)


def load_universe(source) -> Universe:
    """Load a universe from a path, a builtin name, a JSON string or a dict."""
    if isinstance(source, dict):
        doc = source
    else:
        text = str(source)
        if text in BUILTIN:
            raw = files("quantumsets").joinpath(f"data/{text}.json").read_text()
        elif text.lstrip().startswith("{"):
            raw = text
        else:
            try:
                raw = Path(text).read_text()
            except OSError as exc:
                raise UniverseError(f"cannot read universe file {text!r}: {exc.strerror}") from exc
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise UniverseError(f"universe file is not valid JSON: {exc}") from exc
    if doc.get("format", FORMAT) != FORMAT:
        raise UniverseError(f"unsupported universe format {doc.get('format')!r}")
    try:
        d = int(doc["dimension"])
    except (KeyError, TypeError, ValueError):
        raise UniverseError("universe needs an integer 'dimension'") from None
    settings = doc.get("settings", {})
    u = Universe(d)
    u.tolerance = Tolerance(float(settings.get("tolerance", 1e-9)))
    u.connective = settings.get("connective", "sasaki")
    if u.connective not in CONNECTIVES:
        raise UniverseError(f"unknown connective {u.connective!r}")

    def square(name, data, section):
        m = decode_matrix(data, f"{section} {name!r}")
        if m.shape != (d, d):
            raise UniverseError(f"{section} {name!r} has shape {m.shape}, expected {(d, d)}")
        return m

    try:
        for name, data in doc.get("projections", {}).items():
            u.projections[name] = Projection(square(name, data, "projection"), tol=u.tolerance)
        for name, data in doc.get("observables", {}).items():
            u.observables[name] = Observable(square(name, data, "observable"), tol=u.tolerance)
        for name, data in doc.get("states", {}).items():
            v = decode_matrix([data], f"state {name!r}")[0]
            if v.shape != (d,):
                raise UniverseError(f"state {name!r} has length {v.size}, expected {d}")
            u.states[name] = StateVector(v)
    except UniverseError:
        raise
    except (ValueError, QuantumSetError) as exc:
        raise UniverseError(str(exc)) from exc
    if "grid" in doc:
        try:
            u.grid = RationalGrid(tuple(_rational(r) for r in doc["grid"]))
        except ValueError as exc:
            raise UniverseError(f"grid: {exc}") from exc

    specs = doc.get("qsets", {})
    building: set[str] = set()

    def build(spec, where) -> QSet:
        if isinstance(spec, str):
            if spec in u.qsets:
                return u.qsets[spec]
            if spec not in specs:
                raise UniverseError(f"{where}: unknown QSet {spec!r}")
            if spec in building:
                raise UniverseError(f"{where}: QSet {spec!r} contains itself")
            building.add(spec)
            u.qsets[spec] = build(specs[spec], f"qset {spec!r}")
            building.discard(spec)
            return u.qsets[spec]
        if not isinstance(spec, dict):
            raise UniverseError(f"{where}: expected a name or an object, got {spec!r}")
        if "check" in spec:
            return check_embed(_hf_from_lists(spec["check"]), d)
        if "rational" in spec:
            return check_embed(rational_hf(_rational(spec["rational"])), d)
        if "real" in spec:
            a = u.observable(spec["real"])
            try:
                return as_qset(to_qreal(a, u.grid_for(a)))
            except ValueError as exc:
                raise UniverseError(f"{where}: {exc}") from exc
        if "entries" in spec:
            entries = []
            for i, e in enumerate(spec["entries"]):
                if not isinstance(e, dict) or "child" not in e:
                    raise UniverseError(f"{where}: entry {i} needs a 'child'")
                child = build(e["child"], f"{where} entry {i}")
                entries.append((child, u.projection(str(e.get("value", "1")))))
            return make_qset(entries, d)
        raise UniverseError(f"{where}: expected one of entries, check, rational, real")

    for name in specs:
        build(name, "qsets")
    u.fragment = list(settings.get("fragment", list(u.qsets)))
    for name in u.fragment:
        if name not in u.qsets:
            raise UniverseError(f"fragment names unknown QSet {name!r}")
    return u


def _projection_report(p: Projection) -> dict:
    return {
        "matrix": encode_matrix(p.matrix),
        "rank": p.rank,
        "is_one": p.is_one(),
        "is_zero": p.is_zero(),
    }


def _show_matrix(m) -> str:
    m = np.round(np.asarray(m), 12) + 0.0
    if not np.iscomplexobj(m) or np.allclose(m.imag, 0):
        m = m.real
    return np.array2string(m, precision=12, suppress_small=True, max_line_width=160)


def _print_projection(label: str, p: Projection):
    flags = ["is 1"] if p.is_one() else ["is 0"] if p.is_zero() else []
    print(f"{label}: rank {p.rank}/{p.dim}" + (f" ({', '.join(flags)})" if flags else ""))
    print(_show_matrix(p.matrix))


def _emit(args, payload: dict, text):
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        text()


def cmd_eval(args) -> int:
    u = load_universe(args.universe)
    phi = parse(args.formula)
    p = truth_value(phi, u.environment(args.connective))
    payload = {"command": "eval", "formula": args.formula, **_projection_report(p)}
    _emit(args, payload, lambda: _print_projection(f"[[{args.formula}]]", p))
    return EXIT_OK


def cmd_prob(args) -> int:
    u = load_universe(args.universe)
    psi = u.state(args.state)
    if args.formula is not None:
        if args.obs or args.interval:
            raise SemanticError("use either --formula or --obs/--interval, not both")
        p = truth_value(parse(args.formula), u.environment(args.connective))
        value = prob(p, psi)
        what = args.formula
    else:
        if not args.obs or len(args.obs) != len(args.interval or []):
            raise SemanticError("give --formula, or one --interval A B per --obs")
        obs = [u.observable(n) for n in args.obs]
        intervals = [Interval(_rational(a), _rational(b)) for a, b in args.interval]
        if len(obs) == 1:
            a = obs[0]
            grid = u.grid_for(a).merge(RationalGrid.of(intervals[0].a, intervals[0].b))
            value = prob(in_interval_value(to_qreal(a, grid), intervals[0], args.connective or u.connective), psi)
        else:
            value = joint_prob(obs, intervals, psi)
        what = " & ".join(f"{n} in ({i.a}, {i.b}]" for n, i in zip(args.obs, intervals))
    payload = {"command": "prob", "proposition": what, "state": args.state, "probability": value}
    _emit(args, payload, lambda: print(f"{value:.12g}"))
    return EXIT_OK


def cmd_correlate(args) -> int:
    u = load_universe(args.universe)
    if len(args.obs) != 2:
        raise SemanticError("correlate needs exactly two --obs")
    a, b = (u.observable(n) for n in args.obs)
    report = perfectly_correlated(a, b, u.state(args.state), strict=False)
    rows = ["i", "ii", "iii", "iv"]
    unanimous = len({report.conditions[k] for k in rows}) == 1
    payload = {
        "command": "correlate",
        "observables": args.obs,
        "state": args.state,
        "conditions": {k: report.conditions[k] for k in rows},
        "residuals": {k: report.residuals[k] for k in rows},
        "unanimous": unanimous,
        "correlated": report.conditions["i"] if unanimous else None,
    }

    def text():
        for k in rows:
            verdict = "pass" if report.conditions[k] else "fail"
            print(f"({k:>3}) {verdict}  residual {report.residuals[k]:.3e}")
        if unanimous:
            print("perfectly correlated" if report.conditions["i"] else "not perfectly correlated")
        else:
            print("INCONSISTENT: the conditions disagree")

    _emit(args, payload, text)
    return EXIT_OK if unanimous else EXIT_INTERNAL


def cmd_transfer_check(args) -> int:
    u = load_universe(args.universe)
    if args.corpus:
        try:
            text = Path(args.corpus).read_text()
        except OSError as exc:
            raise SemanticError(f"cannot read corpus {args.corpus!r}: {exc.strerror}") from exc
    else:
        text = files("quantumsets").joinpath("data/transfer_corpus.txt").read_text()
    corpus = load_corpus(text)
    for phi in corpus:
        if not is_delta0(phi):
            raise SemanticError(f"not a Delta0 formula: {to_text(phi)}")
    pool = [u.qsets[n] for n in u.fragment]
    connective = args.connective or u.connective
    rows = []
    for phi in corpus:
        names = sorted(free_vars(phi))
        fixed = {n: u.qsets[n] for n in names if n in u.qsets}
        schematic = [n for n in names if n not in u.qsets]
        if schematic and not pool:
            raise SemanticError("schematic names need a nonempty fragment")
        worst, checks = 0.0, 0
        for choice in product(pool, repeat=len(schematic)):
            assignment = {**fixed, **dict(zip(schematic, choice))}
            r = check_transfer(phi, assignment, connective, dim=u.dim)
            worst = max(worst, r.worst_residual)
            checks += 1
        rows.append({"formula": to_text(phi), "checks": checks, "worst_residual": worst, "passed": worst <= 1e-8})
    passed = all(r["passed"] for r in rows)
    payload = {"command": "transfer-check", "formulas": rows, "passed": passed}

    def text_out():
        for r in rows:
            mark = "PASS" if r["passed"] else "FAIL"
            print(f"{mark}  {r['worst_residual']:.2e}  ({r['checks']} assignments)  {r['formula']}")
        print(f"{sum(r['passed'] for r in rows)}/{len(rows)} formulas pass")

    _emit(args, payload, text_out)
    return EXIT_OK if passed else EXIT_INTERNAL


def cmd_logic_info(args) -> int:
    u = load_universe(args.universe)
    family = [u.projection(n) for n in args.projections]
    dom = boolean_domain(family, u.dim, u.tolerance)
    logic = generate_logic(family, u.dim, u.tolerance)
    boolean = is_boolean(logic, u.tolerance)
    payload = {
        "command": "logic-info",
        "projections": args.projections,
        "boolean_domain": _projection_report(dom),
        "algebra_dimension": logic.algebra_dim,
        "commutant_dimension": logic.commutant_dim,
        "boolean": boolean,
    }

    def text():
        _print_projection("Boolean domain", dom)
        print(f"algebra dimension: {logic.algebra_dim}")
        print(f"commutant dimension: {logic.commutant_dim}")
        print(f"boolean: {str(boolean).lower()}")

    _emit(args, payload, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quantumsets", description="Quantum set theory workbench.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--universe", default="demo", help="universe JSON file, or a builtin: demo, bell")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--connective", choices=sorted(CONNECTIVES), default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="truth value of a formula")
    p.add_argument("--formula", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("prob", parents=[common], help="Born probability of a proposition")
    p.add_argument("--state", required=True)
    p.add_argument("--formula")
    p.add_argument("--obs", action="append", help="observable name (with --interval)")
    p.add_argument("--interval", nargs=2, action="append", metavar=("A", "B"), help="half-open (A, B]")
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("correlate", parents=[common], help="perfect-correlation verdicts")
    p.add_argument("--obs", action="append", required=True)
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("transfer-check", parents=[common], help="check a Delta0 corpus on a universe")
    p.add_argument("--corpus", help="one formula per line (default: the shipped corpus)")
    p.set_defaults(func=cmd_transfer_check)

    p = sub.add_parser("logic-info", parents=[common], help="Boolean domain and generated logic")
    p.add_argument("--projections", nargs="+", required=True)
    p.set_defaults(func=cmd_logic_info)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConsistencyError as exc:
        print(f"inconsistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (SemanticError, QuantumSetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
