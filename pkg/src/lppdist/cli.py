"""Command-line front end: individual evaluators plus the cross-check harness.

Reports are JSON Lines on stdout (one object per line, schema published as
REPORT_SCHEMA) or CSV with --csv; diagnostics go to stderr.  Exit status is 0
for success/agreement, 2 when a cross-check finds disagreement, 1 for usage or
runtime errors.  The model parameter q is accepted only as an exact rational
literal such as 1/2 or 3/10, never as a decimal.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from fractions import Fraction

import mpmath

from .detformulas import CdfQuery, cdf_det, joint_cdf, transition_det, TransitionQuery
from .fredholm import KernelSpec, cdf_biorth, cdf_fredholm
from .lpp import OrderedVector, StateSpaceError, exact_cdf_dp, mc_cdf
from .meixner import (
    MeixnerEnsembleQuery,
    PrecisionLossError,
    meixner_cdf_bruteforce,
    meixner_cdf_gram,
)
from .weights import ContourConfig, GeometricParameter, QuadratureError

__all__ = ["main", "REPORT_SCHEMA", "METHOD_ENTRY_SCHEMA", "CROSSCHECK_METHODS"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DISAGREE = 2

CROSSCHECK_METHODS = ("biorth", "det", "dp", "fredholm", "mc", "meixner")

#: Absolute tolerance declared by the float-valued formula routes.
NUMERIC_TOL = 1e-8
#: Monte Carlo agreement band in standard errors.
MC_SIGMA = 4.0

METHOD_ENTRY_SCHEMA = {
    "type": "object",
    "required": ["method"],
    "properties": {
        "method": {"enum": list(CROSSCHECK_METHODS)},
        "value": {"type": "string"},
        "exact": {"type": ["string", "null"]},
        "error_estimate": {"type": ["string", "null"]},
        "wall_ms": {"type": "number"},
        "increment": {"type": "string"},
        "failure": {"type": "string"},
    },
    "additionalProperties": False,
}

_VALUE_SCHEMA = {
    "type": "object",
    "required": ["rational", "decimal"],
    "properties": {
        "rational": {"type": "string"},
        "decimal": {"type": "string"},
    },
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "lppdist report row",
    "type": "object",
    "required": ["command", "params"],
    "properties": {
        "command": {
            "enum": [
                "simulate",
                "cdf-det",
                "cdf-meixner",
                "cdf-biorth",
                "cdf-fredholm",
                "crosscheck",
                "transition",
                "joint",
            ]
        },
        "params": {"type": "object"},
        "methods": {"type": "array", "items": METHOD_ENTRY_SCHEMA, "minItems": 1},
        "agreement": {"type": "boolean"},
        "comparisons": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["pair", "delta", "tolerance", "ok"],
                "properties": {
                    "pair": {"type": "string"},
                    "delta": {"type": "string"},
                    "tolerance": {"type": "string"},
                    "ok": {"type": "boolean"},
                },
                "additionalProperties": False,
            },
        },
        "value": _VALUE_SCHEMA,
        "increment": _VALUE_SCHEMA,
    },
    "additionalProperties": False,
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the contract here is 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _parse_q(text: str) -> GeometricParameter:
    if "." in text:
        raise argparse.ArgumentTypeError(
            f"q must be an exact rational literal like 1/2 or 3/10, not a decimal ({text!r})"
        )
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"cannot parse q from {text!r}: {exc}") from None
    try:
        return GeometricParameter(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_vector(text: str) -> OrderedVector:
    try:
        entries = tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse integer vector from {text!r}") from None
    try:
        return OrderedVector(entries)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_eta_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse threshold list from {text!r}") from None
    if any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("thresholds must be >= 0")
    return values


def _positive(kind: str):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if value < 1:
            raise argparse.ArgumentTypeError(f"{kind} must be >= 1, got {value}")
        return value

    return parse


def _nonnegative(kind: str):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if value < 0:
            raise argparse.ArgumentTypeError(f"{kind} must be >= 0, got {value}")
        return value

    return parse


def _contour_for(args, q: GeometricParameter) -> ContourConfig:
    cfg = ContourConfig.for_q(q)
    overrides = {}
    if getattr(args, "r2", None) is not None:
        overrides["r2"] = args.r2
    if getattr(args, "r1", None) is not None:
        overrides["r1"] = args.r1
    if getattr(args, "nodes", None) is not None:
        overrides["nodes"] = args.nodes
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _rational_value(fr: Fraction) -> dict:
    return {"rational": str(fr), "decimal": _fmt(float(fr))}


class MethodOutcome:
    """One method's result inside a report: value, tolerance, and provenance."""

    def __init__(self, name):
        self.name = name
        self.exact: Fraction | None = None
        self.value: float | None = None
        self.tolerance: float = 0.0
        self.error_estimate: str | None = None
        self.increment: float | None = None
        self.failure: str | None = None
        self.wall_ms: float = 0.0

    def entry(self, *, include_wall: bool = True) -> dict:
        row: dict = {"method": self.name}
        if self.failure is not None:
            row["failure"] = self.failure
        else:
            row["value"] = _fmt(self.value)
            row["exact"] = str(self.exact) if self.exact is not None else None
            row["error_estimate"] = self.error_estimate
            if self.increment is not None:
                row["increment"] = _fmt(self.increment)
        if include_wall:
            row["wall_ms"] = round(self.wall_ms, 3)
        return row


def _run_method(name: str, args) -> MethodOutcome:
    """Evaluate one distribution method; formula routes transpose m < n grids."""
    out = MethodOutcome(name)
    q, m, n, eta = args.q, args.m, args.n, args.eta
    mm, nn = (m, n) if m >= n else (n, m)
    start = time.perf_counter()
    try:
        if name == "dp":
            out.exact = exact_cdf_dp(q, m, n, eta)
            out.value = float(out.exact)
            out.error_estimate = "0"
        elif name == "det":
            out.exact = cdf_det(CdfQuery(q, mm, nn, eta))
            out.value = float(out.exact)
            out.error_estimate = "0"
        elif name == "meixner":
            out.exact = meixner_cdf_bruteforce(MeixnerEnsembleQuery(q, mm, nn, eta))
            out.value = float(out.exact)
            out.error_estimate = "0"
        elif name == "biorth":
            spec = KernelSpec(q, mm, nn, cfg=_contour_for(args, q))
            out.value = cdf_biorth(spec, eta)
            out.tolerance = NUMERIC_TOL
            out.error_estimate = _fmt(NUMERIC_TOL)
        elif name == "fredholm":
            variant = getattr(args, "kernel_variant", "derivation")
            spec = KernelSpec(q, mm, nn, variant=variant, cfg=_contour_for(args, q))
            value, increment = cdf_fredholm(
                spec, eta, getattr(args, "trunc", 16), allow_printed=True
            )
            out.value = value
            out.increment = increment
            out.tolerance = NUMERIC_TOL
            out.error_estimate = _fmt(NUMERIC_TOL)
        elif name == "mc":
            p, stderr = mc_cdf(q, m, n, eta, args.samples, args.seed)
            out.value = p
            out.tolerance = MC_SIGMA * stderr
            out.error_estimate = _fmt(stderr)
        else:
            raise ValueError(f"unknown method {name!r}")
    except (ValueError, StateSpaceError, QuadratureError, PrecisionLossError) as exc:
        out.failure = str(exc)
        print(f"method {name} failed: {exc}", file=sys.stderr)
    out.wall_ms = (time.perf_counter() - start) * 1000.0
    return out


def _compare(outcomes: list[MethodOutcome]) -> tuple[bool, list[dict]]:
    """Pairwise agreement among successful methods at their declared tolerances."""
    done = [o for o in outcomes if o.failure is None]
    comparisons = []
    agree = len(done) >= 2
    for i in range(len(done)):
        for j in range(i + 1, len(done)):
            a, b = done[i], done[j]
            tolerance = a.tolerance + b.tolerance
            if a.exact is not None and b.exact is not None:
                ok = a.exact == b.exact
                delta = abs(float(a.exact - b.exact))
            else:
                delta = abs(a.value - b.value)
                ok = delta <= tolerance
            comparisons.append(
                {
                    "pair": f"{a.name}/{b.name}",
                    "delta": _fmt(delta),
                    "tolerance": _fmt(tolerance),
                    "ok": ok,
                }
            )
            agree = agree and ok
    return agree, comparisons


def _emit(args, rows: list[dict], csv_fields: list[str], csv_rows: list[dict]) -> None:
    if getattr(args, "csv", False):
        import csv as _csv

        writer = _csv.DictWriter(sys.stdout, fieldnames=csv_fields)
        writer.writeheader()
        for row in csv_rows:
            writer.writerow(row)
    else:
        for row in rows:
            print(json.dumps(row, separators=(",", ":")))


def _method_csv_rows(params: dict, outcomes: list[MethodOutcome], agreement=None):
    rows = []
    for out in outcomes:
        row = dict(params)
        row["method"] = out.name
        row["value"] = "" if out.value is None else _fmt(out.value)
        row["exact"] = str(out.exact) if out.exact is not None else ""
        row["error_estimate"] = out.error_estimate or ""
        row["wall_ms"] = round(out.wall_ms, 3)
        row["failure"] = out.failure or ""
        if agreement is not None:
            row["agreement"] = agreement
        rows.append(row)
    return rows


def _cmd_simulate(args) -> int:
    params_base = {"q": str(args.q), "m": args.m, "n": args.n,
                   "samples": args.samples, "seed": args.seed}
    rows = []
    csv_rows = []
    for eta in args.eta:
        value, stderr = mc_cdf(args.q, args.m, args.n, eta, args.samples, args.seed)
        params = dict(params_base, eta=eta)
        entry = {
            "method": "mc",
            "value": _fmt(value),
            "exact": None,
            "error_estimate": _fmt(stderr),
        }
        rows.append({"command": "simulate", "params": params, "methods": [entry]})
        csv_rows.append(
            dict(params, method="mc", value=_fmt(value), error_estimate=_fmt(stderr))
        )
    fields = ["q", "m", "n", "samples", "seed", "eta", "method", "value", "error_estimate"]
    _emit(args, rows, fields, csv_rows)
    return EXIT_OK


def _single_method_command(args, command: str, method: str) -> int:
    outcome = _run_method(method, args)
    if outcome.failure is not None:
        return EXIT_USAGE
    params = {"q": str(args.q), "m": args.m, "n": args.n, "eta": args.eta}
    if command == "cdf-meixner" and args.route == "gram":
        params["route"] = "gram"
        params["precision"] = args.precision
    if command == "cdf-fredholm":
        params["variant"] = args.kernel_variant
        params["trunc"] = args.trunc
    report = {
        "command": command,
        "params": params,
        "methods": [outcome.entry()],
    }
    fields = list(params) + ["method", "value", "exact", "error_estimate", "wall_ms", "failure"]
    _emit(args, [report], fields, _method_csv_rows(params, [outcome]))
    return EXIT_OK


def _cmd_cdf_meixner(args) -> int:
    if args.route == "gram":
        mm, nn = (args.m, args.n) if args.m >= args.n else (args.n, args.m)
        start = time.perf_counter()
        try:
            value = meixner_cdf_gram(
                MeixnerEnsembleQuery(args.q, mm, nn, args.eta), precision=args.precision
            )
        except (ValueError, PrecisionLossError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        wall = (time.perf_counter() - start) * 1000.0
        params = {
            "q": str(args.q), "m": args.m, "n": args.n, "eta": args.eta,
            "route": "gram", "precision": args.precision,
        }
        entry = {
            "method": "meixner",
            "value": mpmath.nstr(value, 17),
            "exact": None,
            "error_estimate": None,
            "wall_ms": round(wall, 3),
        }
        report = {"command": "cdf-meixner", "params": params, "methods": [entry]}
        fields = list(params) + ["method", "value", "wall_ms"]
        csv_row = dict(params, method="meixner", value=mpmath.nstr(value, 17),
                       wall_ms=round(wall, 3))
        _emit(args, [report], fields, [csv_row])
        return EXIT_OK
    return _single_method_command(args, "cdf-meixner", "meixner")


def _cmd_crosscheck(args) -> int:
    methods = sorted(set(args.methods))
    outcomes = [_run_method(name, args) for name in methods]
    agreement, comparisons = _compare(outcomes)
    params = {
        "q": str(args.q), "m": args.m, "n": args.n, "eta": args.eta,
        "samples": args.samples, "seed": args.seed,
        "variant": args.kernel_variant,
    }
    report = {
        "command": "crosscheck",
        "params": params,
        "methods": [o.entry() for o in outcomes],
        "agreement": agreement,
        "comparisons": comparisons,
    }
    fields = list(params) + [
        "method", "value", "exact", "error_estimate", "wall_ms", "failure", "agreement",
    ]
    _emit(args, [report], fields, _method_csv_rows(params, outcomes, agreement))
    return EXIT_OK if agreement else EXIT_DISAGREE


def _cmd_transition(args) -> int:
    if len(args.x) != len(args.y):
        print("error: endpoint vectors must have equal length", file=sys.stderr)
        return EXIT_USAGE
    value = transition_det(TransitionQuery(args.q, args.steps, args.x, args.y))
    params = {
        "q": str(args.q), "steps": args.steps,
        "x": ",".join(str(v) for v in args.x),
        "y": ",".join(str(v) for v in args.y),
    }
    report = {"command": "transition", "params": params, "value": _rational_value(value)}
    fields = list(params) + ["value_rational", "value_decimal"]
    csv_row = dict(params, value_rational=str(value), value_decimal=_fmt(float(value)))
    _emit(args, [report], fields, [csv_row])
    return EXIT_OK


def _cmd_joint(args) -> int:
    trunc = args.trunc if args.trunc is not None else max(args.eta1, args.eta2) + 8
    value, increment = joint_cdf(args.q, args.m, args.n, args.eta1, args.eta2, trunc)
    params = {
        "q": str(args.q), "m": args.m, "n": args.n,
        "eta1": args.eta1, "eta2": args.eta2, "trunc": trunc,
    }
    report = {
        "command": "joint",
        "params": params,
        "value": _rational_value(value),
        "increment": _rational_value(increment),
    }
    fields = list(params) + [
        "value_rational", "value_decimal", "increment_rational", "increment_decimal",
    ]
    csv_row = dict(
        params,
        value_rational=str(value), value_decimal=_fmt(float(value)),
        increment_rational=str(increment), increment_decimal=_fmt(float(increment)),
    )
    _emit(args, [report], fields, [csv_row])
    return EXIT_OK


def _add_model_args(sub, *, eta_list: bool = False, eta: bool = True) -> None:
    sub.add_argument("--q", type=_parse_q, required=True,
                     help="geometric parameter as an exact rational, e.g. 1/2")
    sub.add_argument("--m", type=_positive("m"), required=True, help="number of rows")
    sub.add_argument("--n", type=_positive("n"), required=True, help="number of columns")
    if eta_list:
        sub.add_argument("--eta", type=_parse_eta_list, required=True,
                         help="threshold or comma list of thresholds")
    elif eta:
        sub.add_argument("--eta", type=_nonnegative("eta"), required=True,
                         help="distribution threshold")


def _add_contour_args(sub) -> None:
    sub.add_argument("--r2", type=float, help="inner contour radius (default (1/q)^(1/3))")
    sub.add_argument("--r1", type=float, help="outer contour radius (default (1/q)^(2/3))")
    sub.add_argument("--nodes", type=_positive("nodes"), help="starting quadrature node count")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="lppdist",
        description="Evaluate and cross-validate last-passage time distributions.",
    )
    parser.add_argument("--csv", action="store_true", help="emit CSV instead of JSON Lines")
    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser("simulate", help="Monte Carlo estimate of P[G(m,n) <= eta]")
    _add_model_args(sim, eta_list=True)
    sim.add_argument("--samples", type=_positive("samples"), required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.set_defaults(func=_cmd_simulate)

    det = commands.add_parser("cdf-det", help="finite difference determinant route")
    _add_model_args(det)
    det.set_defaults(func=lambda a: _single_method_command(a, "cdf-det", "det"))

    meix = commands.add_parser("cdf-meixner", help="Meixner ensemble route")
    _add_model_args(meix)
    meix.add_argument("--route", choices=("bruteforce", "gram"), default="bruteforce")
    meix.add_argument("--precision", type=_positive("precision"), default=50,
                      help="working digits for the gram route")
    meix.set_defaults(func=_cmd_cdf_meixner)

    bio = commands.add_parser("cdf-biorth", help="biorthogonal pairing determinant route")
    _add_model_args(bio)
    _add_contour_args(bio)
    bio.set_defaults(func=lambda a: _single_method_command(a, "cdf-biorth", "biorth"))

    fred = commands.add_parser("cdf-fredholm", help="Fredholm finite-section route")
    _add_model_args(fred)
    _add_contour_args(fred)
    fred.add_argument("--trunc", type=_positive("trunc"), default=16,
                      help="initial finite-section size")
    fred.add_argument("--kernel-variant", choices=("derivation", "printed"),
                      default="derivation")
    fred.set_defaults(func=lambda a: _single_method_command(a, "cdf-fredholm", "fredholm"))

    cross = commands.add_parser("crosscheck", help="run several methods and compare")
    _add_model_args(cross)
    _add_contour_args(cross)
    cross.add_argument("--methods", default=",".join(CROSSCHECK_METHODS),
                       help="comma list from {%s}" % ",".join(CROSSCHECK_METHODS))
    cross.add_argument("--samples", type=_positive("samples"), default=100_000)
    cross.add_argument("--seed", type=int, default=0)
    cross.add_argument("--trunc", type=_positive("trunc"), default=16)
    cross.add_argument("--kernel-variant", choices=("derivation", "printed"),
                       default="derivation")
    cross.set_defaults(func=_cmd_crosscheck)

    trans = commands.add_parser("transition", help="multi-step transition determinant")
    trans.add_argument("--q", type=_parse_q, required=True)
    trans.add_argument("--steps", type=_nonnegative("steps"), required=True)
    trans.add_argument("--x", type=_parse_vector, required=True,
                       help="start state, weakly increasing comma list")
    trans.add_argument("--y", type=_parse_vector, required=True,
                       help="end state, weakly increasing comma list")
    trans.set_defaults(func=_cmd_transition)

    joint = commands.add_parser("joint", help="two-point joint distribution value")
    joint.add_argument("--q", type=_parse_q, required=True)
    joint.add_argument("--m", type=_positive("m"), required=True)
    joint.add_argument("--n", type=_positive("n"), required=True)
    joint.add_argument("--eta1", type=_nonnegative("eta1"), required=True)
    joint.add_argument("--eta2", type=_nonnegative("eta2"), required=True)
    joint.add_argument("--trunc", type=_nonnegative("trunc"), default=None,
                       help="free-coordinate truncation (default max(eta1,eta2)+8)")
    joint.set_defaults(func=_cmd_joint)

    return parser


def _parse_methods(parser: argparse.ArgumentParser, text: str) -> list[str]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    if not names:
        parser.error("method list must not be empty")
    bad = [name for name in names if name not in CROSSCHECK_METHODS]
    if bad:
        parser.error(f"unknown methods {bad}; choose from {CROSSCHECK_METHODS}")
    if "dp" not in names:
        names.append("dp")  # anchor
    return names


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "crosscheck":
        args.methods = _parse_methods(parser, args.methods)
    try:
        return args.func(args)
    except (ValueError, StateSpaceError, QuadratureError, PrecisionLossError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
