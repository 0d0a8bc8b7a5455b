"""Command-line interface: ``flk {list,verify,expand,moments,eval}``.

Exit codes: 0 when everything selected passes, 1 when an evaluation fails
(the failing report is still printed or written), 2 for an unknown id,
function or malformed argument.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import elliptic, identities, legendre
from .errors import FLKError, UnknownFunction
from .hyper import HypergeometricSpec, pFq
from .identities import _json_value

# short names accepted by ``expand`` next to the catalog ids themselves
ALIASES = {
    "K_sqrt": "K(sqrt(x))",
    "E_sqrt": "E(sqrt(x))",
    "inv_sqrt_2mx": "1/sqrt(2-x)",
    "2mx_m32": "(2-x)^(-3/2)",
    "sqrt_2mx": "sqrt(2-x)",
    "arcsin_sqrt": "arcsin(sqrt(x))/sqrt(x)",
    "inv_1p_sqrt": "1/(1+sqrt(1-x/2))",
    "frakJ": "frakJ(x)",
    "x1mx_K": "x(1-x)K(sqrt(x))",
    "power": "x^eta",
}


class UsageError(Exception):
    pass


def _rational(v: float) -> str:
    """Short rational form when v is one to within rounding, else repr."""
    if v == 0:
        return "0"
    f = Fraction(v).limit_denominator(1 << 20)
    if abs(float(f) - v) <= 4e-16 * abs(v):
        return str(f)
    return repr(v)


def _resolve_function(name: str) -> str:
    fn = ALIASES.get(name, name)
    if fn not in legendre.catalog_ids():
        raise UnknownFunction(f"unknown function {name!r}; known: {', '.join(sorted(ALIASES))}")
    return fn


def _parse_list(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    return [float(Fraction(t.strip())) for t in text.split(",")]


def parse_pfq(text: str) -> HypergeometricSpec:
    """``"a1,a2;b1,b2;x"`` with entries as decimals or fractions like 1/2."""
    parts = text.split(";")
    if len(parts) != 3:
        raise UsageError(f"--pfq needs 'a1,..;b1,..;x', got {text!r}")
    try:
        upper, lower = _parse_list(parts[0]), _parse_list(parts[1])
        x = float(Fraction(parts[2].strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse --pfq {text!r}: {exc}") from None
    return HypergeometricSpec(upper, lower, x)


# ------------------------------------------------------------------ commands

def cmd_list(args, out) -> int:
    recs = identities.registry()
    if args.tag:
        recs = [r for r in recs if args.tag in r.tags]
    if args.format == "json":
        rows = [{"id": r.id, "formula": r.formula, "tol_class": r.tol_class, "citation": r.citation,
                 "tags": list(r.tags), "points": len(r.points())} for r in recs]
        out.write(json.dumps(rows, indent=1) + "\n")
        return 0
    width = max((len(r.id) for r in recs), default=2)
    for r in recs:
        grid = f" [{len(r.points())} points]" if r.parameterized else ""
        out.write(f"{r.id:{width}s}  {r.tol_class:8s}  {r.citation}{grid}\n")
    return 0


def cmd_verify(args, out) -> int:
    if not args.all and not args.id:
        raise UsageError("verify needs --id X or --all")
    ids = None if args.all else args.id
    if ids is not None:
        for i in ids:
            identities.lookup(i)
    workers = args.workers
    reports = identities.verify_all(tag=args.tag, ids=ids, tol=args.tol, max_terms=args.max_terms,
                                    workers=workers)
    if ids is not None:
        # ``--id NAME[p=v]`` selects a single grid point
        wanted = [i for i in ids if "[" in i]
        if wanted:
            keep = set(wanted) | {r.id for r in reports if r.id.split("[")[0] in ids}
            reports = [r for r in reports if r.id in keep]
    if args.json:
        _write(args.json, identities.reports_to_json(reports, stable=args.stable), out)
    if args.csv:
        _write(args.csv, identities.reports_to_csv(reports, stable=args.stable), out)
    if not args.json and not args.csv:
        for r in reports:
            out.write(r.text() + "\n")
    n_pass = sum(r.status == "pass" for r in reports)
    if not (args.json == "-" or args.csv == "-"):
        out.write(f"{n_pass}/{len(reports)} passed\n")
    return 0 if n_pass == len(reports) else 1


def _write(path: str, text: str, out) -> None:
    if path == "-":
        out.write(text if text.endswith("\n") else text + "\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def cmd_expand(args, out) -> int:
    fn = _resolve_function(args.function)
    if args.terms < 1:
        raise UsageError("--terms must be >= 1")
    if fn == "x^eta" and args.eta is None:
        raise UsageError("x^eta needs --eta")
    stream = legendre.fl_catalog(fn, args.eta)
    values = [float(v) for v in stream.values(args.terms)]
    if args.format == "json":
        out.write(_json_value({"function": fn, "coefficients": values,
                               "exact": [_rational(v) for v in values]}) + "\n")
    else:
        out.write(f"{fn}: [" + ", ".join(_rational(v) for v in values) + "]\n")
    return 0


def cmd_moments(args, out) -> int:
    kind = args.kind
    if kind == "K":
        res = elliptic.moment_K(args.eta)
        routes = res.routes
    elif kind == "E":
        res = elliptic.moment_E(args.eta)
        routes = res.routes
    elif kind.startswith("J:"):
        try:
            m = int(kind[2:])
        except ValueError:
            raise UsageError(f"--kind J:m needs an integer m, got {kind!r}") from None
        routes = elliptic.moment_Jm_routes(m, args.eta)
        res = elliptic.moment_Jm(m, args.eta)
    else:
        raise UnknownFunction(f"unknown moment kind {kind!r}; use K, E or J:m")
    if args.format == "json":
        row = {"kind": kind, "eta": args.eta, "value": res.value, "abs_error": res.abs_error,
               "routes": {k: {"value": v.value, "abs_error": v.abs_error} for k, v in routes.items()}}
        out.write(_json_value(row) + "\n")
    else:
        out.write(f"{kind} moment at eta={args.eta:g}: {res.value!r} +- {res.abs_error:.2g}\n")
        for name, v in routes.items():
            out.write(f"  {name:24s} {v.value!r} +- {v.abs_error:.2g}\n")
    return 0


def cmd_eval(args, out) -> int:
    spec = parse_pfq(args.pfq)
    res = pFq(spec, tol=args.tol if args.tol is not None else 1e-12,
              max_terms=args.max_terms or 2_000_000)
    if args.format == "json":
        out.write(_json_value({"value": res.value, "abs_error": res.abs_error, "terms": res.terms}) + "\n")
    else:
        out.write(f"{res.value!r} +- {res.abs_error:.2g} ({res.terms} terms)\n")
    return 0


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flk", description="Evaluate and verify FL-expansion identities.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=True):
        if fmt:
            sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("list", help="identity ids and citations")
    sp.add_argument("--tag", default=None)
    common(sp)
    sp.set_defaults(func=cmd_list)

    sp = sub.add_parser("verify", help="verify identities")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--id", action="append", help="identity id (repeatable); runs its whole grid")
    g.add_argument("--all", action="store_true")
    sp.add_argument("--tag", default=None, help="restrict --all to records with this tag")
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--max-terms", type=int, default=None)
    sp.add_argument("--json", metavar="PATH", default=None, help="write JSON reports ('-' for stdout)")
    sp.add_argument("--csv", metavar="PATH", default=None, help="write CSV reports ('-' for stdout)")
    sp.add_argument("--stable", action="store_true", help="zero runtimes so output is bit-identical")
    sp.add_argument("--workers", type=int, default=None, help="process count (default: CPU count)")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("expand", help="first FL coefficients of a catalog function")
    sp.add_argument("--function", required=True)
    sp.add_argument("--terms", type=int, default=10)
    sp.add_argument("--eta", type=float, default=None, help="exponent for x^eta")
    common(sp)
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("moments", help="int_0^1 f(x) x^eta dx with route breakdown")
    sp.add_argument("--kind", required=True, help="K, E or J:m")
    sp.add_argument("--eta", type=float, required=True)
    common(sp)
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("eval", help="evaluate a pFq series")
    sp.add_argument("--pfq", required=True, help='"a1,a2;b1,b2;x"')
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--max-terms", type=int, default=None)
    common(sp)
    sp.set_defaults(func=cmd_eval)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args, out)
    except (UnknownFunction, UsageError) as exc:
        err.write(f"error: {exc}\n")
        return 2
    except (FLKError, ArithmeticError, ValueError) as exc:
        code = exc.code if isinstance(exc, FLKError) else type(exc).__name__
        err.write(f"evaluation failed: {code}: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
