"""Command-line front end."""

from __future__ import annotations

import argparse
import inspect
import json
import os
import re
import sys

from .approx import best_uniform, e1_convex
from .convexify import convexify_in_position, convexify_smooth
from .errors import InputError, WhitneyError
from .geometry import ConvexBody, GridSpec
from .polynomials import is_convex_on, parse_polynomial
from .report import _round_tree, bundle_csv, bundle_json
from .smoothness import ScalarField, modulus
from .suites import SUITES
from .whitney import CATALOG, WitnessFunction, polynomial_witness, whitney_ratio

DEFAULT_RESOLUTION = {1: 201, 2: 101, 3: 41}
_INTERVAL = re.compile(r"\[\s*([^,\]]+)\s*,\s*([^\]]+)\s*\]")


def parse_body(text: str, dim: int | None = None) -> ConvexBody:
    """A JSON file, inline JSON, a product of intervals "[a,b]x[c,d]", or cube/ball/simplex."""
    text = text.strip()
    if os.path.isfile(text):
        with open(text) as fh:
            return ConvexBody.from_dict(json.load(fh))
    if text.startswith("{"):
        return ConvexBody.from_dict(json.loads(text))
    if text.startswith("["):
        parts = [p.strip() for p in re.split(r"\]\s*x\s*\[", text)]
        ivs = [_INTERVAL.fullmatch(("[" if i else "") + p + ("]" if i < len(parts) - 1 else ""))
               for i, p in enumerate(parts)]
        if not all(ivs):
            raise InputError(f"cannot parse body {text!r}")
        try:
            lo = [float(m.group(1)) for m in ivs]
            hi = [float(m.group(2)) for m in ivs]
        except ValueError:
            raise InputError(f"cannot parse body {text!r}") from None
        return ConvexBody.box(lo, hi)
    n = dim or 2
    named = {"cube": ConvexBody.cube, "ball": ConvexBody.unit_ball,
             "simplex": ConvexBody.standard_simplex}
    if text in named:
        return named[text](n)
    raise InputError(f"cannot parse body {text!r}")


def resolve_function(args) -> tuple[WitnessFunction, ConvexBody]:
    body = parse_body(args.body, args.dim) if args.body else None
    name = args.fn
    if name in CATALOG:
        n = body.dimension if body is not None else args.dim
        kw = {"delta": args.delta} if name == "ramp" else {}
        if n is not None and name != "prop18":
            kw["n"] = n
        w = CATALOG[name](**kw)
    else:
        n = body.dimension if body is not None else args.dim
        p = parse_polynomial(name, n)
        w = polynomial_witness(p, name=name)
    K = body or w.natural_body
    if K.dimension != w.field.dimension:
        raise InputError(f"function has dimension {w.field.dimension}, body {K.dimension}")
    return w, K


def _grid(args, n: int) -> GridSpec:
    return GridSpec(args.resolution or DEFAULT_RESOLUTION.get(n, 21))


def _convex_field(w: WitnessFunction, K, grid, tol: float) -> ScalarField:
    """Catalog witnesses are convex by construction; polynomials are checked."""
    f = w.field
    if f.declared_convex:
        return f
    p = f.evaluator
    if not is_convex_on(p, K, grid, tol=tol):
        raise InputError(f"{w.id} is not convex on the body")
    return ScalarField.from_polynomial(p, declared_convex=True, name=w.id)


def _emit(args, payload: dict) -> None:
    payload = _round_tree(payload)
    if args.format == "csv":
        lines = ["key,value"]
        for k, v in payload.items():
            if not isinstance(v, (list, dict)):
                lines.append(f"{k},{json.dumps(v)}")
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(payload, indent=2) + "\n"
    _write(args, text)


def _write(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_reports(args, reports: list) -> int:
    if args.format == "json":
        text = bundle_json(reports) if len(reports) > 1 else reports[0].to_json() + "\n"
    else:
        text = bundle_csv(reports)
    _write(args, text)
    failed = [c for r in reports for c in r.failures()]
    for r in reports:
        for c in r.failures():
            print(f"FAIL {r.suite}/{c.id}: actual={c.actual} {c.relation} expected={c.expected} "
                  f"(tol {c.tol})", file=sys.stderr)
    return 1 if failed else 0


# -- subcommands ----------------------------------------------------------------------------


def cmd_approx(args) -> int:
    w, K = resolve_function(args)
    sol = best_uniform(w.field, K, args.m, _grid(args, K.dimension))
    _emit(args, sol.to_dict())
    return 0


def cmd_modulus(args) -> int:
    w, K = resolve_function(args)
    _emit(args, modulus(w.field, K, args.m, _grid(args, K.dimension)).to_dict())
    return 0


def cmd_e1(args) -> int:
    w, K = resolve_function(args)
    grid = _grid(args, K.dimension)
    f = _convex_field(w, K, grid, args.tol)
    _emit(args, {"function": w.id, "E1": e1_convex(f, K, grid)})
    return 0


def cmd_repair(args) -> int:
    w, K = resolve_function(args)
    grid = _grid(args, K.dimension)
    f = _convex_field(w, K, grid, args.tol)
    if args.P is None:
        P = best_uniform(f, K, 2, grid).polynomial
    else:
        P = parse_polynomial(args.P, K.dimension)
    rep = convexify_in_position(f, P, K, grid)
    out = rep.result.to_dict()
    out["Q_positioned"] = out.pop("Q")
    out["Q"] = rep.Q.to_json_terms()
    out["P"] = P.to_json_terms()
    out["achieved_on_body"] = rep.achieved
    ok = rep.result.bound_ok and rep.result.intermediate_ok
    out["pass"] = ok
    _emit(args, out)
    if not ok:
        print("FAIL repair: bound or ball estimate violated", file=sys.stderr)
    return 0 if ok else 1


def cmd_smooth(args) -> int:
    w, K = resolve_function(args)
    g = w.field.evaluator
    if not hasattr(g, "to_json_terms"):
        raise InputError("convexify-smooth needs a polynomial literal")
    grid = _grid(args, K.dimension)
    h, L = convexify_smooth(g, K, grid)
    ok = is_convex_on(h, K, grid, tol=args.tol)
    _emit(args, {"L": L, "h": h.to_json_terms(), "convex": ok})
    return 0 if ok else 1


def cmd_ratio(args) -> int:
    w, K = resolve_function(args)
    _emit(args, whitney_ratio(w, K, args.m, _grid(args, K.dimension)).to_dict())
    return 0


def cmd_prop18(args) -> int:
    res = args.resolution or 101
    return _emit_reports(args, [SUITES["prop18"]((res, (res + 1) // 2))])


def cmd_thm13(args) -> int:
    return _emit_reports(args, [SUITES["thm13"](seed=args.seed, n_random=args.cases or 100)])


def cmd_thm16(args) -> int:
    return _emit_reports(args, [SUITES["thm16"](seed=args.seed, n_cases=args.cases or 500)])


def cmd_report(args) -> int:
    reports = []
    for suite in SUITES.values():
        kw = {"seed": args.seed} if "seed" in inspect.signature(suite).parameters else {}
        reports.append(suite(**kw))
    return _emit_reports(args, reports)


COMMANDS = {
    "approx": (cmd_approx, "best uniform polynomial approximation on a grid"),
    "modulus": (cmd_modulus, "m-th modulus of smoothness with its witness pair"),
    "e1-convex": (cmd_e1, "E_1 of a convex function by the Jensen-gap formula"),
    "repair": (cmd_repair, "convex quadratic repair of a quadratic approximant"),
    "convexify-smooth": (cmd_smooth, "h = g + L |x|^2 for a polynomial g"),
    "whitney-ratio": (cmd_ratio, "E_{m-1} / omega_m for a witness"),
    "verify-prop18": (cmd_prop18, "roof-function suite"),
    "verify-thm13": (cmd_thm13, "ramp witnesses and linear approximation on symmetric bodies"),
    "verify-thm16": (cmd_thm16, "randomized quadratic repair suite"),
    "report": (cmd_report, "run every suite into one bundle"),
}


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("resolution must be at least 2")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--body", help="JSON file, inline JSON, [a,b]x[c,d], cube, ball or simplex")
    common.add_argument("--fn", default="ramp", help="catalog id (ramp, entropy, prop18) or polynomial")
    common.add_argument("--m", type=int, default=1)
    common.add_argument("--dim", type=int, default=None, help="dimension for named bodies")
    common.add_argument("--resolution", type=_positive_int, default=None)
    common.add_argument("--tol", type=_positive_float, default=1e-9)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--delta", type=float, default=0.5, help="ramp width")
    common.add_argument("--cases", type=int, default=None, help="number of random cases")
    common.add_argument("--P", default=None, help="quadratic to repair (default: grid-best)")
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("json", "csv"), default=None)

    parser = argparse.ArgumentParser(prog="cvxwhitney", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (fn, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command.startswith(("verify", "report")) else "json"
    try:
        return args.func(args)
    except (InputError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except WhitneyError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


def _exit():
    sys.exit(main())


if __name__ == "__main__":
    _exit()
