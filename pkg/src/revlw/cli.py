"""Command-line front end.

Exit codes: 0 ok, 1 a requested check failed, 2 usage, 3 bad input,
4 certified search refused by the evaluation budget.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
import warnings
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version

from .exact import RationalParseError, fmt, to_fraction
from .fixtures import load_zoo, zoo_names
from .frames import (
    BudgetExceededError,
    SearchConfig,
    heuristic_search,
    lw_approx,
    lw_exact_2d,
    min_box,
    structured_search,
)
from .oracles import BoundsReport, check_zhang, run_battery
from .polytope import (
    DegeneratePolytopeError,
    PolytopeInputError,
    UnboundedPolytopeError,
    facets,
    load_polytope,
    scale_to_unit_surface,
    summary,
)
from .zonotope import projection_body

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def _rational(text: str) -> Fraction:
    try:
        return to_fraction(text, "argument")
    except RationalParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _value(x):
    if isinstance(x, Fraction):
        return fmt(x)
    if isinstance(x, float):
        return format(x, ".17g")
    if isinstance(x, (list, tuple)):
        return [_value(v) for v in x]
    if isinstance(x, dict):
        return {k: _value(v) for k, v in x.items()}
    return x


def _load(spec: str):
    """A JSON path, or ``zoo:<name>`` for a shipped body."""
    try:
        if spec.startswith("zoo:"):
            return load_zoo(spec[4:])
        return load_polytope(spec)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from exc
    except OSError as exc:
        raise InputError(f"{spec}: {exc.strerror}") from exc


def _manifest(args, config: dict, seeds=None, wall_ms=None) -> dict:
    out = {
        "command": args.command,
        "input": args.path,
        "config": _value(config),
        "version": _version(),
        "seeds": seeds,
    }
    # timings differ run to run; they are opt-in so output stays byte-identical
    out["timings"] = {"wall_ms": wall_ms} if args.timings else None
    return out


def _emit(args, manifest: dict, result: dict, table_rows=None) -> None:
    result = _value(result)
    if args.out == "json":
        print(json.dumps({"manifest": manifest, "result": result}, indent=2))
        return
    rows = table_rows if table_rows is not None else list(result.items())
    if args.out == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in rows:
            w.writerow([k, json.dumps(v) if isinstance(v, (list, dict)) else v])
        sys.stdout.write(buf.getvalue())
        return
    for k, v in manifest.items():
        if v is not None:
            print(f"# {k}: {json.dumps(v) if isinstance(v, dict) else v}")
    width = max((len(str(k)) for k, _ in rows), default=0)
    for k, v in rows:
        shown = json.dumps(v) if isinstance(v, (list, dict)) else v
        print(f"{k:<{width}}  {shown}")


# ---------------------------------------------------------------------------
# commands

def cmd_info(args) -> int:
    P = _load(args.path)
    s = summary(P)
    fd = facets(P)
    result = {
        "n": s.n,
        "volume": s.volume,
        "surface_lo": s.surface.lo,
        "surface_hi": s.surface.hi,
        "surface": s.surface.mid,
        "iso_lower": s.iso_lower,
        "facets": fd.m,
        "normals": [list(a) for a in fd.a],
        "offsets": list(fd.beta),
        "omega": list(fd.omega),
    }
    _emit(args, _manifest(args, {}), result)
    return EXIT_OK


def cmd_lw2d(args) -> int:
    P = _load(args.path)
    if P.n != 2:
        raise InputError("lw2d needs a planar polygon")
    r = lw_exact_2d(P)
    result = {"lambda": r.lam, "edge": r.edge, "direction": list(r.direction), "rect_area": r.rect_area}
    _emit(args, _manifest(args, {}), result)
    return EXIT_OK


def cmd_search(args, parser) -> int:
    P = _load(args.path)
    t0 = time.perf_counter()
    workers = args.threads
    if args.mode == "certified":
        if args.tau is not None and (args.delta is not None or args.nu is not None):
            parser.error("give either --tau or --delta/--nu")
        if args.tau is not None:
            if not 0 < args.tau <= 1:
                parser.error("--tau must lie in (0, 1]")
            sigma, Ps = scale_to_unit_surface(P)
            res = structured_search(Ps, args.tau, budget=args.budget, workers=workers)
            res.sigma = sigma
        else:
            if args.delta is None or args.nu is None:
                parser.error("certified mode needs --tau or both --delta and --nu")
            if not 0 < args.delta < 1:
                parser.error("--delta must lie in (0, 1)")
            if args.nu <= 0:
                parser.error("--nu must be positive")
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                res = lw_approx(P, args.delta, args.nu, budget=args.budget, workers=workers)
            for w in caught:
                print(f"warning: {w.message}", file=sys.stderr)
        config = {"mode": args.mode, "tau": args.tau, "delta": args.delta, "nu": args.nu,
                  "budget": args.budget}
        seeds = None
    else:
        cfg = SearchConfig(restarts=args.restarts, seed=args.seed, workers=workers)
        h = heuristic_search(P, cfg)
        res = h.certified
        config = {"mode": args.mode, "restarts": args.restarts}
        seeds = [args.seed]
    wall = int((time.perf_counter() - t0) * 1000)
    result = res.to_dict(timings=args.timings)
    _emit(args, _manifest(args, config, seeds, wall), result)
    return EXIT_OK


def cmd_minbox(args) -> int:
    P = _load(args.path)
    r = min_box(P, args.mode, SearchConfig(restarts=args.restarts, seed=args.seed))
    result = {"mode": r.mode, "exact": r.exact, "box_volume": r.box_volume,
              "value": r.value, "frame": [list(u) for u in r.frame]}
    _emit(args, _manifest(args, {"mode": args.mode, "restarts": args.restarts}, [args.seed]), result)
    return EXIT_OK


def cmd_projbody(args) -> int:
    P = _load(args.path)
    # opposite facets give parallel segments; report each direction once
    Z = projection_body(P).merged()
    result = Z.to_dict()
    rows = [("n", Z.n)] + [(f"g{j}", [fmt(x) for x in g]) for j, g in enumerate(Z.generators)]
    _emit(args, _manifest(args, {}), result, rows)
    return EXIT_OK


def _bodies(paths):
    names = paths or ["zoo"]
    out = {}
    for p in names:
        if p == "zoo":
            for z in zoo_names():
                out[z] = load_zoo(z)
        else:
            out[p] = _load(p)
    return out


def cmd_bounds(args) -> int:
    bodies = _bodies(args.path)
    t0 = time.perf_counter()
    report = run_battery(bodies, samples=args.samples, seed=args.seed,
                         workers=args.threads, restarts=args.restarts)
    wall = int((time.perf_counter() - t0) * 1000)
    manifest = _manifest(args, {"samples": args.samples, "restarts": args.restarts}, [args.seed], wall)
    if args.out == "json":
        print(json.dumps({"manifest": manifest, "result": json.loads(report.to_json())}, indent=2))
    elif args.out == "csv":
        sys.stdout.write(report.to_csv())
    else:
        for k, v in manifest.items():
            if v is not None:
                print(f"# {k}: {json.dumps(v) if isinstance(v, dict) else v}")
        for e in report.entries:
            d = e.to_dict()
            print(f"{d['verdict']:<12} {d['body']:<22} {d['name']:<16} lhs={d['lhs']} rhs={d['rhs']}"
                  + (f" ci95={d['ci95']}" if d["ci95"] else "") + (f"  [{d['note']}]" if d["note"] else ""))
    return EXIT_OK if report.ok else EXIT_CHECK


def cmd_zhang(args) -> int:
    P = _load(args.path)
    e = check_zhang(P, args.samples, args.seed, args.expect, workers=args.threads, body=args.path)
    report = BoundsReport([e])
    manifest = _manifest(args, {"samples": args.samples, "expect": args.expect}, [args.seed])
    _emit(args, manifest, e.to_dict())
    return EXIT_OK if report.ok else EXIT_CHECK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="revlw", description="Reverse Loomis-Whitney constants of rational polytopes.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", choices=("table", "json", "csv"), default="table")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker cap; results do not depend on it")
    common.add_argument("--timings", action="store_true", help="include wall-clock times in the output")
    sub = p.add_subparsers(dest="command", required=True)

    def body(sp):
        sp.add_argument("path", help="polytope JSON file or zoo:<name>")

    s = sub.add_parser("info", parents=[common], help="volume, facets, surface area")
    body(s)
    s = sub.add_parser("lw2d", parents=[common], help="exact planar constant")
    body(s)
    s = sub.add_parser("search", parents=[common], help="certified or heuristic frame search")
    body(s)
    s.add_argument("--mode", choices=("certified", "heuristic"), default="heuristic")
    s.add_argument("--tau", type=_rational)
    s.add_argument("--delta", type=_rational)
    s.add_argument("--nu", type=_rational)
    s.add_argument("--restarts", type=int, default=32)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--budget", type=int, default=None, help="evaluation budget (default: REVLW_BUDGET or 1e9)")
    s = sub.add_parser("minbox", parents=[common], help="smallest enclosing box")
    body(s)
    s.add_argument("--mode", choices=("phi", "psi"), default="phi")
    s.add_argument("--restarts", type=int, default=32)
    s.add_argument("--seed", type=int, default=0)
    s = sub.add_parser("projbody", parents=[common], help="projection body generators")
    body(s)
    s = sub.add_parser("bounds", parents=[common], help="inequality battery")
    s.add_argument("path", nargs="*", help="bodies (default: the whole zoo)")
    s.add_argument("--samples", type=int, default=10 ** 5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--restarts", type=int, default=32)
    s = sub.add_parser("zhang", parents=[common], help="Monte Carlo polar projection body check")
    body(s)
    s.add_argument("--samples", type=int, default=10 ** 6)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--expect", choices=("ge", "eq", "gt"), default="ge")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    handlers = {
        "info": cmd_info, "lw2d": cmd_lw2d, "minbox": cmd_minbox, "projbody": cmd_projbody,
        "bounds": cmd_bounds, "zhang": cmd_zhang,
    }
    try:
        if args.command == "search":
            return cmd_search(args, parser)
        return handlers[args.command](args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, PolytopeInputError, RationalParseError, DegeneratePolytopeError,
            UnboundedPolytopeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
