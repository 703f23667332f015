"""Command line entry point: ``cclab <subcommand>``.

Reports are JSON objects tagged ``{"tool": "cclab", "version": 1}`` unless
``--format csv`` is requested.  Exit status is 0 when every property held,
1 when one was violated and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__

OK, VIOLATION, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _report(body: dict) -> dict:
    return {"tool": "cclab", "version": 1, **body}


def _csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return out.getvalue()


def _default(o):
    if isinstance(o, Fraction):
        return float(o)
    if isinstance(o, (np.integer, np.floating)):
        return o.item()
    if isinstance(o, (tuple, set, frozenset)):
        return list(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _emit(args, report: dict, rows: list[dict] | None = None) -> None:
    if args.format == "csv":
        if rows is None:
            raise UsageError(f"{args.command} has no CSV form")
        text = _csv(rows)
    else:
        text = json.dumps(_report(report), indent=2, default=_default) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# Subcommands.

def cmd_verify(args) -> int:
    from .suites import SUITES, run_suites
    names = args.suite or list(SUITES)
    unknown = set(names) - set(SUITES)
    if unknown:
        raise UsageError(f"unknown suite(s): {', '.join(sorted(unknown))}")
    checks = run_suites(names, seed=args.seed, scale=1.0 if args.full else args.scale)
    rows = [c.to_json() for c in checks]
    ok = all(c.passed for c in checks)
    _emit(args, {"command": "verify", "seed": args.seed, "passed": ok, "checks": rows},
          [{k: v for k, v in r.items() if not isinstance(v, (dict, list))} for r in rows])
    return OK if ok else VIOLATION


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def cmd_roundelim(args) -> int:
    from . import elim, proto
    if args.demo:
        from .suites import random_elimination_instance
        p, g, d, n = random_elimination_instance(np.random.default_rng(args.seed))
        if args.dump:
            folder = Path(args.dump)
            folder.mkdir(parents=True, exist_ok=True)
            (folder / "game.json").write_text(json.dumps(g.to_json()))
            (folder / "dist.json").write_text(json.dumps(proto.distribution_to_json(d)))
            lifted = elim.lift_game(g, n, proto.A)
            (folder / "protocol.json").write_text(json.dumps(proto.protocol_to_json(p, lifted)))
            (folder / "lift.json").write_text(json.dumps({"n": n}))
    else:
        if not (args.protocol and args.game and args.dist and args.n):
            raise UsageError("roundelim needs --protocol, --game, --dist and --n (or --demo)")
        g = proto.Game.from_json(_load_json(args.game))
        d = proto.distribution_from_json(_load_json(args.dist))
        p = proto.protocol_from_json(_load_json(args.protocol))
        n = args.n
    rep = elim.eliminate_round(p, g, d, n)
    body = {"command": "roundelim", "seed": args.seed, **rep.to_json()}
    _emit(args, body, [{k: v for k, v in c.items()} for c in body["candidates"]])
    return OK if rep.holds else VIOLATION


def cmd_pred_trace(args) -> int:
    from .tracers import pred_lb_trace
    overrides = {k: getattr(args, k) for k in ("p0", "log2_q0", "a", "log2_b", "t", "c1")}
    if args.m is None and args.loglog_m is None and overrides["p0"] is None:
        raise UsageError("pred-trace needs --m, --loglog-m or --p0")
    try:
        tr = pred_lb_trace(args.m, args.c2, args.c3, loglog_m=args.loglog_m,
                           integral=args.integral, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    body = tr.to_json()
    _emit(args, {"command": "pred-trace", **body}, body["rows"])
    return OK


def cmd_gt_trace(args) -> int:
    from .tracers import gt_lb_trace
    try:
        tr = gt_lb_trace(args.n, args.t, args.c)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    body = tr.to_json()
    rows = [{"stage": j, "error": e} for j, e in enumerate(tr.stages)]
    _emit(args, {"command": "gt-trace", **body}, rows)
    return OK


def _grid(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}") from exc


def cmd_bench(args) -> int:
    import random
    from . import cellprobe as cp
    rng = random.Random(args.seed)
    rows = []
    ok = True
    for kind in args.kind:
        for m in _grid(args.m):
            for n in _grid(args.n):
                if n > m or m < 2:
                    continue
                sch = cp.build_predecessor_scheme(kind, m, n, args.seed)
                sets = cp.random_sets(rng, m, n, args.sets)
                rep = cp.verify_scheme(sch, sets)
                ok &= rep.max_error == 0
                bound = 2 * math.ceil(math.log2(max(1.0, math.log2(m)))) + 4
                rows.append({"kind": kind, "m": m, "n": n, "s": sch.s, "w": sch.w, "t": sch.t,
                             "max_probes": rep.max_probes, "max_cells": rep.max_cells,
                             "loglog_bound": bound, "max_error": float(rep.max_error)})
    _emit(args, {"command": "bench", "seed": args.seed, "rows": rows}, rows)
    return OK if ok else VIOLATION


def cmd_gt_run(args) -> int:
    from .games import FingerprintProtocol, gt_test_pairs
    if args.n < 1 or args.rounds < 1 or args.samples < 1:
        raise UsageError("--n, --rounds and --samples must be positive")
    fp = FingerprintProtocol(args.n, args.rounds)
    rng = np.random.default_rng(args.seed)
    pairs = gt_test_pairs(rng, args.n, args.pairs)
    per = max(1, args.samples // len(pairs))
    errors = fp.monte_carlo(pairs, per, rng)
    worst = max(errors.values())
    rows = [{"x": x, "y": y, "error": e} for (x, y), e in errors.items()]
    body = {"command": "gt-run", "seed": args.seed, "n": args.n, "rounds": args.rounds,
            "schema": fp.schema.to_json(), "total_bits": fp.total_bits,
            "constant": fp.constant, "trials": per * len(pairs), "max_error": worst,
            "mean_error": float(np.mean(list(errors.values()))), "passed": worst <= 1 / 3,
            "pairs": rows}
    _emit(args, body, rows)
    return OK if worst <= 1 / 3 else VIOLATION


def _global_flags(p: argparse.ArgumentParser, defaults: bool) -> argparse.ArgumentParser:
    value = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=value(0))
    p.add_argument("--out", default=value(None), help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=value("json"))
    p.add_argument("--integral", action="store_true", default=value(False),
                   help="apply floors in tracers and report the divergence")
    return p


def build_parser() -> argparse.ArgumentParser:
    top = _global_flags(argparse.ArgumentParser(add_help=False), defaults=True)
    # Sub-parsers repeat the flags without defaults so either position works.
    common = _global_flags(argparse.ArgumentParser(add_help=False), defaults=False)

    parser = argparse.ArgumentParser(prog="cclab", parents=[top],
                                     description="Round elimination and cell probe laboratory.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run the property suites")
    p.add_argument("suite", nargs="*", help="info, qinfo, elim, games, cellprobe (default all)")
    p.add_argument("--scale", type=float, default=0.2, help="fraction of the full instance count")
    p.add_argument("--full", action="store_true", help="run at acceptance sizes")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("roundelim", parents=[common], help="eliminate the first round")
    p.add_argument("--protocol")
    p.add_argument("--game")
    p.add_argument("--dist")
    p.add_argument("--n", type=int)
    p.add_argument("--demo", action="store_true", help="use a seeded random lifted instance")
    p.add_argument("--dump", help="with --demo, also write the instance JSON into this folder")
    p.set_defaults(func=cmd_roundelim)

    p = sub.add_parser("pred-trace", parents=[common], help="predecessor bound recursion")
    p.add_argument("--m", type=int)
    p.add_argument("--loglog-m", type=float)
    p.add_argument("--c2", type=float, default=1)
    p.add_argument("--c3", type=float, default=1)
    for name in ("p0", "log2-q0", "a", "log2-b", "t", "c1"):
        p.add_argument(f"--{name}", type=_number)
    p.set_defaults(func=cmd_pred_trace)

    p = sub.add_parser("gt-trace", parents=[common], help="greater-than bound stages")
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--c", type=float, required=True)
    p.set_defaults(func=cmd_gt_trace)

    p = sub.add_parser("bench", parents=[common], help="probe counts over m, n grids")
    p.add_argument("--m", default="16,64,256,1024")
    p.add_argument("--n", default="2,4,8")
    p.add_argument("--kind", nargs="+", default=["sorted-array", "xfast"],
                   choices=["sorted-array", "xfast"])
    p.add_argument("--sets", type=int, default=20)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gt-run", parents=[common], help="Monte Carlo run of the GT protocol")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--rounds", type=int, default=2)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--pairs", type=int, default=100)
    p.set_defaults(func=cmd_gt_run)
    return parser


def _number(text: str):
    """Integers and p/q stay exact; anything else is a float."""
    try:
        return Fraction(text) if "." not in text and "e" not in text.lower() else float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"cclab: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
