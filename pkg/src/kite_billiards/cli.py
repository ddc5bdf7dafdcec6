"""Command-line front end: ``kite-billiards {numtheory,nets,billiard} ...``.

Exit status: 0 on success, 1 for invalid input, 2 when a budget or length
limit stops the run (whatever was computed before the limit is still written).
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import nets
from . import numtheory as nt
from .errors import BoundOverflow, BudgetExceeded, DomainError, InsufficientLength, ModelError
from .tables import flatten, table_to_csv, table_to_json, to_json

EXIT_OK, EXIT_INVALID, EXIT_LIMIT = 0, 1, 2


class UsageError(Exception):
    pass


class LimitReached(Exception):
    """Carries a partial result out of a command before exiting with status 2."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class Output:
    """Either a table or a JSON-able report."""

    columns: tuple | None = None
    rows: list | None = None
    report: dict | None = None

    def render(self, fmt: str) -> str:
        if self.report is not None:
            if fmt == "json":
                return to_json(self.report)
            return table_to_csv(("key", "value"), flatten(self.report))
        if fmt == "json":
            return table_to_json(self.columns, self.rows)
        return table_to_csv(self.columns, self.rows)


def _positive_int(s: str) -> int:
    try:
        v = int(float(s)) if "e" in s.lower() else int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s!r}")
    return v


def _positive_float(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s!r}")
    return v


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master random seed")
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="output format (default: csv for tables, json for reports)")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--budget", type=_positive_int, default=nt.DEFAULT_SCAN_BUDGET,
                   help="maximum lattice candidates per Diophantine scan")


def _angle(args, name: str, default=None):
    """Resolve --NAME-turns / --NAME-rad into turns."""
    t, r = getattr(args, f"{name}_turns"), getattr(args, f"{name}_rad")
    if t is not None and r is not None:
        raise UsageError(f"--{name}-turns and --{name}-rad are mutually exclusive")
    if t is not None:
        return t
    if r is not None:
        return r / (2.0 * math.pi)
    return default


def _angle_flags(p, name, required_hint=""):
    p.add_argument(f"--{name}-turns", type=float, default=None,
                   help=f"{name} in turns{required_hint}")
    p.add_argument(f"--{name}-rad", type=float, default=None, help=f"{name} in radians")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kite-billiards",
                     description="Diophantine minima, relative nets and kite billiard beams.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("numtheory", help="N_single/N_pair tables, convergents, bounds")
    _common(p)
    _angle_flags(p, "alpha")
    _angle_flags(p, "beta")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--bounds", action="store_true", help="log-space L, R, M for (p, q, eps)")
    mode.add_argument("--convergents", action="store_true", help="continued-fraction convergents of alpha")
    mode.add_argument("--theorem1", action="store_true", help="rational-approximation inequality check")
    p.add_argument("--k-max", type=_positive_int, default=None)
    p.add_argument("--p", type=_positive_int, default=None)
    p.add_argument("--q", type=_positive_int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--n", type=_positive_int, default=None)
    p.add_argument("--depth", type=_positive_int, default=10)

    p = sub.add_parser("nets", help="net-function estimates and the commensurate construction")
    _common(p)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--estimate-F", dest="estimate_F", action="store_true")
    mode.add_argument("--lemma2", action="store_true")
    _angle_flags(p, "alpha", " (default sqrt(2)-1)")
    _angle_flags(p, "beta", " (default sqrt(3)-1)")
    _angle_flags(p, "gamma")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--min-width", type=float, default=nets.DEFAULT_MIN_WIDTH)
    p.add_argument("--samples", type=_positive_int, default=1000)
    p.add_argument("--max-len", type=_positive_int, default=1000)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--p", type=_positive_int, default=None)
    p.add_argument("--q", type=_positive_int, default=None)
    p.add_argument("--walk-seed", type=int, default=0)
    p.add_argument("--walk-len", type=_positive_int, default=100_000,
                   help="number of walk steps")
    p.add_argument("--walk-model", choices=("uniform", "ballistic"), default="uniform",
                   help="uniform: i.i.d. steps; ballistic: long monotone runs (run-length encoded)")

    p = sub.add_parser("billiard", help="unfolding, beams and splitting experiments")
    _common(p)
    p.add_argument("--triangle", required=True, help="two triangle angles 'a,b'")
    p.add_argument("--units", choices=("radians", "turns"), default="radians",
                   help="unit of --triangle angles")
    p.add_argument("--reflecting-side", type=int, default=2)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--kite", action="store_true", help="dump the kite")
    mode.add_argument("--unfold", action="store_true")
    mode.add_argument("--split-experiment", action="store_true")
    mode.add_argument("--theorem2", action="store_true")
    mode.add_argument("--estimate-C", dest="estimate_C", action="store_true")
    p.add_argument("--dir-turns", type=float, default=None)
    p.add_argument("--steps", type=_positive_int, default=1000)
    p.add_argument("--start-side", type=int, default=None)
    p.add_argument("--start-param", type=float, default=0.5)
    p.add_argument("--eps", type=_float_list, default=None)
    p.add_argument("--dirs", type=_positive_int, default=100)
    p.add_argument("--max-T", type=_positive_float, default=1e4)
    p.add_argument("--C", type=_positive_float, default=None)
    p.add_argument("--samples", type=_positive_int, default=2000)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--F-model", choices=("constant", "theory"), default="constant")
    p.add_argument("--F-value", type=_positive_float, default=1.0)
    p.add_argument("--p", type=_positive_int, default=1)
    p.add_argument("--q", type=_positive_int, default=1)
    return parser


# subcommands


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise UsageError(f"missing required flag --{n.replace('_', '-')}")


def cmd_numtheory(args) -> Output:
    if args.bounds:
        _need(args, "p", "q", "eps")
        return Output(report=nt.M_of_eps(args.p, args.q, args.eps).to_dict())
    alpha = _angle(args, "alpha")
    if alpha is None:
        raise UsageError("missing required flag --alpha-turns or --alpha-rad")
    if args.convergents:
        cs = nt.convergents(alpha, args.depth)
        return Output(("index", "numerator", "denominator"),
                      [(i, a, b) for i, (a, b) in enumerate(cs)])
    beta = _angle(args, "beta")
    if args.theorem1:
        if beta is None:
            raise UsageError("missing required flag --beta-turns or --beta-rad")
        _need(args, "p", "q", "n")
        c = nt.theorem1_inequality_check(alpha, beta, args.p, args.q, args.n, budget=args.budget)
        return Output(report={"status": c.status, "log10_lhs": c.log10_lhs,
                              "log10_rhs": c.log10_rhs, "log10_L": c.log10_L,
                              "reason": c.reason})
    _need(args, "k_max")
    if beta is None:
        size = lambda k: k  # noqa: E731
        profile = lambda k: nt.N_single_profile(alpha, k, args.budget)  # noqa: E731
        cols = ("k", "N_single")
    else:
        size = nt.pair_scan_size
        profile = lambda k: nt.N_pair_profile(alpha, beta, k, args.budget)  # noqa: E731
        cols = ("k", "N_pair")
    k = args.k_max
    if size(k) > args.budget:
        k_ok = 0
        while size(k_ok + 1) <= args.budget:
            k_ok += 1
        rows = [(i + 1, float(v)) for i, v in enumerate(profile(k_ok))] if k_ok else []
        raise LimitReached(f"scan to k={args.k_max} needs {size(args.k_max)} candidates, "
                           f"budget {args.budget}; stopped at k={k_ok}", Output(cols, rows))
    return Output(cols, [(i + 1, float(v)) for i, v in enumerate(profile(k))])


def cmd_nets(args) -> Output:
    eps = args.eps
    if not (math.isfinite(eps) and 0.0 < eps <= 0.5):
        raise UsageError(f"--eps must lie in (0, 1/2], got {eps!r}")
    if args.estimate_F:
        alpha = _angle(args, "alpha", math.sqrt(2) - 1)
        beta = _angle(args, "beta", math.sqrt(3) - 1)
        est = nets.estimate_net_function(alpha, beta, eps, args.min_width, args.samples,
                                         args.max_len, args.seed, workers=args.workers)
        if args.format == "csv":
            rows = [(k, v) for k, v in sorted(est.histogram.items())]
            rows.append(("censored", est.censored))
            return Output(("len", "count"), rows)
        return Output(report=est.to_dict())
    _need(args, "p", "q")
    gamma = _angle(args, "gamma")
    if gamma is None:
        raise UsageError("missing required flag --gamma-turns or --gamma-rad")
    rng = np.random.default_rng(args.walk_seed)
    g = float(gamma)
    if args.walk_model == "uniform":
        if args.walk_len > nets.MATERIALIZE_LIMIT:
            raise UsageError("--walk-len above 1e7 needs --walk-model ballistic")
        codes = rng.integers(0, 4, size=args.walk_len)
        runs = [(int(c), 1) for c in codes]
    else:
        runs = nets.ballistic_runs(args.walk_len, rng)
    seq = nets.ConnectedSequence.commensurate(0.0, g, args.p, args.q, runs)
    try:
        res = nets.commensurate_net_construction(args.p, args.q, g, seq, eps)
    except InsufficientLength as exc:
        raise LimitReached(str(exc), Output(report={
            "status": "insufficient-length", "first_uncovered": exc.first_uncovered,
            "walk_len": args.walk_len, "message": str(exc)})) from exc
    w = res.witness
    return Output(report={
        "status": "verified" if w.verify() else "unverified",
        "witness": w.to_dict(), "n0": res.n0,
        "drift": {"num": res.drift.numerator, "den": res.drift.denominator},
        "net_size": res.net_size, "color": res.color, "direction": res.direction,
        "depth": res.depth, "values": list(w.values)})


def _triangle(args) -> geo.Kite:
    try:
        a, b = (float(x) for x in args.triangle.split(","))
    except ValueError:
        raise UsageError(f"--triangle expects two numbers 'a,b', got {args.triangle!r}")
    if args.units == "turns":
        a, b = a * 2 * math.pi, b * 2 * math.pi
    return geo.kite_from_triangle(geo.Triangle(a, b), args.reflecting_side)


def cmd_billiard(args) -> Output:
    kite = _triangle(args)
    if args.kite:
        return Output(report=kite.to_dict())
    if args.estimate_C:
        return Output(report={"C": geo.estimate_C(kite, args.samples, args.seed)})
    if args.unfold:
        _need(args, "dir_turns")
        side = args.start_side
        if side is None:
            dv = (math.cos(2 * math.pi * args.dir_turns), math.sin(2 * math.pi * args.dir_turns))
            inward = [i for i in range(4) if float(np.dot(kite.inward_normal(i), dv)) > 1e-9]
            if not inward:
                raise UsageError("--dir-turns points inward through no side")
            side = inward[0]
        if side not in range(4):
            raise UsageError("--start-side must be 0..3")
        start = kite.point_on_side(side, args.start_param)
        r = geo.unfold_ray(kite, start, args.dir_turns, args.steps, start_side=side)
        rows = []
        for i, f in enumerate(r.frames):
            x, y = r.crossings[i]
            rows.append((i, float(x), float(y), f.entry_edge,
                         float(r.lengths[i]) if i < len(r.lengths) else None,
                         f.theta.value, f.parity))
        return Output(("step", "x", "y", "side", "length", "theta_turns", "parity"), rows)
    if args.split_experiment:
        _need(args, "eps")
        rows = geo.splitting_experiment(kite, args.eps, args.dirs, args.max_T, args.seed,
                                        C=args.C, workers=args.workers)
        return Output(geo.CSV_HEADER, [r.csv_fields() for r in rows])
    _need(args, "eps")
    if len(args.eps) != 1:
        raise UsageError("--theorem2 takes a single --eps")
    C = args.C if args.C is not None else geo.estimate_C(kite, args.samples, args.seed)
    if args.F_model == "constant":
        F = geo.net_function_model("constant", value=args.F_value)
    else:
        F = geo.net_function_model("theory", p=args.p, q=args.q)
    rep = geo.theorem2_bound(kite.alpha_turns(), kite.beta_turns(), args.eps[0], F, C,
                             budget=args.budget)
    d = rep.to_dict()
    if rep.budget_exceeded:
        raise LimitReached("N_ab(Q) scan exceeds the budget", Output(report=d))
    return Output(report=d)


COMMANDS = {"numtheory": cmd_numtheory, "nets": cmd_nets, "billiard": cmd_billiard}
DEFAULT_FORMAT = {"numtheory": "csv", "nets": "json", "billiard": "csv"}


def _emit(out: Output, args) -> None:
    fmt = args.format or ("json" if out.report is not None else DEFAULT_FORMAT[args.command])
    text = out.render(fmt)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        return
    try:
        sys.stdout.write(text)
        sys.stdout.flush()
    except BrokenPipeError:
        # reader closed early (e.g. piped into head); not an error
        sys.stdout = None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: numtheory, nets or billiard")
    except UsageError as exc:
        print(f"kite-billiards: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        _emit(COMMANDS[args.command](args), args)
        return EXIT_OK
    except (UsageError, DomainError) as exc:
        print(f"kite-billiards: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except LimitReached as exc:
        if exc.partial is not None:
            _emit(exc.partial, args)
        print(f"kite-billiards: limit reached: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (BudgetExceeded, InsufficientLength, BoundOverflow, ModelError) as exc:
        print(f"kite-billiards: limit reached: {exc}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
