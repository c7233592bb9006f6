"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 internal or solver error.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings

from . import __version__
from .evaluation import MODELS, make_cells, records_to_csv, run_eval
from .flow import SolverError, degree_list_extension, extension_levels
from .graph import ParseError, ThresholdWarning, check_threshold, generate, read_edge_list, serialize_edge_list
from .histogram import degree_histogram_extension
from .release import release_degree_distribution
from .verify import SUITES, load_defaults, run_suite

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {v}")
    return v


def nonnegative_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {v}")
    return v


def positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def unit_interval(text):
    v = positive_float(text)
    if v >= 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return v


def csv_of(kind):
    def parse(text):
        return [kind(x) for x in text.split(",") if x.strip()]

    return parse


def format_value(x) -> str:
    """Shortest text for an exact rational level: ``2``, ``0.5``, ``0.333...``."""
    if getattr(x, "denominator", None) == 1:
        return str(x.numerator)
    f = float(x)
    return str(int(f)) if f.is_integer() else repr(f)


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _load_graph(path):
    try:
        return read_edge_list(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}")
    except ParseError as exc:
        raise UsageError(f"{path}: {exc}")


def cmd_gen(args):
    params = {}
    if args.model == "erdos-renyi":
        params["p"] = _need(args, "p")
    elif args.model in ("chung-lu", "chung-lu-powerlaw"):
        params["alpha"] = _need(args, "alpha")
        params["avg_degree"] = _need(args, "avg_degree")
    elif args.model == "regular":
        params["d"] = _need(args, "d")
    elif args.model == "random-bounded":
        params["D"] = _need(args, "degree_bound")
    try:
        g = generate(args.model, args.n, args.seed, **params)
    except ValueError as exc:
        raise UsageError(str(exc))
    _write(serialize_edge_list(g), args.output)
    return EXIT_OK


def _need(args, name):
    v = getattr(args, name)
    if v is None:
        raise UsageError(f"--{name.replace('_', '-')} is required for model {args.model}")
    return v


def cmd_extend(args):
    g = _load_graph(args.graph)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ThresholdWarning)
        check_threshold(g, args.degree_bound)
    if args.histogram:
        vals = degree_histogram_extension(g, args.degree_bound, args.tol, method=args.method)
        text = " ".join(format_value(v) for v in vals)
    elif args.method == "exact":
        levels = sorted(extension_levels(g, args.degree_bound), reverse=True)
        text = " ".join(format_value(v) for v in levels)
    else:
        vals = degree_list_extension(g, args.degree_bound, args.tol, method=args.method)
        text = " ".join(format_value(v) for v in vals)
    _write(text + "\n", args.output)
    return EXIT_OK


def cmd_release(args):
    g = _load_graph(args.graph)
    if g.node_count == 0:
        raise UsageError("cannot release statistics of a graph with no nodes")
    rel = release_degree_distribution(
        g,
        args.eps,
        args.beta,
        seed=args.seed,
        tol=args.tol,
        selection_share=args.selection_share,
        clip_negative=args.clip_negative,
    )
    _write(rel.to_json(), args.output)
    return EXIT_OK


def cmd_eval(args):
    try:
        cells = make_cells(
            args.models, args.n_grid, args.eps_grid, args.reps, args.seed,
            alpha_grid=args.alpha_grid, avg_degree=args.avg_degree, beta=args.beta,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    rows = run_eval(cells, workers=args.workers, timing=not args.no_timing)
    _write(records_to_csv(rows), args.output)
    return EXIT_OK


def cmd_verify(args):
    defaults = load_defaults(args.defaults)
    names = SUITES if args.suite == "all" else (args.suite,)
    ok = True
    for name in names:
        res = run_suite(name, defaults)
        print(res.summary())
        for msg in res.failures[:10]:
            print(f"  {msg}")
        ok &= res.passed
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nodedp", description="Node-private degree distribution tools.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic graph as an edge list")
    g.add_argument("--model", required=True, choices=["erdos-renyi", "chung-lu", "chung-lu-powerlaw", "star", "regular", "random-bounded"])
    g.add_argument("--n", required=True, type=nonnegative_int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--p", type=float)
    g.add_argument("--alpha", type=positive_float)
    g.add_argument("--avg-degree", type=float)
    g.add_argument("--d", type=nonnegative_int, help="degree of a regular graph")
    g.add_argument("--degree-bound", "-D", type=nonnegative_int, help="cap for random-bounded")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("extend", help="print the extended degree list of a graph")
    e.add_argument("graph")
    e.add_argument("--degree-bound", "-D", required=True, type=positive_int)
    e.add_argument("--tol", type=positive_float)
    e.add_argument("--method", choices=["exact", "frank-wolfe"], default="exact")
    e.add_argument("--histogram", action="store_true", help="print the extended degree histogram instead")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_extend)

    r = sub.add_parser("release", help="node-private degree distribution as JSON")
    r.add_argument("graph")
    r.add_argument("--eps", required=True, type=positive_float)
    r.add_argument("--beta", type=unit_interval, default=0.1)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--tol", type=positive_float)
    r.add_argument("--selection-share", type=unit_interval, default=0.5, help="fraction of eps spent choosing D")
    r.add_argument("--clip-negative", action="store_true")
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_release)

    v = sub.add_parser("eval", help="sweep releases over synthetic graphs and write CSV")
    v.add_argument("--models", type=csv_of(str), default=["chung-lu"], help=f"comma list from {', '.join(MODELS)}")
    v.add_argument("--n-grid", type=csv_of(positive_int), required=True)
    v.add_argument("--eps-grid", type=csv_of(positive_float), default=[1.0])
    v.add_argument("--alpha-grid", type=csv_of(positive_float), default=[2.0])
    v.add_argument("--avg-degree", type=positive_float, default=5.0)
    v.add_argument("--beta", type=unit_interval, default=0.1)
    v.add_argument("--reps", type=positive_int, default=10)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--workers", type=positive_int, default=1)
    v.add_argument("--no-timing", action="store_true", help="write runtime_ms as 0 so output is byte-stable")
    v.add_argument("-o", "--output")
    v.set_defaults(func=cmd_eval)

    c = sub.add_parser("verify", help="run self-check suites")
    c.add_argument("--suite", required=True, choices=[*SUITES, "all"])
    c.add_argument("--defaults", help="JSON file overriding the built-in sizes and limits")
    c.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog} {args.command}: error: {exc}\n")
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
