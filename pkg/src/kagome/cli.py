"""Command-line interface.

One subcommand per library capability.  Every randomized command
requires --seed and is bit-reproducible given it.  Exit codes: 0
success, 1 domain error (reported as one JSON object on stderr), 2
usage error.  All JSON output carries a schema_version field.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import deque
from fractions import Fraction

from kagome.cftp import DEFAULT_BUDGET, benchmark_scaling, cftp_runs, sample_seed
from kagome.chain import GENERAL, RESTRAINED, ChainVariant, weighted
from kagome.errors import KagomeError
from kagome.exact import (
    TilingGraph,
    diameter,
    enumerate_tilings,
    exact_mixing_time,
    graph_to_dot,
    graph_to_json,
    height_extremes,
    max_distinct_heights,
    path_coupling_ledger,
)
from kagome.lattice import Region, make_region
from kagome.minimal import contour_peel_minimal
from kagome.render import RenderStyle, render, render_prototiles
from kagome.serialize import SCHEMA_VERSION, dumps, load_tiling, tiling_to_json
from kagome.verify import run_verification

DIAMETER_NODE_LIMIT = 20_000  # all-pairs BFS is too slow past this


def _parse_region(text: str) -> Region:
    try:
        family, _, num = text.partition(":")
        return make_region(family, int(num))
    except (ValueError, KagomeError) as exc:
        raise argparse.ArgumentTypeError(
            f"bad region {text!r} (want e.g. lozenge:3): {exc}") from exc


def _parse_variant(text: str) -> ChainVariant:
    if text == "general":
        return GENERAL
    if text == "restrained":
        return RESTRAINED
    kind, _, lam = text.partition(":")
    if kind == "weighted" and lam:
        try:
            return weighted(Fraction(lam))
        except (ValueError, ZeroDivisionError, KagomeError) as exc:
            raise argparse.ArgumentTypeError(
                f"bad weight {lam!r}: {exc}") from exc
    raise argparse.ArgumentTypeError(
        f"bad variant {text!r} (general, restrained, or weighted:1/3)")


def _parse_sizes(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            sizes = list(range(int(lo), int(hi) + 1))
        else:
            sizes = [int(p) for p in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"bad sizes {text!r} (want 5..12 or 8,12,16): {exc}") from exc
    if not sizes or any(s <= 0 for s in sizes) or sorted(set(sizes)) != sizes:
        raise argparse.ArgumentTypeError(
            f"sizes must be positive and strictly increasing: {text!r}")
    return sizes


def _variant_doc(variant: ChainVariant) -> dict:
    doc = {"kind": variant.kind}
    if variant.kind == "weighted":
        doc["weight"] = str(variant.lam)
    return doc


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _is_connected(graph: TilingGraph) -> bool:
    if len(graph.nodes) <= 1:
        return True
    adj = graph.adjacency
    seen = {0}
    queue = deque([0])
    while queue:
        for j in adj[queue.popleft()]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == len(graph.nodes)


# -- subcommands ---------------------------------------------------------------


def _cmd_enumerate(args) -> int:
    flips = "restrained" if args.variant.kind == "restrained" else "all"
    graph = enumerate_tilings(args.region, flips=flips, cap=args.cap)
    connected = _is_connected(graph)
    if args.skip_diameter or not connected \
            or len(graph.nodes) > DIAMETER_NODE_LIMIT:
        diam = None
    else:
        diam = diameter(graph)
    lo, hi = height_extremes(graph)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "region": {"family": args.region.family, "n": args.region.n,
                   "tiles": len(args.region.hexes),
                   "inner_vertices": len(args.region.inner_vertices)},
        "flips": flips,
        "nodes": len(graph.nodes),
        "edges": len(graph.edges),
        "connected": connected,
        "diameter": diam,
        "height_extremes": {"min_nodes": lo, "max_nodes": hi},
        "max_distinct_heights": max_distinct_heights(graph),
    }
    if args.dot:
        _write(graph_to_dot(graph), args.dot)
    if args.graph_json:
        _write(dumps(graph_to_json(graph)) + "\n", args.graph_json)
    print(dumps(doc))
    return 0


def _cmd_sample(args) -> int:
    out = sys.stdout if args.out in (None, "-") else open(
        args.out, "w", encoding="utf-8")
    try:
        runs = cftp_runs(args.region, args.variant, args.seed,
                         args.samples, budget=args.budget)
        for i, run in enumerate(runs):
            doc = tiling_to_json(run.result)
            doc["sample_index"] = i
            doc["sample_seed"] = sample_seed(args.seed, i)
            doc["total_steps"] = run.total_steps
            out.write(dumps(doc) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_mix(args) -> int:
    flips = "restrained" if args.variant.kind == "restrained" else "all"
    graph = enumerate_tilings(args.region, flips=flips, cap=args.cap)
    t_mix = exact_mixing_time(graph, args.variant, eps=args.eps)
    print(dumps({
        "schema_version": SCHEMA_VERSION,
        "region": {"family": args.region.family, "n": args.region.n},
        "variant": _variant_doc(args.variant),
        "eps": str(args.eps),
        "nodes": len(graph.nodes),
        "mixing_time": t_mix,
    }))
    return 0


def _cmd_ledger(args) -> int:
    flips = "restrained" if args.variant.kind == "restrained" else "all"
    graph = enumerate_tilings(args.region, flips=flips, cap=args.cap)
    result = path_coupling_ledger(graph, args.variant)
    worst = result.worst_entries()
    print(dumps({
        "schema_version": SCHEMA_VERSION,
        "region": {"family": args.region.family, "n": args.region.n},
        "variant": _variant_doc(args.variant),
        "flips": flips,
        "n_inner_vertices": result.n_inner,
        "pairs": len(result.entries),
        "worst_delta": str(result.worst_delta),
        "worst_pairs": [
            {"pair": list(e.pair), "vertex": [list(e.vertex.h1), list(e.vertex.h2)],
             "expected_delta": str(e.expected_delta)}
            for e in worst[:20]
        ],
        "worst_pair_count": len(worst),
    }))
    return 0


def _cmd_bench(args) -> int:
    result = benchmark_scaling(args.sizes, args.trials, args.variant,
                               family=args.family, rng_seed=args.seed,
                               budget=args.budget)
    exponent = (None if result.exponent is None
                else round(result.exponent, 6))
    if args.csv:
        _write(result.csv(), args.csv)
        print(dumps({
            "schema_version": SCHEMA_VERSION,
            "family": args.family,
            "variant": _variant_doc(args.variant),
            "sizes": args.sizes,
            "trials": args.trials,
            "fitted_exponent": exponent,
            "over_budget_trials": len(result.excluded()),
            "table": [
                {"n": n, "tiles": tiles, "inner": inner, "mean_steps": mean,
                 "stderr": err, "trials_used": k}
                for n, tiles, inner, mean, err, k in result.table()
            ],
        }))
    else:
        sys.stdout.write(result.csv())
        print(f"# fitted_exponent={exponent}")
    return 0


def _cmd_minimal(args) -> int:
    tiling = contour_peel_minimal(args.region)
    doc = tiling_to_json(tiling)
    doc["construction"] = "contour_peel"
    _write(dumps(doc) + "\n", args.out)
    return 0


def _cmd_render(args) -> int:
    style = RenderStyle(show_heights=args.heights, show_flips=args.flips,
                        scale=args.scale)
    if args.prototiles:
        _write(render_prototiles(style), args.out)
        return 0
    if not getattr(args, "infile", None):
        raise KagomeError("render needs --in or --prototiles")
    tiling = load_tiling(args.infile)
    _write(render(tiling, style), args.out)
    return 0


def _cmd_verify(args) -> int:
    report = run_verification(args.seed, fast=args.fast)
    for line in report.lines():
        print(line)
    if not report.all_passed:
        raise KagomeError("verification found violations")
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kagome",
        description="Kagome-lattice tiling chains: enumeration, exact "
                    "analysis, perfect sampling, rendering.")
    sub = parser.add_subparsers(dest="command", required=True)

    def region_arg(p, required=True):
        p.add_argument("--region", type=_parse_region, required=required,
                       metavar="FAMILY:N",
                       help="lozenge:N, square:N or nonflat:N")

    def variant_arg(p):
        p.add_argument("--variant", type=_parse_variant, default=GENERAL,
                       metavar="V",
                       help="general, restrained or weighted:LAMBDA "
                            "(default general)")

    def cap_arg(p):
        p.add_argument("--cap", type=int, default=None,
                       help="enumeration node cap (default from "
                            "KAGOME_NODE_CAP or 200000)")

    p = sub.add_parser("enumerate", help="build the flip graph, print stats")
    region_arg(p)
    variant_arg(p)
    cap_arg(p)
    p.add_argument("--dot", metavar="PATH", help="also write Graphviz DOT")
    p.add_argument("--graph-json", metavar="PATH",
                   help="also write the full graph as JSON")
    p.add_argument("--skip-diameter", action="store_true")
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("sample", help="perfect samples as tiling JSON lines")
    region_arg(p)
    variant_arg(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="max chain steps per sample")
    p.add_argument("--out", metavar="PATH", help="file instead of stdout")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("mix", help="exact mixing time on a small region")
    region_arg(p)
    variant_arg(p)
    cap_arg(p)
    p.add_argument("--eps", type=Fraction, default=Fraction(1, 4),
                   help="total-variation threshold (default 1/4)")
    p.set_defaults(func=_cmd_mix)

    p = sub.add_parser("ledger",
                       help="exact one-step coupling ledger, worst pair")
    region_arg(p)
    variant_arg(p)
    cap_arg(p)
    p.set_defaults(func=_cmd_ledger)

    p = sub.add_parser("bench", help="coupling-time scaling study")
    p.add_argument("--sizes", type=_parse_sizes, required=True,
                   metavar="SPEC", help="5..12 or 8,12,16,23")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    variant_arg(p)
    p.add_argument("--family", choices=["lozenge", "square", "nonflat"],
                   default="square")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="max steps per trial; over-budget trials get "
                        "steps=-1 and are excluded from the fit")
    p.add_argument("--csv", metavar="PATH",
                   help="write CSV here and print a JSON summary instead")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("minimal",
                       help="contour-peeled minimal tiling of a lozenge")
    region_arg(p)
    p.add_argument("--out", metavar="PATH", help="file instead of stdout")
    p.set_defaults(func=_cmd_minimal)

    p = sub.add_parser("render", help="tiling JSON to SVG")
    p.add_argument("--in", dest="infile", metavar="PATH",
                   help="tiling JSON produced by sample/minimal")
    p.add_argument("--out", metavar="PATH", help="file instead of stdout")
    p.add_argument("--scale", type=float, default=24.0,
                   help="pixels per lattice unit (default 24)")
    p.add_argument("--heights", action="store_true",
                   help="overlay the height at every vertex")
    p.add_argument("--flips", action="store_true",
                   help="mark flippable vertices")
    p.add_argument("--prototiles", action="store_true",
                   help="render the labeled tile-shape reference sheet")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--fast", action="store_true",
                   help="small operation counts, for smoke tests")
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits itself; fold into our codes
        return int(exc.code or 0)
    try:
        return args.func(args)
    except KagomeError as exc:
        sys.stderr.write(dumps({
            "schema_version": SCHEMA_VERSION,
            "error": type(exc).__name__,
            "message": str(exc),
        }) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
