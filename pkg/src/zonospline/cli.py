"""Command-line interface: build, verify, eval, reproduce, export-dot, plot."""

from __future__ import annotations

import argparse
import csv
import itertools
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .construction import brute_force_regular_tiling, chk_membership, incremental_build
from .exact import (
    GeometryError,
    HeightFunction,
    NonGenericHeightError,
    PointConfig,
    find_nongeneric_subset,
    format_scalar,
    random_generic_height,
    to_scalar,
)
from .io import DocumentError, load_heights, load_tiling, read_config_document, tiling_bytes
from .query import (
    NonGenericPointError,
    OrientationCycleError,
    build_eval_graph,
    eval_graph_run,
    incoming_link,
    is_supported,
    orient_graph,
    supported_tiles,
)
from .splines import Polynomial, SplineEvaluator, reproduce
from .tiling import (
    Tile,
    ZonotopalTiling,
    build_adjacency,
    is_generic_point,
    sample_box_point,
    sample_mixture_point,
    verify_tiling,
)

EXIT_FAIL = 1
EXIT_USAGE = 2


class CommandError(Exception):
    """Expected failure reported to the user with exit status 2."""


def _fmt(v: float) -> str:
    return format(v, ".17g")


def _point_arg(config: PointConfig, values: Sequence[str]) -> tuple[Fraction, ...]:
    if values is None or len(values) != config.dim:
        raise CommandError(f"--point needs {config.dim} coordinate(s)")
    try:
        return tuple(to_scalar(v) for v in values)
    except GeometryError as exc:
        raise CommandError(str(exc)) from exc


def _require_order(tiling: ZonotopalTiling, k: int) -> None:
    if k < 0 or k > tiling.max_order:
        raise CommandError(f"degree {k} is not covered: the tiling is built up to order {tiling.max_order}")


def _require_generic(config: PointConfig, x) -> None:
    if not is_generic_point(config, x):
        raise NonGenericPointError(
            f"x={tuple(map(format_scalar, x))} lies on a hyperplane spanned by configuration points")


def parse_polynomial(text: str, dim: int) -> Polynomial:
    """Parse text such as ``"x0^2 - 3*x0*x1 + 1/2"`` in variables x0..x{dim-1}."""
    import sympy
    from sympy.parsing.sympy_parser import (
        convert_xor,
        implicit_multiplication_application,
        parse_expr,
        standard_transformations,
    )

    syms = sympy.symbols(f"x0:{dim}")
    names = {str(s): s for s in syms}
    try:
        expr = parse_expr(text, local_dict=names, transformations=standard_transformations
                          + (convert_xor, implicit_multiplication_application))
        extra = expr.free_symbols - set(syms)
        if extra:
            raise CommandError(f"unknown variable(s) {sorted(map(str, extra))}; use x0..x{dim - 1}")
        poly = sympy.Poly(expr, *syms)
    except (sympy.SympifyError, sympy.PolynomialError, SyntaxError, TypeError) as exc:
        raise CommandError(f"cannot parse polynomial {text!r}: {exc}") from exc
    return Polynomial(dim, {e: float(c) for e, c in poly.terms()})


# ---------------------------------------------------------------- commands


def cmd_build(args) -> int:
    cd = read_config_document(args.config)
    config = cd.config
    if args.heights is not None:
        h = load_heights(args.heights, config)
        source = "explicit"
    elif args.seed is None and cd.heights is not None:
        h = cd.heights
        source = "explicit"
    else:
        seed = args.seed if args.seed is not None else (cd.seed or 0)
        h = random_generic_height(config, seed=seed)
        source = f"seed {seed}"
    if source == "explicit":
        bad = find_nongeneric_subset(config, h)
        if bad is not None:
            raise NonGenericHeightError(
                f"heights are not generic: lifted points {list(bad)} are affinely dependent "
                "off a vertical plane", bad)
        h = HeightFunction(h.values, generic=True)
    full = config.n - config.dim - 1
    k = full if args.max_degree is None else args.max_degree
    if not 0 <= k <= full:
        raise CommandError(f"--max-degree must be in [0, {full}]")
    if args.mode == "brute":
        whole = brute_force_regular_tiling(config, h)
        tiling = ZonotopalTiling(config, [t for t in whole.tiles if t.order <= k], h, k)
    else:
        tiling = incremental_build(config, h, k)
    data = tiling_bytes(tiling)
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    out = sys.stderr if not args.output else sys.stdout
    print(f"heights: {source}", file=out)
    for order in range(k + 1):
        print(f"order {order}: {len(tiling.order(order))} tiles", file=out)
    print(f"total: {len(tiling)} tiles", file=out)
    return 0


def cmd_verify(args) -> int:
    tiling = load_tiling(args.tiling)
    report = verify_tiling(tiling, samples=args.samples, seed=args.seed)
    for line in report.lines():
        print(line)
    print("OK" if report.ok else "FAILED")
    return 0 if report.ok else EXIT_FAIL


def eval_table(tiling: ZonotopalTiling, k: int, x, mode: str) -> list[tuple[Tile, float]]:
    """Values of the order-k basis splines whose knot hull contains x."""
    config = tiling.config
    _require_order(tiling, k)
    if mode == "direct":
        ev = SplineEvaluator(config, x)
        rows = [(t, ev.value(t.knots)) for t in tiling.order(k) if is_supported(config, t, x)]
    else:
        if tiling.heights is None:
            raise CommandError("graph mode needs the tiling's height function")
        _require_generic(config, x)
        found = supported_tiles(tiling, build_adjacency(tiling), x, k)
        values = eval_graph_run(build_eval_graph(config, tiling.heights, tiling, k), config, x)
        rows = [(t, values[(t.I, t.B)]) for t in found if t.order == k]
    return sorted(rows, key=lambda r: tiling.ids[r[0]])


def cmd_eval(args) -> int:
    tiling = load_tiling(args.tiling)
    x = _point_arg(tiling.config, args.point)
    print("tile\tvalue")
    for t, v in eval_table(tiling, args.degree, x, args.mode):
        print(f"{t}\t{_fmt(v)}")
    return 0


def sample_chk_points(config: PointConfig, k: int, m: int, rng: random.Random,
                      attempts_per_point: int = 25) -> list[tuple[Fraction, ...]]:
    """Up to m random generic points of ch_k (fewer, possibly none, if it is empty or thin).

    Gives up early when the first ``4 * attempts_per_point`` draws all miss.
    """
    out = []
    for attempt in range(m * attempts_per_point):
        if len(out) >= m or not out and attempt >= 4 * attempts_per_point:
            break
        x = sample_mixture_point(config, rng) if rng.random() < 0.7 else sample_box_point(config, rng)
        if is_generic_point(config, x) and chk_membership(config, k, x):
            out.append(x)
    return out


def cmd_reproduce(args) -> int:
    tiling = load_tiling(args.tiling)
    config = tiling.config
    k = args.degree
    _require_order(tiling, k)
    poly = parse_polynomial(args.poly, config.dim)
    if poly.degree > k:
        raise CommandError(f"polynomial degree {poly.degree} exceeds k={k}")
    pts = sample_chk_points(config, k, args.samples, random.Random(args.seed))
    if not pts:
        print(f"ch_{k}(A) is empty or too thin to sample; nothing to check")
        return 0
    err = max(abs(reproduce(config, tiling, k, poly, x) - poly(x)) for x in pts)
    print(f"samples: {len(pts)}")
    print(f"max abs error: {err:.3e}")
    return 0


def _dot_id(label: str) -> str:
    return '"' + label.replace('"', r"\"") + '"'


def export_dot(tiling: ZonotopalTiling, orient=None, eval_k: int | None = None) -> str:
    """DOT text of the adjacency graph, optionally oriented, or of an evaluation graph."""
    config = tiling.config
    lines = []
    if eval_k is not None:
        _require_order(tiling, eval_k)
        if tiling.heights is None:
            raise CommandError("the evaluation graph needs the tiling's height function")
        eg = build_eval_graph(config, tiling.heights, tiling, eval_k)
        lines.append("digraph evalgraph {")
        keys = sorted(eg.nodes, key=lambda key: (len(key[0]), key))
        for key in keys:
            node = eg.nodes[key]
            shape = "box" if node.basis else "ellipse"
            lines.append(f"  {_dot_id(str(node.tile))} [shape={shape}];")
        if orient is not None:
            _require_generic(config, orient)
            edges = []
            for key in keys:
                node = eg.nodes[key]
                for b in sorted(node.links):
                    ln = incoming_link(eg, node, node.links[b], orient)
                    if ln is not None:
                        edges.append((ln.neighbor, key, ln.rule))
        else:
            edges = eg.edges()
        for src, dst, rule in edges:
            s, t = str(eg.nodes[src].tile), str(eg.nodes[dst].tile)
            lines.append(f"  {_dot_id(s)} -> {_dot_id(t)} [label={rule}];")
        lines.append("}")
        return "\n".join(lines) + "\n"

    graph = build_adjacency(tiling)
    directed = orient is not None
    lines.append("digraph tiling {" if directed else "graph tiling {")
    for t in tiling.tiles:
        lines.append(f"  {_dot_id(str(t))} [order={t.order}];")
    if directed:
        _require_generic(config, orient)
        og = orient_graph(tiling, graph, orient)
        pairs = sorted(og.edges(), key=lambda e: (tiling.ids[e[0]], tiling.ids[e[1]]))
        for a, b in pairs:
            lines.append(f"  {_dot_id(str(a))} -> {_dot_id(str(b))};")
    else:
        for i, j in graph.edge_ids():
            lines.append(f"  {_dot_id(str(tiling.tiles[i]))} -- {_dot_id(str(tiling.tiles[j]))};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export_dot(args) -> int:
    tiling = load_tiling(args.tiling)
    orient = _point_arg(tiling.config, args.orient) if args.orient is not None else None
    text = export_dot(tiling, orient, args.eval_graph)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def parse_grid(text: str, dim: int) -> list[list[Fraction]]:
    """``"lo:hi:n"`` per axis, comma separated; n evenly spaced exact values including both ends."""
    parts = [p for p in text.split(",")]
    if len(parts) != dim:
        raise CommandError(f"--grid needs {dim} axis spec(s) 'lo:hi:n', got {text!r}")
    axes = []
    for p in parts:
        try:
            lo, hi, n = p.split(":")
            lo, hi, n = to_scalar(lo), to_scalar(hi), int(n)
        except (ValueError, GeometryError) as exc:
            raise CommandError(f"bad grid axis {p!r}: expected lo:hi:n") from exc
        if n < 0:
            raise CommandError(f"bad grid axis {p!r}: negative count")
        if n == 1:
            axes.append([lo])
        else:
            axes.append([lo + (hi - lo) * Fraction(i, n - 1) for i in range(n)])
    return axes


def plot_rows(tiling: ZonotopalTiling, k: int, grid: str):
    config = tiling.config
    if config.dim not in (1, 2):
        raise CommandError(f"plot supports d in {{1, 2}}, got d={config.dim}")
    _require_order(tiling, k)
    axes = parse_grid(grid, config.dim)
    tiles = tiling.order(k)
    for x in itertools.product(*axes):
        ev = SplineEvaluator(config, x)
        for t in tiles:
            yield [_fmt(float(c)) for c in x] + [str(t), _fmt(ev.value(t.knots))]


def cmd_plot(args) -> int:
    tiling = load_tiling(args.tiling)
    header = [f"x{i}" for i in range(tiling.config.dim)] + ["tile", "value"]
    rows = plot_rows(tiling, args.degree, args.grid)
    out = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if args.output:
            out.close()
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zonospline",
                                description="Simplex-spline spaces from regular fine zonotopal tilings.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a tiling document from a configuration")
    b.add_argument("config")
    hg = b.add_mutually_exclusive_group()
    hg.add_argument("--heights", help="JSON file with one exact height per point")
    hg.add_argument("--seed", type=int, help="seed for random generic heights")
    b.add_argument("--max-degree", type=int, help="highest tile order to build (default: all)")
    b.add_argument("--mode", choices=("incremental", "brute"), default="incremental")
    b.add_argument("-o", "--output", help="output path (default: stdout)")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="run structural checks on a tiling document")
    v.add_argument("tiling")
    v.add_argument("--samples", type=int, default=100, help="sample points per order for cover counts")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("eval", help="values of the degree-k basis splines supported on a point")
    e.add_argument("tiling")
    e.add_argument("--degree", type=int, required=True)
    e.add_argument("--point", nargs="+", required=True)
    e.add_argument("--mode", choices=("direct", "graph"), default="direct")
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("reproduce", help="check polynomial reproduction at random points of ch_k")
    r.add_argument("tiling")
    r.add_argument("--degree", type=int, required=True)
    r.add_argument("--poly", required=True, help='e.g. "x0^2 + 3*x0*x1 - 1/2"')
    r.add_argument("--samples", type=int, default=100)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_reproduce)

    x = sub.add_parser("export-dot", help="write the adjacency or evaluation graph as DOT")
    x.add_argument("tiling")
    x.add_argument("--orient", nargs="+", metavar="X", help="orient edges for this query point")
    x.add_argument("--eval-graph", type=int, metavar="K", help="export the order-K evaluation graph")
    x.add_argument("-o", "--output")
    x.set_defaults(func=cmd_export_dot)

    pl = sub.add_parser("plot", help="evaluate all degree-k splines on a grid, as CSV")
    pl.add_argument("tiling")
    pl.add_argument("--degree", type=int, required=True)
    pl.add_argument("--grid", required=True, help='"lo:hi:n" per axis, comma separated')
    pl.add_argument("-o", "--output")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NonGenericHeightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.subset is not None:
            print(f"failing subset: {list(exc.subset)}", file=sys.stderr)
        return EXIT_USAGE
    except (CommandError, DocumentError, NonGenericPointError, GeometryError,
            OrientationCycleError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
