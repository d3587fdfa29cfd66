"""Point-induced orientation of the adjacency graph, support queries and the evaluation graph."""

from __future__ import annotations

import graphlib
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact import (
    GeometryError,
    HeightFunction,
    PointConfig,
    barycentric_numerators,
    det,
    det_plus,
    in_hull,
    int_det,
    lifted_det_sign,
    perturbed_in_simplex,
    point_in_simplex,
    sign,
    to_scalar,
)
from .tiling import AdjacencyGraph, Tile, ZonotopalTiling, shared_facet

LINEAR_SCAN_LIMIT = 1000


class NonGenericPointError(GeometryError):
    """The query point lies on the hyperplane of an internal facet."""


class OrientationCycleError(RuntimeError):
    """An oriented adjacency or dependency graph contains a cycle."""


def _point(config: PointConfig, x) -> tuple[Fraction, ...]:
    pt = tuple(to_scalar(c) for c in (x if isinstance(x, (tuple, list)) else (x,)))
    if len(pt) != config.dim:
        raise GeometryError(f"point {x!r} does not have dimension {config.dim}")
    return pt


def _facet_sign(config: PointConfig, C: Sequence[int], row) -> int:
    rows = [config.lifted_row(c) for c in C]
    rows.append(tuple(row))
    return sign(det(rows))


def _lifted_pair_sign(config: PointConfig, h: HeightFunction, C: Sequence[int], b: int, bp: int) -> int:
    lift, _ = config._int_lift
    hv, _ = h._int_values
    rows = [list(lift[i][:-1]) + [hv[i], 1] for i in (*C, b, bp)]
    return sign(int_det(rows))


def _split(t: Tile, u: Tile) -> tuple[tuple[int, ...], int, int]:
    common = tuple(sorted(set(t.B) & set(u.B)))
    if len(common) != len(t.B) - 1:
        raise GeometryError(f"tiles {t} and {u} do not share a facet")
    (b,) = set(t.B) - set(common)
    (bp,) = set(u.B) - set(common)
    return common, b, bp


def delwigo_signs(config: PointConfig, h: HeightFunction, t: Tile, u: Tile):
    """(σ_bb', σ_b, σ_b') for two tiles sharing a facet, C in sorted order."""
    C, b, bp = _split(t, u)
    s_b = _facet_sign(config, C, config.lifted_row(b))
    s_bp = _facet_sign(config, C, config.lifted_row(bp))
    return _lifted_pair_sign(config, h, C, b, bp), s_b, s_bp


def edge_direction(config: PointConfig, h: HeightFunction | None, t: Tile, u: Tile, x
                   ) -> tuple[Tile, Tile]:
    """Orient the edge between two adjacent tiles for the query point x.

    With heights, sign<N_C, z - z'> = σ_bb'·σ_b·σ_b' (regular tilings);
    without, the representative tile centers are used directly. Returns
    (source, target).
    """
    C, b, bp = _split(t, u)
    xpt = _point(config, x)
    s_x = _facet_sign(config, C, xpt + (Fraction(1),))
    if s_x == 0:
        raise NonGenericPointError(
            f"x={tuple(map(str, xpt))} lies on the hyperplane of facet C={C} between {t} and {u}")
    if h is not None:
        s_bb, s_b, s_bp = delwigo_signs(config, h, t, u)
        s_diff = -(s_bb * s_b * s_bp)  # sign<N_C, z' - z>
    else:
        s_diff = geometric_center_sign(config, t, u, C)
    return (t, u) if s_x == s_diff else (u, t)


def geometric_center_sign(config: PointConfig, t: Tile, u: Tile, C: Sequence[int]) -> int:
    """sign<N_C, z_u - z_t> with z = Σ_I v_i + ½ Σ_B v_b, N_C from det((a_c,1)_C, ·)."""
    # <N_C, v> is linear in v, so evaluate it on each lifted point and sum.
    def center(tile):
        total = Fraction(0)
        for i in tile.I:
            total += _facet_val(config, C, i)
        for i in tile.B:
            total += _facet_val(config, C, i) / 2
        return total

    return sign(center(u) - center(t))


def _facet_val(config: PointConfig, C: Sequence[int], i: int) -> Fraction:
    rows = [config.lifted_row(c) for c in C]
    rows.append(config.lifted_row(i))
    return det(rows)


@dataclass
class OrientedGraph:
    graph: AdjacencyGraph
    succ: dict[Tile, list[Tile]]
    order: list[Tile]

    def edges(self) -> list[tuple[Tile, Tile]]:
        return [(a, b) for a in self.order for b in self.succ[a]]


def orient_graph(tiling: ZonotopalTiling, graph: AdjacencyGraph, x) -> OrientedGraph:
    """Direct every adjacency edge for x and topologically sort the result."""
    succ: dict[Tile, list[Tile]] = {t: [] for t in tiling.tiles}
    for a, b, _ in graph.edges:
        src, dst = edge_direction(tiling.config, tiling.heights, a, b, x)
        succ[src].append(dst)
    ts = graphlib.TopologicalSorter()
    for t in tiling.tiles:
        ts.add(t)
        for u in succ[t]:
            ts.add(u, t)
    try:
        order = list(ts.static_order())
    except graphlib.CycleError as exc:
        raise OrientationCycleError(f"orientation for x={x!r} has a cycle: {exc.args[1]}") from exc
    ids = tiling.ids
    for t in succ:
        succ[t].sort(key=ids.__getitem__)
    return OrientedGraph(graph, succ, order)


# ---------------------------------------------------------------- point location


class BoundingVolumeTree:
    """Axis-aligned bounding-box tree over simplices (median split on the widest axis)."""

    LEAF = 8

    def __init__(self, config: PointConfig, tiles: Sequence[Tile]):
        self.config = config
        boxes = []
        for t in tiles:
            pts = [config.points[i] for i in t.B]
            lo = tuple(min(p[c] for p in pts) for c in range(config.dim))
            hi = tuple(max(p[c] for p in pts) for c in range(config.dim))
            boxes.append((lo, hi, t))
        self.root = self._build(boxes)

    def _build(self, boxes):
        d = self.config.dim
        lo = tuple(min(b[0][c] for b in boxes) for c in range(d))
        hi = tuple(max(b[1][c] for b in boxes) for c in range(d))
        if len(boxes) <= self.LEAF:
            return (lo, hi, None, None, [b[2] for b in boxes])
        axis = max(range(d), key=lambda c: hi[c] - lo[c])
        boxes = sorted(boxes, key=lambda b: b[0][axis] + b[1][axis])
        mid = len(boxes) // 2
        return (lo, hi, self._build(boxes[:mid]), self._build(boxes[mid:]), None)

    def query(self, x: Sequence[Fraction]) -> list[Tile]:
        out = []
        stack = [self.root]
        while stack:
            lo, hi, left, right, leaf = stack.pop()
            if any(x[c] < lo[c] or x[c] > hi[c] for c in range(len(x))):
                continue
            if leaf is not None:
                out.extend(leaf)
            else:
                stack.extend((left, right))
        return out


def locate_zero(tiling: ZonotopalTiling, x, tree: BoundingVolumeTree | None = None) -> Tile | None:
    """The order-0 tile whose closed simplex contains x (lowest id on ties), or None."""
    config = tiling.config
    xpt = _point(config, x)
    zero = tiling.order(0)
    if tree is None and len(zero) > LINEAR_SCAN_LIMIT:
        tree = BoundingVolumeTree(config, zero)
    candidates = tree.query(xpt) if tree is not None else zero
    hits = [t for t in candidates if point_in_simplex(config, t.ordered_basis(), xpt)]
    if not hits:
        return None
    hits.sort(key=tiling.ids.__getitem__)
    if len(hits) > 1:
        warnings.warn(f"non-generic point {tuple(map(str, xpt))}: on the boundary of "
                      f"{len(hits)} order-0 simplices", RuntimeWarning, stacklevel=2)
    return hits[0]


def is_supported(config: PointConfig, tile: Tile, x) -> bool:
    return in_hull(config, tile.knots, _point(config, x))


def brute_force_support(tiling: ZonotopalTiling, x, k_max: int) -> set[Tile]:
    return {t for t in tiling.tiles if t.order <= k_max and is_supported(tiling.config, t, x)}


def supported_tiles(tiling: ZonotopalTiling, graph: AdjacencyGraph, x, k_max: int) -> set[Tile]:
    """All tiles of order <= k_max whose knot hull contains x, by forward traversal.

    Starts from the located order-0 tile and follows edges oriented away from
    it, expanding only tiles that are themselves supported on x.
    """
    if k_max > tiling.max_order:
        raise ValueError(f"tiling only built to order {tiling.max_order}")
    config = tiling.config
    xpt = _point(config, x)
    root = locate_zero(tiling, xpt)
    if root is None:
        return set()
    found = {root}
    seen = {root}
    queue = deque([root])
    while queue:
        t = queue.popleft()
        for u, _ in graph.neighbors[t]:
            if u in seen or u.order > k_max:
                continue
            src, _ = edge_direction(config, tiling.heights, t, u, xpt)
            if src != t:
                continue
            seen.add(u)
            if is_supported(config, u, xpt):
                found.add(u)
                queue.append(u)
    return found


# ---------------------------------------------------------------- evaluation graph

NodeKey = tuple[tuple[int, ...], tuple[int, ...]]


@dataclass(frozen=True)
class Link:
    """How the sub-spline M(X∖{b}) of a node is obtained from a neighbor tile."""

    b: int
    neighbor: NodeKey
    bp: int
    rule: str  # "copy" or "insertion"


@dataclass
class EvalNode:
    tile: Tile
    basis: bool
    links: dict[int, list[Link]] = field(default_factory=dict)

    @property
    def key(self) -> NodeKey:
        return (self.tile.I, self.tile.B)

    @property
    def order(self) -> int:
        return self.tile.order


@dataclass
class EvalGraph:
    """Basis splines of one order plus the auxiliary splines they need.

    Copy links always point from a spline with fewer knots; insertion links
    join two tiles of the same induced tiling and are directed per query
    point by the adjacency orientation.
    """

    config: PointConfig
    heights: HeightFunction
    order: int
    nodes: dict[NodeKey, EvalNode]

    @property
    def basis_keys(self) -> list[NodeKey]:
        return sorted((k for k, n in self.nodes.items() if n.basis), key=lambda k: (len(k[0]), k))

    @property
    def auxiliary_keys(self) -> list[NodeKey]:
        return sorted((k for k, n in self.nodes.items() if not n.basis), key=lambda k: (len(k[0]), k))

    def edges(self) -> list[tuple[NodeKey, NodeKey, str]]:
        out = []
        for key, node in self.nodes.items():
            for links in node.links.values():
                for ln in links:
                    out.append((ln.neighbor, key, ln.rule))
        return sorted(out, key=lambda e: (len(e[0][0]), e[0], len(e[1][0]), e[1], e[2]))


def induced_neighbors(config: PointConfig, h: HeightFunction, tile: Tile) -> dict[int, list[Link]]:
    """Neighbors of a tile inside the regular tiling induced on its own knots.

    For each b and each b' in I with (B∖b)∪b' an affine basis, the candidate
    tile's shift set is read from lifted signs restricted to the knots, and
    kept only when it shares a facet with ``tile``.
    """
    X = set(tile.I) | set(tile.B)
    out: dict[int, list[Link]] = {}
    I = set(tile.I)
    for b in tile.B:
        C = tuple(c for c in tile.B if c != b)
        links = []
        for bp in tile.I:
            Bp = tuple(sorted(C + (bp,)))
            if config.int_orient(Bp) == 0:
                continue
            ob, _ = det_plus(config, Bp)
            Ip = tuple(sorted(i for i in X if i not in Bp and lifted_det_sign(config, h, ob, i) > 0))
            u = Tile.make(config, Ip, Bp)
            if shared_facet(tile, u) is None:
                continue
            s_bb, s_b, s_bp = delwigo_signs(config, h, tile, u)
            assert (bp in I) == (s_bb * s_b > 0), "lifted signs disagree on b' ∈ I"
            assert (b in Ip) == (s_bb * s_bp < 0), "lifted signs disagree on b ∈ I'"
            if I == set(Ip) | {bp}:
                rule = "copy"
            elif I | {b} == set(Ip) | {bp}:
                rule = "insertion"
            else:
                raise AssertionError(f"unexpected neighbor {u} of maximal tile {tile}")
            links.append(Link(b, (u.I, u.B), bp, rule))
        out[b] = links
    return out


def build_eval_graph(config: PointConfig, h: HeightFunction, tiling: ZonotopalTiling, k: int
                     ) -> EvalGraph:
    """Collect basis splines of order k and, recursively, every auxiliary spline they need."""
    if k > tiling.max_order:
        raise ValueError(f"tiling only built to order {tiling.max_order}")
    nodes: dict[NodeKey, EvalNode] = {}
    queue = deque()
    for t in tiling.order(k):
        nodes[(t.I, t.B)] = EvalNode(t, True)
        queue.append(t)
    while queue:
        t = queue.popleft()
        node = nodes[(t.I, t.B)]
        if t.order == 0:
            continue
        node.links = induced_neighbors(config, h, t)
        for links in node.links.values():
            for ln in links:
                if ln.neighbor not in nodes:
                    u = Tile.make(config, *ln.neighbor)
                    nodes[ln.neighbor] = EvalNode(u, False)
                    queue.append(u)
    return EvalGraph(config, h, k, nodes)


def incoming_link(eg: EvalGraph, node: EvalNode, links: list[Link], xpt) -> Link | None:
    chosen = None
    for ln in links:
        nbr = eg.nodes[ln.neighbor].tile
        src, _ = edge_direction(eg.config, eg.heights, nbr, node.tile, xpt)
        if src == nbr:
            if chosen is not None:
                raise OrientationCycleError(f"two incoming links for b={ln.b} at node {node.tile}")
            chosen = ln
    return chosen


def eval_graph_run(eg: EvalGraph, config: PointConfig, x) -> dict[NodeKey, float]:
    """Evaluate every node at x in an order compatible with the x-oriented dependencies."""
    xpt = _point(config, x)
    d = config.dim

    def in_box(tile):
        pts = [config.points[i] for i in tile.knots]
        return all(min(p[c] for p in pts) <= xpt[c] <= max(p[c] for p in pts) for c in range(d))

    active = {key for key, node in eg.nodes.items() if in_box(node.tile)}
    chosen: dict[NodeKey, dict[int, Link | None]] = {}
    ts = graphlib.TopologicalSorter()
    for key in active:
        node = eg.nodes[key]
        ts.add(key)
        chosen[key] = {}
        for b, links in node.links.items():
            ln = incoming_link(eg, node, links, xpt)
            if ln is not None and ln.neighbor not in active:
                ln = None
            chosen[key][b] = ln
            if ln is not None:
                ts.add(key, ln.neighbor)
    try:
        order = list(ts.static_order())
    except graphlib.CycleError as exc:
        raise OrientationCycleError(f"evaluation graph has a cycle at x={x!r}") from exc

    values: dict[NodeKey, float] = {key: 0.0 for key in eg.nodes}
    subs: dict[NodeKey, dict[int, float]] = {}
    fact = math.factorial(d)
    for key in order:
        tile = eg.nodes[key].tile
        ob = tile.ordered_basis()
        _, dp = det_plus(config, tile.B)
        nums = barycentric_numerators(config, ob, xpt)
        m = tile.order
        if m == 0:
            values[key] = fact / float(dp) if perturbed_in_simplex(config, ob, xpt, nums) else 0.0
            continue
        sub = {}
        for b in tile.B:
            ln = chosen[key].get(b)
            if ln is None:
                sub[b] = 0.0
            elif ln.rule == "copy":
                sub[b] = values[ln.neighbor]
            else:
                nb = eg.nodes[ln.neighbor].tile
                nob = nb.ordered_basis()
                _, ndp = det_plus(config, nb.B)
                nsub = subs.get(ln.neighbor, {})
                rows = [config.lifted_row(i) for i in nob]
                acc = 0.0
                for pos, bb in enumerate(nob):
                    val = nsub.get(bb, 0.0)
                    if val:
                        r = list(rows)
                        r[pos] = config.lifted_row(b)
                        acc += float(det(r) / ndp) * val
                sub[b] = acc
        subs[key] = sub
        total = sum(float(num / dp) * sub[b] for b, num in zip(ob, nums) if num)
        values[key] = (m + d) / m * total
    return values
