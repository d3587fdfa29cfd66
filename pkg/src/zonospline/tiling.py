"""Tiles, facets, fine zonotopal tilings, adjacency graphs and structural verifiers."""

from __future__ import annotations

import itertools
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .exact import (
    GeometryError,
    HeightFunction,
    PointConfig,
    det,
    det_plus,
    lifted_det_sign,
    point_in_simplex,
    sign,
)


@dataclass(frozen=True, order=True)
class Tile:
    """Parallelepiped ``Π_{I,B}``: shift set ``I`` and affine basis ``B``.

    Both index tuples are stored sorted; ``flip`` records whether the sorted
    basis has a negative orientation, so that :meth:`ordered_basis` gives the
    row order with det⁺(B) > 0.
    """

    I: tuple[int, ...]
    B: tuple[int, ...]
    flip: bool = field(default=False, compare=False)

    @classmethod
    def make(cls, config: PointConfig, I: Iterable[int], B: Iterable[int]) -> "Tile":
        I = tuple(sorted(I))
        B = tuple(sorted(B))
        if set(I) & set(B):
            raise GeometryError(f"shift set {I} and basis {B} intersect")
        o = config.int_orient(B)
        if o == 0:
            raise GeometryError(f"{B} is not an affine basis")
        return cls(I, B, o < 0)

    @property
    def order(self) -> int:
        return len(self.I)

    @property
    def key(self) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
        return (len(self.I), self.I, self.B)

    @property
    def knots(self) -> tuple[int, ...]:
        return tuple(sorted(self.I + self.B))

    def ordered_basis(self) -> tuple[int, ...]:
        if self.flip:
            return (self.B[1], self.B[0]) + self.B[2:]
        return self.B

    def __str__(self) -> str:
        return f"({{{','.join(map(str, self.I))}}},{{{','.join(map(str, self.B))}}})"


@dataclass(frozen=True)
class Facet:
    """Facet ``Π_{J,C}`` with its owner tiles (one for boundary facets, two when shared)."""

    J: tuple[int, ...]
    C: tuple[int, ...]
    owners: tuple[Tile, ...] = ()

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return (self.J, self.C)


def facets_of(tile: Tile) -> list[Facet]:
    """The 2(d+1) facets of a tile: for each b, ``(I, B-b)`` and ``(I+b, B-b)``."""
    out = []
    for b in tile.B:
        C = tuple(c for c in tile.B if c != b)
        out.append(Facet(tile.I, C, (tile,)))
        out.append(Facet(tuple(sorted(tile.I + (b,))), C, (tile,)))
    return out


def shared_facet(t: Tile, u: Tile) -> Facet | None:
    """The facet shared by two tiles, decided combinatorially; None if not adjacent."""
    if t == u:
        return None
    common = set(t.B) & set(u.B)
    if len(common) != len(t.B) - 1:
        return None
    (b,) = set(t.B) - common
    (bp,) = set(u.B) - common
    I, Ip = set(t.I), set(u.I)
    if not (I == Ip or I == Ip | {bp} and bp not in Ip
            or Ip == I | {b} and b not in I
            or (I | {b}) == (Ip | {bp}) and b not in I and bp not in Ip):
        return None
    return Facet(tuple(sorted(I | Ip)), tuple(sorted(common)), tuple(sorted((t, u))))


class ZonotopalTiling:
    """A (possibly partial) fine zonotopal tiling over a ground set of point indices.

    ``max_order`` is the highest tile order that was built; a tiling with
    ``max_order == len(ground) - d - 1`` is complete.
    """

    def __init__(self, config: PointConfig, tiles: Iterable[Tile],
                 heights: HeightFunction | None = None, max_order: int | None = None,
                 ground: Iterable[int] | None = None):
        self.config = config
        self.heights = heights
        self.ground = tuple(sorted(ground)) if ground is not None else tuple(range(config.n))
        self.tiles: tuple[Tile, ...] = tuple(sorted(set(tiles), key=lambda t: t.key))
        full = len(self.ground) - config.dim - 1
        self.max_order = full if max_order is None else max_order
        self.by_order: dict[int, tuple[Tile, ...]] = {}
        for t in self.tiles:
            self.by_order.setdefault(t.order, ())
            self.by_order[t.order] += (t,)
        self.ids = {t: i for i, t in enumerate(self.tiles)}
        by_key = {}
        for t in self.tiles:
            by_key[(t.I, t.B)] = t
        self._by_key = by_key

    def __len__(self) -> int:
        return len(self.tiles)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ZonotopalTiling):
            return NotImplemented
        return self.config == other.config and self.canonical_keys() == other.canonical_keys()

    def __repr__(self) -> str:
        counts = {k: len(v) for k, v in sorted(self.by_order.items())}
        return f"ZonotopalTiling(n={len(self.ground)}, d={self.config.dim}, orders={counts})"

    @property
    def full_order(self) -> int:
        return len(self.ground) - self.config.dim - 1

    @property
    def complete(self) -> bool:
        return self.max_order >= self.full_order

    def order(self, k: int) -> tuple[Tile, ...]:
        return self.by_order.get(k, ())

    def canonical_keys(self) -> tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]:
        return tuple((t.I, t.B) for t in self.tiles)

    def find(self, I: Iterable[int], B: Iterable[int]) -> Tile | None:
        return self._by_key.get((tuple(sorted(I)), tuple(sorted(B))))

    @cached_property
    def facet_table(self) -> dict[tuple[tuple[int, ...], tuple[int, ...]], Facet]:
        owners: dict = defaultdict(list)
        for t in self.tiles:
            for f in facets_of(t):
                owners[f.key].append(t)
        return {key: Facet(key[0], key[1], tuple(sorted(ts))) for key, ts in owners.items()}

    def tile_facets(self, tile: Tile) -> list[Facet]:
        return [self.facet_table[f.key] for f in facets_of(tile)]


@dataclass
class AdjacencyGraph:
    """Undirected tile adjacency: one edge per internal (two-owner) facet."""

    tiling: ZonotopalTiling
    edges: list[tuple[Tile, Tile, Facet]]
    neighbors: dict[Tile, list[tuple[Tile, Facet]]]

    def edge_ids(self) -> list[tuple[int, int]]:
        ids = self.tiling.ids
        return sorted((ids[a], ids[b]) for a, b, _ in self.edges)

    def is_connected(self) -> bool:
        tiles = self.tiling.tiles
        if not tiles:
            return True
        seen = {tiles[0]}
        stack = [tiles[0]]
        while stack:
            t = stack.pop()
            for u, _ in self.neighbors[t]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(tiles)


def build_adjacency(tiling: ZonotopalTiling) -> AdjacencyGraph:
    edges = []
    neighbors: dict[Tile, list] = {t: [] for t in tiling.tiles}
    for f in tiling.facet_table.values():
        if len(f.owners) == 2:
            a, b = f.owners
            edges.append((a, b, f))
            neighbors[a].append((b, f))
            neighbors[b].append((a, f))
    edges.sort(key=lambda e: (tiling.ids[e[0]], tiling.ids[e[1]]))
    for t in neighbors:
        neighbors[t].sort(key=lambda e: tiling.ids[e[0]])
    return AdjacencyGraph(tiling, edges, neighbors)


def induced_tiling(tiling: ZonotopalTiling, Q: Iterable[int]) -> ZonotopalTiling:
    """Tiling induced on the ground set minus ``Q``: keep B∩Q=∅, shift I by I∖Q."""
    Q = set(Q)
    tiles = [Tile(tuple(i for i in t.I if i not in Q), t.B, t.flip)
             for t in tiling.tiles if not Q.intersection(t.B)]
    ground = [i for i in tiling.ground if i not in Q]
    max_order = tiling.max_order if not tiling.complete else None
    return ZonotopalTiling(tiling.config, tiles, tiling.heights, max_order, ground)


def _orient_sign(config: PointConfig, C: Sequence[int], row) -> int:
    rows = [config.lifted_row(c) for c in C]
    rows.append(row)
    return sign(det(rows))


@dataclass(frozen=True)
class Shared:
    other: Tile
    separated: bool


@dataclass(frozen=True)
class Boundary:
    """Halfspace certificate: ``orientation * det((a_c,1)_C, (y,1)) >= 0`` is the positive side."""

    b: int
    orientation: int
    valid: bool


def classify_facet(tiling: ZonotopalTiling, f: Facet, owner: Tile | None = None):
    """Shared (with separation flag) or Boundary (with a checked halfspace certificate)."""
    config = tiling.config
    full = tiling.facet_table.get(f.key, f)
    owner = owner or full.owners[0]
    if config.affine_rank(full.C) != config.dim:
        raise AssertionError(f"degenerate facet {full.key} in a fine tiling")
    (b,) = set(owner.B) - set(full.C)
    sb = _orient_sign(config, full.C, config.lifted_row(b))
    if len(full.owners) == 2:
        other = full.owners[1] if full.owners[0] == owner else full.owners[0]
        (bp,) = set(other.B) - set(full.C)
        sbp = _orient_sign(config, full.C, config.lifted_row(bp))
        separated = sb * sbp < 0
        if separated != (len(owner.I) == len(other.I)):
            raise AssertionError(f"facet {full.key}: separation disagrees with orders")
        return Shared(other, separated)
    # Positive side is where a_b lies if b ∈ J, the other side otherwise.
    orientation = sb if b in full.J else -sb
    inside = set(owner.I) | set(owner.B)
    valid = True
    for i in tiling.ground:
        if i in full.C or i == b:
            continue
        s = orientation * _orient_sign(config, full.C, config.lifted_row(i))
        if i in owner.I and s < 0 or i not in inside and s > 0:
            valid = False
            break
    return Boundary(b, orientation, valid)


# ---------------------------------------------------------------- verification


@dataclass
class TilingReport:
    tile_count: int
    expected_count: int
    order0_volume: Fraction
    hull_volume: Fraction
    failures: list[str] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def lines(self) -> list[str]:
        out = [f"tiles: {self.tile_count} (expected {self.expected_count})",
               f"order-0 volume: {self.order0_volume} (hull {self.hull_volume})"]
        out += [f"{name}: {'PASS' if ok else 'FAIL'}" for name, ok in self.checks.items()]
        out += [f"  failure: {msg}" for msg in self.failures]
        return out


def count_affine_bases(config: PointConfig, ground: Sequence[int] | None = None) -> int:
    ground = set(range(config.n)) if ground is None else set(ground)
    return sum(1 for b in config.bases if ground.issuperset(b))


def simplex_volume(config: PointConfig, B: Sequence[int]) -> Fraction:
    return abs(det([config.lifted_row(b) for b in B])) / math.factorial(config.dim)


def placing_triangulation(config: PointConfig, ground: Sequence[int] | None = None
                          ) -> list[tuple[int, ...]]:
    """Lexicographic placing triangulation of the ground points (exact).

    Points are inserted in lexicographic order; each new point is coned to
    every boundary facet it sees. Used as an independent hull-volume oracle.
    """
    ground = list(range(config.n)) if ground is None else list(ground)
    order = []
    seen = set()
    for i in sorted(ground, key=lambda i: (config.points[i], i)):
        if config.points[i] not in seen:
            seen.add(config.points[i])
            order.append(i)
    d = config.dim
    start = [order[0]]
    rest = []
    for i in order[1:]:
        if len(start) < d + 1 and config.affine_rank(start + [i]) == len(start) + 1:
            start.append(i)
        else:
            rest.append(i)
    if len(start) < d + 1:
        return []
    simplices = [tuple(start)]
    # Re-insert skipped points in lexicographic order after the seed simplex.
    rest.sort(key=lambda i: (config.points[i], i))
    for p in rest:
        facet_count: dict[tuple[int, ...], list] = defaultdict(list)
        for s in simplices:
            for v in s:
                f = tuple(sorted(c for c in s if c != v))
                facet_count[f].append(v)
        new = []
        for f, opp in facet_count.items():
            if len(opp) != 1:
                continue
            so = _orient_sign(config, f, config.lifted_row(opp[0]))
            sp = _orient_sign(config, f, config.lifted_row(p))
            if so * sp < 0:
                new.append(f + (p,))
        simplices.extend(new)
    return simplices


def hull_volume(config: PointConfig, ground: Sequence[int] | None = None) -> Fraction:
    return sum((simplex_volume(config, s) for s in placing_triangulation(config, ground)),
               Fraction(0))


def sample_box_point(config: PointConfig, rng: random.Random, idx: Sequence[int] | None = None,
                     den: int = 2**20) -> tuple[Fraction, ...]:
    idx = range(config.n) if idx is None else idx
    pts = [config.points[i] for i in idx]
    out = []
    for c in range(config.dim):
        lo = min(p[c] for p in pts)
        hi = max(p[c] for p in pts)
        out.append(lo + (hi - lo) * Fraction(rng.randrange(1, den), den))
    return tuple(out)


def sample_mixture_point(config: PointConfig, rng: random.Random, idx: Sequence[int] | None = None,
                         den: int = 2**20) -> tuple[Fraction, ...]:
    """Random convex combination biased toward the centroid (deep points)."""
    idx = list(range(config.n)) if idx is None else list(idx)
    w = [Fraction(den + rng.randrange(0, den), den) for _ in idx]
    total = sum(w)
    return tuple(sum(wi * config.points[i][c] for wi, i in zip(w, idx)) / total
                 for c in range(config.dim))


def is_generic_point(config: PointConfig, x, ground: Sequence[int] | None = None) -> bool:
    """True when x avoids every hyperplane spanned by d affinely independent points."""
    ground = range(config.n) if ground is None else ground
    xrow = tuple(x) + (Fraction(1),)
    for C in itertools.combinations(ground, config.dim):
        if config.affine_rank(C) == config.dim and _orient_sign(config, C, xrow) == 0:
            return False
    return True


def cover_count(tiling: ZonotopalTiling, k: int, x) -> int:
    return sum(1 for t in tiling.order(k) if point_in_simplex(tiling.config, t.ordered_basis(), x))


def _lifted_audit(tiling: ZonotopalTiling) -> list[str]:
    config, h = tiling.config, tiling.heights
    bad = []
    for t in tiling.tiles:
        ob = t.ordered_basis()
        I = tuple(i for i in tiling.ground
                  if i not in t.B and lifted_det_sign(config, h, ob, i) > 0)
        if I != t.I:
            bad.append(f"tile {t}: lifted signs give shift set {I}")
    return bad


def verify_tiling(tiling: ZonotopalTiling, samples: int = 100, seed: int = 0) -> TilingReport:
    """Structural checks: tile count, order-0 triangulation, facet ownership, cover counts.

    Partial tilings (built up to ``max_order``) are checked on the part that is
    determined by the tiles present: the count is compared with the lifted-sign
    count when heights are known, and only facets with |J| <= max_order are
    required to be closed.
    """
    from .construction import chk_membership  # local: construction imports this module

    config = tiling.config
    d = config.dim
    ground = tiling.ground
    failures: list[str] = []
    checks: dict[str, bool] = {}
    rng = random.Random(seed)

    if tiling.complete:
        expected = count_affine_bases(config, ground)
    elif tiling.heights is not None:
        expected = 0
        for B in config.bases:
            if not set(ground).issuperset(B):
                continue
            ob, _ = det_plus(config, B)
            pos = sum(1 for i in ground if i not in B and
                      lifted_det_sign(config, tiling.heights, ob, i) > 0)
            expected += pos <= tiling.max_order
    else:
        expected = len(tiling)
    checks["tile count"] = len(tiling) == expected
    if not checks["tile count"]:
        failures.append(f"tile count {len(tiling)} != {expected}")

    keys = [t.B for t in tiling.tiles]
    checks["unique bases"] = len(keys) == len(set(keys))
    if not checks["unique bases"]:
        failures.append("some basis appears in more than one tile")

    for t in tiling.tiles:
        if set(t.I) & set(t.B) or config.int_orient(t.B) == 0 or not set(ground).issuperset(t.I + t.B):
            failures.append(f"malformed tile {t}")

    if tiling.heights is not None:
        bad = _lifted_audit(tiling)
        checks["lifted-sign audit"] = not bad
        failures.extend(bad)

    vol0 = sum((simplex_volume(config, t.B) for t in tiling.order(0)), Fraction(0))
    hvol = hull_volume(config, ground)
    checks["order-0 volume"] = vol0 == hvol
    if vol0 != hvol:
        failures.append(f"order-0 volume {vol0} != hull volume {hvol}")

    facet_ok = True
    for f in tiling.facet_table.values():
        if len(f.owners) > 2:
            facet_ok = False
            failures.append(f"facet {f.key} has {len(f.owners)} owners")
        elif len(f.owners) == 1 and len(f.J) <= tiling.max_order:
            cls = classify_facet(tiling, f)
            if not cls.valid:
                facet_ok = False
                failures.append(f"facet {f.key} of {f.owners[0]} is unmatched and not on the boundary")
    checks["facets"] = facet_ok

    cover_ok = True
    for k in range(0, min(tiling.max_order, tiling.full_order) + 1):
        if samples <= 0:
            break
        want = math.comb(k + d, d)
        got_points = 0
        for _ in range(samples * 20):
            if got_points >= samples:
                break
            x = sample_mixture_point(config, rng, ground) if rng.random() < 0.5 \
                else sample_box_point(config, rng, ground)
            if not is_generic_point(config, x, ground):
                continue
            if not chk_membership(config, k, x, ground):
                continue
            got_points += 1
            c = cover_count(tiling, k, x)
            if c != want:
                cover_ok = False
                failures.append(f"order {k}: point {tuple(map(str, x))} covered {c} times, expected {want}")
                break
    checks["cover counts"] = cover_ok
    return TilingReport(len(tiling), expected, vol0, hvol, failures, checks)
