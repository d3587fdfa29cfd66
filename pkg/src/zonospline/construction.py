"""Regular fine zonotopal tilings from weighted Delaunay triangulations."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .exact import (
    HeightFunction,
    NonGenericHeightError,
    PointConfig,
    det_plus,
    in_hull,
    lifted_det_sign,
    point_in_simplex,
    to_scalar,
)
from .tiling import Tile, ZonotopalTiling

log = logging.getLogger(__name__)


class LiftedSigns:
    """Memoized lifted-determinant signs for one (configuration, heights) pair.

    The sign for a basis and an extra point does not depend on which other
    points are active, so every link region of a build shares one table.
    """

    def __init__(self, config: PointConfig, h: HeightFunction):
        self.config = config
        self.h = h
        self._ordered: dict[tuple[int, ...], tuple[int, ...]] = {}
        self._signs: dict[tuple[tuple[int, ...], int], int] = {}

    def ordered(self, B: tuple[int, ...]) -> tuple[int, ...]:
        ob = self._ordered.get(B)
        if ob is None:
            ob, _ = det_plus(self.config, B)
            self._ordered[B] = ob
        return ob

    def sign(self, B: tuple[int, ...], i: int) -> int:
        key = (B, i)
        s = self._signs.get(key)
        if s is None:
            s = lifted_det_sign(self.config, self.h, self.ordered(B), i)
            if s == 0:
                raise NonGenericHeightError(
                    f"zero lifted determinant for basis {B} and point {i}: heights are not generic",
                    tuple(sorted(B + (i,))))
            self._signs[key] = s
        return s


def weighted_delaunay(config: PointConfig, active: Iterable[int], h: HeightFunction,
                      signs: LiftedSigns | None = None) -> list[tuple[int, ...]]:
    """Weighted Delaunay triangulation of the active points, by exhaustive predicate filtering.

    Returns positively ordered bases B ⊆ active whose lifted determinant with
    every other active point is negative. A degenerate active set (not
    spanning R^d) yields an empty list.
    """
    signs = signs or LiftedSigns(config, h)
    active = sorted(set(active))
    if len(active) < config.dim + 1 or config.affine_rank(active) < config.dim + 1:
        log.debug("active set %s does not span R^%d; empty triangulation", active, config.dim)
        return []
    out = []
    for B in itertools.combinations(active, config.dim + 1):
        if config.int_orient(B) == 0:
            continue
        if all(signs.sign(B, i) < 0 for i in active if i not in B):
            out.append(signs.ordered(B))
    return out


def brute_force_regular_tiling(config: PointConfig, h: HeightFunction) -> ZonotopalTiling:
    """The regular tiling P(h): every affine basis B gets I = {i : lifted sign +1}."""
    signs = LiftedSigns(config, h)
    tiles = []
    for B in config.bases:
        I = tuple(i for i in range(config.n) if i not in B and signs.sign(B, i) > 0)
        tiles.append(Tile.make(config, I, B))
    return ZonotopalTiling(config, tiles, h)


@dataclass(frozen=True)
class LinkRegion:
    Q: tuple[int, ...]
    simplices: tuple[tuple[int, ...], ...]
    source: tuple[tuple[int, ...], ...]

    def __bool__(self) -> bool:
        return bool(self.simplices)


@dataclass
class ConstructionState:
    order: int = 0
    frontier: list[tuple[int, ...]] = field(default_factory=lambda: [()])
    tiles: dict[int, list[Tile]] = field(default_factory=dict)


def link_region(config: PointConfig, h: HeightFunction, state: ConstructionState | None,
                Q: Iterable[int], signs: LiftedSigns | None = None) -> LinkRegion:
    """Simplices of the link region of Q: Delaunay on the complement, filtered by Q's lifted signs."""
    Q = tuple(sorted(set(Q)))
    if state is not None and len(Q) != state.order:
        raise ValueError(f"|Q|={len(Q)} does not match the current order {state.order}")
    signs = signs or LiftedSigns(config, h)
    qs = set(Q)
    source = weighted_delaunay(config, [i for i in range(config.n) if i not in qs], h, signs)
    kept = tuple(ob for ob in source
                 if all(signs.sign(tuple(sorted(ob)), q) > 0 for q in Q))
    return LinkRegion(Q, kept, tuple(source))


def incremental_build(config: PointConfig, h: HeightFunction, k_max: int | None = None
                      ) -> ZonotopalTiling:
    """Build orders 0..k_max by triangulating link regions order by order."""
    full = config.n - config.dim - 1
    k_max = full if k_max is None else k_max
    if not 0 <= k_max <= full:
        raise ValueError(f"k_max must be in [0, {full}], got {k_max}")
    signs = LiftedSigns(config, h)
    state = ConstructionState()
    while state.order <= k_max and state.frontier:
        emitted = []
        survivors = []
        for I in state.frontier:
            region = link_region(config, h, state, I, signs)
            if not region:
                continue
            survivors.append(I)
            emitted.extend(Tile.make(config, I, ob) for ob in region.simplices)
        state.tiles[state.order] = emitted
        state.frontier = sorted({tuple(sorted(t.I + (b,))) for t in emitted for b in t.B})
        state.order += 1
    tiles = [t for ts in state.tiles.values() for t in ts]
    return ZonotopalTiling(config, tiles, h, k_max)


def chk_membership(config: PointConfig, k: int, x, ground: Sequence[int] | None = None) -> bool:
    """Is x in ch_k, the intersection of the hulls of all (n-k)-point subconfigurations?

    The containing simplices over affine bases are found once; x lies in the
    hull of a full-dimensional subset S iff one of them is inside S.
    """
    ground = list(range(config.n)) if ground is None else sorted(ground)
    xpt = tuple(to_scalar(c) for c in x)
    containing = [frozenset(B) for B in config.bases
                  if set(ground).issuperset(B) and point_in_simplex(config, det_plus(config, B)[0], xpt)]
    for Q in itertools.combinations(ground, k):
        qs = set(Q)
        if any(not (B & qs) for B in containing):
            continue
        rest = [i for i in ground if i not in qs]
        if config.affine_rank(rest) == config.dim + 1:
            return False
        if not in_hull(config, rest, xpt):
            return False
    return True
