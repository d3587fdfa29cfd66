"""Property-based checks of the invariants on hypothesis-generated configurations."""

import math
import random
from fractions import Fraction

from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from oracles import affine_bases

from zonospline import (
    PointConfig,
    Polynomial,
    brute_force_regular_tiling,
    build_adjacency,
    eval_spline,
    incremental_build,
    random_generic_height,
    reproduce,
    verify_tiling,
)
from zonospline.exact import GeometryError
from zonospline.io import TilingDocument, parse_tiling, tiling_bytes
from zonospline.tiling import cover_count, is_generic_point

SETTINGS = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def configs(draw, dims=(1, 2), max_n=7):
    d = draw(st.sampled_from(dims))
    n = draw(st.integers(d + 1, max_n))
    coord = st.integers(0, 9)
    pts = draw(st.lists(st.tuples(*[coord] * d), min_size=n, max_size=n))
    try:
        config = PointConfig.from_coords(pts, d)
    except GeometryError:
        assume(False)
    return config, draw(st.integers(0, 2**16))


class TestTilingInvariants:
    @SETTINGS
    @given(configs())
    def test_tile_count_and_construction(self, case):
        config, seed = case
        h = random_generic_height(config, seed=seed)
        t = incremental_build(config, h)
        assert t == brute_force_regular_tiling(config, h)
        assert len(t) == len(affine_bases(config.points))

    @SETTINGS
    @given(configs())
    def test_verifier_accepts_and_graph_is_connected(self, case):
        config, seed = case
        t = incremental_build(config, random_generic_height(config, seed=seed))
        assert verify_tiling(t, samples=5, seed=seed).ok
        assert build_adjacency(t).is_connected()

    @SETTINGS
    @given(configs(), st.integers(0, 4))
    def test_document_round_trip(self, case, k):
        config, seed = case
        full = config.n - config.dim - 1
        t = incremental_build(config, random_generic_height(config, seed=seed), min(k, full))
        data = tiling_bytes(t)
        back = parse_tiling(TilingDocument(t).to_json())
        assert tiling_bytes(back) == data and back == t


class TestSplineInvariants:
    @SETTINGS
    @given(configs(), st.data())
    def test_order_zero_partition_of_unity_on_closed_hull(self, case, data):
        config, seed = case
        t = incremental_build(config, random_generic_height(config, seed=seed), 0)
        # Convex combinations of the points, including vertices and edge points.
        w = data.draw(st.lists(st.integers(0, 3), min_size=config.n, max_size=config.n))
        assume(sum(w) > 0)
        x = tuple(sum(Fraction(wi) * p[c] for wi, p in zip(w, config.points)) / sum(w)
                  for c in range(config.dim))
        total = reproduce(config, t, 0, Polynomial(config.dim, {(0,) * config.dim: 1.0}), x)
        assert math.isclose(total, 1.0, abs_tol=1e-12)

    @SETTINGS
    @given(configs(), st.data())
    def test_splines_are_nonnegative_and_cover_counts_hold(self, case, data):
        config, seed = case
        t = brute_force_regular_tiling(config, random_generic_height(config, seed=seed))
        rng = random.Random(data.draw(st.integers(0, 1000)))
        x = tuple(Fraction(rng.randrange(0, 9000), 1000) + Fraction(1, 7919) for _ in range(config.dim))
        assume(is_generic_point(config, x))
        for tile in t.tiles:
            assert eval_spline(config, tile.knots, x) >= -1e-12
        assert cover_count(t, 0, x) <= 1
