import random
from fractions import Fraction

import pytest

from helpers import example_1d, random_regular
from oracles import scaled_bernstein
from zonospline import (
    NonGenericPointError,
    PointConfig,
    brute_force_regular_tiling,
    build_adjacency,
    build_eval_graph,
    edge_direction,
    eval_graph_run,
    eval_spline,
    locate_zero,
    orient_graph,
    random_generic_height,
    supported_tiles,
)
from zonospline.query import BoundingVolumeTree, brute_force_support
from zonospline.tiling import is_generic_point, sample_box_point

F = Fraction


def setup_1d():
    c, h = example_1d()
    t = brute_force_regular_tiling(c, h)
    return c, h, t, build_adjacency(t)


def generic_points(config, rng, m):
    out = []
    while len(out) < m:
        x = sample_box_point(config, rng)
        if is_generic_point(config, x):
            out.append(x)
    return out


class TestEdgeDirection:
    def test_points_away_from_the_side_of_x(self):
        c, h, t, _ = setup_1d()
        a, b = t.find([], [0, 1]), t.find([], [1, 2])
        assert edge_direction(c, h, a, b, ["1/2"]) == (b, a)

    def test_crossing_the_facet_flips(self):
        c, h, t, _ = setup_1d()
        a, b = t.find([], [0, 1]), t.find([], [1, 2])
        assert edge_direction(c, h, a, b, ["3/2"]) == (a, b)

    def test_point_on_facet_hyperplane(self):
        c, h, t, _ = setup_1d()
        with pytest.raises(NonGenericPointError):
            edge_direction(c, h, t.find([], [0, 1]), t.find([], [1, 2]), ["1"])

    def test_sign_identity_agrees_with_geometry(self):
        rng = random.Random(31)
        for _ in range(5):
            c, h = random_regular(rng, 2, 6)
            t = brute_force_regular_tiling(c, h)
            g = build_adjacency(t)
            for x in generic_points(c, rng, 5):
                for a, b, _ in g.edges:
                    assert edge_direction(c, h, a, b, x) == edge_direction(c, None, a, b, x)


class TestOrientGraph:
    def test_three_tiles(self):
        c, h, t, g = setup_1d()
        og = orient_graph(t, g, ["1/2"])
        pos = {tile: i for i, tile in enumerate(og.order)}
        assert len(og.edges()) == 3
        assert all(pos[a] < pos[b] for a, b in og.edges())
        assert og.order[0] == t.find([], [1, 2])

    def test_single_tile(self):
        c = PointConfig.from_coords([[0, 0], [1, 0], [0, 1]])
        t = brute_force_regular_tiling(c, random_generic_height(c))
        assert orient_graph(t, build_adjacency(t), ["1/5", "1/5"]).order == list(t.tiles)

    def test_random_2d_sweep(self):
        rng = random.Random(32)
        c, h = random_regular(rng, 2, 7)
        t = brute_force_regular_tiling(c, h)
        g = build_adjacency(t)
        for x in generic_points(c, rng, 100):
            orient_graph(t, g, x)


class TestLocateZero:
    def test_intervals(self):
        c, h, t, _ = setup_1d()
        assert locate_zero(t, ["1/2"]) == t.find([], [0, 1])
        assert locate_zero(t, ["3/2"]) == t.find([], [1, 2])
        assert locate_zero(t, ["3"]) is None

    def test_tie_warns_and_picks_lowest_id(self):
        c, h, t, _ = setup_1d()
        with pytest.warns(RuntimeWarning):
            assert locate_zero(t, ["1"]) == t.find([], [0, 1])

    def test_tree_agrees_with_scan(self):
        rng = random.Random(33)
        c, h = random_regular(rng, 2, 12)
        t = brute_force_regular_tiling(c, h)
        tree = BoundingVolumeTree(c, t.order(0))
        for x in generic_points(c, rng, 50):
            assert locate_zero(t, x, tree) == locate_zero(t, x)


class TestSupportedTiles:
    def test_example(self):
        c, h, t, g = setup_1d()
        assert supported_tiles(t, g, ["1/2"], 1) == {t.find([], [0, 1]), t.find([1], [0, 2])}

    def test_outside(self):
        c, h, t, g = setup_1d()
        assert supported_tiles(t, g, ["-1/2"], 1) == set()

    def test_order_zero_is_the_located_tile(self):
        c, h, t, g = setup_1d()
        assert supported_tiles(t, g, ["3/2"], 0) == {t.find([], [1, 2])}

    def test_random_against_scan(self):
        rng = random.Random(34)
        for d, n in ((1, 7), (2, 7)):
            c, h = random_regular(rng, d, n, repeat_prob=0.1)
            t = brute_force_regular_tiling(c, h)
            g = build_adjacency(t)
            for x in generic_points(c, rng, 20):
                for k in range(t.full_order + 1):
                    assert supported_tiles(t, g, x, k) == brute_force_support(t, x, k)


class TestEvalGraph:
    def test_order_zero_has_no_auxiliaries(self):
        c, h, t, _ = setup_1d()
        eg = build_eval_graph(c, h, t, 0)
        assert eg.auxiliary_keys == [] and len(eg.basis_keys) == 2

    def test_example_structure(self):
        c, h, t, _ = setup_1d()
        eg = build_eval_graph(c, h, t, 1)
        assert eg.basis_keys == [((1,), (0, 2))]
        assert eg.auxiliary_keys == [((), (0, 1)), ((), (1, 2))]
        assert {(src, dst) for src, dst, _ in eg.edges()} == {
            (((), (0, 1)), ((1,), (0, 2))), (((), (1, 2)), ((1,), (0, 2)))}

    def test_example_values(self):
        c, h, t, _ = setup_1d()
        vals = eval_graph_run(build_eval_graph(c, h, t, 1), c, ["1/2"])
        assert vals[((1,), (0, 2))] == pytest.approx(0.5)
        assert vals[((), (0, 1))] == pytest.approx(1.0)

    def test_outside_is_zero(self):
        c, h, t, _ = setup_1d()
        vals = eval_graph_run(build_eval_graph(c, h, t, 1), c, ["7/2"])
        assert set(vals.values()) == {0.0}

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_two_sites_give_bernstein_triangle(self, k):
        c = PointConfig.from_coords([[0]] * (k + 1) + [[1]] * (k + 1))
        h = random_generic_height(c, seed=k)
        t = brute_force_regular_tiling(c, h)
        eg = build_eval_graph(c, h, t, k)
        rng = random.Random(k)
        levels = set()
        for _ in range(10):
            x = rng.random() * 0.98 + 0.01
            vals = eval_graph_run(eg, c, [x])
            for key, v in vals.items():
                knots = sorted(key[0] + key[1])
                m = len(knots) - 2
                j = sum(1 for i in knots if c.points[i][0] == 1) - 1
                levels.add((m, j))
                assert v == pytest.approx(scaled_bernstein(m, j, x), rel=1e-9, abs=1e-12)
        assert {(k, j) for j in range(k + 1)} <= levels

    def test_agrees_with_direct_evaluation(self):
        rng = random.Random(35)
        for d, n in ((1, 6), (2, 6), (2, 7)):
            c, h = random_regular(rng, d, n, repeat_prob=0.1)
            t = brute_force_regular_tiling(c, h)
            for k in range(1, t.full_order + 1):
                eg = build_eval_graph(c, h, t, k)
                for x in generic_points(c, rng, 10):
                    vals = eval_graph_run(eg, c, x)
                    for key in eg.nodes:
                        want = eval_spline(c, key[0] + key[1], x)
                        assert vals[key] == pytest.approx(want, rel=1e-9, abs=1e-12)
