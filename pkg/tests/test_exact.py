import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import lifted_sign, perm_det
from helpers import random_config
from zonospline import (
    GeometryError,
    HeightFunction,
    NonGenericHeightError,
    PointConfig,
    det_plus,
    det_sub,
    is_affine_basis,
    lifted_det_sign,
    random_generic_height,
    validate_generic_height,
)
from zonospline.exact import (
    det,
    find_nongeneric_subset,
    format_scalar,
    in_hull,
    perturbed_in_simplex,
    to_scalar,
)

F = Fraction


def cfg(*pts):
    return PointConfig.from_coords([list(p) for p in pts])


class TestScalars:
    def test_decimal_and_rational_strings_are_exact(self):
        assert to_scalar("0.1") == F(1, 10)
        assert to_scalar("1/3") == F(1, 3)
        assert to_scalar((2, 6)) == F(1, 3)

    def test_float_converts_losslessly(self):
        assert to_scalar(0.5) == F(1, 2)

    @pytest.mark.parametrize("bad", ["abc", float("nan"), True, (1, 0), None])
    def test_rejects_bad_numbers(self, bad):
        with pytest.raises(GeometryError):
            to_scalar(bad)

    def test_format_round_trip(self):
        for v in (F(3), F(-1, 2), F(7, 3)):
            assert to_scalar(format_scalar(v)) == v
        assert format_scalar(F(-1, 2)) == "-1/2"


class TestConfig:
    def test_too_few_points(self):
        with pytest.raises(GeometryError):
            cfg((0, 0), (1, 0))

    def test_not_spanning(self):
        with pytest.raises(GeometryError):
            cfg((0, 0), (1, 1), (2, 2))

    def test_dimension_mismatch(self):
        with pytest.raises(GeometryError):
            PointConfig.from_coords([[0, 0], [1], [0, 1]])


class TestDeterminant:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=7),
                                    min_size=n, max_size=n), min_size=n, max_size=n)))
    def test_matches_permutation_expansion(self, rows):
        assert det(rows) == perm_det(rows)


class TestDetPlus:
    def test_unit_interval(self):
        ordered, value = det_plus(cfg((0,), (1,)), (0, 1))
        assert value == 1 and sorted(ordered) == [0, 1]

    def test_repeated_point_degenerate(self):
        assert det_plus(cfg((0,), (0,), (1,)), (0, 1))[1] == 0

    def test_unit_triangle(self):
        assert det_plus(cfg((0, 0), (1, 0), (0, 1)), (0, 1, 2))[1] == 1

    def test_negative_orientation_is_reordered(self):
        c = cfg((0, 0), (0, 1), (1, 0))
        ordered, value = det_plus(c, (0, 1, 2))
        assert value == 1 and ordered == (1, 0, 2)


class TestDetSub:
    def test_replace_by_point(self):
        c = cfg((0,), (1,))
        ordered, _ = det_plus(c, (0, 1))
        assert det_sub(c, ordered, 0, [F(1, 2)]) == F(1, 2)

    def test_identity_replacement(self):
        c = cfg((0, 0), (3, 1), (1, 2), (5, 5))
        ordered, dp = det_plus(c, (0, 1, 2))
        for j in ordered:
            assert det_sub(c, ordered, j, j) == dp

    def test_outside_gives_negative(self):
        c = cfg((0,), (1,))
        ordered, _ = det_plus(c, (0, 1))
        assert det_sub(c, ordered, 1, [-1]) < 0

    def test_index_not_in_basis(self):
        c = cfg((0,), (1,), (2,))
        with pytest.raises(GeometryError):
            det_sub(c, (0, 1), 2, [0])


class TestLiftedSign:
    def setup_method(self):
        self.c = cfg((0,), (1,), (2,))
        self.h = HeightFunction((F(0), F(1), F(4)))

    def test_point_beyond_basis_lies_below(self):
        ordered, _ = det_plus(self.c, (0, 1))
        assert lifted_det_sign(self.c, self.h, ordered, 2) == -1

    def test_middle_point_lies_above(self):
        ordered, _ = det_plus(self.c, (0, 2))
        assert lifted_det_sign(self.c, self.h, ordered, 1) == 1

    def test_coincident_lift_is_zero(self):
        c = cfg((0,), (1,), (0,))
        h = HeightFunction((F(2), F(1), F(2)))
        ordered, _ = det_plus(c, (0, 1))
        assert lifted_det_sign(c, h, ordered, 2) == 0

    def test_agrees_with_oracle(self):
        rng = random.Random(3)
        for _ in range(30):
            d = rng.choice((1, 2))
            c = random_config(rng, d, d + 3, repeat_prob=0.2)
            h = random_generic_height(c, rng=rng)
            for B in c.bases:
                ordered, _ = det_plus(c, B)
                for i in range(c.n):
                    if i not in B:
                        assert lifted_det_sign(c, h, ordered, i) == lifted_sign(c.points, h.values, B, i)


class TestGenericHeights:
    def test_parabolic_lift_is_generic(self):
        assert validate_generic_height(cfg((0,), (1,), (2,)), HeightFunction((F(0), F(1), F(4))))

    def test_slanted_line_is_not_generic(self):
        c = cfg((0,), (1,), (2,))
        h = HeightFunction((F(0), F(1), F(2)))
        assert not validate_generic_height(c, h)
        assert find_nongeneric_subset(c, h) == (0, 1, 2)

    def test_vertical_dependency_is_allowed(self):
        assert validate_generic_height(cfg((0,), (0,), (1,)), HeightFunction((F(0), F(5), F(1))))

    def test_seeded_heights_are_deterministic(self):
        c = cfg((0, 0), (4, 1), (1, 3), (3, 3), (2, 2))
        assert random_generic_height(c, seed=7) == random_generic_height(c, seed=7)
        assert validate_generic_height(c, random_generic_height(c, seed=7))

    def test_three_points_generic(self):
        c = cfg((0,), (1,), (5,))
        assert validate_generic_height(c, random_generic_height(c, seed=1))

    def test_exhausted_budget(self):
        with pytest.raises(NonGenericHeightError):
            random_generic_height(cfg((0,), (1,), (2,)), retries=0)

    def test_zero_entropy_generator(self):
        class Constant(random.Random):
            def randrange(self, *args, **kwargs):
                return 1

        with pytest.raises(NonGenericHeightError):
            random_generic_height(cfg((0,), (1,), (2,)), retries=5, rng=Constant())


class TestAffineBasis:
    def test_unit_triangle(self):
        assert is_affine_basis(cfg((0, 0), (1, 0), (0, 1)), (0, 1, 2))

    def test_collinear(self):
        assert not is_affine_basis(cfg((0, 0), (1, 1), (2, 2), (0, 1)), (0, 1, 2))

    def test_repeated_point(self):
        assert not is_affine_basis(cfg((0, 0), (0, 0), (1, 0), (0, 1)), (0, 1, 2))

    def test_wrong_cardinality(self):
        with pytest.raises(GeometryError):
            is_affine_basis(cfg((0, 0), (1, 0), (0, 1)), (0, 1))


class TestHullMembership:
    def test_square(self):
        c = cfg((0, 0), (2, 0), (0, 2), (2, 2))
        assert in_hull(c, range(4), (F(1), F(1)))
        assert in_hull(c, range(4), (F(2), F(0)))
        assert not in_hull(c, range(4), (F(3), F(1)))

    def test_degenerate_subset(self):
        c = cfg((0, 0), (2, 0), (0, 2), (1, 0))
        assert in_hull(c, (0, 1, 3), (F(1, 2), F(0)))
        assert not in_hull(c, (0, 1, 3), (F(1, 2), F(1, 2)))


class TestPerturbedMembership:
    def test_shared_knot_belongs_to_exactly_one_interval(self):
        c = cfg((0,), (1,), (2,))
        hits = [perturbed_in_simplex(c, det_plus(c, B)[0], (F(1),)) for B in ((0, 1), (1, 2))]
        assert sum(hits) == 1

    def test_hull_boundary_counts_from_inside(self):
        c = cfg((0,), (1,), (2,))
        assert perturbed_in_simplex(c, det_plus(c, (1, 2))[0], (F(2),))
        assert perturbed_in_simplex(c, det_plus(c, (0, 1))[0], (F(0),))

    def test_triangulation_vertex_in_2d(self):
        # Four triangles around the centre of a square with an extra apex.
        c = cfg((0, 0), (2, 0), (2, 2), (0, 2), (1, 1))
        tris = [(0, 1, 4), (1, 2, 4), (2, 3, 4), (3, 0, 4)]
        for x in [(F(1), F(1)), (F(1), F(0)), (F(0), F(0)), (F(3, 2), F(3, 2))]:
            hits = sum(perturbed_in_simplex(c, det_plus(c, t)[0], x) for t in tris)
            assert hits == 1, x
