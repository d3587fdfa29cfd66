"""Random configuration generators shared by the test modules."""

from __future__ import annotations

import random
from fractions import Fraction

from zonospline import PointConfig, random_generic_height
from zonospline.exact import GeometryError


def random_config(rng: random.Random, d: int, n: int, coord_range: int = 12,
                  repeat_prob: float = 0.0, collinear_prob: float = 0.0) -> PointConfig:
    """Integer points in [0, coord_range]^d, optionally with repeated points and collinear triples."""
    while True:
        pts: list[tuple[int, ...]] = []
        while len(pts) < n:
            r = rng.random()
            if pts and r < repeat_prob:
                pts.append(rng.choice(pts))
            elif len(pts) >= 2 and d >= 2 and r < repeat_prob + collinear_prob:
                a, b = rng.sample(pts, 2)
                t = Fraction(rng.randrange(1, 4), 4)
                pts.append(tuple(ai + t * (bi - ai) for ai, bi in zip(a, b)))
            else:
                pts.append(tuple(rng.randint(0, coord_range) for _ in range(d)))
        try:
            return PointConfig.from_coords(pts, d)
        except GeometryError:
            continue


def random_regular(rng: random.Random, d: int, n: int, **kw):
    config = random_config(rng, d, n, **kw)
    return config, random_generic_height(config, rng=rng)


def example_1d():
    """Points 0, 1, 2 with parabolic heights 0, 1, 4."""
    from zonospline import HeightFunction

    config = PointConfig.from_coords([[0], [1], [2]])
    return config, HeightFunction((Fraction(0), Fraction(1), Fraction(4)))


def clamped_1d(k: int, interior: list) -> PointConfig:
    pts = [[0]] * (k + 1) + [[v] for v in interior] + [[1]] * (k + 1)
    return PointConfig.from_coords(pts)


def clamped_triangle(k: int) -> PointConfig:
    pts = [[0, 0]] * (k + 1) + [[1, 0]] * (k + 1) + [[0, 1]] * (k + 1)
    return PointConfig.from_coords(pts)
