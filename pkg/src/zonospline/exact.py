"""Exact rational geometry: point configurations, determinants and height functions."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

Scalar = Fraction

HEIGHT_NUM_RANGE = (1, 2**31)
HEIGHT_DENOMINATOR = 2**16


class GeometryError(ValueError):
    """Raised for malformed configurations or invalid predicate arguments."""


class NonGenericHeightError(GeometryError):
    """A height function produced a zero lifted determinant off a vertical plane."""

    def __init__(self, message: str, subset: tuple[int, ...] | None = None):
        super().__init__(message)
        self.subset = subset


def to_scalar(value) -> Fraction:
    """Convert an int, decimal/rational string, (num, den) pair or float losslessly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise GeometryError(f"not a number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise GeometryError(f"cannot parse number {value!r}") from exc
    if isinstance(value, float):
        if not math.isfinite(value):
            raise GeometryError(f"non-finite coordinate {value!r}")
        return Fraction(value)
    if isinstance(value, (tuple, list)) and len(value) == 2:
        num, den = value
        if not isinstance(num, int) or not isinstance(den, int) or den == 0:
            raise GeometryError(f"bad numerator/denominator pair {value!r}")
        return Fraction(num, den)
    raise GeometryError(f"cannot convert {value!r} to an exact scalar")


def format_scalar(value: Fraction) -> str:
    """Canonical string form: ``"3"``, ``"-1/2"``."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _bareiss(m: list[list[int]]) -> int:
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        row_k = m[k]
        for i in range(k + 1, n):
            row_i = m[i]
            lead = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - lead * row_k[j]) // prev
        prev = pivot
    return sign * m[n - 1][n - 1]


def det(rows: Sequence[Sequence]) -> Fraction:
    """Exact determinant of a square matrix of ints or Fractions.

    Rows are scaled to integers and reduced by fraction-free (Bareiss)
    elimination, so intermediate values stay bounded.
    """
    n = len(rows)
    if n == 0:
        return Fraction(1)
    if any(len(r) != n for r in rows):
        raise GeometryError("determinant of a non-square matrix")
    scale = 1
    int_rows = []
    for row in rows:
        den = 1
        for v in row:
            if isinstance(v, Fraction):
                den = den * v.denominator // math.gcd(den, v.denominator)
        scale *= den
        int_rows.append([int(v * den) if den != 1 else int(v) for v in row])
    return Fraction(_bareiss(int_rows), scale)


def int_det(rows: list[list[int]]) -> int:
    """Determinant of an integer matrix (rows are consumed)."""
    if len(rows) == 1:
        return rows[0][0]
    if len(rows) == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    return _bareiss(rows)


def sign(value) -> int:
    return (value > 0) - (value < 0)


@dataclass(frozen=True)
class PointConfig:
    """``n`` points in ``R^d`` with exact rational coordinates.

    Repeated points and affinely dependent subsets are allowed, but the
    points must affinely span ``R^d``.
    """

    dim: int
    points: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise GeometryError("dimension must be positive")
        pts = tuple(tuple(to_scalar(c) for c in p) for p in self.points)
        for p in pts:
            if len(p) != self.dim:
                raise GeometryError(f"point {p} does not have dimension {self.dim}")
        object.__setattr__(self, "points", pts)
        if len(pts) < self.dim + 1:
            raise GeometryError(f"need at least d+1={self.dim + 1} points, got {len(pts)}")
        if self.affine_rank(range(len(pts))) < self.dim + 1:
            raise GeometryError("points do not affinely span R^d")

    @classmethod
    def from_coords(cls, points: Iterable[Iterable], dim: int | None = None) -> "PointConfig":
        pts = [tuple(to_scalar(c) for c in p) for p in points]
        if dim is None:
            if not pts:
                raise GeometryError("empty configuration")
            dim = len(pts[0])
        return cls(dim, tuple(pts))

    @property
    def n(self) -> int:
        return len(self.points)

    @cached_property
    def _int_lift(self) -> tuple[tuple[int, ...], ...]:
        # (L*a_i, 1) with L the lcm of all coordinate denominators; det signs are unchanged.
        den = 1
        for p in self.points:
            for c in p:
                den = den * c.denominator // math.gcd(den, c.denominator)
        return tuple(tuple(int(c * den) for c in p) + (1,) for p in self.points), den

    @cached_property
    def bases(self) -> tuple[tuple[int, ...], ...]:
        """All sorted ``(d+1)``-subsets of indices that are affine bases."""
        return tuple(b for b in itertools.combinations(range(self.n), self.dim + 1)
                     if self.int_orient(b) != 0)

    def int_orient(self, idx: Sequence[int]) -> int:
        """det((L a_b, 1)) for the rows in the given order (integer, sign-exact)."""
        lift, _ = self._int_lift
        return int_det([list(lift[i]) for i in idx])

    def lifted_row(self, i: int) -> tuple[Fraction, ...]:
        return self.points[i] + (Fraction(1),)

    def affine_rank(self, idx: Iterable[int]) -> int:
        """Rank of the matrix with rows (a_i, 1)."""
        rows = [list(self.lifted_row(i)) for i in idx]
        return matrix_rank(rows)

    @cached_property
    def centroid(self) -> tuple[Fraction, ...]:
        return tuple(sum(p[c] for p in self.points) / self.n for c in range(self.dim))

    def subset_points(self, idx: Iterable[int]) -> list[tuple[Fraction, ...]]:
        return [self.points[i] for i in idx]


def matrix_rank(rows: list[list[Fraction]]) -> int:
    """Exact rank by Gaussian elimination over the rationals."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        p = m[rank][col]
        for r in range(rank + 1, len(m)):
            f = m[r][col]
            if f:
                f = f / p
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
        if rank == len(m):
            break
    return rank


@dataclass(frozen=True)
class HeightFunction:
    """One exact height per point index."""

    values: tuple[Fraction, ...]
    generic: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(to_scalar(v) for v in self.values))

    def __len__(self) -> int:
        return len(self.values)

    @cached_property
    def _int_values(self) -> tuple[tuple[int, ...], int]:
        den = 1
        for v in self.values:
            den = den * v.denominator // math.gcd(den, v.denominator)
        return tuple(int(v * den) for v in self.values), den


def _check_heights(config: PointConfig, h: HeightFunction) -> None:
    if len(h) != config.n:
        raise GeometryError(f"height function has {len(h)} values for {config.n} points")


def det_plus(config: PointConfig, basis: Iterable[int]) -> tuple[tuple[int, ...], Fraction]:
    """Order ``basis`` so that det((a_b, 1)) > 0 and return (ordering, value).

    A zero value flags an affinely dependent (degenerate) set; the ordering is
    then the input order.
    """
    idx = tuple(basis)
    if len(idx) != config.dim + 1:
        raise GeometryError(f"basis must have {config.dim + 1} indices, got {len(idx)}")
    value = det([config.lifted_row(i) for i in idx])
    if value < 0:
        idx = (idx[1], idx[0]) + idx[2:]
        value = -value
    return idx, value


def _replacement_row(config: PointConfig, replacement) -> tuple[Fraction, ...]:
    if isinstance(replacement, int) and not isinstance(replacement, bool):
        return config.lifted_row(replacement)
    pt = tuple(to_scalar(c) for c in replacement)
    if len(pt) != config.dim:
        raise GeometryError(f"replacement point {replacement!r} has wrong dimension")
    return pt + (Fraction(1),)


def det_sub(config: PointConfig, ordered: Sequence[int], j: int, replacement) -> Fraction:
    """det⁺(B) with the row of point ``j`` replaced by a point index or a coordinate vector."""
    if j not in ordered:
        raise GeometryError(f"index {j} is not in basis {tuple(ordered)}")
    rows = [config.lifted_row(b) for b in ordered]
    rows[list(ordered).index(j)] = _replacement_row(config, replacement)
    return det(rows)


def barycentric_numerators(config: PointConfig, ordered: Sequence[int], x) -> tuple[Fraction, ...]:
    """detˢ(B; b→x) for every b in the ordered basis; they sum to det⁺(B)."""
    xrow = _replacement_row(config, x)
    base = [config.lifted_row(b) for b in ordered]
    out = []
    for pos in range(len(ordered)):
        rows = list(base)
        rows[pos] = xrow
        out.append(det(rows))
    return tuple(out)


def lifted_det_sign(config: PointConfig, h: HeightFunction, ordered: Sequence[int], i: int) -> int:
    """Sign of det((a_b, h_b, 1)_{b in B}, (a_i, h_i, 1)) with ``B`` in the given order."""
    _check_heights(config, h)
    lift, _ = config._int_lift
    hv, _ = h._int_values
    rows = [list(lift[b][:-1]) + [hv[b], 1] for b in ordered]
    rows.append(list(lift[i][:-1]) + [hv[i], 1])
    return sign(int_det(rows))


def find_nongeneric_subset(config: PointConfig, h: HeightFunction) -> tuple[int, ...] | None:
    """Return the first (d+2)-subset violating height genericity, or None.

    A subset is harmless when its lifted points are affinely independent, or
    when they lie on a vertical hyperplane, i.e. the unlifted points have
    affine rank at most d.
    """
    _check_heights(config, h)
    d = config.dim
    lift, _ = config._int_lift
    hv, _ = h._int_values
    for sub in itertools.combinations(range(config.n), d + 2):
        rows = [list(lift[i][:-1]) + [hv[i], 1] for i in sub]
        if int_det(rows) != 0:
            continue
        if matrix_rank([[Fraction(v) for v in lift[i]] for i in sub]) <= d:
            continue
        return sub
    return None


def validate_generic_height(config: PointConfig, h: HeightFunction) -> bool:
    """Exhaustive O(n^{d+2}) genericity check of a height function."""
    return find_nongeneric_subset(config, h) is None


def random_generic_height(config: PointConfig, seed: int = 0, retries: int = 64,
                          rng: random.Random | None = None) -> HeightFunction:
    """Draw seeded random rational heights until they are generic.

    Heights are ``m / 2**16`` with ``m`` uniform in ``[1, 2**31)``.
    """
    rng = rng if rng is not None else random.Random(seed)
    lo, hi = HEIGHT_NUM_RANGE
    for _ in range(retries):
        h = HeightFunction(tuple(Fraction(rng.randrange(lo, hi), HEIGHT_DENOMINATOR)
                                 for _ in range(config.n)))
        if validate_generic_height(config, h):
            return HeightFunction(h.values, generic=True)
    raise NonGenericHeightError(
        f"no generic height function found after {retries} attempts")


def is_affine_basis(config: PointConfig, basis: Iterable[int]) -> bool:
    idx = tuple(basis)
    if len(idx) != config.dim + 1:
        raise GeometryError(f"basis must have {config.dim + 1} indices, got {len(idx)}")
    return config.int_orient(idx) != 0


def point_in_simplex(config: PointConfig, ordered: Sequence[int], x) -> bool:
    """Closed-simplex membership of ``x`` for a positively ordered basis."""
    return all(v >= 0 for v in barycentric_numerators(config, ordered, x))


def perturbed_in_simplex(config: PointConfig, ordered: Sequence[int], x,
                         nums: Sequence[Fraction] | None = None) -> bool:
    """Membership of x + ε(c - x) + ε²e_1 + ε³e_2 + ... in the simplex, ε -> 0+.

    ``c`` is the centroid of the configuration. Off the simplex boundary this
    is plain membership. On the boundary the perturbed point decides, so the
    simplices of any triangulation partition space exactly and points of the
    hull boundary are treated as limits from inside the hull.
    """
    if nums is None:
        nums = barycentric_numerators(config, ordered, x)
    if any(v < 0 for v in nums):
        return False
    if all(v > 0 for v in nums):
        return True
    xpt = tuple(to_scalar(c) for c in x)
    directions = [tuple(c - xi for c, xi in zip(config.centroid, xpt))]
    directions += [tuple(Fraction(int(c == axis)) for c in range(config.dim))
                   for axis in range(config.dim)]
    base = [config.lifted_row(b) for b in ordered]
    for pos, v in enumerate(nums):
        if v != 0:
            continue
        for u in directions:
            rows = list(base)
            rows[pos] = u + (Fraction(0),)
            g = det(rows)
            if g != 0:
                if g < 0:
                    return False
                break
    return True


def in_hull(config: PointConfig, idx: Sequence[int], x) -> bool:
    """Exact membership of ``x`` in the convex hull of the indexed points.

    Full-dimensional subsets are triangulated implicitly: ``x`` lies in the hull
    iff it lies in some simplex spanned by an affine basis of the subset.
    Lower-dimensional subsets fall back to solving for barycentric coordinates
    on every affinely independent subset of maximal size.
    """
    idx = sorted(set(idx), key=lambda i: i)
    xpt = tuple(to_scalar(c) for c in x)
    d = config.dim
    rank = config.affine_rank(idx)
    if rank == d + 1:
        for b in itertools.combinations(idx, d + 1):
            if config.int_orient(b) == 0:
                continue
            ordered, _ = det_plus(config, b)
            if point_in_simplex(config, ordered, xpt):
                return True
        return False
    distinct = []
    for i in idx:
        if config.points[i] not in distinct:
            distinct.append(config.points[i])
    for sub in itertools.combinations(distinct, rank):
        lam = _affine_coords(sub, xpt)
        if lam is not None and all(v >= 0 for v in lam):
            return True
    return False


def _affine_coords(pts: Sequence[tuple[Fraction, ...]], x: tuple[Fraction, ...]):
    """Solve sum λ_j p_j = x, sum λ_j = 1 exactly; None if inconsistent or singular."""
    m = len(pts)
    d = len(x)
    aug = [[pts[j][r] for j in range(m)] + [x[r]] for r in range(d)]
    aug.append([Fraction(1)] * m + [Fraction(1)])
    rows = len(aug)
    piv_cols = []
    r = 0
    for c in range(m):
        p = next((i for i in range(r, rows) if aug[i][c] != 0), None)
        if p is None:
            return None
        aug[r], aug[p] = aug[p], aug[r]
        pv = aug[r][c]
        aug[r] = [v / pv for v in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
    if any(aug[i][m] != 0 for i in range(r, rows)):
        return None
    return [aug[i][m] for i in range(m)]
