"""Simplex splines (Micchelli recurrence, knot insertion), polar forms and reproduction."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exact import (
    PointConfig,
    barycentric_numerators,
    det,
    det_plus,
    perturbed_in_simplex,
    to_scalar,
)
from .tiling import ZonotopalTiling


def _as_point(config: PointConfig, x) -> tuple[Fraction, ...]:
    pt = tuple(to_scalar(c) for c in (x if isinstance(x, (tuple, list)) else (x,)))
    if len(pt) != config.dim:
        raise ValueError(f"point {x!r} does not have dimension {config.dim}")
    return pt


def _remove_one(X: tuple[int, ...], b: int) -> tuple[int, ...]:
    pos = X.index(b)
    return X[:pos] + X[pos + 1:]


class SplineEvaluator:
    """Evaluates simplex splines M(x | X) at one point, memoizing sub-multisets.

    All membership tests and barycentric numerators are exact; the recurrence
    itself runs in floating point. The box pre-check is closed and conservative.
    """

    def __init__(self, config: PointConfig, x):
        self.config = config
        self.x = _as_point(config, x)
        self._values: dict[tuple[int, ...], float] = {}
        self._bary: dict[tuple[int, ...], tuple[tuple[int, ...], Fraction, tuple[Fraction, ...]]] = {}
        self._basis: dict[tuple[int, ...], tuple[int, ...] | None] = {}

    def bary(self, B: Sequence[int]):
        """(ordered basis, det⁺, detˢ(B; b→x) per ordered position)."""
        key = tuple(sorted(B))
        hit = self._bary.get(key)
        if hit is None:
            ob, dp = det_plus(self.config, key)
            hit = (ob, dp, barycentric_numerators(self.config, ob, self.x))
            self._bary[key] = hit
        return hit

    def pick_basis(self, X: tuple[int, ...]) -> tuple[int, ...] | None:
        """Affine basis inside X with the largest |det|; None if X has affine rank < d+1."""
        if X in self._basis:
            return self._basis[X]
        best, best_val = None, 0
        for B in itertools.combinations(sorted(set(X)), self.config.dim + 1):
            v = abs(self.config.int_orient(B))
            if v > best_val:
                best, best_val = B, v
        self._basis[X] = best
        return best

    def outside_box(self, X: Iterable[int]) -> bool:
        pts = [self.config.points[i] for i in X]
        return any(self.x[c] < min(p[c] for p in pts) or self.x[c] > max(p[c] for p in pts)
                   for c in range(self.config.dim))

    def value(self, X: Iterable[int], basis: Sequence[int] | None = None) -> float:
        X = tuple(sorted(X))
        if basis is None and X in self._values:
            return self._values[X]
        d = self.config.dim
        k = len(X) - d - 1
        if k < 0:
            raise ValueError(f"a spline needs at least d+1={d + 1} knots, got {len(X)}")
        if basis is not None:
            basis = tuple(sorted(basis))
            if Counter(basis) - Counter(X) or self.config.int_orient(basis) == 0:
                raise ValueError(f"{basis} is not an affine basis inside {X}")
        if self.outside_box(X):
            val = 0.0
        else:
            B = basis or self.pick_basis(X)
            if B is None:
                val = 0.0
            elif k == 0:
                ob, dp, nums = self.bary(B)
                inside = perturbed_in_simplex(self.config, ob, self.x, nums)
                val = math.factorial(d) / float(dp) if inside else 0.0
            else:
                ob, dp, nums = self.bary(B)
                acc = 0.0
                for b, num in zip(ob, nums):
                    if num:
                        acc += float(num / dp) * self.value(_remove_one(X, b))
                val = (k + d) / k * acc
        if basis is None:
            self._values[X] = val
        return val


def eval_spline(config: PointConfig, X: Iterable[int], x, basis_hint: Sequence[int] | None = None
                ) -> float:
    """M(x | a_X): degree-0 scaled indicator, recurrence above, zero on rank-deficient knots.

    Degree-0 indicators use a fixed symbolic perturbation of x, so on knot
    hyperplanes the value is a one-sided limit taken from inside the hull.
    """
    return SplineEvaluator(config, x).value(X, basis_hint)


def knot_insertion_lhs_rhs(config: PointConfig, X: Sequence[int], B: Sequence[int], c: int, x
                           ) -> tuple[float, float]:
    """Both sides of det⁺(B) M(X∖c) = Σ_b detˢ(B; b→c) M(X∖b)."""
    X = tuple(sorted(X))
    if c in B:
        raise ValueError(f"inserted index {c} belongs to the basis {tuple(B)}")
    if len(X) < config.dim + 2:
        raise ValueError("knot insertion needs at least d+2 knots")
    ev = SplineEvaluator(config, x)
    if ev.pick_basis(X) is None:
        return 0.0, 0.0
    ob, dp = det_plus(config, B)
    if dp == 0:
        raise ValueError(f"{tuple(B)} is not an affine basis")
    lhs = float(dp) * ev.value(_remove_one(X, c))
    rhs = 0.0
    rows = [config.lifted_row(b) for b in ob]
    for pos, b in enumerate(ob):
        r = list(rows)
        r[pos] = config.lifted_row(c)
        coef = det(r)
        if coef:
            rhs += float(coef) * ev.value(_remove_one(X, b))
    return lhs, rhs


# ---------------------------------------------------------------- polynomials


@dataclass(frozen=True)
class Polynomial:
    """Sparse d-variate polynomial: exponent tuple -> coefficient."""

    dim: int
    coeffs: Mapping[tuple[int, ...], float]

    def __post_init__(self):
        clean = {}
        for e, c in self.coeffs.items():
            e = tuple(int(v) for v in e)
            if len(e) != self.dim or any(v < 0 for v in e):
                raise ValueError(f"bad exponent {e} for dimension {self.dim}")
            if c:
                clean[e] = clean.get(e, 0) + c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def monomial(cls, exponents: Sequence[int], coeff: float = 1.0) -> "Polynomial":
        return cls(len(exponents), {tuple(exponents): coeff})

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    def __call__(self, x: Sequence[float]) -> float:
        x = [float(v) for v in x]
        return sum(c * math.prod(xi ** p for xi, p in zip(x, e)) for e, c in self.coeffs.items())


class PolarForm:
    """Blossom of a polynomial: symmetric, affine in each of ``arity`` point arguments."""

    def __init__(self, poly: Polynomial, arity: int):
        if poly.degree > arity:
            raise ValueError(f"degree {poly.degree} exceeds polar-form arity {arity}")
        self.poly = poly
        self.arity = arity
        # For each monomial, the coordinate attached to each factor slot.
        self._slots = [(c, [axis for axis, p in enumerate(e) for _ in range(p)])
                       for e, c in poly.coeffs.items()]

    def __call__(self, *args) -> float:
        return eval_polar(self, list(args))


def blossom(poly: Polynomial, arity: int) -> PolarForm:
    return PolarForm(poly, arity)


def eval_polar(pf: PolarForm, args: Sequence[Sequence[float]]) -> float:
    """Average each monomial's slot products over all injective slot->argument maps."""
    if len(args) != pf.arity:
        raise ValueError(f"polar form expects {pf.arity} arguments, got {len(args)}")
    pts = [[float(v) for v in a] for a in args]
    total = 0.0
    for coeff, slots in pf._slots:
        m = len(slots)
        if m == 0:
            total += coeff
            continue
        acc = 0.0
        count = 0
        for choice in itertools.permutations(range(pf.arity), m):
            acc += math.prod(pts[j][axis] for j, axis in zip(choice, slots))
            count += 1
        total += coeff * acc / count
    return total


def reproduce(config: PointConfig, tiling: ZonotopalTiling, k: int, poly: Polynomial, x) -> float:
    """k!/(k+d)! Σ_{order-k tiles} Q(a_I) det⁺(B) M(x | I⊔B)."""
    if poly.degree > k:
        raise ValueError(f"polynomial degree {poly.degree} exceeds k={k}")
    if k > tiling.max_order:
        raise ValueError(f"tiling only built to order {tiling.max_order}")
    d = config.dim
    pf = blossom(poly, k)
    ev = SplineEvaluator(config, x)
    total = 0.0
    for t in tiling.order(k):
        m = ev.value(t.knots)
        if m == 0.0:
            continue
        _, dp = det_plus(config, t.B)
        q = eval_polar(pf, [config.points[i] for i in t.I])
        total += q * float(dp) * m
    return total * math.factorial(k) / math.factorial(k + d)
