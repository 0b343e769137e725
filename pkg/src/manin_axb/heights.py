"""Local and global heights on the height-bearing models.

ex1 (P^1 x P^1, c = b/a) uses, for each place v,

    H_{D1,v} = max(1, |a|_v) / |a|_v
    H_{D2,v} = max(1, |a|_v)
    H_{D3,v} = max(1, |c|_v)

with max replaced by the Euclidean norm at the real place, so that the
anticanonical height is (a0^2 + a1^2)(c0^2 + c1^2) for a = a1/a0 and
c = c1/c0 in lowest terms.

ex3 (P^2 blown up at [0 : rho : 1]) uses the norm |(a, b, 1)|_v of the
point, the norms |(a, b - rho)|_v of the pencils through the centres, and
the relation prod_j H_{D_j,v}^{-u_j} = |a|_v to fix the strict transform of
a = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import sympy

from .surface_models import SurfaceModel, ex3_roots


class HeightModelError(ValueError):
    """The model carries no height, or the operation is not defined for it."""


@dataclass(frozen=True)
class RationalPoint:
    a: Fraction
    b: Fraction

    def __init__(self, a, b):
        a = Fraction(a)
        b = Fraction(b)
        if a == 0:
            raise ValueError("a must be nonzero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def c(self) -> Fraction:
        return self.b / self.a

    def __mul__(self, other: "RationalPoint") -> "RationalPoint":
        # (a, b)(u1, u2) = (a u1, a u2 + b)
        return RationalPoint(self.a * other.a, self.a * other.b + self.b)


@dataclass(frozen=True)
class LocalHeightVector:
    place: object  # prime int, or "inf"
    values: tuple


INF = "inf"


def vp(x: Fraction, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    n, d = x.numerator, x.denominator
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    while d % p == 0:
        d //= p
        k -= 1
    return k


def abs_p(x: Fraction, p: int) -> Fraction:
    if x == 0:
        return Fraction(0)
    return Fraction(p) ** (-vp(x, p))


def _max_norm(xs, p) -> Fraction:
    return max(abs_p(Fraction(x), p) for x in xs)


def _l2(xs) -> float:
    return math.sqrt(math.fsum(float(x) ** 2 for x in xs))


def _require(model: SurfaceModel, allowed=("ex1", "ex3")) -> str:
    if model.height_model not in allowed:
        raise HeightModelError(
            f"{model.name} has no height model for this operation (available: {', '.join(allowed)})"
        )
    return model.height_model


def local_heights_finite(model: SurfaceModel, point: RationalPoint, p: int) -> LocalHeightVector:
    kind = _require(model)
    a, b = point.a, point.b
    if kind == "ex1":
        A = abs_p(a, p)
        vals = (max(Fraction(1), A) / A, max(Fraction(1), A), max(Fraction(1), abs_p(point.c, p)))
        return LocalHeightVector(p, vals)
    full = _max_norm((a, b, 1), p)
    E = [full / _max_norm((a, b - rho), p) for rho in ex3_roots(len(model) - 2)]
    La = full / (abs_p(a, p) * math.prod(E))
    return LocalHeightVector(p, (La, full, *E))


def local_heights_arch(model: SurfaceModel, point: RationalPoint) -> LocalHeightVector:
    kind = _require(model)
    a, b = float(point.a), float(point.b)
    if kind == "ex1":
        r = math.hypot(1.0, a)
        return LocalHeightVector(INF, (r / abs(a), r, math.hypot(a, b) / abs(a)))
    full = _l2((point.a, point.b, 1))
    E = [full / _l2((point.a, point.b - rho)) for rho in ex3_roots(len(model) - 2)]
    La = full / (abs(a) * math.prod(E))
    return LocalHeightVector(INF, (La, full, *E))


def relevant_primes(model: SurfaceModel, point: RationalPoint) -> list[int]:
    """Primes at which some local height of the point can differ from 1."""
    kind = _require(model)
    nums = [point.a, point.c] if kind == "ex1" else [point.a, point.b]
    if kind == "ex3":
        nums += [point.b - rho for rho in ex3_roots(len(model) - 2)]
        nums += [Fraction(rho) for rho in ex3_roots(len(model) - 2)]
    ps = set()
    for x in nums:
        if x == 0:
            continue
        for part in (x.numerator, x.denominator):
            ps.update(int(q) for q in sympy.factorint(abs(part)))
    return sorted(ps)


def anticanonical_height(model: SurfaceModel, point: RationalPoint) -> Fraction:
    """Exact anticanonical height; only ex1 has a closed form here."""
    _require(model, ("ex1",))
    a, c = point.a, point.c
    return Fraction((a.numerator ** 2 + a.denominator ** 2) * (c.numerator ** 2 + c.denominator ** 2))


def anticanonical_height_from_places(model: SurfaceModel, point: RationalPoint) -> float:
    """Place-by-place product of local heights raised to d_j."""
    return height_pairing(model, model.d, point)


def height_pairing(model: SurfaceModel, s: Sequence[float], point: RationalPoint) -> float:
    """H(s, point) = prod_v prod_j H_{D_j,v}^{s_j}, accumulated in logarithms."""
    _require(model)
    if len(s) != len(model):
        raise ValueError("s must have one entry per divisor")
    logs = []
    arch = local_heights_arch(model, point)
    logs.extend(sj * math.log(h) for sj, h in zip(s, arch.values) if sj)
    for p in relevant_primes(model, point):
        loc = local_heights_finite(model, point, p)
        logs.extend(sj * math.log(h) for sj, h in zip(s, loc.values) if sj and h != 1)
    return math.exp(math.fsum(logs))


def character_consistency(model: SurfaceModel, point: RationalPoint, place) -> tuple[object, object]:
    """Return (prod_j H_{D_j,v}^{-u_j}, |a|_v) at one place, for comparison."""
    if place == INF:
        loc = local_heights_arch(model, point)
        lhs = math.prod(h ** (-u) for h, u in zip(loc.values, model.u))
        return lhs, abs(float(point.a))
    loc = local_heights_finite(model, point, place)
    lhs = Fraction(1)
    for h, u in zip(loc.values, model.u):
        lhs *= Fraction(h) ** (-u)
    return lhs, abs_p(point.a, place)
