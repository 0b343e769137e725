"""p-adic oscillatory height integrals on ex1 and the residuals of their main terms.

For alpha in Q^x the integral is

    H(s, alpha) = int_{alpha a in Z_p} H_p(s, g)^-1 e(-alpha b mod Z_p) dg,

with dg = d^x a db and d^x a giving Z_p^x mass 1 (trivial character, N = 1).
On ex1 the a-stratum v_p(a) = m carries the weight p^(-m s1) for m >= 0 and
p^(m s2) for m < 0.  Substituting b = a c turns the b integral into
p^-m F(v_p(alpha) + m) with

    F(w) = 1 + (1 - 1/p) sum_{n=1..w} p^(n (1 - s3)) - p^(w - (w + 1) s3),

the integral of max(1, |c|)^-s3 e(-beta c) for v_p(beta) = w >= 0.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .heights import vp
from .surface_models import SurfaceModel, classify

DEFAULT_DEPTH = 40


class TruncationError(ValueError):
    """The truncated strata miss the dominant part of the integral."""


class DivergenceError(ValueError):
    """Some stratum sum diverges at the requested s."""


@dataclass(frozen=True)
class OscillationQuery:
    s: tuple
    alpha: Fraction
    p: int
    depth: int = DEFAULT_DEPTH

    def __init__(self, s: Sequence[complex], alpha, p: int, depth: int = DEFAULT_DEPTH):
        alpha = Fraction(alpha)
        if alpha == 0:
            raise ValueError("alpha must be nonzero")
        object.__setattr__(self, "s", tuple(complex(x) for x in s))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "p", int(p))
        object.__setattr__(self, "depth", int(depth))


@dataclass(frozen=True)
class OscillationValue:
    value: complex
    tail_bound: float
    lowest_stratum: int


def _require_ex1(model: SurfaceModel) -> None:
    if model.height_model != "ex1":
        raise ValueError(f"oscillatory integrals are only implemented for ex1, not {model.name}")


def critical_point(model: SurfaceModel) -> tuple[complex, ...]:
    """s = d + 2u, the reference point of the working region."""
    return tuple(complex(d + 2 * u) for d, u in zip(model.d, model.u))


def margin(model: SurfaceModel, s: Sequence[complex]) -> float:
    """Smallest delta >= 0 with Re(s_j - d_j - 2 u_j) >= -delta for all j."""
    low = min((complex(x).real - d - 2 * u) for x, d, u in zip(s, model.d, model.u))
    return max(0.0, -low)


def check_region(model: SurfaceModel, s: Sequence[complex], delta: float = 0.25, upper: float = 10.0) -> bool:
    """Warn when Re(s - d - 2u) leaves [-delta, upper]."""
    ok = True
    for x, d, u in zip(s, model.d, model.u):
        r = complex(x).real - d - 2 * u
        if not (-delta <= r <= upper):
            ok = False
    if not ok:
        warnings.warn(f"s = {tuple(s)} lies outside the working region", stacklevel=2)
    return ok


def _pw(p: int, e: complex) -> complex:
    return cmath.exp(e * math.log(p))


def _F(p: int, w: int, s3: complex) -> complex:
    acc = 1.0 + 0j
    for n in range(1, w + 1):
        acc += (1 - 1 / p) * _pw(p, n * (1 - s3))
    return acc - _pw(p, w - (w + 1) * s3)


def _weight(p: int, m: int, s1: complex, s2: complex) -> complex:
    return _pw(p, -m * s1) if m >= 0 else _pw(p, m * s2)


def _tail_bound(p: int, v: int, M: int, s: Sequence[complex]) -> float:
    """Bound for the strata m > M."""
    sig1, sig3 = s[0].real, s[2].real
    rho3 = 1 - sig3
    if rho3 < 0:
        Fbar = 1 + (1 - 1 / p) * p ** rho3 / (1 - p ** rho3) + p ** (-sig3)
        r = p ** (-(sig1 + 1))
        if r >= 1:
            raise DivergenceError(f"a-strata diverge: Re(s1) + 1 = {sig1 + 1:.6g} <= 0")
        return Fbar * r ** (M + 1) / (1 - r)
    r = p ** (-(sig1 + 1) + rho3)
    if r >= 1:
        raise DivergenceError(f"strata diverge: Re(s1) + Re(s3) = {sig1 + sig3:.6g} <= 0")
    c = (1 + max(1.0, p ** (-sig3))) * p ** (v * rho3)
    # sum_{m > M} (m + v + 2) r^m
    k0 = M + 1
    base = r ** k0 * ((k0 + v + 2) / (1 - r) + r / (1 - r) ** 2)
    return c * base


def h_vee_p(model: SurfaceModel, q: OscillationQuery, tol: float | None = None) -> OscillationValue:
    """Exact stratum sum in v_p(a) over m = -v_p(alpha) .. depth, plus a tail bound."""
    _require_ex1(model)
    p, M = q.p, q.depth
    s1, s2, s3 = q.s
    v = vp(q.alpha, p)
    m0 = -v
    if m0 > M or m0 < -M:
        raise TruncationError(
            f"v_p(alpha) = {v} puts the lowest stratum m = {m0} outside |m| <= {M}; increase depth"
        )
    total = 0j
    for m in range(m0, M + 1):
        total += _weight(p, m, s1, s2) * _pw(p, -m) * _F(p, v + m, s3)
    tail = _tail_bound(p, v, M, q.s)
    if tol is not None and tail > tol:
        raise TruncationError(f"tail bound {tail:.3e} exceeds tolerance {tol:.3e}")
    return OscillationValue(complex(total), float(tail), m0)


def h_vee_p_oracle(model: SurfaceModel, q: OscillationQuery) -> complex:
    """Independent evaluation stratified by both v_p(a) = m and v_p(b) = n.

    The b-sphere v_p(b) = n carries int e(-alpha b) db =
    p^-n [n >= -v] - p^-(n+1) [n + 1 >= -v], and the factor
    max(1, p^(m-n))^-s3; spheres with n >= m telescope to p^-m.
    """
    _require_ex1(model)
    p, M = q.p, q.depth
    s1, s2, s3 = q.s
    v = vp(q.alpha, p)
    total = 0j
    for m in range(-v, M + 1):
        inner = _pw(p, -m)
        for n in range(-v - 1, m):
            S = (_pw(p, -n) if n >= -v else 0) - (_pw(p, -(n + 1)) if n + 1 >= -v else 0)
            inner += S * _pw(p, -(m - n) * s3)
        total += _weight(p, m, s1, s2) * inner
    return complex(total)


def frac_p(x: Fraction, p: int) -> Fraction:
    """The p-adic fractional part of x, a rational in [0, 1) with p-power denominator."""
    x = Fraction(x)
    d = x.denominator
    k = 0
    while d % p == 0:
        d //= p
        k += 1
    if k == 0:
        return Fraction(0)
    pk = p ** k
    # x = n / (p^k d'); its Z_p-class is n * d'^-1 / p^k
    n = x.numerator * pow(d, -1, pk)
    return Fraction(n % pk, pk)


def e_p(x: Fraction, p: int) -> complex:
    return cmath.exp(2j * math.pi * float(frac_p(x, p)))


@dataclass(frozen=True)
class ResidualReport:
    value: complex
    main_term: complex
    residual: complex
    bound_rhs: float
    ratio: float
    delta: float
    k: int


def _bound_core(p: int, k: int, us: Sequence[int], delta: float, sign: int) -> float:
    acc = 0.0
    for u in us:
        au = abs(u)
        term = p ** (delta - 1) + p ** -0.5 * (1 if k % au == 0 else 0) + (1 if k > au else 0)
        acc += term * p ** ((delta - 1) * k / au)
    return p ** (sign * 2 * k) * acc


def denominator_residual(model: SurfaceModel, q: OscillationQuery) -> ResidualReport:
    """Residual after removing the J1^c main terms, for v_p(alpha) = -k < 0."""
    cl = classify(model)
    p = q.p
    v = vp(q.alpha, p)
    if v >= 0:
        raise ValueError("denominator residual needs v_p(alpha) < 0")
    if p in model.bad_primes:
        raise ValueError(f"p = {p} is a bad prime for {model.name}")
    k = -v
    val = h_vee_p(model, q).value
    main = 0j
    for c, js in cl.J1c.items():
        for j in js:
            D = model.divisors[j]
            if k % D.u == 0:
                main += e_p(-Fraction(c) * q.alpha, p) * _pw(p, -k * (q.s[j] - D.d + 1) / D.u)
    delta = margin(model, q.s)
    bound = _bound_core(p, k, [model.divisors[j].u for j in cl.J1], delta, -1)
    res = val - main
    return ResidualReport(val, main, res, bound, abs(res) / bound, delta, k)


def numerator_residual(model: SurfaceModel, q: OscillationQuery) -> ResidualReport:
    """Residual after removing the J2* main terms, for v_p(alpha) = k > 0."""
    cl = classify(model)
    p = q.p
    k = vp(q.alpha, p)
    if k <= 0:
        raise ValueError("numerator residual needs v_p(alpha) > 0")
    val = h_vee_p(model, q).value
    main = 0j
    for j in cl.J2star:
        D = model.divisors[j]
        if k % abs(D.u) == 0:
            main += _pw(p, -k * (q.s[j] - D.d + 1) / abs(D.u))
    delta = margin(model, q.s)
    bound = _bound_core(p, k, [model.divisors[j].u for j in cl.J2], delta, 1)
    res = val - main
    return ResidualReport(val, main, res, bound, abs(res) / bound, delta, k)


def generic_residual(model: SurfaceModel, q: OscillationQuery) -> ResidualReport:
    """H - 1 for v_p(alpha) = 0, against p^(2 (delta - 1))."""
    if vp(q.alpha, q.p) != 0:
        raise ValueError("generic residual needs v_p(alpha) = 0")
    val = h_vee_p(model, q).value
    delta = margin(model, q.s)
    bound = q.p ** (2 * (delta - 1))
    res = val - 1
    return ResidualReport(val, 1 + 0j, res, bound, abs(res) / bound, delta, 0)


@dataclass(frozen=True)
class ConstancyProbe:
    exponent: int | None
    allowed: int
    consistent: bool


def local_constancy_probe(
    model: SurfaceModel,
    p: int,
    alpha,
    s: Sequence[complex] | None = None,
    max_exponent: int = 6,
    e0: int = 1,
    samples: int | None = None,
    depth: int = DEFAULT_DEPTH,
) -> ConstancyProbe:
    """Smallest e such that H(s, alpha (1 + p^e j)) = H(s, alpha) for all sampled j.

    Samples j = 1..samples (default p + 1) so that e = 0 includes a
    valuation-changing multiplier.  Constancy is expected by e <= max(1, -v_p(alpha)) + e0.
    """
    alpha = Fraction(alpha)
    if s is None:
        s = critical_point(model)
    base = h_vee_p(model, OscillationQuery(s, alpha, p, depth)).value
    js = range(1, (samples or p + 1) + 1)
    allowed = max(1, -vp(alpha, p)) + e0
    for e in range(0, max_exponent + 1):
        same = True
        for j in js:
            a2 = alpha * (1 + p ** e * j)
            if a2 == 0:
                continue
            val = h_vee_p(model, OscillationQuery(s, a2, p, depth)).value
            if abs(val - base) > 1e-12 * max(1.0, abs(base)):
                same = False
                break
        if same:
            return ConstancyProbe(e, allowed, e <= allowed)
    return ConstancyProbe(None, allowed, False)
