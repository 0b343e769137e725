"""Local Tamagawa densities, the Tamagawa number and Peyre's constant for ex1.

The measure at a place v is prod_j H_{D_j,v}^{-d_j} |omega|_v with
omega = db da / a, so |omega|_v = da dc in the coordinates (a, c = b/a).  The
surface is split, so the Picard L-function is zeta(s)^r, L*(1) = 1 and the
convergence factors are (1 - 1/p)^r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import sympy
from scipy import integrate

from .cone_calculus import alpha_peyre
from .heights import RationalPoint, local_heights_finite
from .surface_models import SurfaceModel

TAIL_CONSTANT = 3  # |log((1 - 1/p)^2 tau_p)| <= 3 / p^2 for ex1


def _require_ex1(model: SurfaceModel) -> None:
    if model.height_model != "ex1":
        raise ValueError(f"Tamagawa computations are only implemented for ex1, not {model.name}")


@dataclass(frozen=True)
class ArchResult:
    value: float
    error: float


def tau_arch(model: SurfaceModel, tol: float = 1e-8) -> ArchResult:
    """Real density, after the inner integral over b: pi * int da / (1 + a^2)."""
    _require_ex1(model)
    if tol <= 0:
        raise ValueError("tol must be positive")
    val, err = integrate.quad(lambda a: 1.0 / (1.0 + a * a), 0.0, math.inf, epsabs=tol / 20, epsrel=0, limit=200)
    value = 2 * math.pi * val
    error = 2 * math.pi * err
    if error > tol:
        raise RuntimeError(f"quadrature error {error:.3e} exceeds tolerance {tol:.3e}")
    return ArchResult(value, error)


def tau_arch_2d(model: SurfaceModel, tol: float = 1e-7) -> float:
    """The same density by direct two-dimensional quadrature of the height integrand."""
    _require_ex1(model)

    def f(b, a):
        # H_{D2}^{-2} H_{D3}^{-2} / |a| for a > 0
        return a / ((1.0 + a * a) * (a * a + b * b))

    val, _ = integrate.dblquad(f, 0.0, math.inf, -math.inf, math.inf, epsabs=tol / 10, epsrel=1e-10)
    return 2 * val


def _one_dim_density(p: int, exponent: int) -> Fraction:
    """Sum over m of meas{v(x) = m} * max(1, p^-m)^-exponent, exactly.

    The strata m >= 0 contribute 1; the strata m = -k < 0 contribute
    (1 - 1/p) p^k p^(-exponent k), a geometric series in p^(1 - exponent).
    """
    if exponent <= 1:
        raise ValueError("density diverges for exponent <= 1")
    ratio = Fraction(1, p ** (exponent - 1))
    return 1 + (1 - Fraction(1, p)) * ratio / (1 - ratio)


def tau_p(model: SurfaceModel, p: int) -> Fraction:
    """Exact p-adic density, stratified by v_p(a) and v_p(c)."""
    _require_ex1(model)
    if not sympy.isprime(p):
        raise ValueError(f"{p} is not prime")
    d = model.d
    # H_{D1}^{-d1} is trivial (d1 = 0); H_{D2} depends on a and H_{D3} on c.
    if d[0] != 0:
        raise ValueError("unexpected anticanonical multiplicity on the divisor a = 0")
    return _one_dim_density(p, d[1]) * _one_dim_density(p, d[2])


def tau_p_residue_oracle(model: SurfaceModel, p: int, level: int = 3) -> Fraction:
    """Brute-force density from residues mod p^level in both charts of each P^1 factor.

    Each ball of radius p^-level contributes p^-level times the integrand at
    a representative; the integrand, including chart Jacobians, is constant
    on such balls for this model.
    """
    _require_ex1(model)
    q = p ** level
    mass = Fraction(1, q)

    def chart_points():
        # (coordinate value, jacobian) pairs covering P^1(Q_p) minus infinity
        for x in range(q):
            rep = x if x else q
            yield Fraction(rep), Fraction(1)
        for y in range(0, q, p):
            rep = y if y else q
            inv = Fraction(1, rep)
            # a = 1/y,  da = |y|^-2 dy
            yield inv, Fraction(p) ** (2 * _v(rep, p))

    total = Fraction(0)
    pts = list(chart_points())
    for a, ja in pts:
        for c, jc in pts:
            H = local_heights_finite(model, RationalPoint(a, a * c), p).values
            dens = Fraction(1)
            for h, dj in zip(H, model.d):
                dens /= Fraction(h) ** dj
            total += dens * ja * jc * mass * mass
    return total


def _v(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


@dataclass(frozen=True)
class TamagawaResult:
    value: float
    tail_bound: float
    tau_inf: float
    euler_product: float
    P_max: int


def tamagawa_number(
    model: SurfaceModel,
    P_max: int = 10_000,
    tau_p_fn: Callable[[int], Fraction] | None = None,
    tau_inf: float | None = None,
) -> TamagawaResult:
    """tau_inf * prod_{p <= P_max} (1 - 1/p)^r tau_p with a multiplicative tail bound.

    Beyond P_max the factors satisfy |log| <= 3/p^2, and sum_{p > P} 3/p^2 <= 3/P,
    so the full product lies within value * (exp(3/P) - 1) of the truncation.
    """
    if P_max < 100:
        raise ValueError("P_max must be at least 100")
    r = model.rank_pic
    if tau_p_fn is None:
        _require_ex1(model)
        tau_p_fn = lambda p: tau_p(model, p)  # noqa: E731
    if tau_inf is None:
        tau_inf = tau_arch(model).value
    logs = []
    for p in sympy.primerange(2, P_max + 1):
        p = int(p)
        f = (1 - Fraction(1, p)) ** r * Fraction(tau_p_fn(p))
        logs.append(math.log(f.numerator) - math.log(f.denominator))
    euler = math.exp(math.fsum(logs))
    value = tau_inf * euler
    bound = value * math.expm1(TAIL_CONSTANT / P_max)
    return TamagawaResult(value, bound, tau_inf, euler, P_max)


@dataclass(frozen=True)
class PeyreResult:
    value: float
    tail_bound: float
    alpha: Fraction
    tau: TamagawaResult
    rank: int


def peyre_constant(model: SurfaceModel, P_max: int = 100_000) -> PeyreResult:
    """alpha * tau / (rank - 1)!, with beta = 1 for these rational surfaces."""
    _require_ex1(model)
    alpha = alpha_peyre(model)
    tau = tamagawa_number(model, P_max)
    scale = float(alpha) / math.factorial(model.rank_pic - 1)
    return PeyreResult(scale * tau.value, scale * tau.tail_bound, alpha, tau, model.rank_pic)
