"""Dual cones of div(a), their exponential volumes, and shifted integrals.

For an index set I with divisor orders u = u|_I the dual cone is

    {kappa in R^I : kappa >= 0, kappa . u = 0}

and the X-function is its Laplace transform with respect to the lattice
measure on (R^I / R u)^*.  Writing P and N for the indices with u > 0 and
u < 0 and Z for those with u = 0, the cone is the orthant on Z times the cone
over a product of simplices on P x N, so it has an explicit triangulation
by monotone staircase paths.  Every simplex contributes

    |det| / prod_w (w . z)

with det measured in the lattice Z^I intersected with the hyperplane u^perp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .surface_models import SurfaceModel


class QuadratureError(RuntimeError):
    """The shifted integral could not be resolved to the requested tolerance."""


@dataclass(frozen=True)
class ConeSpec:
    index_set: tuple[int, ...]
    u_restricted: tuple[int, ...]
    rays: tuple[tuple[int, ...], ...]
    simplices: tuple[tuple[int, ...], ...]  # indices into rays
    determinants: tuple[int, ...]
    gcd_u: int
    is_identically_zero: bool

    @property
    def dim(self) -> int:
        n = len(self.index_set)
        return n - (1 if any(self.u_restricted) else 0)


@dataclass(frozen=True)
class XValue:
    value: object  # Fraction, float or complex; None at a pole
    is_pole: bool
    is_identically_zero: bool


def _primitive(vec: Sequence[int]) -> tuple[int, ...]:
    g = reduce(math.gcd, (abs(x) for x in vec), 0)
    return tuple(x // g for x in vec) if g > 1 else tuple(vec)


def _int_det(rows: list[list[int]]) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _lattice_det(gens: list[tuple[int, ...]], u: tuple[int, ...]) -> int:
    """Index of the span of gens in Z^n intersected with u^perp.

    The covolume of that lattice is the length of the primitive vector
    u / gcd(u), so the index is sqrt(Gram(gens)) / |u/g|.
    """
    if not gens:
        return 1
    gram = [[sum(a * b for a, b in zip(x, y)) for y in gens] for x in gens]
    G = _int_det(gram)
    if not any(u):
        norm2 = 1
    else:
        up = _primitive([abs(x) for x in u])
        norm2 = sum(x * x for x in up)
    q, r = divmod(G, norm2)
    if r:
        raise ArithmeticError("Gram determinant not divisible by the lattice covolume")
    s = math.isqrt(q)
    if s * s != q:
        raise ArithmeticError("lattice index is not an integer")
    return s


def _staircase_paths(p: int, n: int):
    """Monotone lattice paths from (0, 0) to (p-1, n-1), as lists of cells."""
    steps = p - 1 + n - 1
    for rights in combinations(range(steps), p - 1):
        i = k = 0
        cells = [(0, 0)]
        rset = set(rights)
        for s in range(steps):
            if s in rset:
                i += 1
            else:
                k += 1
            cells.append((i, k))
        yield cells


def dual_cone(I: Sequence[int], u: Sequence[int]) -> ConeSpec:
    """Extreme rays and a unimodular-by-construction triangulation of the dual cone.

    u is the full vector on J; I selects the coordinates.
    """
    I = tuple(I)
    if len(I) > 10:
        raise ValueError("index sets larger than 10 are not supported")
    uI = tuple(int(u[j]) for j in I)
    n = len(I)
    g = reduce(math.gcd, (abs(x) for x in uI), 0)
    if n == 0:
        return ConeSpec(I, uI, (), ((),), (1,), 0, False)
    pos = [t for t in range(n) if uI[t] > 0]
    neg = [t for t in range(n) if uI[t] < 0]
    zer = [t for t in range(n) if uI[t] == 0]

    def e(t):
        return tuple(1 if s == t else 0 for s in range(n))

    rays: list[tuple[int, ...]] = [e(t) for t in zer]
    nonzero = len(pos) + len(neg)
    deficient = nonzero >= 2 and (not pos or not neg)
    if deficient:
        return ConeSpec(I, uI, tuple(rays), (), (), g, True)
    if not pos or not neg:
        # at most one nonzero coordinate, forced to vanish
        simplex = tuple(range(len(rays)))
        det = _lattice_det(rays, uI)
        return ConeSpec(I, uI, tuple(rays), (simplex,), (det,), g, False)

    ray_index = {}
    for a, i in enumerate(pos):
        for b, k in enumerate(neg):
            vec = [0] * n
            vec[i] = -uI[k]
            vec[k] = uI[i]
            ray_index[(a, b)] = len(rays)
            rays.append(_primitive(vec))
    base = list(range(len(zer)))
    simplices = []
    dets = []
    for path in _staircase_paths(len(pos), len(neg)):
        simplex = tuple(base + [ray_index[c] for c in path])
        simplices.append(simplex)
        dets.append(_lattice_det([rays[r] for r in simplex], uI))
    return ConeSpec(I, uI, tuple(rays), tuple(simplices), tuple(dets), g, False)


def _exactify(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return x


def x_function(cone: ConeSpec, z: Sequence) -> XValue:
    """Evaluate the X-function of the cone at z, a vector on the index set.

    Rational input gives an exact Fraction; floats or complex numbers give
    a float or complex result.  When gcd(u|_I) = g > 1 the lattice measure is
    divided by g so that div(a)|_I has unit length.
    """
    if cone.is_identically_zero:
        return XValue(Fraction(0), False, True)
    if len(z) != len(cone.index_set):
        raise ValueError("z must have one entry per index in the cone")
    zz = [_exactify(x) for x in z]
    forms = []
    for r in cone.rays:
        forms.append(sum((ri * zi for ri, zi in zip(r, zz) if ri), Fraction(0)))
    if any(f == 0 for f in forms):
        return XValue(None, True, False)
    total = Fraction(0)
    for simplex, det in zip(cone.simplices, cone.determinants):
        term = Fraction(det)
        for r in simplex:
            term = term / forms[r]
        total = total + term
    if cone.gcd_u > 1:
        total = total / cone.gcd_u
    return XValue(total, False, False)


def alpha_peyre(model: SurfaceModel) -> Fraction:
    """The X-function of the full dual cone at the anticanonical vector d."""
    J = tuple(range(len(model)))
    cone = dual_cone(J, model.u)
    xv = x_function(cone, model.d)
    if xv.is_pole or not isinstance(xv.value, Fraction) or xv.value <= 0:
        raise ArithmeticError(f"alpha is not a positive rational for {model.name}: {xv}")
    return xv.value


def model_cone(model: SurfaceModel, I: Sequence[int] | None = None) -> ConeSpec:
    if I is None:
        I = range(len(model))
    return dual_cone(tuple(I), model.u)


# -- shifted integrals -------------------------------------------------------


def orthant_g(I: Sequence[int], u: Sequence[int]) -> Callable[[np.ndarray], np.ndarray]:
    """The orthant function g_I as a vectorized callable on arrays z[..., I].

    g_I is prod 1/z_j, except that when exactly one index of I has u_j != 0
    each factor becomes 1/(z_j (1 + z_j)).
    """
    I = tuple(I)
    nonzero = sum(1 for j in I if u[j] != 0)
    damped = nonzero == 1

    def g(zs: np.ndarray) -> np.ndarray:
        out = np.ones(zs.shape[:-1], dtype=complex)
        for j in I:
            zj = zs[..., j]
            out = out / zj
            if damped:
                out = out / (1 + zj)
        return out

    return g


@dataclass(frozen=True)
class ShiftedIntegral:
    value: complex
    error: float
    finite_part: complex
    tail: complex
    steps: int


def _trapezoid(f, T: float, n: int) -> complex:
    t = np.linspace(-T, T, n + 1)
    y = f(t)
    if not np.all(np.isfinite(y)):
        raise QuadratureError("non-finite sample on the shift line")
    h = 2 * T / n
    return complex(h * (y.sum() - 0.5 * (y[0] + y[-1])))


def _line_integral(f, T: float, steps: int, tol: float, max_steps: int):
    n = steps
    prev = _trapezoid(f, T, n)
    while True:
        n *= 2
        cur = _trapezoid(f, T, n)
        err = abs(cur - prev)
        if err <= tol * 1e-2 or n >= max_steps:
            return cur, err, n
        prev = cur


def shifted_integral_numeric(
    g: Callable[[np.ndarray], np.ndarray],
    z0: Sequence[complex],
    u: Sequence[int],
    T: float = 200.0,
    steps: int = 1024,
    tol: float = 1e-6,
    max_steps: int = 1 << 22,
    T_growth: int = 8,
) -> ShiftedIntegral:
    """Approximate (2 pi)^-1 int_R g(z0 + i t u) dt.

    The integral over [-T, T] uses the trapezoid rule with doubling.  Beyond
    T the integrand is modelled as C_pm / t^2, with C_pm read off from the
    samples at t = +-T, which adds (C_+ + C_-) / T.  The reported error
    combines the last doubling difference with the change in the total when
    the same procedure is run on [-T/2, T/2].  If that exceeds tol, T is
    doubled, up to T_growth times its initial value.
    """
    if T <= 0 or steps <= 0:
        raise ValueError("T and steps must be positive")
    z0 = np.asarray(z0, dtype=complex)
    uu = np.asarray(u, dtype=float)

    def f(t):
        zs = z0[None, :] + 1j * np.asarray(t)[:, None] * uu[None, :]
        return np.asarray(g(zs), dtype=complex)

    def total(TT):
        fin, err, n = _line_integral(f, TT, steps, tol, max_steps)
        ends = f(np.array([-TT, TT]))
        if not np.all(np.isfinite(ends)):
            raise QuadratureError("non-finite sample at the truncation point")
        tail = complex((ends[0] + ends[1]) * TT)
        return fin, tail, err, n

    # double T (at most T_growth times) until the estimate meets tol
    fin_h, tail_h, err_h, _ = total(T / 2)
    TT = T
    while True:
        fin, tail, err, n = total(TT)
        value = (fin + tail) / (2 * math.pi)
        coarse = (fin_h + tail_h) / (2 * math.pi)
        estimate = (err + err_h) / (2 * math.pi) + abs(value - coarse)
        if estimate <= tol:
            break
        if TT >= T * T_growth:
            raise QuadratureError(f"error estimate {estimate:.3e} exceeds tolerance {tol:.3e}")
        fin_h, tail_h, err_h = fin, tail, err
        TT *= 2
    return ShiftedIntegral(complex(value), float(estimate), fin / (2 * math.pi), tail / (2 * math.pi), n)


def shifted_vs_x(model: SurfaceModel, z0: Sequence[float], I: Sequence[int] | None = None, tol: float = 1e-6):
    """Compare the shifted integral of g_I with the X-function at a real point z0 on J."""
    if I is None:
        I = tuple(range(len(model)))
    I = tuple(I)
    u = model.u
    g = orthant_g(I, u)
    s = shifted_integral_numeric(g, z0, u, tol=tol)
    cone = dual_cone(I, u)
    xv = x_function(cone, [z0[j] for j in I])
    x = float(xv.value) if not xv.is_pole else float("nan")
    nonzero = sum(1 for j in I if u[j] != 0)
    expected = 0.0 if nonzero == 1 else x
    return s, expected

