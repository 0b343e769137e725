"""Counting points of bounded anticanonical height on ex1.

A point is a pair of primitive vectors (a1, a0) and (c1, c0) with a0, c0 >= 1
and a1 != 0, and its height is (a0^2 + a1^2)(c0^2 + c1^2).  The count

    N(B) = sum over outer pairs with n_a = a0^2 + a1^2 <= B of F(B // n_a)

uses F(Y) = #{primitive (c1, c0), c0 >= 1, c0^2 + c1^2 <= Y}, tabulated once
from a scan of the disk.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .surface_models import SurfaceModel


def _check_ex1(model: SurfaceModel | None) -> None:
    if model is not None and model.height_model != "ex1":
        raise ValueError(f"point counting is only implemented for ex1, not {model.name}")


def _primitive_pairs(limit: int):
    """All (x, y) with y >= 1, gcd(x, y) = 1 and x^2 + y^2 <= limit, as norm and x arrays."""
    r = math.isqrt(limit)
    y = np.arange(1, r + 1, dtype=np.int64)
    x = np.arange(-r, r + 1, dtype=np.int64)
    X, Y = np.meshgrid(x, y, indexing="xy")
    n = X * X + Y * Y
    keep = (n <= limit) & (np.gcd(X, Y) == 1)
    return n[keep], X[keep], Y[keep]


@lru_cache(maxsize=4)
def _norm_counts(limit: int) -> np.ndarray:
    """r[n] = number of primitive (x, y), y >= 1, with x^2 + y^2 = n, for n <= limit."""
    n, _, _ = _primitive_pairs(limit)
    return np.bincount(n, minlength=limit + 1).astype(np.int64)


def _disk_table(limit: int) -> np.ndarray:
    # reuse a larger cached table if one exists
    size = 1 << max(4, (limit - 1).bit_length())
    return np.cumsum(_norm_counts(size)[: limit + 1])


def _partial_count(B: int, residue: int, modulus: int) -> int:
    F = _disk_table(B)
    r = math.isqrt(B)
    total = 0
    for a0 in range(1 + residue, r + 1, modulus):
        a1 = np.arange(-r, r + 1, dtype=np.int64)
        a1 = a1[a1 != 0]
        n = a1 * a1 + a0 * a0
        keep = (n <= B) & (np.gcd(a1, a0) == 1)
        total += int(F[B // n[keep]].sum())
    return total


def count_sharp(B: int, model: SurfaceModel | None = None, workers: int = 1) -> int:
    """Exact number of points of height at most B.

    Work is split by a0 modulo the number of workers; the total does not
    depend on the split.
    """
    _check_ex1(model)
    B = int(B)
    if B < 0:
        raise ValueError("B must be nonnegative")
    if B < 2:
        return 0
    workers = max(1, int(workers))
    if workers == 1:
        return _partial_count(B, 0, 1)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = ex.map(_partial_count, [B] * workers, range(workers), [workers] * workers)
        return sum(parts)


def height_histogram(limit: int) -> np.ndarray:
    """hist[h] = number of points of height exactly h, for h <= limit."""
    r = _norm_counts(max(limit, 1))[: limit + 1]
    rA = r.copy()
    rA[1] -= 1  # drop (a1, a0) = (0, 1)
    hist = np.zeros(limit + 1, dtype=np.int64)
    for na in np.nonzero(rA)[0]:
        na = int(na)
        kmax = limit // na
        hist[na::na][:kmax] += rA[na] * r[1 : kmax + 1]
    return hist


def brute_force_heights(B: int) -> list[int]:
    """Heights of all points with height <= B, by a direct four-variable scan."""
    out = []
    r = math.isqrt(B)
    for a0 in range(1, r + 1):
        for a1 in range(-r, r + 1):
            if a1 == 0 or math.gcd(a0, a1) != 1:
                continue
            na = a0 * a0 + a1 * a1
            if na > B:
                continue
            s = math.isqrt(B // na)
            for c0 in range(1, s + 1):
                for c1 in range(-s, s + 1):
                    if math.gcd(c0, c1) != 1:
                        continue
                    h = na * (c0 * c0 + c1 * c1)
                    if h <= B:
                        out.append(h)
    return out


# -- smoothed counts ---------------------------------------------------------


@dataclass(frozen=True)
class SmoothWeight:
    func: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]
    name: str = "custom"


def _bump_raw(t):
    t = np.asarray(t, dtype=float)
    x = 2.0 * t - 3.0
    out = np.zeros_like(t)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


@lru_cache(maxsize=1)
def bump_normalizer() -> float:
    """Integral of exp(-1/(1-(2t-3)^2)) over [1, 2]."""
    val, _ = integrate.quad(lambda t: float(_bump_raw(np.array([t]))[0]), 1.0, 2.0, epsabs=1e-14, epsrel=1e-13)
    return val


def default_weight() -> SmoothWeight:
    """Standard bump on [1, 2] with unit integral."""
    c = bump_normalizer()
    return SmoothWeight(lambda t: _bump_raw(t) / c, (1.0, 2.0), "bump[1,2]")


def count_smoothed(B: float, weight: SmoothWeight | None = None, model: SurfaceModel | None = None) -> float:
    """sum over points x of w(H(x) / B), using exact heights up to r B."""
    _check_ex1(model)
    if weight is None:
        weight = default_weight()
    lo, hi = weight.support
    if not (math.isfinite(lo) and math.isfinite(hi)) or not (0 < lo < hi):
        raise ValueError("weight support must be a bounded interval [l, r] with 0 < l < r")
    limit = int(math.floor(hi * B))
    if limit < 2:
        return 0.0
    hist = height_histogram(limit)
    hs = np.nonzero(hist)[0]
    vals = np.asarray(weight.func(hs / B), dtype=float)
    return math.fsum((hist[hs] * vals).tolist())


# -- asymptotic fit ----------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticFit:
    c1: float
    c2: float
    residuals: tuple[float, ...]


def asymptotic_fit(samples: Sequence[tuple[float, float]]) -> AsymptoticFit:
    """Least-squares fit of N(B) ~ c1 B log B + c2 B.

    The model is fitted as N/B = c1 log B + c2, i.e. with weights 1/B, so
    that every point of a geometric grid counts equally.  Residuals are
    relative, (N - fit) / N.
    """
    if len(samples) < 3:
        raise ValueError("asymptotic_fit needs at least 3 samples")
    B = np.array([float(s[0]) for s in samples])
    N = np.array([float(s[1]) for s in samples])
    A = np.column_stack([np.log(B), np.ones_like(B)])
    if np.linalg.matrix_rank(A) < 2:
        raise ValueError("degenerate B grid: design matrix is singular")
    coef, *_ = np.linalg.lstsq(A, N / B, rcond=None)
    fit = B * (coef[0] * np.log(B) + coef[1])
    res = tuple(float(x) for x in (N - fit) / N)
    return AsymptoticFit(float(coef[0]), float(coef[1]), res)
