"""Brute-force exponential sums and the bounds they are compared against.

Phases are reduced exactly (integer residues r mod q) before a single
trigonometric evaluation e(r/q), so no angle drift accumulates for large q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy
from scipy import special

MAX_LATTICE = 10**8


class SizeError(ValueError):
    """The requested sum exceeds the enumeration cap."""


def _e(residues: np.ndarray, q: int) -> np.ndarray:
    return np.exp(2j * np.pi * (residues.astype(float) / q))


def _fsum_complex(z: np.ndarray) -> complex:
    z = np.asarray(z, dtype=complex).ravel()
    return complex(math.fsum(z.real.tolist()), math.fsum(z.imag.tolist()))


# -- Weyl sums ---------------------------------------------------------------


@dataclass(frozen=True)
class WeylSumSpec:
    exponents: tuple[int, ...]
    M: tuple[int, ...]
    y: int
    q: int
    progressions: tuple[tuple[int, int], ...] | None = None  # (modulus, residue)
    coprimality_Q: int | None = None
    intervals: tuple[tuple[int, int], ...] | None = None  # explicit [lo, hi) overrides

    def __post_init__(self):
        K = len(self.exponents)
        if K == 0 or len(self.M) != K:
            raise ValueError("exponents and M must have the same positive length")
        if any(u < 1 for u in self.exponents) or any(m < 1 for m in self.M):
            raise ValueError("exponents and box sizes must be positive")
        if self.q < 1 or self.y < 1 or math.gcd(self.y, self.q) != 1:
            raise ValueError("y and q must be coprime positive integers")
        if self.progressions is not None and len(self.progressions) != K:
            raise ValueError("one progression per variable")
        if self.intervals is not None and len(self.intervals) != K:
            raise ValueError("one interval per variable")

    @property
    def K(self) -> int:
        return len(self.exponents)

    def ranges(self) -> list[np.ndarray]:
        out = []
        for i in range(self.K):
            lo, hi = self.intervals[i] if self.intervals else (self.M[i], 2 * self.M[i])
            xs = np.arange(lo, hi, dtype=object)
            if self.progressions:
                mod, res = self.progressions[i]
                xs = np.array([x for x in xs if x % mod == res % mod], dtype=object)
            out.append(xs)
        return out


def _monomial_residues(spec: WeylSumSpec, order: Sequence[int]):
    """Residues y * prod m_i^u_i mod q over the product set, and the admissibility mask.

    The product set is flattened with the variables nested in the given order.
    """
    q = spec.q
    rs = spec.ranges()
    size = math.prod(len(r) for r in rs)
    if size > MAX_LATTICE:
        raise SizeError(f"lattice of size {size} exceeds the cap {MAX_LATTICE}")
    dtype = np.int64 if q < (1 << 31) else object
    idx = np.meshgrid(*[np.arange(len(r)) for r in rs], indexing="ij")
    idx = [np.transpose(g, axes=list(order)).reshape(-1) for g in idx]
    acc = np.full(size, spec.y % q, dtype=dtype)
    for i in order:
        pw = np.array([pow(int(x), spec.exponents[i], q) for x in rs[i]], dtype=dtype)
        acc = acc * pw[idx[i]] % q
    mask = np.ones(size, dtype=bool)
    if spec.coprimality_Q is not None:
        vals = [np.array([int(x) for x in r], dtype=np.int64)[ix] for r, ix in zip(rs, idx)]
        for a, va in enumerate(vals):
            mask &= np.gcd(va, spec.coprimality_Q) == 1
            for vb in vals[a + 1:]:
                mask &= np.gcd(va, vb) == 1
    return acc, mask


def weyl_sum(spec: WeylSumSpec, order: Sequence[int] | None = None) -> complex:
    """sum over the box of e(y m_1^u_1 ... m_K^u_K / q)."""
    if order is None:
        order = range(spec.K)
    order = list(order)
    if sorted(order) != list(range(spec.K)):
        raise ValueError("order must be a permutation of the variables")
    acc, mask = _monomial_residues(spec, order)
    res = acc[mask]
    if res.dtype != object:
        return _fsum_complex(_e(res, spec.q))
    # int / int division is correctly rounded even for huge q
    frac = np.array([int(r) / spec.q for r in res], dtype=float)
    return _fsum_complex(np.exp(2j * np.pi * frac))


@dataclass(frozen=True)
class WeylReport:
    lhs_abs: float
    rhs_core: float
    ratio: float
    selected: tuple[int, ...]
    prop_rhs: float
    prop_ratio: float
    eta: float


def select_indices(spec: WeylSumSpec, rho: float | None = None) -> tuple[int, ...]:
    """I = {i : M_i >= Y^rho}, Y = min(q, prod M^u / q), with rho = 1 / (2 sum u) by default."""
    if rho is None:
        rho = 1.0 / (2 * sum(spec.exponents))
    Y = min(spec.q, math.prod(m ** u for m, u in zip(spec.M, spec.exponents)) / spec.q)
    Y = max(Y, 1.0)
    I = tuple(i for i in range(spec.K) if spec.M[i] >= Y ** rho)
    return I or tuple(range(spec.K))


def weyl_bound_report(spec: WeylSumSpec, I: Sequence[int] | None = None, eta_probe: float | None = None) -> WeylReport:
    """Compare |sum| with (M_1...M_K) / min(q, prod M^u / q)^eta and with the subset form.

    The subset form uses a nonempty I and the exponent 1 / 2^K(I),
    K(I) = sum_{i in I} (u_i - 1).
    """
    if I is None:
        I = select_indices(spec)
    I = tuple(sorted(set(I)))
    if not I:
        raise ValueError("I must be nonempty")
    K_all = sum(u - 1 for u in spec.exponents)
    if eta_probe is None:
        eta_probe = 1.0 / 2 ** K_all
    lhs = abs(weyl_sum(spec))
    box = float(math.prod(spec.M))
    mono = math.prod(m ** u for m, u in zip(spec.M, spec.exponents))
    core_min = min(Fraction(spec.q), Fraction(mono, spec.q))
    rhs = box / float(core_min) ** eta_probe
    KI = sum(spec.exponents[i] - 1 for i in I)
    outside = math.prod(spec.M[i] ** spec.exponents[i] for i in range(spec.K) if i not in I)
    inside = math.prod(spec.M[i] ** spec.exponents[i] for i in I)
    prop_min = min(Fraction(spec.q, outside), Fraction(min(spec.M[i] for i in I)), Fraction(inside, spec.q))
    prop_rhs = box / float(prop_min) ** (1.0 / 2 ** KI)
    return WeylReport(lhs, rhs, lhs / rhs, I, prop_rhs, lhs / prop_rhs, eta_probe)


def prime_near(x: float) -> int:
    """The prime closest to x (ties go down)."""
    x = max(2, int(round(x)))
    lo = sympy.prevprime(x + 1) if x > 2 else 2
    hi = sympy.nextprime(x - 1)
    return int(lo if x - lo <= hi - x else hi)


# -- Gauss averages ----------------------------------------------------------


@dataclass(frozen=True)
class GaussAverage:
    value: complex
    certified_bound: float
    unit_sum: complex
    roots_of_unity: int
    phi: int


def _unit_residue(C, N: int) -> int:
    C = Fraction(C)
    if math.gcd(C.numerator, N) != 1 or math.gcd(C.denominator, N) != 1:
        raise ValueError(f"C = {C} is not a unit at the primes of N = {N}")
    return C.numerator * pow(C.denominator, -1, N) % N


def _units(N: int) -> np.ndarray:
    x = np.arange(1, N + 1, dtype=np.int64) % N
    return x[np.gcd(x, N) == 1]


def _powmod(x: np.ndarray, u: int, N: int) -> np.ndarray:
    if N >= (1 << 31):
        return np.array([pow(int(a), u, N) for a in x], dtype=object)
    out = np.ones_like(x)
    base = x % N
    e = u
    while e:
        if e & 1:
            out = out * base % N
        base = base * base % N
        e >>= 1
    return out


def roots_of_unity_count(u: int, N: int) -> int:
    """#{x mod N : x^u = 1}, counted by enumeration."""
    x = _units(N)
    return int(np.count_nonzero(_powmod(x, u, N) == 1 % N))


def gauss_average(u: int, N: int, C=1) -> GaussAverage:
    """Average of e(x^u C / N) over units x mod N, with the |roots| sqrt(N) / phi(N) bound.

    C must be a unit at every prime dividing N; its class mod N is used.
    """
    if u < 1 or N < 2:
        raise ValueError("need u >= 1 and N >= 2")
    c = _unit_residue(C, N)
    x = _units(N)
    r = _powmod(x, u, N) * c % N
    S = _fsum_complex(_e(np.asarray(r, dtype=np.int64), N))
    h = int(np.count_nonzero(_powmod(x, u, N) == 1 % N))
    phi = len(x)
    return GaussAverage(S / phi, h * math.sqrt(N) / phi, S, h, phi)


def gauss_check_prime_powers(u_max: int = 4, N_max: int = 10_000) -> list[tuple[int, int, float, float]]:
    """Every (u, N) with N a prime power where |sum over units| > |roots| sqrt(N)."""
    bad = []
    for N in range(2, N_max + 1):
        if len(sympy.factorint(N)) != 1:
            continue
        for u in range(1, u_max + 1):
            g = gauss_average(u, N)
            if abs(g.unit_sum) > g.roots_of_unity * math.sqrt(N) * (1 + 1e-12):
                bad.append((u, N, abs(g.unit_sum), g.roots_of_unity * math.sqrt(N)))
    return bad


# -- Poisson equidistribution ------------------------------------------------


@dataclass(frozen=True)
class BumpSpec:
    """w(t) = Y * phi(A (t - 1) / 9) with phi the unit bump on [0, 1].

    w is supported in [1, 1 + 9/A], a subinterval of [1, 10], and its B-th
    derivative is of size (A/9)^B Y.
    """

    A: int = 1
    Y: float = 1.0

    def __call__(self, t: np.ndarray) -> np.ndarray:
        x = self.A * (np.asarray(t, dtype=float) - 1.0) / 9.0
        out = np.zeros_like(x)
        inside = (x > 0) & (x < 1)
        xi = x[inside]
        out[inside] = self.Y * np.exp(-1.0 / (xi * (1 - xi)))
        return out


@dataclass(frozen=True)
class PoissonResult:
    lhs: float
    reference: float
    ratio: float


@lru_cache(maxsize=4096)
def residue_class_average(y: int, q: int, Q: int) -> Fraction:
    """Proportion of n coprime to Q that satisfy n = y mod q.

    Computed over Z / lcm(q, Q), where both conditions are periodic.
    """
    L = q * Q // math.gcd(q, Q)
    n = np.arange(L, dtype=np.int64)
    coprime = np.gcd(n, Q) == 1
    total = int(np.count_nonzero(coprime))
    if total == 0:
        raise ValueError("no residues coprime to Q")
    hits = int(np.count_nonzero(coprime & (n % q == y % q)))
    return Fraction(hits, total)


def poisson_residual(w: BumpSpec | None, M: int, q: int, Q: int, y: int) -> PoissonResult:
    """sum over m coprime to Q of w(m/M) (1[m = y mod q] - E), against A Y q."""
    if q < 1 or Q < 1 or M < 1:
        raise ValueError("M, q, Q must be positive")
    if math.gcd(y, q) != 1:
        raise ValueError("y and q must be coprime")
    if w is None:
        w = BumpSpec()
    E = residue_class_average(y, q, Q)
    m = np.arange(M, 10 * M + 1, dtype=np.int64)
    m = m[np.gcd(m, Q) == 1]
    wv = w(m / M)
    hit = (m % q) == (y % q)
    coeff_hit = float(1 - E)
    coeff_miss = float(-E)
    terms = np.where(hit, coeff_hit, coeff_miss) * wv
    lhs = abs(math.fsum(terms.tolist()))
    ref = w.A * w.Y * q
    return PoissonResult(lhs, ref, lhs / ref if ref else 0.0)


# -- Clausen series ----------------------------------------------------------


@dataclass(frozen=True)
class ClausenPartial:
    value: complex
    last_term: float
    tail_bound: float


def _phase_theta(m: np.ndarray, theta: Fraction) -> np.ndarray:
    r = (m * theta.numerator) % theta.denominator
    return _e(r, theta.denominator)


def clausen_partial(theta, s: complex, M: int) -> ClausenPartial:
    """sum_{m <= M} e(m theta) m^-s with compensated summation.

    The tail bound is M^(1 - sigma) / (sigma - 1) for integral theta and
    sigma > 1, and |s| M^-sigma / (sigma |sin(pi theta)|) by Abel summation
    for theta not integral; otherwise it is infinite.
    """
    theta = Fraction(theta)
    s = complex(s)
    if s.real <= 0:
        raise ValueError("need Re(s) > 0")
    if M < 1:
        raise ValueError("need M >= 1")
    m = np.arange(1, M + 1, dtype=np.int64)
    terms = _phase_theta(m, theta) * np.exp(-s * np.log(m.astype(float)))
    value = _fsum_complex(terms)
    sig = s.real
    last = float(M ** (-sig))
    if theta.denominator == 1:
        tail = M ** (1 - sig) / (sig - 1) if sig > 1 else math.inf
    else:
        tail = abs(s) * M ** (-sig) / (sig * abs(math.sin(math.pi * float(theta))))
    return ClausenPartial(value, last, tail)


# -- double series -----------------------------------------------------------


def divisor_function_table(k: int, n: int) -> np.ndarray:
    """tau_k(m) for 0 <= m <= n by repeated Dirichlet convolution with 1."""
    if k < 1:
        raise ValueError("k must be >= 1")
    t = np.zeros(n + 1, dtype=np.int64)
    t[1:] = 1
    for _ in range(k - 1):
        nxt = np.zeros(n + 1, dtype=np.int64)
        for d in range(1, n + 1):
            if t[d]:
                nxt[d::d] += t[d]
        t = nxt
    return t


def _tail_sum_bound(k: int, sigma: float, X: int) -> float:
    """Bound for sum_{m > X} tau_k(m) m^-sigma.

    Uses sum_{m <= x} tau_k(m) <= x (1 + log x)^(k-1) and partial summation:
    the tail is at most sigma * int_X^inf t^-sigma (1 + log t)^(k-1) dt,
    integrated in closed form.
    """
    L = math.log(X)
    a = sigma - 1
    acc = 0.0
    for r in range(k):
        acc += math.factorial(k - 1) / math.factorial(k - 1 - r) * (1 + L) ** (k - 1 - r) / a ** (r + 1)
    return sigma * math.exp(-a * L) * acc


@dataclass(frozen=True)
class DoublePartial:
    value: complex
    tail_bound: float
    convergent: bool


def double_series_partial(i: int, j: int, s1: complex, s2: complex, M: int, N: int, raw: bool = False) -> DoublePartial:
    """sum_{m <= M, n <= N} e(m/n) tau_i(m) tau_j(n) m^-s1 n^-s2.

    In convergent mode (Re s1, Re s2 > 1) the tail outside the box is at most
    T_i(M) zeta(sigma2)^j + zeta(sigma1)^i T_j(N), where T_k is the divisor
    tail bound above.  raw=True allows other s and reports an infinite bound.
    """
    s1, s2 = complex(s1), complex(s2)
    convergent = s1.real > 1 and s2.real > 1
    if not convergent and not raw:
        raise ValueError("Re(s1), Re(s2) must exceed 1 unless raw partial sums are requested")
    ti = divisor_function_table(i, M)
    tj = divisor_function_table(j, N)
    m = np.arange(1, M + 1, dtype=np.int64)
    am = ti[1:] * np.exp(-s1 * np.log(m.astype(float)))
    per_n = []
    chunk = max(1, 2_000_000 // M)
    for start in range(1, N + 1, chunk):
        n = np.arange(start, min(N, start + chunk - 1) + 1, dtype=np.int64)
        ph = np.exp(2j * np.pi * ((m[None, :] % n[:, None]) / n[:, None]))
        rows = ph @ am
        bn = tj[n] * np.exp(-s2 * np.log(n.astype(float)))
        per_n.append(rows * bn)
    value = _fsum_complex(np.concatenate(per_n))
    if convergent:
        z1 = float(special.zeta(s1.real))
        z2 = float(special.zeta(s2.real))
        tail = _tail_sum_bound(i, s1.real, M) * z2 ** j + z1 ** i * _tail_sum_bound(j, s2.real, N)
    else:
        tail = math.inf
    return DoublePartial(value, tail, convergent)
