"""Independent evaluations used to freeze expected values in the tests."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce

import sympy as sp


def residue_x(u, z):
    """X-function of {k >= 0, k.u = 0} at z via residues of prod 1/(z_j + i t u_j).

    Closing the shift line upward picks the poles t = i z_j / u_j with
    u_j > 0.  Coinciding poles are separated by a symbolic perturbation
    z -> z + eps w and the limit eps -> 0 is taken.
    """
    eps = sp.Symbol("eps", positive=True)
    n = len(u)
    w = [sp.Rational(3 ** k + k, 7) for k in range(n)]
    zz = [sp.Rational(Fraction(x).numerator, Fraction(x).denominator) + eps * w[k] for k, x in enumerate(z)]
    total = sp.Integer(0)
    for j in range(n):
        if u[j] <= 0:
            continue
        term = sp.Rational(1, u[j])
        for k in range(n):
            if k != j and u[k] != 0:
                term /= zz[k] - sp.Rational(u[k], u[j]) * zz[j]
        total += term
    for k in range(n):
        if u[k] == 0:
            total /= zz[k]
    val = sp.limit(sp.together(total), eps, 0)
    return Fraction(int(sp.numer(val)), int(sp.denom(val)))


def gcd_all(xs):
    return reduce(math.gcd, (abs(x) for x in xs), 0)


def h_vee_exact(p, v, s1, s2, s3):
    """Exact value of the ex1 oscillatory integral for integer s, by symbolic summation.

    Sums p^-m w(m) F(v + m) over all m >= -v with F in closed form.
    """
    m, n = sp.symbols("m n", integer=True)
    P = sp.Integer(p)
    w = v + m
    F = 1 + (1 - 1 / P) * sp.summation(P ** (n * (1 - s3)), (n, 1, w)) - P ** (w - (w + 1) * s3)
    pos = sp.summation(P ** (-m * s1) * P ** (-m) * F, (m, max(0, -v), sp.oo))
    neg = sp.summation(P ** (m * s2) * P ** (-m) * F, (m, -v, -1)) if -v < 0 else 0
    val = sp.nsimplify(sp.simplify(pos + neg))
    return Fraction(int(sp.numer(val)), int(sp.denom(val)))
