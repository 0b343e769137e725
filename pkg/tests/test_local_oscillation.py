import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from manin_axb.local_oscillation import (
    DivergenceError,
    OscillationQuery,
    TruncationError,
    check_region,
    critical_point,
    denominator_residual,
    e_p,
    frac_p,
    generic_residual,
    h_vee_p,
    h_vee_p_oracle,
    local_constancy_probe,
    margin,
    numerator_residual,
)
from manin_axb.surface_models import classify, load_model

from oracles import h_vee_exact

EX1 = load_model("ex1")
S0 = critical_point(EX1)

# exact infinite sums at s = d + 2u = (2, 0, 2), from oracles.h_vee_exact
FROZEN = [
    (5, Fraction(1), Fraction(3125, 3224)),
    (5, Fraction(1, 5), Fraction(25, 3224)),
    (5, Fraction(1, 25), Fraction(1, 16120)),
    (5, Fraction(5), Fraction(96101, 16120)),
    (5, Fraction(25), Fraction(2495381, 80600)),
    (3, Fraction(1, 3), Fraction(9, 260)),
]


def test_critical_point():
    assert S0 == (2, 0, 2)
    assert margin(EX1, S0) == 0


@pytest.mark.parametrize("p,alpha,exact", FROZEN)
def test_matches_frozen_exact_values(p, alpha, exact):
    val = h_vee_p(EX1, OscillationQuery(S0, alpha, p)).value
    assert abs(val - float(exact)) < 1e-14


def test_exact_oracle_live():
    assert h_vee_exact(7, -1, 2, 0, 2) == pytest.approx(h_vee_p(EX1, OscillationQuery(S0, Fraction(1, 7), 7)).value.real, abs=1e-15)


def test_generic_residual_small():
    r = generic_residual(EX1, OscillationQuery(S0, 1, 5))
    assert r.main_term == 1
    assert abs(r.residual) <= 5 * 5 ** -2
    assert r.bound_rhs == pytest.approx(5 ** -2)


def test_denominator_main_term_k1():
    q = OscillationQuery(S0, Fraction(1, 5), 5)
    r = denominator_residual(EX1, q)
    assert r.main_term == pytest.approx(5 ** -(S0[0].real + 1))
    assert abs(r.residual - (h_vee_p_oracle(EX1, q) - r.main_term)) < 1e-10


def test_denominator_main_term_k2():
    q = OscillationQuery(S0, Fraction(1, 25), 5)
    r = denominator_residual(EX1, q)
    assert r.k == 2
    assert r.main_term == pytest.approx(5 ** -(2 * 3))
    assert abs(r.residual - (h_vee_p_oracle(EX1, q) - r.main_term)) < 1e-10


def test_single_denominator_class_on_ex1():
    J1c = classify(EX1).J1c
    assert len(J1c) == 1 and sum(len(v) for v in J1c.values()) == 1


def test_numerator_main_term_every_k():
    for k in (1, 2, 3):
        r = numerator_residual(EX1, OscillationQuery(S0, Fraction(5 ** k), 5))
        # u = -1 divides every k, so the main term is always present
        assert r.main_term == pytest.approx(5 ** -(k * (S0[1].real - 2 + 1)))
        assert r.ratio < float("inf")


def test_regime_guards():
    with pytest.raises(ValueError):
        denominator_residual(EX1, OscillationQuery(S0, 5, 5))
    with pytest.raises(ValueError):
        numerator_residual(EX1, OscillationQuery(S0, Fraction(1, 5), 5))
    with pytest.raises(ValueError):
        generic_residual(EX1, OscillationQuery(S0, 5, 5))
    with pytest.raises(ValueError):
        OscillationQuery(S0, 0, 5)
    with pytest.raises(ValueError):
        h_vee_p(load_model("ex3(3)"), OscillationQuery((0,) * 5, 1, 5))


def test_truncation_error_for_shallow_depth():
    with pytest.raises(TruncationError):
        h_vee_p(EX1, OscillationQuery(S0, Fraction(1, 125), 5, depth=2))
    with pytest.raises(TruncationError):
        numerator_residual(EX1, OscillationQuery(S0, Fraction(125), 5, depth=2))
    with pytest.raises(TruncationError):
        h_vee_p(EX1, OscillationQuery(S0, 1, 5, depth=3), tol=1e-30)


def test_divergent_strata_named():
    with pytest.raises(DivergenceError, match="diverge"):
        h_vee_p(EX1, OscillationQuery((-3, 0, 0.5), 1, 5))


def test_large_real_part_localizes_to_unit_stratum():
    val = h_vee_p(EX1, OscillationQuery((40, 40, 40), 1, 7)).value
    assert abs(val - 1) < 1e-12


def test_region_warning():
    with pytest.warns(UserWarning):
        assert not check_region(EX1, (1, 0, 2))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert check_region(EX1, S0)


def test_local_constancy():
    pr = local_constancy_probe(EX1, 3, Fraction(1, 3))
    assert pr.consistent and pr.exponent is not None
    pr = local_constancy_probe(EX1, 2, 1)
    assert pr.exponent is not None


def test_frac_p_and_character():
    assert frac_p(Fraction(7, 10), 5) == Fraction(1, 5)  # 7/10 - 1/5 = 1/2 is a 5-adic integer
    assert frac_p(Fraction(3, 7), 5) == 0
    assert abs(e_p(Fraction(1, 2), 3) - 1) < 1e-15


alphas = st.builds(
    lambda n, d, p_exp: Fraction(n, d) * Fraction(5) ** p_exp,
    st.integers(1, 30).filter(lambda n: n % 5),
    st.integers(1, 30).filter(lambda d: d % 5),
    st.integers(-3, 3),
)
real_s = st.tuples(st.floats(1.5, 4), st.floats(-0.2, 2), st.floats(1.5, 4))


@settings(max_examples=40, deadline=None)
@given(alphas, real_s)
def test_conjugation_symmetry(alpha, s):
    a = h_vee_p(EX1, OscillationQuery(s, -alpha, 5)).value
    b = h_vee_p(EX1, OscillationQuery([complex(x).conjugate() for x in s], alpha, 5)).value
    assert a == pytest.approx(b.conjugate(), abs=1e-13)


@settings(max_examples=40, deadline=None)
@given(alphas, real_s, st.floats(-1, 1))
def test_agrees_with_two_variable_stratification(alpha, s, t):
    s = (s[0] + 1j * t, s[1], s[2] - 1j * t)
    q = OscillationQuery(s, alpha, 5)
    assert h_vee_p(EX1, q).value == pytest.approx(h_vee_p_oracle(EX1, q), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(alphas, real_s)
def test_truncation_monotone(alpha, s):
    lo = h_vee_p(EX1, OscillationQuery(s, alpha, 5, depth=10))
    hi = h_vee_p(EX1, OscillationQuery(s, alpha, 5, depth=30))
    assert abs(hi.value - lo.value) <= lo.tail_bound * (1 + 1e-9) + 1e-15
