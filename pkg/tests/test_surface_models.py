from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from manin_axb.surface_models import (
    ALL_OF_Q,
    ModelError,
    all_checks_pass,
    classify,
    from_table,
    load_model,
    mutate,
    to_table,
    verify_geometry,
)

BUILT_IN = ["ex1", "ex2", "ex3(3)", "ex3(4)", "ex3(5)", "ex3(6)"]


def failed(model):
    return {c.name for c in verify_geometry(model) if not c.passed}


@pytest.mark.parametrize("name", BUILT_IN)
def test_builtin_models_pass_every_check(name):
    model = load_model(name)
    assert failed(model) == set()


def test_ex1_data():
    m = load_model("ex1")
    assert m.u == (1, -1, 0)
    assert m.v == (1, -1, -1)
    assert m.d == (0, 2, 2)
    assert m.c_star == (Fraction(0), ALL_OF_Q, ALL_OF_Q)
    assert m.rank_pic == 2
    assert m.bad_primes == frozenset()


def test_ex1_classification_and_special_divisors():
    m = load_model("ex1")
    cl = classify(m)
    assert cl.J1 == (0,) and cl.J2 == (1,) and cl.J3 == (2,)
    assert cl.J1c == {Fraction(0): (0,)}
    assert cl.J2star == (1,)
    assert set(cl.special) == {0, 1}
    assert len(cl.J1c[Fraction(0)]) + len(cl.J2star) == m.rank_pic


def test_ex3_critical_index_count():
    m = load_model("ex3(3)")
    cl = classify(m)
    for js in cl.J1c.values():
        assert len(js) + len(cl.J2star) == 2
    assert m.rank_pic == 4
    assert m.bad_primes == frozenset({2})


def test_ex2_has_no_height_model():
    assert load_model("ex2").height_model is None


@pytest.mark.parametrize("name", BUILT_IN)
def test_classify_partitions_and_is_idempotent(name):
    m = load_model(name)
    cl = classify(m)
    parts = cl.J1 + cl.J2 + cl.J3
    assert sorted(parts) == list(range(len(m)))
    assert classify(m) == cl


def test_unknown_model_and_small_ex3_rejected():
    with pytest.raises(ValueError):
        load_model("ex9")
    with pytest.raises(ValueError):
        load_model("ex3", n=2)


def test_ex3_name_forms_agree():
    assert load_model("ex3(4)") == load_model("ex3", n=4)


# each mutation breaks exactly the named check it targets
MUTATIONS = [
    ("ex1", 0, {"d": 1}, "d_le_1_minus_v[x1=0]"),
    ("ex1", 1, {"d": -1}, "d_plus_u_ge_1[x0=0]"),
    ("ex1", 2, {"v": 1, "c_star": Fraction(0)}, "v_le_u[t0=0]"),
    ("ex1", 0, {"c_star": ALL_OF_Q}, "c_star_consistency[x1=0]"),
    ("ex1", 2, {"id": 5}, "ids_are_index_set"),
    ("ex2", 2, {"c_star": Fraction(1, 2)}, "c_star_differences_units"),
    ("ex2", 4, {"d": -1}, "d_plus_u_ge_1[l4']"),
]


@pytest.mark.parametrize("name,j,change,check", MUTATIONS)
def test_mutation_fails_named_check(name, j, change, check):
    base = load_model(name)
    m = mutate(base, j, **change)
    assert check in failed(m)
    assert not all_checks_pass(m)


def test_mutation_gcd():
    m = mutate(mutate(load_model("ex1"), 0, u=2, v=2), 1, u=-2, v=-2)
    assert "gcd_u_is_1" in failed(m)


def test_mutation_rank():
    from dataclasses import replace

    m = replace(load_model("ex1"), rank_pic=3)
    assert "rank_equals_J_minus_1" in failed(m)


def test_mutation_critical_index_bound():
    # a third special divisor over c = 0 exceeds the rank
    from dataclasses import replace

    m = load_model("ex1")
    D = replace(m.divisors[0], id=3, label="extra")
    m2 = replace(m, divisors=m.divisors + (D,))
    assert "critical_index_bound" in failed(m2)


def test_mutation_empty_J2():
    m = mutate(load_model("ex1"), 1, u=1, v=1, c_star=Fraction(0), d=0)
    assert "J2_nonempty" in failed(m)


@pytest.mark.parametrize("name", BUILT_IN)
def test_table_round_trip(name):
    m = load_model(name)
    text = to_table(m)
    assert from_table(text) == m
    assert to_table(from_table(text)) == text


def test_table_rejects_malformed_line():
    with pytest.raises(ModelError):
        from_table("0 x1=0 1 1 0\n")


@given(st.integers(min_value=3, max_value=9))
def test_ex3_family_valid(n):
    m = load_model("ex3", n=n)
    assert all_checks_pass(m)
    assert len(m) == n + 2
