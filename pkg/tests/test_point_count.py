import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from manin_axb.point_count import (
    SmoothWeight,
    asymptotic_fit,
    brute_force_heights,
    count_sharp,
    count_smoothed,
    default_weight,
    height_histogram,
)
from manin_axb.surface_models import load_model


def test_small_counts():
    assert count_sharp(1) == 0
    assert count_sharp(2) == 2
    assert count_sharp(4) == 6


def test_small_counts_match_exhaustive_search():
    for B in (2, 4, 10, 37, 100):
        assert count_sharp(B) == len(brute_force_heights(B))


def test_histogram_cumsum_matches_brute_force():
    B = 2000
    hist = height_histogram(B)
    heights = np.bincount(brute_force_heights(B), minlength=B + 1)
    assert np.array_equal(hist, heights)


# frozen from height_histogram, an independent summation over the height spectrum
@pytest.mark.parametrize("B,N", [(10_000, 81_866), (100_000, 1_031_154)])
def test_frozen_counts(B, N):
    assert int(height_histogram(B).sum()) == N
    assert count_sharp(B) == N


def test_parallel_split_gives_same_total():
    assert count_sharp(50_000, workers=3) == count_sharp(50_000)


def test_rejects_models_without_counting():
    with pytest.raises(ValueError):
        count_sharp(100, load_model("ex2"))
    with pytest.raises(ValueError):
        count_sharp(-1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 3000))
def test_counts_are_even(B):
    assert count_sharp(B) % 2 == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3000), st.integers(0, 500))
def test_counts_are_monotone(B, extra):
    assert count_sharp(B) <= count_sharp(B + extra)


def test_smoothed_zero_weight():
    w = SmoothWeight(lambda t: np.zeros_like(t), (1.0, 2.0), "zero")
    assert count_smoothed(1000, w) == 0.0


def test_smoothed_counts_points_in_window():
    w = SmoothWeight(lambda t: ((t >= 2) & (t <= 3)).astype(float), (2.0, 3.0))
    # heights 2 and 3: only the two points of height 2
    assert count_smoothed(1, w) == 2.0


def test_smoothed_sandwich():
    B, eps = 5000, 0.1

    def ramp(t):
        return np.clip((1 - t) / eps, 0, 1) * (t >= 1 / B)

    w = SmoothWeight(ramp, (1 / B, 1.0), "ramp")
    S = count_smoothed(B, w)
    assert count_sharp(int(B * (1 - eps))) - 2 <= S <= count_sharp(B)


def test_default_weight_has_unit_mass():
    from scipy import integrate

    w = default_weight()
    mass, _ = integrate.quad(lambda t: float(w.func(np.array([t]))[0]), 1, 2, epsabs=1e-13)
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_smoothed_rejects_unbounded_support():
    w = SmoothWeight(lambda t: np.ones_like(t), (1.0, math.inf))
    with pytest.raises(ValueError):
        count_smoothed(100, w)
    with pytest.raises(ValueError):
        count_smoothed(100, SmoothWeight(lambda t: t, (0.0, 1.0)))


def test_fit_recovers_synthetic_model():
    grid = [1e4, 3e4, 1e5, 3e5, 1e6]
    samples = [(B, 0.9119 * B * math.log(B) + 0.5 * B) for B in grid]
    fit = asymptotic_fit(samples)
    assert fit.c1 == pytest.approx(0.9119, abs=1e-6)
    assert fit.c2 == pytest.approx(0.5, abs=1e-6)
    assert max(abs(r) for r in fit.residuals) < 1e-9


def test_fit_needs_three_samples_and_distinct_grid():
    with pytest.raises(ValueError):
        asymptotic_fit([(1e4, 1.0)])
    with pytest.raises(ValueError):
        asymptotic_fit([(1e4, 1.0)] * 3)
