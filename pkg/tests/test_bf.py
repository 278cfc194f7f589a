import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpmo.bf import (
    FAMILIES,
    MIN_DIMENSION,
    N_OBJECTIVES,
    bf_bounds,
    bf_distance,
    bf_evaluate,
    bf_ps_sample,
    context,
)
from mpmo.core import DimensionError
from oracles import bf_scalar

TIMES = (0.0, 0.5, 1.0, 1.5, 2.0, 3.0, math.pi / 2)


def test_bounds_examples():
    b = bf_bounds("BF1", 3)
    assert b.lower.tolist() == [1, 0, 0] and b.upper.tolist() == [4, 1, 1]
    b = bf_bounds("BF2", 2)
    assert b.lower.tolist() == [0, -1] and b.upper.tolist() == [1, 1]
    b = bf_bounds("BF5", 4)
    assert b.lower.tolist() == [0] * 4 and b.upper.tolist() == [1] * 4
    b = bf_bounds("BF6", 4)
    assert b.lower.tolist() == [0, 0, -1, -1]


@pytest.mark.parametrize("family", FAMILIES)
def test_dimension_below_minimum(family):
    with pytest.raises(DimensionError):
        bf_bounds(family, MIN_DIMENSION[family] - 1)


def test_context_values():
    assert context("BF1", 1.0).alpha == pytest.approx(0.0, abs=1e-15)
    assert context("BF3", math.pi / 2).beta == 7
    assert context("BF3", 0.0).beta == 1
    ctx = context("BF6", 1.5)
    assert ctx.alpha == -10 and ctx.r == 1
    ctx = context("BF6", 0.5)
    assert ctx.alpha == 10 and ctx.r == 1
    assert context("BF6", 1.0).r == 1  # floor(10 sin(pi)) = 0 up to round-off sign
    assert context("BF2", 1.0).gamma == pytest.approx(1.0)


def test_distance_examples():
    assert bf_distance("BF1", [2.5, 0.5], 1.0) == pytest.approx(1.0, abs=1e-15)
    assert bf_distance("BF1", [2.5, 0.0], 1.0) == pytest.approx(1.25, abs=1e-15)
    assert bf_distance("BF5", [0.4, 0.7, 0.0], 0.0) == 1.0


def test_evaluate_examples():
    assert np.allclose(bf_evaluate("BF1", [2.5, 0.5], 1.0), [0.8, 1.25], atol=1e-15)
    assert np.allclose(bf_evaluate("BF1", [2.5, 0.5], 2.0), [1.2, 2.5 / 3], atol=1e-15)
    x = bf_ps_sample("BF4", 0.3, 1, n=4)[0]
    x[0] = 1.0
    x[2:] = np.sin(2 * np.pi * (x[0] + x[1])) / (1 + abs(math.sin(0.15 * math.pi)))
    assert bf_evaluate("BF4", x, 0.3)[0] == pytest.approx(1.0, abs=1e-12)


def _random_point(family, n, rng):
    b = bf_bounds(family, n)
    return b.lower + rng.random(n) * (b.upper - b.lower)


@pytest.mark.parametrize("family", FAMILIES)
def test_matches_scalar_oracle(family):
    rng = np.random.default_rng(11)
    for t in TIMES:
        X = np.array([_random_point(family, 7, rng) for _ in range(40)])
        F = bf_evaluate(family, X, t)
        D = bf_distance(family, X, t)
        assert F.shape == (40, N_OBJECTIVES[family])
        for x, f, d in zip(X, F, D):
            od, of = bf_scalar(family, x, t)
            assert d == pytest.approx(od, rel=1e-12, abs=1e-12)
            assert np.allclose(f, of, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("family", FAMILIES)
def test_ps_samples_have_unit_distance(family):
    for t in TIMES:
        X = bf_ps_sample(family, t, 300, seed=2, n=12)
        assert X.shape == (300, 12)
        assert np.all(np.abs(bf_distance(family, X, t) - 1.0) <= 1e-9)
        assert all(bf_bounds(family, 12).contains(x) for x in X)


@pytest.mark.parametrize("family", ["BF1", "BF2", "BF3"])
def test_tail_perturbation_increases_distance(family):
    X = bf_ps_sample(family, 1.0, 20, n=6)
    base = bf_distance(family, X, 1.0)
    Y = X.copy()
    Y[:, 3] += 0.01
    assert np.all(bf_distance(family, Y, 1.0) > base)


def test_bf3_free_variable_support():
    x1 = bf_ps_sample("BF3", 0.0, 200)[:, 0]
    assert np.all((x1 == 0.0) | ((x1 >= 0.5) & (x1 <= 1.0)))
    assert 0.0 in x1


def test_bf2_tail_zero_at_t0():
    X = bf_ps_sample("BF2", 0.0, 50, n=5)
    assert np.all(X[:, 1:] == 0.0)


def test_ps_sampler_is_deterministic():
    a = bf_ps_sample("BF6", 1.5, 500, seed=4, n=10)
    b = bf_ps_sample("BF6", 1.5, 500, seed=4, n=10)
    assert np.array_equal(a, b)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 3))
def test_bf5_spherical_identity(x1, x2, x3, t):
    x = [x1, x2, x3]
    f = bf_evaluate("BF5", x, t)
    assert np.sum(f ** 2) == pytest.approx(bf_distance("BF5", x, t) ** 2, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(-1, 1), st.floats(0, 3))
def test_bf4_non_negative(x1, x2, x3, t):
    assert np.all(bf_evaluate("BF4", [x1, x2, x3], t) >= 0.0)
