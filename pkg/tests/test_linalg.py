import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epibound import graph
from epibound.linalg import (
    EigenError,
    ExpmActionParams,
    dominant_eigenpair,
    expm_action,
    expm_action_integral,
    spectral_radius_bounds,
)


@pytest.mark.parametrize("t", [0.1, 1.0, 3.0])
def test_expm_path2_cosh_sinh(path2, t):
    r = expm_action(path2, None, t, np.array([1.0, 0.0]))
    assert r.vector == pytest.approx([math.cosh(t), math.sinh(t)], rel=1e-12)
    assert not r.capped


def test_expm_zero_time_is_identity(er20, rng):
    v = rng.random(er20.n)
    assert np.array_equal(expm_action(er20, None, 0.0, v).vector, v)


def test_expm_nilpotent(path2):
    r = expm_action(path2, np.array([0.0, 1.0]), 2.5, np.array([0.0, 1.0]))
    assert r.vector == pytest.approx([2.5, 1.0], abs=1e-15)


def test_integral_examples(path2, er20, rng):
    assert np.array_equal(expm_action_integral(er20, None, 0.0, rng.random(20)).vector, np.zeros(20))
    r = expm_action_integral(path2, np.array([0.0, 1.0]), 1.5, np.array([0.0, 1.0]))
    assert r.vector == pytest.approx([1.5**2 / 2, 1.5], abs=1e-15)
    w = rng.random(20)
    r = expm_action_integral(er20, np.zeros(20), 0.7, w)
    assert r.vector == pytest.approx(0.7 * w, rel=1e-15)


def test_expm_against_dense(er20, rng):
    from scipy.linalg import expm

    s = rng.uniform(0.2, 1.0, 20)
    v = rng.random(20)
    m = er20.adjacency.toarray() * s
    r = expm_action(er20, s, 0.4, v)
    assert np.allclose(r.vector, expm(0.4 * m) @ v, rtol=1e-11)


def test_cap_flagged(er20):
    r = expm_action(er20, None, 5.0, np.ones(20), ExpmActionParams(rtol=1e-12, max_terms=3))
    assert r.capped and r.terms == 3


def test_overflow_raises(er20):
    with pytest.raises(FloatingPointError):
        expm_action(er20, None, 1e4, np.ones(20))


def test_eigen_examples(triangle, star4, path3):
    e = dominant_eigenpair(triangle)
    assert e.value == pytest.approx(2.0, abs=1e-9)
    assert e.right == pytest.approx(np.ones(3) / math.sqrt(3), abs=1e-9)
    assert dominant_eigenpair(star4).value == pytest.approx(2.0, abs=1e-9)
    p = dominant_eigenpair(path3)
    assert p.value == pytest.approx(math.sqrt(2), abs=1e-9)
    v = np.array([1, math.sqrt(2), 1]) / 2
    assert p.right == pytest.approx(v, abs=1e-8)


def test_eigen_residual_and_left(er20, rng):
    s = rng.uniform(0.3, 1.0, er20.n)
    e = dominant_eigenpair(er20, s, want_left=True)
    m = er20.adjacency.toarray() * s
    assert np.max(np.abs(m @ e.right - e.value * e.right)) < 1e-9
    assert e.left @ e.right == pytest.approx(1.0)
    assert np.all(e.right > 0) and np.all(e.left > 0)
    assert np.max(np.abs(m.T @ e.left - e.value * e.left)) < 1e-8


def test_left_equals_right_unscaled(er20):
    e = dominant_eigenpair(er20, want_left=True)
    assert np.allclose(e.left / np.linalg.norm(e.left), e.right, atol=1e-8)


def test_eigen_nonconvergence_carries_state(er20):
    with pytest.raises(EigenError) as err:
        dominant_eigenpair(er20, max_iters=2)
    assert err.value.vector.shape == (20,)


def test_spectral_bounds(star4, triangle):
    assert spectral_radius_bounds(star4) == (2.0, 4.0)
    assert spectral_radius_bounds(triangle) == (2.0, 2.0)


@given(st.integers(0, 10_000), st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_expm_monotone_in_tau_and_bracketed(seed, t1, t2):
    g = graph.connected_erdos_renyi(15, 3, seed=seed)
    v = np.random.default_rng(seed).random(15)
    lo, hi = sorted((t1, t2))
    a = expm_action(g, None, lo, v).vector
    b = expm_action(g, None, hi, v).vector
    assert np.all(b >= a - 1e-12 * np.abs(b))
    low, high = spectral_radius_bounds(g)
    lam = dominant_eigenpair(g).value
    assert low - 1e-9 <= lam <= high + 1e-9
