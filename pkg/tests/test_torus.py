import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from widthlab import torus
from widthlab.torus import TorusPoint

angle = st.floats(-math.pi + 1e-6, math.pi, allow_nan=False)


def lambda_direct(a):
    """Brute force over orderings with plain Python loops."""
    best = 0.0
    n = len(a)
    for p in itertools.permutations(a):
        s = sum(abs(torus.l_angle(complex(math.cos(p[i] - p[i + 1]), math.sin(p[i] - p[i + 1]))))
                for i in range(n - 1))
        best = max(best, s / (math.pi * (n - 1)))
    return best


def test_l_angle_branch():
    assert torus.l_angle(-1) == pytest.approx(math.pi)
    assert torus.l_angle(1j) == pytest.approx(math.pi / 2)
    assert torus.wrap(-math.pi) == math.pi
    with pytest.raises(ValueError):
        torus.l_angle(2)


def test_torus_point_validation():
    with pytest.raises(ValueError):
        TorusPoint((0.1, 0.2))
    A = TorusPoint.from_free([0.3, -1.0])
    assert abs(math.remainder(sum(A.angles), 2 * math.pi)) < 1e-9
    assert np.allclose(np.prod(A.eigenvalues()), 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(angle, min_size=2, max_size=5))
def test_lambda_bounds_and_exhaustive(free):
    A = TorusPoint.from_free(free)
    lam = torus.lambda_su(A)
    lm = torus.lambda_max_exhaustive(A)
    assert 0 <= lam <= lm <= 1 + 1e-12
    assert lm == pytest.approx(lambda_direct(A.angles), abs=1e-12)
    # invariant under reversal and under a global scalar shift
    assert torus.lambda_su(A.angles[::-1]) == pytest.approx(lam)
    assert torus.lambda_max_exhaustive(torus.wrap(np.asarray(A.angles) + 0.7)) == pytest.approx(lm, abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 7), st.lists(angle, min_size=3, max_size=3), st.data())
def test_class_optimizers_match_exhaustive(n, vals, data):
    k = data.draw(st.integers(1, 3))
    idx = data.draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    a = np.array([vals[i] for i in idx])
    ex = torus.lambda_max_exhaustive(a)
    assert torus.lambda_max_classes(a) == pytest.approx(ex, abs=1e-12)
    if len(torus.angle_classes(a)[0]) <= 2:
        assert torus.lambda_max_two_angle(a) == pytest.approx(ex, abs=1e-12)
        assert torus.lambda_max(a)[1] == "two-angle"


def test_lambda_max_modes():
    a = np.array([0.0, 1.0, 2.0, -3.0])
    v, mode = torus.lambda_max(a)
    assert mode == "exhaustive"
    assert torus.lambda_max(a, "heuristic")[0] <= v + 1e-12
    with pytest.raises(ValueError):
        torus.lambda_max(a, "nope")
    with pytest.raises(ValueError):
        torus.lambda_max_exhaustive(np.zeros(9))


def test_eta():
    assert torus.eta([0.0, math.pi]) == pytest.approx(math.pi)
    assert torus.eta([0.1, 0.1, -0.2]) == pytest.approx(0.3)


def test_scalar_lemma_check_cases():
    held, concl = torus.scalar_lemma_check(np.zeros(6), 0.01)
    assert held and concl
    held, _ = torus.scalar_lemma_check(np.array([0, math.pi, 0, math.pi, 0, math.pi]), 0.01)
    assert not held


def test_scalar_sweep_small():
    sw = torus.scalar_sweep(5, 0.05, 400, seed=1)
    assert sw.held > 0 and not sw.failures
    assert sw.to_json()["pass"]
    again = torus.scalar_sweep(5, 0.05, 400, seed=1)
    assert again.held == sw.held


def test_brank_n31_value():
    cert = torus.brank_construction(31)
    assert cert.m == 10
    assert sorted(c for _, c in cert.b_classes) == [1, 10, 20]
    # 10 switches of 2pi/3 out of 20 zeros, plus the lone class: the DP optimum is 22/45
    assert cert.lambda_max == pytest.approx(22 / 45, abs=1e-12)
    assert cert.lambda_max >= 4 / 9 - 1e-9
    assert cert.lambda_alternating <= cert.lambda_max + 1e-12
    assert cert.passed
    with pytest.raises(ValueError):
        torus.brank_construction(30)


@pytest.mark.parametrize("n", range(31, 41))
def test_brank_range(n):
    cert = torus.brank_construction(n)
    assert cert.passed and cert.lambda_max > torus.BRANK_THRESHOLD
