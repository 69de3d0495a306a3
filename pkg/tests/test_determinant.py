import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reviso.determinant import (
    amgm_stability, ball_barthe, cauchy_binet, max_det_subset, random_frame, subset_weights_per_atom, theta_star,
    xab_bound, xab_minimum,
)
from reviso.errors import InvalidCardinality, InvalidFrame, InvalidInput
from reviso.geometry import simplex_contacts

T2_FRAME = math.sqrt(2 / 3) * simplex_contacts(2)
AXIS_FRAME = np.r_[np.eye(2), -np.eye(2)] / math.sqrt(2)


def test_max_det_subset_examples():
    assert max_det_subset(np.eye(3))[1] == pytest.approx(1)
    idx, best, total = max_det_subset(T2_FRAME)
    assert best == pytest.approx(1 / 3) and best >= 1 / 3 - 1e-12
    assert total == pytest.approx(1)
    assert max_det_subset(AXIS_FRAME)[1] == pytest.approx(1 / 4)
    with pytest.raises(InvalidFrame):
        max_det_subset(np.eye(2) * 2)


def test_ball_barthe_examples():
    lhs, rhs = ball_barthe(T2_FRAME, np.ones(3))
    assert lhs == pytest.approx(1) and rhs == pytest.approx(1)
    t = np.array([2.0, 5.0, 0.5])
    lhs, rhs = ball_barthe(np.eye(3), t)
    assert lhs == pytest.approx(np.prod(t)) and rhs == pytest.approx(np.prod(t))
    t = np.array([1.0, 2.0, 3.0])
    lhs, rhs = ball_barthe(T2_FRAME, t)
    assert lhs == pytest.approx(np.linalg.det((T2_FRAME.T * t) @ T2_FRAME))
    assert rhs == pytest.approx(6 ** (2 / 3))
    assert lhs >= rhs


def test_theta_examples():
    assert theta_star(T2_FRAME, np.full(3, 2.5)).theta_star == pytest.approx(1)
    t = np.array([4.0, 1.0, 1.0])
    cert = theta_star(T2_FRAME, t)
    # brute-force oracle
    d, tI = [], []
    for I in itertools.combinations(range(3), 2):
        d.append(np.linalg.det(T2_FRAME[list(I)]) ** 2)
        tI.append(np.prod(t[list(I)]))
    d, tI = np.array(d), np.array(tI)
    t0 = math.sqrt(d @ tI)
    theta = 1 + 0.5 * d @ (np.sqrt(tI) / t0 - 1) ** 2
    assert cert.theta_star == pytest.approx(theta, rel=1e-12) and cert.theta_star > 1
    assert cert.lhs >= cert.theta_star * cert.rhs_base
    per, total = subset_weights_per_atom(AXIS_FRAME)
    assert np.allclose(per, 0.5) and total == pytest.approx(1)
    theta_star(AXIS_FRAME, np.array([2.0, 2.0, 1.0, 1.0]))
    with pytest.raises(InvalidCardinality):
        theta_star(np.eye(2), np.ones(2))


def test_amgm_examples():
    assert amgm_stability(np.full(4, 3.0), np.full(4, 0.25)) == pytest.approx((1, 1))
    ratio, bound = amgm_stability(np.array([1.0, 4.0]), np.array([0.5, 0.5]))
    assert ratio == pytest.approx(1.25)
    expected = 1 + 0.5 * ((math.sqrt(1 / 2.5) - 1) ** 2 + (math.sqrt(4 / 2.5) - 1) ** 2) / 2
    assert bound == pytest.approx(expected) and bound <= 1.25
    r, b = amgm_stability(np.array([1.0, 1.0, 9.0]), np.full(3, 1 / 3))
    assert r >= b
    with pytest.raises(InvalidInput):
        amgm_stability(np.array([0.0, 1.0]), np.array([0.5, 0.5]))


def test_xab_examples():
    lhs, rhs = xab_bound(2.0, 2.0, 0.7)
    assert rhs == 0 and lhs >= 0
    lhs, rhs = xab_bound(2.0, 1.0, 0.6)
    assert lhs == pytest.approx(0.2) and rhs == pytest.approx(0.18)
    xs = np.linspace(1e-3, 2, 20001)
    sweep = min(xab_bound(1.0, 3.0, x)[0] for x in xs)
    x, m = xab_minimum(1.0, 3.0)
    assert m == pytest.approx(0.4) and sweep == pytest.approx(0.4, abs=1e-6)
    assert xab_bound(1.0, 3.0, x)[1] == pytest.approx(0.32)
    with pytest.raises(InvalidInput):
        xab_bound(-1.0, 1.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4), st.integers(1, 8))
def test_frame_properties(seed, n, extra):
    rng = np.random.default_rng(seed)
    k = min(n + extra, 12)
    V = random_frame(n, k, rng)
    lam = rng.uniform(0.1, 3, k)
    a, b = cauchy_binet(V, lam)
    assert a == pytest.approx(b, rel=1e-10)
    t = np.exp(rng.normal(scale=1.5, size=k))
    lhs, rhs = ball_barthe(V, t)
    cert = theta_star(V, t)
    assert cert.theta_star >= 1
    assert cert.lhs >= cert.theta_star * cert.rhs_base * (1 - 1e-10)
    assert cert.theta_star * cert.rhs_base >= cert.rhs_base
    assert cert.weight_sum == pytest.approx(1, abs=1e-10)
    per, _ = subset_weights_per_atom(V)
    assert np.allclose(per, (V**2).sum(axis=1), atol=1e-10)
    assert cert.t0**2 == pytest.approx(sum(dI * tI for _, dI, tI in cert.subset_terms), rel=1e-10)
