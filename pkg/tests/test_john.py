import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reviso.errors import NotJohnPosition
from reviso.geometry import affine_image, from_halfspaces, from_points, random_polytope, regular_simplex
from reviso.harness import family_generate
from reviso.john import (
    JohnDecomposition, contact_decomposition, john_decomposition, john_normalize, max_inscribed_ellipsoid, verify_john,
)


def test_square_ellipsoid_is_ball(square):
    E = max_inscribed_ellipsoid(square)
    assert np.allclose(E.center, 0, atol=1e-8)
    assert np.allclose(E.shape, np.eye(2), atol=1e-7)


def test_simplex_ellipsoid_is_ball():
    E = max_inscribed_ellipsoid(regular_simplex(3))
    assert np.allclose(E.center, 0, atol=1e-8)
    assert np.allclose(E.shape, np.eye(3), atol=1e-7)


def test_affine_equivariance(tri):
    rng = np.random.default_rng(4)
    M = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    t = rng.normal(size=2)
    E = max_inscribed_ellipsoid(affine_image(tri, M, t))
    assert E.volume == pytest.approx(abs(np.linalg.det(M)) * math.pi, rel=1e-6)
    assert np.allclose(E.center, t, atol=1e-6)


def test_normalize_recovers_scale_and_shift(tri):
    t = np.array([0.7, -2.0])
    P = affine_image(tri, 3 * np.eye(2), t)
    Q, (M, s) = john_normalize(P)
    assert np.allclose(M, np.eye(2) / 3, atol=1e-7)
    assert np.allclose(s, -t / 3, atol=1e-7)
    assert np.allclose(np.sort(Q.offsets), 1, atol=1e-7)


def test_normalize_identity_in_john_position(square):
    _, (M, t) = john_normalize(square)
    assert np.allclose(M, np.eye(2), atol=1e-7)
    assert np.allclose(t, 0, atol=1e-7)


def test_sheared_square_tangency(square):
    Q, _ = john_normalize(affine_image(square, np.array([[1.0, 0.8], [0.0, 1.0]])))
    assert np.count_nonzero(np.abs(Q.offsets - 1) <= 1e-7) >= 3


def test_square_weights(square):
    d = contact_decomposition(square)
    assert d.k == 4
    assert np.allclose(d.weights, 0.5, atol=1e-9)
    assert "weight_selection" in d.metadata


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_simplex_weights(n):
    d = contact_decomposition(regular_simplex(n))
    assert d.k == n + 1
    assert np.allclose(d.weights, n / (n + 1), atol=1e-9)
    assert d.weights.sum() == pytest.approx(n)


def test_many_contacts_reduced_to_basic_solution():
    a = 2 * math.pi * np.arange(64) / 64
    P = from_halfspaces(np.c_[np.cos(a), np.sin(a)], np.ones(64))
    d = contact_decomposition(P)
    assert d.k <= 5
    assert verify_john(d).passed


def test_not_john_position(tri):
    with pytest.raises(NotJohnPosition):
        contact_decomposition(affine_image(tri, 0.5 * np.eye(2)))


def test_verify_detects_failures():
    d = contact_decomposition(regular_simplex(2))
    assert verify_john(d).passed
    w = d.weights.copy()
    w[0] += 0.1
    assert not verify_john(JohnDecomposition(d.contacts, w, 0, 0))["trace"].passed
    bad = JohnDecomposition(np.eye(2), np.ones(2), 0, 0)
    assert not verify_john(bad)["cardinality"].passed


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 4]))
def test_decomposition_invariants(seed, n):
    P = random_polytope(n, 2 * n + 6, np.random.default_rng(seed))
    Q, _, d = john_decomposition(P)
    rep = verify_john(d)
    assert rep.passed, rep.failures()
    # the ball lies in Q and touches every contact facet
    assert Q.offsets.min() >= 1 - 1e-7


def test_corner_cut_family_converges():
    for e in np.geomspace(1e-3, 0.5, 12):
        Q, _, d = john_decomposition(family_generate("corner-cut", 3, float(e)))
        assert verify_john(d).passed
