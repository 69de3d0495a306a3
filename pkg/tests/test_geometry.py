import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reviso.errors import DegenerateInput, InvalidDimension, SingularTransform, UnboundedPolytope
from reviso.geometry import (
    affine_image, centroid_halfspace_fraction, dual_representation, from_halfspaces, from_json, from_points,
    random_polytope, random_rotation, regular_simplex, simplex_volume_formula, symmetric_difference_volume,
)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_simplex_closed_forms(n):
    T = regular_simplex(n)
    V = n ** (n / 2) * (n + 1) ** ((n + 1) / 2) / math.factorial(n)
    assert T.volume == pytest.approx(V, rel=1e-9)
    assert T.surface_area == pytest.approx(n * V, rel=1e-9)
    assert np.allclose(T.offsets, 1.0)
    assert simplex_volume_formula(n) == pytest.approx(V, rel=1e-12)


def test_simplex_values_2d_3d():
    assert regular_simplex(2).volume == pytest.approx(3 * math.sqrt(3))
    assert regular_simplex(2).surface_area == pytest.approx(6 * math.sqrt(3))
    assert regular_simplex(3).volume == pytest.approx(8 * math.sqrt(3))
    assert regular_simplex(3).surface_area == pytest.approx(24 * math.sqrt(3))


def test_simplex_rejects_dim_one():
    with pytest.raises(InvalidDimension):
        regular_simplex(1)


def test_square_from_halfspaces():
    P = from_halfspaces(np.r_[np.eye(2), -np.eye(2)], np.ones(4))
    assert len(P.vertices) == 4
    assert np.allclose(np.sort(np.abs(P.vertices).ravel()), 1.0)
    assert P.volume == pytest.approx(4)
    assert P.surface_area == pytest.approx(8)
    assert P.isoperimetric_ratio() == pytest.approx(16)


def test_cross_polytope_offsets():
    P = from_points(np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], float))
    assert len(P.offsets) == 4
    assert np.allclose(P.offsets, 1 / math.sqrt(2))


def test_collinear_points_degenerate():
    with pytest.raises(DegenerateInput):
        from_points(np.array([[0, 0], [1, 1], [2, 2]], float))


def test_unbounded_halfspaces():
    with pytest.raises(UnboundedPolytope):
        from_halfspaces(np.array([[1.0, 0.0], [0.0, 1.0]]), np.ones(2))


def test_triangle_ratio(tri):
    assert tri.isoperimetric_ratio() == pytest.approx(12 * math.sqrt(3))


def test_affine_image_laws(tri):
    assert np.allclose(affine_image(tri, np.eye(2)).vertices, tri.vertices)
    assert affine_image(tri, 2 * np.eye(2)).volume == pytest.approx(4 * tri.volume)
    T3 = regular_simplex(3)
    R = random_rotation(3, np.random.default_rng(1))
    assert affine_image(T3, R).volume == pytest.approx(T3.volume, rel=1e-9)
    with pytest.raises(SingularTransform):
        affine_image(tri, np.array([[1.0, 2.0], [2.0, 4.0]]))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_affine_volume_scaling(n):
    rng = np.random.default_rng(n)
    P = random_polytope(n, 3 * n + 3, rng)
    for _ in range(100 if n < 4 else 25):
        M = rng.normal(size=(n, n))
        if abs(np.linalg.det(M)) < 0.1:
            continue
        Q = affine_image(P, M, rng.normal(size=n))
        assert Q.volume == pytest.approx(abs(np.linalg.det(M)) * P.volume, rel=1e-9)


def test_symmetric_difference_examples(tri, square):
    assert symmetric_difference_volume(tri, tri) == pytest.approx(0, abs=1e-9)
    shifted = from_points(square.vertices + np.array([1.0, 0.0]))
    assert symmetric_difference_volume(square, shifted) == pytest.approx(4)
    c, s = math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3)
    rot = affine_image(tri, np.array([[c, -s], [s, c]]))
    assert symmetric_difference_volume(tri, rot) == pytest.approx(0, abs=1e-9)


def test_centroid_fractions(square, tri):
    rng = np.random.default_rng(3)
    for _ in range(10):
        u = rng.normal(size=2)
        u /= np.linalg.norm(u)
        assert centroid_halfspace_fraction(square, u) == pytest.approx(0.5)
    v = tri.vertices[0] / np.linalg.norm(tri.vertices[0])
    assert centroid_halfspace_fraction(tri, v) == pytest.approx(4 / 9)
    T3 = regular_simplex(3)
    U = rng.normal(size=(200, 3))
    fr = [centroid_halfspace_fraction(T3, u / np.linalg.norm(u)) for u in U]
    assert min(fr) >= 27 / 64 - 1e-9


def test_circumscribed_volume_equals_surface_over_n():
    rng = np.random.default_rng(5)
    for n in (2, 3, 4):
        U = rng.normal(size=(4 * n, n))
        U /= np.linalg.norm(U, axis=1)[:, None]
        U = np.r_[U, -U]
        P = from_halfspaces(U, np.ones(len(U)))
        assert P.volume == pytest.approx(P.surface_area / n, rel=1e-9)


def test_dual_representation_idempotent():
    P = random_polytope(3, 15, np.random.default_rng(2))
    Q = dual_representation(halfspaces=list(zip(P.normals, P.offsets)), dim=3)
    R = from_json(Q.to_json())
    assert Q.volume == pytest.approx(P.volume, rel=1e-9)
    assert len(R.vertices) == len(P.vertices)
    assert R.volume == pytest.approx(P.volume, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_symmetric_difference_properties(seed, n):
    rng = np.random.default_rng(seed)
    P = random_polytope(n, 2 * n + 4, rng)
    Q = random_polytope(n, 2 * n + 4, rng)
    a, b = symmetric_difference_volume(P, Q), symmetric_difference_volume(Q, P)
    assert a >= -1e-9
    assert a == pytest.approx(b, rel=1e-9, abs=1e-9)
    assert symmetric_difference_volume(P, P) == pytest.approx(0, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_polytope_invariants(seed, n):
    P = random_polytope(n, 2 * n + 5, np.random.default_rng(seed))
    slack = P.vertices @ P.normals.T - P.offsets
    assert slack.max() <= 1e-9
    assert np.all(np.abs(slack).min(axis=0) <= 1e-9)  # every facet is supporting
