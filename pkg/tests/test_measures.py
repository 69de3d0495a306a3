import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reviso.errors import CapsNotCovering, InvalidCardinality, InvalidInput, InvalidMeasure, InvalidSimplex
from reviso.geometry import affine_image, from_points, random_rotation, regular_simplex, simplex_contacts
from reviso.measures import (
    SphericalMeasure, axis_measure, caratheodory_bound, caratheodory_reduce, cap_masses, is_valid, isotropize,
    lemma_cover_check, lift, lift_raw, measure_from_json, random_isotropic, simplex_measure, spherical_hausdorff,
    standard_simplex_measure, unlift, validate, wasserstein_w1,
)


def rot2(a):
    return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])


def moments(mu):
    U, c = mu.directions, mu.weights
    return np.einsum("k,ka,kb->ab", c, U, U), c @ U, c.sum()


def test_validate_examples():
    rep = validate(standard_simplex_measure(3))
    assert rep.passed and rep.data["mass"] == pytest.approx(3)
    assert validate(axis_measure(2)).passed
    mu = axis_measure(2)
    w = mu.weights.copy()
    w[0] = 0.6
    assert not validate(SphericalMeasure(mu.directions, w))["isotropic"].passed


def test_measure_rejects_bad_atoms():
    with pytest.raises(InvalidMeasure):
        SphericalMeasure(np.array([[2.0, 0.0]]), np.ones(1))
    with pytest.raises(InvalidMeasure):
        SphericalMeasure(np.eye(2), np.array([1.0, -1.0]))


def test_json_roundtrip():
    mu = standard_simplex_measure(3)
    nu = measure_from_json(mu.to_json())
    assert np.allclose(nu.directions, mu.directions) and np.allclose(nu.weights, mu.weights)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_simplex_measure(n):
    mu = simplex_measure(regular_simplex(n))
    assert mu.k == n + 1
    assert np.allclose(mu.weights, n / (n + 1))
    assert mu.mass == pytest.approx(n)
    assert is_valid(mu)


def test_simplex_measure_rotates():
    R = random_rotation(3, np.random.default_rng(0))
    S = affine_image(regular_simplex(3), R)
    mu = simplex_measure(S)
    assert np.allclose(np.sort(mu.weights), 0.75)
    assert spherical_hausdorff(mu.directions, simplex_contacts(3) @ R.T, "max") < 1e-9


def test_simplex_measure_rejects_non_regular(square):
    with pytest.raises(InvalidSimplex):
        simplex_measure(from_points(np.array([[-1, -1], [3, -1], [-1, 3]], float)))


def test_reduction_examples():
    mu = standard_simplex_measure(2)
    assert caratheodory_reduce(mu).k == 3
    ax = axis_measure(2)
    U = np.vstack([ax.directions @ rot2(a).T for a in (0.0, 0.4, 1.1)])
    big = SphericalMeasure(U, np.full(12, 0.5 / 3))
    red = caratheodory_reduce(big)
    assert red.k <= caratheodory_bound(2)
    for a, b in zip(moments(big), moments(red)):
        assert np.allclose(a, b, atol=1e-9)
    # support containment
    assert np.all(np.min(np.linalg.norm(red.directions[:, None] - U[None], axis=2), axis=1) < 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_reduction_preserves_moments(seed, n):
    mu = random_isotropic(n, caratheodory_bound(n) + 6, seed)
    red = caratheodory_reduce(mu)
    assert red.k <= caratheodory_bound(n)
    for a, b in zip(moments(mu), moments(red)):
        assert np.allclose(a, b, atol=1e-9)


def test_lift_examples():
    L = lift_raw(np.array([[1.0, 0.0]]), np.ones(1))
    assert np.allclose(L.vectors[0], [-math.sqrt(2 / 3), 0, math.sqrt(1 / 3)])
    Ls = lift(standard_simplex_measure(2))
    assert np.allclose(Ls.vectors @ Ls.vectors.T, np.eye(3), atol=1e-9)
    assert Ls.weights.sum() == pytest.approx(3)
    assert Ls.check().passed


def test_lift_rejects_invalid():
    with pytest.raises(InvalidMeasure):
        lift(SphericalMeasure(np.eye(2), np.ones(2)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 4]), st.integers(0, 4))
def test_lift_roundtrip(seed, n, extra):
    mu = random_isotropic(n, n + 1 + extra, seed)
    L = lift(mu)
    assert L.check().passed
    back = unlift(L)
    assert np.allclose(back.directions, mu.directions) and np.allclose(back.weights, mu.weights)


def test_lift_fails_for_invalid_raw_system():
    L = lift_raw(np.eye(2), np.ones(2))
    assert not L.check().passed


def test_hausdorff_examples():
    X = simplex_contacts(2)
    assert spherical_hausdorff(X, X) == 0
    assert spherical_hausdorff(X, X @ rot2(0.3).T) == pytest.approx(0.3)
    assert spherical_hausdorff([[1, 0]], [[-1, 0]]) == pytest.approx(math.pi)
    with pytest.raises(InvalidInput):
        spherical_hausdorff(np.zeros((0, 2)), X)


def test_min_and_max_modes_differ():
    X = simplex_contacts(2)
    Y = np.r_[X, [[math.cos(0.5), math.sin(0.5)]]]
    assert spherical_hausdorff(X, Y, "min") == 0
    assert spherical_hausdorff(X, Y, "max") > 0


def test_cap_masses_examples():
    W = simplex_contacts(2)
    mu = standard_simplex_measure(2)
    assert np.allclose(cap_masses(mu, W, 0.0), 2 / 3)
    base = np.arctan2(W[:, 1], W[:, 0])
    ang = np.r_[base - 0.01, base + 0.01]
    split = SphericalMeasure(np.c_[np.cos(ang), np.sin(ang)], np.full(6, 1 / 3))
    assert is_valid(split)
    m = cap_masses(split, W, 0.01 + 1e-12)
    assert np.all(np.abs(m - 2 / 3) <= 0.04)
    stray = np.r_[W, [[math.cos(base[0] + 1.0), math.sin(base[0] + 1.0)]]]
    nu = isotropize(stray)
    with pytest.raises(CapsNotCovering):
        cap_masses(nu, W, 0.1)


def test_w1_examples():
    mu = standard_simplex_measure(2)
    assert wasserstein_w1(mu, mu) == pytest.approx(0, abs=1e-12)
    a = SphericalMeasure([[1.0, 0.0]], [1.0])
    b = SphericalMeasure([[0.0, 1.0]], [1.0])
    assert wasserstein_w1(a, b) == pytest.approx(math.pi / 2)
    th = 0.2
    w = wasserstein_w1(mu, mu.rotate(rot2(th)))
    assert 0 <= w <= 2 * th + 1e-12
    with pytest.raises(InvalidInput):
        wasserstein_w1(mu, standard_simplex_measure(2).__class__(mu.directions, mu.weights * 2))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_w1_metric_properties(seed):
    mus = [random_isotropic(2, 4 + i, seed + i) for i in range(3)]
    d = lambda a, b: wasserstein_w1(a, b)
    assert d(mus[0], mus[1]) == pytest.approx(d(mus[1], mus[0]), abs=1e-9)
    assert d(mus[0], mus[2]) <= d(mus[0], mus[1]) + d(mus[1], mus[2]) + 1e-9


def test_generator_examples():
    mu = random_isotropic(2, 3, 11)
    assert np.allclose(mu.weights, 2 / 3, atol=1e-8)
    assert is_valid(random_isotropic(3, 6, 7))
    with pytest.raises(InvalidCardinality):
        random_isotropic(2, 2, 0)
    assert np.array_equal(random_isotropic(3, 7, 5).directions, random_isotropic(3, 7, 5).directions)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 4]), st.integers(0, 6))
def test_cover_lemma(seed, n, extra):
    mu = random_isotropic(n, n + 1 + extra, seed)
    V = np.random.default_rng(seed).normal(size=(100, n))
    V /= np.linalg.norm(V, axis=1)[:, None]
    assert lemma_cover_check(mu, V) >= 1 / n - 1e-9
