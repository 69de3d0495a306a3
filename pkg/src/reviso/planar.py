"""Planar machinery: Gustin's triangle sandwich, proper sets on the circle, and the area bound."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, InvalidMeasure, LemmaViolation, NormalizationFailed, NotApplicable, UnboundedPolytope
from .geometry import Polytope, affine_image, from_halfspaces, from_points
from .measures import SphericalMeasure, is_valid
from .polygon import ordered, polygon_area, polygon_perimeter
from .report import CheckReport

TWO_PI = 2 * math.pi
IR_T2 = 12 * math.sqrt(3)  # S(T^2)^2 / V(T^2)
V_T2 = 3 * math.sqrt(3)


def _unit(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def angles_of(X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.mod(np.arctan2(X[:, 1], X[:, 0]), TWO_PI)


def circ_dist(a, b):
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b), TWO_PI))
    return np.minimum(d, TWO_PI - d)


# Gustin's construction ------------------------------------------------------

def reference_triangle():
    """Regular triangle centred at the origin with height 1 (inradius 1/3)."""
    return np.array([(2 / 3) * _unit(math.pi / 2 + k * TWO_PI / 3) for k in range(3)])


def max_area_triangle(K: Polytope):
    """Maximal-area triangle in a convex polygon; returns (vertices, area, locally_certified).

    Some maximal triangle has its vertices among the polygon's vertices, so the
    exhaustive triple scan is exact.
    """
    if K.dim != 2:
        raise InvalidInput("planar bodies only")
    V = ordered(K.vertices)
    best, tri = -1.0, None
    for i, j, k in itertools.combinations(range(len(V)), 3):
        e, f = V[j] - V[i], V[k] - V[i]
        a = 0.5 * abs(e[0] * f[1] - e[1] * f[0])
        if a > best:
            best, tri = a, V[[i, j, k]]
    # each vertex must be a support point of K in the normal direction of its opposite edge
    cert = True
    for m in range(3):
        p, q, r = tri[m], tri[(m + 1) % 3], tri[(m + 2) % 3]
        e = r - q
        nrm = np.array([e[1], -e[0]])
        if nrm @ (p - q) < 0:
            nrm = -nrm
        if (V @ nrm).max() > nrm @ p + 1e-9 * (1 + abs(nrm @ p)):
            cert = False
    return tri, best, cert


@dataclass
class GustinDecomposition:
    T1: Polytope
    T2: Polytope
    q: np.ndarray
    x_i: np.ndarray
    x: float
    P1: Polytope
    P2: Polytope
    body: Polytope
    transform: tuple
    coefficients: dict


def _normalizing_map(tri):
    ref = reference_triangle()
    A_src = np.c_[tri, np.ones(3)]
    # solve [x y 1] @ [M^T; b] = ref
    sol = np.linalg.solve(A_src, ref)
    M, b = sol[:2].T, sol[2]
    return M, b


def _p2(x_i):
    ref = reference_triangle()
    u = -ref / np.linalg.norm(ref, axis=1)[:, None]
    normals = np.r_[u, -u]
    offsets = np.r_[1 / 3 + np.asarray(x_i, float), np.full(3, 2 / 3)]
    return from_halfspaces(normals, offsets)


def gustin_decompose(K: Polytope, T1=None, tol: float = 1e-9) -> GustinDecomposition:
    """Sandwich T1 in P1 in K in P2 in T2 after mapping T1 to the reference triangle.

    ``T1`` defaults to a maximal-area inscribed triangle; any inscribed triangle
    whose anti-triangle contains K is accepted.
    """
    if K.dim != 2:
        raise InvalidInput("planar bodies only")
    tri = max_area_triangle(K)[0] if T1 is None else np.asarray(T1, dtype=float)
    M, b = _normalizing_map(tri)
    Kn = affine_image(K, M, b)
    ref = reference_triangle()
    u = -ref / np.linalg.norm(ref, axis=1)[:, None]  # outer normal of the edge opposite p_i
    T1p = from_halfspaces(u, np.full(3, 1 / 3))
    T2p = from_halfspaces(-u, np.full(3, 2 / 3))
    if not np.all(Kn.contains(ref, tol=1e-7)):
        raise NormalizationFailed("the inner triangle is not contained in K")
    if not np.all(T2p.contains(Kn.vertices, tol=1e-7)):
        raise NormalizationFailed("K is not contained in the anti-triangle")
    hk = Kn.vertices @ u.T
    qi = Kn.vertices[np.argmax(hk, axis=0)]
    x_i = np.clip(hk.max(axis=0) - 1 / 3, 0.0, 1.0)
    x = float(x_i.mean())
    P1 = from_points(np.r_[ref, qi])
    P2 = _p2(x_i)
    # affine-in-x coefficients from the exact end configurations
    S0, S1 = _p2(np.zeros(3)).surface_area, _p2(np.ones(3)).surface_area
    V0 = T1p.volume
    V1 = from_points(np.r_[ref, -2 * ref]).volume
    coeff = {"S_at_0": S0, "S_slope": S1 - S0, "V_at_0": V0, "V_slope": (V1 - V0)}
    return GustinDecomposition(T1p, T2p, qi, x_i, x, P1, P2, Kn, (M, b), coeff)


def gustin_bound_check(K: Polytope, T1=None, tol: float = 1e-9) -> CheckReport:
    g = gustin_decompose(K, T1, tol)
    Kn = g.body
    IR = Kn.surface_area**2 / Kn.volume
    mid = g.P2.surface_area**2 / g.P1.volume
    factor = 1 - g.x * (1 - g.x) / (1 + 3 * g.x)
    right = factor * IR_T2
    c = g.coefficients
    rep = CheckReport("gustin-chain", data={"x": g.x, "x_i": g.x_i.tolist(), "IR": IR, "middle": mid,
                                            "bound": right, "factor": factor})
    s_pred = c["S_at_0"] + c["S_slope"] * g.x
    v_pred = c["V_at_0"] + c["V_slope"] / 3 * (3 * g.x)
    rep.add("perimeter-affine-in-x", abs(g.P2.surface_area - s_pred) <= tol * s_pred, abs(g.P2.surface_area - s_pred), tol)
    rep.add("area-affine-in-x", abs(g.P1.volume - v_pred) <= tol * v_pred, abs(g.P1.volume - v_pred), tol)
    rep.add("perimeter=(1+x)S(T1)", abs(g.P2.surface_area - (1 + g.x) * g.T1.surface_area) <= tol * s_pred,
            g.P2.surface_area / g.T1.surface_area - 1 - g.x, tol)
    rep.add("area=(1+3x)V(T1)", abs(g.P1.volume - (1 + 3 * g.x) * g.T1.volume) <= tol * v_pred,
            g.P1.volume / g.T1.volume - 1 - 3 * g.x, tol)
    rep.add("IR<=middle", IR <= mid * (1 + tol), mid - IR, 0.0)
    rep.add("middle<=bound", mid <= right * (1 + tol), right - mid, 0.0)
    rep.add("bound<=ir(T2)", right <= IR_T2 * (1 + tol), IR_T2 - right, 0.0)
    return rep


def gustin_family(x: float) -> tuple[Polytope, np.ndarray]:
    """Hexagon T2 cut at depth 1 - x near each vertex (x=0: T1, x=1: T2) and its inner triangle."""
    if not 0 <= x <= 1:
        raise InvalidInput("x must lie in [0, 1]")
    return _p2(np.full(3, x)), reference_triangle()


# proper sets and d0 ---------------------------------------------------------

def is_proper(X, tol: float = 1e-12) -> bool:
    a = np.sort(angles_of(X))
    gaps = np.diff(np.r_[a, a[0] + TWO_PI])
    return bool(np.all(gaps <= TWO_PI / 3 + tol))


def _delta_h_angles(a, psi, mode):
    s = np.mod(psi + np.arange(3) * TWO_PI / 3, TWO_PI)
    D = circ_dist(a[:, None], s[None, :])
    one, two = D.min(axis=1).max(), D.min(axis=0).max()
    return min(one, two) if mode == "min" else max(one, two)


def d0(X, mode: str = "min"):
    """min over regular-triangle contact sets sigma of delta_H(X, sigma); returns (value, best angle).

    The objective is piecewise linear in the rotation angle with slopes +-1, so
    its minimum is attained at a crossing of two pieces; all such crossings lie
    in {(a_i + a_j)/2 + k pi/6}.
    """
    a = angles_of(X)
    if len(a) == 0:
        raise InvalidInput("empty set")
    mids = ((a[:, None] + a[None, :]) / 2).ravel()
    cand = np.mod(mids[:, None] + np.arange(12)[None, :] * math.pi / 6, TWO_PI / 3).ravel()
    cand = np.unique(np.round(cand, 15))
    vals = np.array([_delta_h_angles(a, p, mode) for p in cand])
    j = int(np.argmin(vals))
    return float(vals[j]), float(cand[j])


def d0_and_proper(X, mode: str = "min"):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.size == 0:
        raise InvalidInput("empty set")
    return is_proper(X), d0(X, mode)[0]


def planar_gap_pair(X, eta: float, mode: str = "min"):
    """u, v in X with eta <= angle(u, v) <= 2 pi/3 - eta."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if not 0 < eta <= math.pi / 6:
        raise NotApplicable("eta must lie in (0, pi/6]")
    if not is_proper(X):
        raise NotApplicable("X is not proper")
    if d0(X, mode)[0] < eta:
        raise NotApplicable("d0(X) < eta")
    a = angles_of(X)
    for i, j in itertools.combinations(range(len(a)), 2):
        g = circ_dist(a[i], a[j])
        if eta - 1e-12 <= g <= TWO_PI / 3 - eta + 1e-12:
            return X[i], X[j]
    raise LemmaViolation("no pair with angle in [eta, 2pi/3 - eta]")


# area of Z(mu) ----------------------------------------------------------------

def tangent_gap_area(X) -> float:
    """Area of the polygon circumscribed about B^2 touching it at X: sum of tan(gap/2)."""
    a = np.sort(angles_of(X))
    gaps = np.diff(np.r_[a, a[0] + TWO_PI])
    if np.any(gaps >= math.pi):
        raise UnboundedPolytope("a gap of at least pi leaves Z unbounded")
    return float(np.sum(np.tan(gaps / 2)))


def fact_t_check(alpha: float, beta: float, samples: int = 2001) -> bool:
    """F(t) = tan((alpha+t)/2) + tan((beta-t)/2) is increasing on [0, min(beta, 2pi/3 - alpha)]."""
    if not 0 <= beta <= alpha <= TWO_PI / 3:
        raise InvalidInput("need 0 <= beta <= alpha <= 2pi/3")
    t = np.linspace(0, min(beta, TWO_PI / 3 - alpha), samples)
    F = np.tan((alpha + t) / 2) + np.tan((beta - t) / 2)
    closed = 2 * math.sin((alpha + beta) / 2) / (math.cos((alpha + beta) / 2) + np.cos(t + (alpha - beta) / 2))
    if not np.allclose(F, closed, rtol=1e-9, atol=1e-15):  # atol covers subnormal angles
        raise LemmaViolation("closed form of F disagrees")
    return bool(np.all(np.diff(F) >= -1e-12))


def two_gap_bound(eta: float) -> float:
    """tan(eta/2) + tan(pi/3 - eta/2) + 2 sqrt 3, the extremal tangent sum for a gap of eta."""
    return math.tan(eta / 2) + math.tan(math.pi / 3 - eta / 2) + 2 * math.sqrt(3)


def circumscribed_area_bound(mu, eta: float, mode: str = "min") -> CheckReport:
    """Exact V(Z(mu)) against (1 - eta/8) V(T^2); a bare point set is taken as the support of some valid mu."""
    if isinstance(mu, SphericalMeasure):
        if not is_valid(mu):
            raise InvalidMeasure("mu is not a centred isotropic measure")
        X = mu.directions
    else:
        X = np.atleast_2d(mu)
    if X.shape[1] != 2:
        raise InvalidInput("planar measures only")
    if not 0 < eta <= math.pi / 6:
        raise NotApplicable("eta must lie in (0, pi/6]")
    dval, _ = d0(X, mode)
    if dval < eta:
        raise NotApplicable("d0(supp mu) < eta")
    area = tangent_gap_area(X)
    poly = from_halfspaces(X, np.ones(len(X))).volume
    bound = (1 - eta / 8) * V_T2
    rep = CheckReport("planar-area-bound", data={"area": area, "d0": dval, "eta": eta, "bound": bound})
    rep.add("tangent-sum=polygon-area", abs(area - poly) <= 1e-12 * max(1, poly), abs(area - poly), 1e-12)
    rep.add("area<=extremal-sum", area <= two_gap_bound(eta) + 1e-12, two_gap_bound(eta) - area, 0.0)
    rep.add("area<=(1-eta/8)V(T2)", area <= bound + 1e-12, bound - area, 0.0)
    return rep


def planar_stability_check(mu, mode: str = "min") -> CheckReport:
    """If V(Z) >= (1 - eps) V(T^2) then the nearest triangle configuration is within 32 eps."""
    X = mu.directions if isinstance(mu, SphericalMeasure) else np.atleast_2d(mu)
    eps = 1 - tangent_gap_area(X) / V_T2
    dval, _ = d0(X, mode)
    rep = CheckReport("planar-stability", data={"eps": eps, "d0": dval})
    rep.add("deltaH<=32eps", dval <= 32 * max(eps, 0.0) + 1e-9, dval, 32 * eps)
    return rep
