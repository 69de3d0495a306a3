"""Bounded convex polytopes in R^n (2 <= n <= 5) with synchronized H- and V-representations.

Hulls and the dual transform for halfspace intersection are backed by Qhull
(``scipy.spatial.ConvexHull``); the interior point comes from a Chebyshev-center LP.
Volume is a fan triangulation of the triangulated hull boundary from an interior point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .errors import (
    DegenerateInput,
    InvalidDimension,
    InvalidInput,
    SingularTransform,
    UnboundedPolytope,
)

MAX_DIM = 5
DEFAULT_TOL = 1e-9


def _check_dim(n):
    if n < 2:
        raise InvalidDimension(f"dimension must be >= 2, got {n}")
    if n > MAX_DIM:
        raise InvalidDimension(f"dimension {n} exceeds supported maximum {MAX_DIM}")


def dedup_points(points, tol):
    """Greedy merge of points closer than ``tol``; keeps first occurrence order."""
    points = np.asarray(points, dtype=float)
    keep = []
    for i, p in enumerate(points):
        if keep and np.min(np.linalg.norm(points[keep] - p, axis=1)) <= tol:
            continue
        keep.append(i)
    return points[keep]


def _affine_rank(points, tol):
    if len(points) == 0:
        return -1
    centered = points - points.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    scale = max(1.0, float(np.max(np.abs(points))))
    return int(np.sum(s > tol * scale * 10))


@dataclass(frozen=True, eq=False)
class Polytope:
    """A bounded, full-dimensional convex polytope.

    ``normals[i] . x <= offsets[i]`` are the facet inequalities (unit normals);
    ``vertices`` are the extreme points. Construct through :func:`from_halfspaces`,
    :func:`from_points` or :func:`dual_representation` so both lists are consistent.
    """

    dim: int
    normals: np.ndarray
    offsets: np.ndarray
    vertices: np.ndarray
    tol: float = DEFAULT_TOL

    @property
    def halfspaces(self):
        return [(u.copy(), float(b)) for u, b in zip(self.normals, self.offsets)]

    @property
    def scale(self):
        return max(1.0, float(np.max(np.abs(self.vertices))))

    @cached_property
    def _triangulation(self):
        try:
            hull = ConvexHull(self.vertices)
        except QhullError as exc:
            raise DegenerateInput(f"hull of vertices failed: {exc}") from exc
        return self.vertices[hull.simplices]

    @cached_property
    def interior_point(self):
        return self.vertices.mean(axis=0)

    @cached_property
    def _fan(self):
        n = self.dim
        facets = self._triangulation
        rel = facets - self.interior_point
        vols = np.abs(np.linalg.det(rel)) / math.factorial(n)
        return facets, vols

    @cached_property
    def volume(self):
        return float(np.sum(self._fan[1]))

    @cached_property
    def surface_area(self):
        facets = self._triangulation
        edges = facets[:, 1:, :] - facets[:, :1, :]
        gram = np.einsum("kij,klj->kil", edges, edges)
        areas = np.sqrt(np.clip(np.linalg.det(gram), 0.0, None)) / math.factorial(self.dim - 1)
        return float(np.sum(areas))

    @cached_property
    def centroid(self):
        facets, vols = self._fan
        cents = (facets.sum(axis=1) + self.interior_point) / (self.dim + 1)
        return (vols[:, None] * cents).sum(axis=0) / vols.sum()

    def isoperimetric_ratio(self):
        n = self.dim
        return self.surface_area**n / self.volume ** (n - 1)

    def contains(self, points, tol=None):
        tol = self.tol * self.scale if tol is None else tol
        points = np.atleast_2d(points)
        return np.all(points @ self.normals.T <= self.offsets + tol, axis=1)

    def support(self, direction):
        return float(np.max(self.vertices @ np.asarray(direction, dtype=float)))

    def gauge(self, points):
        """Minkowski functional max_i <x,u_i>/b_i; requires the origin in the interior."""
        if np.any(self.offsets <= 0):
            raise InvalidInput("gauge needs the origin in the interior")
        points = np.atleast_2d(points)
        return np.max(points @ self.normals.T / self.offsets, axis=1)

    def to_json(self):
        hs = [list(map(float, u)) + [float(b)] for u, b in zip(self.normals, self.offsets)]
        return {"dim": self.dim, "halfspaces": hs, "vertices": self.vertices.tolist()}


def from_halfspaces(normals, offsets, tol=DEFAULT_TOL):
    """Intersection of ``normals @ x <= offsets``; non-facet constraints are dropped."""
    A = np.atleast_2d(np.asarray(normals, dtype=float))
    b = np.asarray(offsets, dtype=float).ravel()
    if A.shape[0] != b.shape[0]:
        raise InvalidInput("normals and offsets disagree in length")
    n = A.shape[1]
    _check_dim(n)
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms == 0):
        raise InvalidInput("zero normal vector")
    A = A / norms[:, None]
    b = b / norms

    # Chebyshev center: max r s.t. A x + r <= b
    res = linprog(
        np.r_[np.zeros(n), -1.0],
        A_ub=np.c_[A, np.ones(len(b))],
        b_ub=b,
        bounds=[(None, None)] * n + [(0, None)],
        method="highs",
    )
    if res.status == 3:
        raise UnboundedPolytope("halfspace intersection is unbounded")
    if res.status == 2:
        raise DegenerateInput("halfspace intersection is empty")
    if res.status != 0:
        raise DegenerateInput(f"interior point LP failed: {res.message}")
    center, radius = res.x[:n], res.x[n]
    scale = max(1.0, float(np.max(np.abs(center))))
    if radius <= tol * scale:
        raise DegenerateInput("halfspace intersection has empty interior")

    slack = b - A @ center
    dual = A / slack[:, None]
    dual_unique = dedup_points(dual, 1e-12 * max(1.0, float(np.max(np.abs(dual)))))
    try:
        hull = ConvexHull(dual_unique)
    except QhullError as exc:
        raise UnboundedPolytope("normals do not positively span R^n") from exc
    eq = hull.equations
    if np.any(eq[:, -1] >= -1e-12):
        raise UnboundedPolytope("halfspace intersection is unbounded")
    verts = center + eq[:, :-1] / (-eq[:, -1])[:, None]
    if np.max(np.abs(verts)) > 1e12:
        raise UnboundedPolytope("halfspace intersection is numerically unbounded")
    verts = _polish_vertices(verts, A, b)
    verts = dedup_points(verts, tol * max(1.0, float(np.max(np.abs(verts)))))
    return _finish(verts, A, b, n, tol)


def _polish_vertices(verts, A, b, band=1e-7):
    """Re-solve each vertex from its tight constraints; the dual hull equations carry roundoff."""
    n = A.shape[1]
    out = verts.copy()
    scale = max(1.0, float(np.max(np.abs(verts))))
    for j, v in enumerate(verts):
        tight = np.abs(b - A @ v) <= band * scale
        if np.count_nonzero(tight) < n:
            continue
        AI, bI = A[tight], b[tight]
        x, _, rank, _ = np.linalg.lstsq(AI, bI, rcond=None)
        if rank == n and np.linalg.norm(x - v) <= band * scale:
            out[j] = x
    return out


def _finish(verts, A, b, n, tol):
    """Keep only facet-defining constraints (n affinely independent tight vertices)."""
    scale = max(1.0, float(np.max(np.abs(verts))))
    slack = b[:, None] - A @ verts.T
    keep_normals, keep_offsets = [], []
    for i in range(len(b)):
        tight = verts[np.abs(slack[i]) <= 10 * tol * scale]
        if len(tight) < n or _affine_rank(tight, tol) < n - 1:
            continue
        dup = False
        for u, c in zip(keep_normals, keep_offsets):
            if np.linalg.norm(u - A[i]) <= 1e-9 and abs(c - b[i]) <= 10 * tol * scale:
                dup = True
                break
        if not dup:
            keep_normals.append(A[i])
            keep_offsets.append(b[i])
    if len(keep_normals) < n + 1:
        raise DegenerateInput("fewer than n+1 facets survived")
    return Polytope(n, np.array(keep_normals), np.array(keep_offsets), verts, tol)


def from_points(points, tol=DEFAULT_TOL):
    """Convex hull of a point cloud."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    n = P.shape[1]
    _check_dim(n)
    scale = max(1.0, float(np.max(np.abs(P))))
    P = dedup_points(P, tol * scale)
    if len(P) < n + 1 or _affine_rank(P, tol) < n:
        raise DegenerateInput("points do not span a full-dimensional hull")
    try:
        hull = ConvexHull(P)
    except QhullError as exc:
        raise DegenerateInput(f"hull failed: {exc}") from exc
    verts = P[hull.vertices]
    A = hull.equations[:, :-1]
    b = -hull.equations[:, -1]
    return _finish(verts, A, b, n, tol)


def dual_representation(halfspaces=None, points=None, dim=None, tol=DEFAULT_TOL):
    """Build a :class:`Polytope` from either a halfspace list ``[(u, b), ...]`` or points."""
    if (halfspaces is None) == (points is None):
        raise InvalidInput("give exactly one of halfspaces or points")
    if halfspaces is not None:
        hs = [np.r_[np.asarray(u, dtype=float), float(c)] for u, c in halfspaces]
        H = np.array(hs)
        if dim is not None and H.shape[1] - 1 != dim:
            raise InvalidInput("halfspace dimension mismatch")
        return from_halfspaces(H[:, :-1], H[:, -1], tol)
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if dim is not None and P.shape[1] != dim:
        raise InvalidInput("point dimension mismatch")
    return from_points(P, tol)


def from_json(data, tol=DEFAULT_TOL):
    if isinstance(data, str):
        data = json.loads(data)
    dim = int(data["dim"])
    if data.get("halfspaces"):
        H = np.asarray(data["halfspaces"], dtype=float)
        return dual_representation(halfspaces=[(h[:-1], h[-1]) for h in H], dim=dim, tol=tol)
    if data.get("vertices"):
        return dual_representation(points=data["vertices"], dim=dim, tol=tol)
    raise InvalidInput("body JSON needs halfspaces or vertices")


def load_polytope(path, tol=DEFAULT_TOL):
    with open(path) as fh:
        return from_json(json.load(fh), tol)


def simplex_contacts(n):
    """Unit contact points w_0..w_n of the regular simplex circumscribed about B^n.

    Rows of a Helmert-type orthonormal basis of the sum-zero subspace of R^{n+1},
    scaled so that <w_i, w_j> = -1/n for i != j.
    """
    _check_dim(n)
    E = np.eye(n + 1) - 1.0 / (n + 1)
    # orthonormal basis of the sum-zero hyperplane, fixed by QR of a fixed matrix
    Q, _ = np.linalg.qr(E[:, :n])
    W = E @ Q
    W /= np.linalg.norm(W, axis=1)[:, None]
    return W


def regular_simplex(n, tol=DEFAULT_TOL):
    """T^n: regular simplex with inscribed ball B^n and centroid at the origin."""
    _check_dim(n)
    W = simplex_contacts(n)
    return Polytope(n, W.copy(), np.ones(n + 1), -n * W, tol)


def simplex_volume_formula(n):
    return n ** (n / 2) * (n + 1) ** ((n + 1) / 2) / math.factorial(n)


def volume(P):
    return P.volume


def surface_area(P):
    return P.surface_area


def isoperimetric_ratio(P):
    return P.isoperimetric_ratio()


def affine_image(P, M, t=None):
    """Image of ``P`` under x -> M x + t."""
    M = np.asarray(M, dtype=float)
    n = P.dim
    t = np.zeros(n) if t is None else np.asarray(t, dtype=float)
    det = np.linalg.det(M)
    if abs(det) <= 1e-14 * max(1.0, np.linalg.norm(M)) ** n:
        raise SingularTransform("transform is singular")
    Minv_T = np.linalg.inv(M).T
    N = P.normals @ Minv_T.T
    norms = np.linalg.norm(N, axis=1)
    offsets = (P.offsets + N @ t) / norms
    return Polytope(n, N / norms[:, None], offsets, P.vertices @ M.T + t, P.tol)


def translate(P, t):
    return affine_image(P, np.eye(P.dim), t)


def scale(P, s, center=None):
    c = np.zeros(P.dim) if center is None else np.asarray(center, dtype=float)
    return affine_image(P, s * np.eye(P.dim), c - s * c)


def intersection(P, Q):
    """P ∩ Q, or None when the intersection has empty interior."""
    if P.dim != Q.dim:
        raise InvalidInput("dimension mismatch")
    if P.dim == 2:
        from .polygon import clip_convex

        verts = clip_convex(_ordered_polygon(P), Q.normals, Q.offsets)
        if len(verts) < 3 or _shoelace(verts) <= P.tol * P.scale:
            return None
        try:
            return from_points(verts, P.tol)
        except DegenerateInput:
            return None
    try:
        return from_halfspaces(
            np.r_[P.normals, Q.normals], np.r_[P.offsets, Q.offsets], min(P.tol, Q.tol)
        )
    except DegenerateInput:
        return None


def _ordered_polygon(P):
    c = P.vertices.mean(axis=0)
    ang = np.arctan2(P.vertices[:, 1] - c[1], P.vertices[:, 0] - c[0])
    return P.vertices[np.argsort(ang)]


def _shoelace(verts):
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def intersection_volume(P, Q):
    if P.dim == 2:
        from .polygon import clip_convex, polygon_area

        return polygon_area(clip_convex(_ordered_polygon(P), Q.normals, Q.offsets))
    return _halfspace_volume(np.r_[P.normals, Q.normals], np.r_[P.offsets, Q.offsets], P, Q)


def _halfspace_volume(A, b, P, Q):
    """Volume of {A x <= b} without building a Polytope; the hot path of distance searches."""
    # a cheap interior point first, the Chebyshev LP only if every guess fails
    guesses = np.array([P.vertices.mean(axis=0), Q.vertices.mean(axis=0),
                        0.5 * (P.vertices.mean(axis=0) + Q.vertices.mean(axis=0))])
    slack = b[None, :] - guesses @ A.T
    j = int(np.argmax(slack.min(axis=1)))
    scale = max(1.0, float(np.max(np.abs(b))))
    if slack[j].min() > 1e-6 * scale:
        center = guesses[j]
    else:
        n = A.shape[1]
        res = linprog(np.r_[np.zeros(n), -1.0], A_ub=np.c_[A, np.ones(len(b))], b_ub=b,
                      bounds=[(None, None)] * n + [(0, None)], method="highs")
        if res.status != 0 or res.x[n] <= 1e-9 * scale:
            return 0.0
        center = res.x[:n]
    s = b - A @ center
    try:
        eq = ConvexHull(A / s[:, None]).equations
        verts = center + eq[:, :-1] / (-eq[:, -1])[:, None]
        return float(ConvexHull(verts).volume)
    except QhullError:
        return 0.0


def symmetric_difference_volume(P, Q):
    """V(P) + V(Q) - 2 V(P ∩ Q)."""
    if P.dim != Q.dim:
        raise InvalidInput("dimension mismatch")
    val = P.volume + Q.volume - 2.0 * intersection_volume(P, Q)
    return 0.0 if val < 10 * P.tol * max(1.0, P.volume) else float(val)


def centroid_halfspace_fraction(P, direction):
    """V(P ∩ {<x - centroid, d> >= 0}) / V(P)."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    c = P.centroid
    if P.dim == 2:
        from .polygon import clip_convex, polygon_area

        kept = clip_convex(_ordered_polygon(P), -d[None, :], np.array([-(c @ d)]))
        return polygon_area(kept) / P.volume
    try:
        half = from_halfspaces(np.r_[P.normals, -d[None, :]], np.r_[P.offsets, -(c @ d)], P.tol)
    except DegenerateInput:
        return 0.0
    return half.volume / P.volume


def random_rotation(n, rng):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_polytope(n, npoints, rng, tol=DEFAULT_TOL):
    return from_points(rng.standard_normal((npoints, n)), tol)
