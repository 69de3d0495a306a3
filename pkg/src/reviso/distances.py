"""Affine-invariant distances between convex bodies: volume distance and Banach-Mazur distance."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.optimize import linprog, minimize

from .errors import InvalidInput
from .geometry import Polytope, affine_image, from_points, symmetric_difference_volume
from .report import CheckReport


@dataclass
class DistanceResult:
    value: float
    transform: tuple
    certificate: str = "heuristic"
    evaluations: int = 0


# SL(n) chart: R exp(S), R = exp(skew), S symmetric traceless -------------------

def _chart_dim(n):
    return n * n - 1


def sl_from_params(p, n):
    k = n * (n - 1) // 2
    A = np.zeros((n, n))
    A[np.triu_indices(n, 1)] = p[:k]
    A = A - A.T
    S = np.zeros((n, n))
    iu = np.triu_indices(n)
    diag_mask = iu[0] == iu[1]
    vals = np.zeros(len(iu[0]))
    # symmetric traceless part: off-diagonal entries then n-1 diagonal entries
    off = ~diag_mask
    q = p[k:]
    vals[off] = q[: off.sum()]
    d = q[off.sum() :]
    vals[diag_mask] = np.r_[d, -np.sum(d)]
    S[iu] = vals
    S = S + np.triu(S, 1).T
    return expm(A) @ expm(S)


def _centered_unit(P: Polytope):
    """Unit-volume copy of P with centroid at the origin, plus the map used."""
    n = P.dim
    a = P.volume ** (-1.0 / n)
    M = a * np.eye(n)
    t = -a * P.centroid
    return affine_image(P, M, t), (M, t)


def _inertia_root(P: Polytope, rng_samples=None):
    """Unit-determinant symmetric A with A P in isotropic (inertia) position."""
    V = P.vertices - P.centroid
    # second moment of the vertex set is a cheap, affine-equivariant proxy
    C = V.T @ V / len(V)
    w, U = np.linalg.eigh(C)
    A = (U / np.sqrt(w)) @ U.T
    return A / abs(np.linalg.det(A)) ** (1.0 / P.dim)


def _best_translation(Kp: Polytope, Mp: Polytope, x0):
    f = lambda x: symmetric_difference_volume(Kp, _shift(Mp, x))
    res = minimize(f, x0, method="Nelder-Mead", options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 400})
    return res.x, float(res.fun)


def _shift(P, x):
    return affine_image(P, np.eye(P.dim), x)


def delta_vol(K: Polytope, M: Polytope, starts: int | None = None, seed: int = 0, scan: int = 180,
              maxiter: int | None = None) -> DistanceResult:
    """min V(Phi(alpha K) symmetric-difference (x + beta M)) over Phi in SL(n), x."""
    if K.dim != M.dim:
        raise InvalidInput("dimension mismatch")
    n = K.dim
    K1, _ = _centered_unit(K)
    M1, _ = _centered_unit(M)
    AK, AM = _inertia_root(K1), _inertia_root(M1)
    K2 = affine_image(K1, AK)
    M2 = affine_image(M1, AM)
    evals = [0]

    def obj(z):
        evals[0] += 1
        Phi = sl_from_params(z[: _chart_dim(n)], n)
        x = z[_chart_dim(n) :]
        return symmetric_difference_volume(affine_image(K2, Phi, -x), M2)

    dim = _chart_dim(n)
    starts = (12 if n == 2 else 4) if starts is None else starts
    maxiter = (600 if n == 2 else 150) * (dim + n) if maxiter is None else maxiter
    candidates = []
    if n == 2:
        for th in np.arange(scan) * 2 * math.pi / scan:
            z = np.r_[th, np.zeros(dim - 1 + n)]
            candidates.append((obj(z), z))
        candidates.sort(key=lambda c: c[0])
        candidates = candidates[:4]
        cert = "scan-certified"
    else:
        rng = np.random.default_rng(seed)
        k = n * (n - 1) // 2
        for i in range(starts):
            z = np.zeros(dim + n)
            if i:
                z[:k] = rng.normal(scale=1.5, size=k)
            candidates.append((obj(z), z))
        cert = "heuristic"
    best = (math.inf, None)
    for _, z0 in candidates:
        step = np.r_[np.full(dim, 0.15), np.full(n, 0.1)]
        simplex = np.vstack([z0, z0 + np.diag(step)])
        res = minimize(obj, z0, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": 1e-8, "fatol": 1e-11, "maxiter": maxiter})
        if res.fun < best[0]:
            best = (float(res.fun), res.x)
    z = best[1]
    Phi = sl_from_params(z[:dim], n)
    x = z[dim:]
    # overall map on the unit-volume centred copy of K: AM^{-1} Phi AK
    L = np.linalg.solve(AM, Phi @ AK)
    return DistanceResult(max(best[0], 0.0), (L, -np.linalg.solve(AM, x)), cert, evals[0])


# Banach-Mazur ----------------------------------------------------------------

def containment_ratio(K: Polytope, Mimg_vertices, Mimg_normals, Mimg_offsets):
    """min lam with K in s*A + z in lam*K + w for the fixed body A, via a linear program.

    Variables (s, z, lam, w). Returns (lam, s, z, w).
    """
    n = K.dim
    # K inside s*A + z: <a, v> <= s*b + <a, z>, for vertices v of K and facets (a, b) of A
    rows, rhs = [], []
    for a, b in zip(Mimg_normals, Mimg_offsets):
        for v in K.vertices:
            rows.append(np.r_[-b, -a, 0.0, np.zeros(n)])
            rhs.append(-(a @ v))
    # s*A + z inside lam*K + w: <c, s*m + z> <= lam*d + <c, w>
    for c, d in zip(K.normals, K.offsets):
        for m in Mimg_vertices:
            rows.append(np.r_[c @ m, c, -d, -c])
            rhs.append(0.0)
    cost = np.r_[0.0, np.zeros(n), 1.0, np.zeros(n)]
    bounds = [(1e-12, None)] + [(None, None)] * n + [(1.0, None)] + [(None, None)] * n
    res = linprog(cost, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    if res.status != 0:
        return math.inf, None, None, None
    s, z, lam, w = res.x[0], res.x[1 : n + 1], res.x[n + 1], res.x[n + 2 :]
    return float(lam), float(s), z, w


def _bm_linear(K, M, Phi):
    A = affine_image(M, Phi)
    return containment_ratio(K, A.vertices, A.normals, A.offsets)


def _is_triangle(P):
    return P.dim == 2 and len(P.vertices) == 3


def _triangle_from_normals(angles, K):
    N = np.c_[np.cos(angles), np.sin(angles)]
    h = (K.vertices @ N.T).max(axis=0)
    verts = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        verts.append(np.linalg.solve(N[[j, k]], h[[j, k]]))
    return np.array(verts), N, h


def _positively_spanning(angles):
    a = np.sort(np.mod(angles, 2 * math.pi))
    gaps = np.diff(np.r_[a, a[0] + 2 * math.pi])
    return np.all(gaps < math.pi - 1e-9)


def _homothety_ratio(verts, K):
    """min lam with conv(verts) inside lam*K + w, by a 3-variable linear program."""
    rows, rhs = [], []
    for c, d in zip(K.normals, K.offsets):
        for q in verts:
            rows.append(np.r_[-d, -c])
            rhs.append(-(c @ q))
    res = linprog(np.r_[1.0, 0.0, 0.0], A_ub=np.array(rows), b_ub=np.array(rhs),
                  bounds=[(0, None), (None, None), (None, None)], method="highs")
    return float(res.x[0]) if res.status == 0 else math.inf


def _bm_triangle_2d(K: Polytope, grid: int = 30):
    """ln of min lam over triangles D with K in D in lam*K + w.

    Edges of an optimal D may be taken to support K, so D is parametrized by its
    three edge normal angles; a grid scan is followed by local refinement.
    """
    # the distance is affine invariant; whitening makes a uniform angle grid effective
    A, c = _inertia_root(K), K.centroid
    K = affine_image(K, A, -A @ c)

    def ratio(angles):
        if not _positively_spanning(angles):
            return math.inf
        verts, _, _ = _triangle_from_normals(angles, K)
        return _homothety_ratio(verts, K)

    th = np.arange(grid) * 2 * math.pi / grid
    scored = []
    for i, j, k in itertools.combinations(range(grid), 3):
        ang = th[[i, j, k]]
        if _positively_spanning(ang):
            scored.append((ratio(ang), ang))
    scored.sort(key=lambda c: c[0])
    best = (math.inf, None)
    h = 2 * math.pi / grid
    for val, ang in scored[:4]:
        simplex = np.vstack([ang, ang + np.diag([h, h, h]) * 0.5])
        res = minimize(ratio, ang, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": 1e-9, "fatol": 1e-12, "maxiter": 1500})
        if res.fun < best[0]:
            best = (float(res.fun), res.x)
    lam, ang = best
    verts, _, _ = _triangle_from_normals(ang, K)
    return max(lam, 1.0), np.linalg.solve(A, verts.T).T + c


def delta_bm(K: Polytope, M: Polytope, starts: int = 12, seed: int = 0, scan: int = 90) -> DistanceResult:
    """ln min lam with K - x in Phi(M - y) in lam (K - x)."""
    if K.dim != M.dim:
        raise InvalidInput("dimension mismatch")
    n = K.dim
    if n == 2 and (_is_triangle(M) or _is_triangle(K)):
        body = K if _is_triangle(M) else M
        lam, verts = _bm_triangle_2d(body)
        return DistanceResult(math.log(lam), (verts,), "scan-certified")
    AK, AM = _inertia_root(K), _inertia_root(M)
    dim = _chart_dim(n)
    evals = [0]

    def obj(z):
        evals[0] += 1
        Phi = np.linalg.solve(AK, sl_from_params(z, n) @ AM)
        lam = _bm_linear(K, M, Phi)[0]
        return math.log(lam) if np.isfinite(lam) else 50.0

    if n == 2:
        cand = sorted(((obj(np.r_[t, 0.0, 0.0]), np.r_[t, 0.0, 0.0]) for t in np.arange(scan) * 2 * math.pi / scan),
                      key=lambda c: c[0])[:4]
        cert = "scan-certified"
    else:
        rng = np.random.default_rng(seed)
        k = n * (n - 1) // 2
        cand = []
        for i in range(starts):
            z = np.zeros(dim)
            if i:
                z[:k] = rng.normal(scale=1.5, size=k)
            cand.append((obj(z), z))
        cert = "heuristic"
    best = (math.inf, None)
    for _, z0 in cand:
        simplex = np.vstack([z0, z0 + 0.15 * np.eye(dim)])
        res = minimize(obj, z0, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": 1e-9, "fatol": 1e-12, "maxiter": 800 * dim})
        if res.fun < best[0]:
            best = (float(res.fun), res.x)
    Phi = np.linalg.solve(AK, sl_from_params(best[1], n) @ AM)
    lam, s, z, w = _bm_linear(K, M, Phi)
    return DistanceResult(max(math.log(lam), 0.0), (s * Phi, z), cert, evals[0])


def nested_pair_bound(K: Polytope, M: Polytope, delta: float):
    """For K in M in e^delta K (origin in K): (V(K_0 sym-diff M_0), 2 delta e^delta)."""
    n = K.dim
    K0 = affine_image(K, K.volume ** (-1 / n) * np.eye(n))
    M0 = affine_image(M, M.volume ** (-1 / n) * np.eye(n))
    return symmetric_difference_volume(K0, M0), 2 * delta * math.exp(delta)


def distance_relation_check(K: Polytope, M: Polytope, tol: float = 1e-9, **kw) -> CheckReport:
    n = K.dim
    dv = delta_vol(K, M, **kw)
    db = delta_bm(K, M, **kw)
    rep = CheckReport("distance-relation", data={"delta_vol": dv.value, "delta_bm": db.value,
                                                 "certificates": [dv.certificate, db.certificate]})
    bound = 2 * math.exp(n * n) * db.value
    certified = dv.certificate == db.certificate == "scan-certified"
    ok = dv.value <= bound + tol if certified else True
    rep.add("vol<=2e^{n^2}bm", ok, dv.value, bound, "" if certified else "not asserted: heuristic values")
    rep.add("bm<=n^2", db.value <= n * n + tol, db.value, n * n)
    return rep
