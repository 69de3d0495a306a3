"""The circumscribed body Z(mu) and proximity to regular simplices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize, minimize_scalar

from .determinant import max_det_subset  # noqa: F401  (re-exported)
from .errors import HypothesisViolated, InvalidInput, NotApplicable, OriginOutside, LemmaViolation
from .geometry import Polytope, from_halfspaces, regular_simplex, simplex_contacts, simplex_volume_formula
from .measures import SphericalMeasure, geodesic, spherical_hausdorff
from .report import CheckReport


def z_body(mu: SphericalMeasure, tol: float = 1e-9) -> Polytope:
    """{x : <x, u> <= 1 for every atom u}."""
    U = mu.directions
    return from_halfspaces(U, np.ones(len(U)), tol=tol)


def volume_deficit(mu_or_Z) -> float:
    """1 - V(Z)/V(T^n)."""
    Z = z_body(mu_or_Z) if isinstance(mu_or_Z, SphericalMeasure) else mu_or_Z
    return 1.0 - Z.volume / simplex_volume_formula(Z.dim)


# rotation charts -------------------------------------------------------------

def _skew(p, n):
    S = np.zeros((n, n))
    S[np.triu_indices(n, 1)] = p
    return S - S.T


def rotation_from_params(p, n):
    """Rotation exp(S) for the skew matrix with upper-triangular entries p."""
    if n == 2:
        c, s = math.cos(p[0]), math.sin(p[0])
        return np.array([[c, -s], [s, c]])
    return expm(_skew(p, n))


def params_from_rotation(R):
    from scipy.linalg import logm

    n = R.shape[0]
    if n == 2:
        return np.array([math.atan2(R[1, 0], R[0, 0])])
    L = np.real(logm(R))
    return 0.5 * (L - L.T)[np.triu_indices(n, 1)]


def _start_rotations(n, starts, seed):
    rng = np.random.default_rng(seed)
    out = [np.eye(n)]
    from .geometry import random_rotation

    while len(out) < starts:
        R = random_rotation(n, rng)
        if np.linalg.det(R) < 0:
            R[:, 0] = -R[:, 0]
        out.append(R)
    return out


def _rotation_search(objective, n, starts=24, seed=0, scan=None):
    """Minimize objective(R) over SO(n) by Nelder-Mead from multiple starts.

    In the plane, ``scan`` (number of grid points over one period) gives a dense
    scan followed by a bounded refinement.
    """
    if n == 2:
        period = 2 * math.pi / 3
        m = scan or 3600
        grid = np.arange(m) * period / m
        vals = np.array([objective(rotation_from_params([a], 2)) for a in grid])
        j = int(np.argmin(vals))
        h = period / m
        res = minimize_scalar(
            lambda a: objective(rotation_from_params([a], 2)),
            bounds=(grid[j] - h, grid[j] + h),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if res.fun <= vals[j]:
            return rotation_from_params([res.x], 2), float(res.fun), "scan-certified"
        return rotation_from_params([grid[j]], 2), float(vals[j]), "scan-certified"
    best = (None, math.inf)
    dim = n * (n - 1) // 2
    for R0 in _start_rotations(n, starts, seed):
        f = lambda p, R0=R0: objective(R0 @ rotation_from_params(p, n))
        res = minimize(
            f,
            np.zeros(dim),
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000 * dim, "initial_simplex": _init_simplex(dim, 0.3)},
        )
        if res.fun < best[1]:
            best = (R0 @ rotation_from_params(res.x, n), float(res.fun))
    return best[0], best[1], "heuristic"


def _init_simplex(dim, step):
    return np.vstack([np.zeros(dim), step * np.eye(dim)])


# d(K) ------------------------------------------------------------------------

@dataclass
class SimplexFit:
    simplex: Polytope
    rotation: np.ndarray
    scale: float
    lam: float
    certificate: str = "heuristic"

    @property
    def d(self):
        return math.log(self.lam)


def _sandwich(K: Polytope, W):
    """(s, lam) with s T_W inside K inside lam s T_W, T_W = {<x, w_i> <= 1}."""
    n = K.dim
    Tverts = -n * W
    inner = K.offsets / (K.normals @ Tverts.T).max(axis=1)
    s = float(inner.min())
    outer = float((K.vertices @ W.T).max())
    return s, outer / s


def simplex_distance(K: Polytope, starts: int = 24, seed: int = 0, scan: int | None = None) -> SimplexFit:
    """d(K) = ln of the best lambda with s T^n in Phi K in lambda s T^n."""
    n = K.dim
    if np.any(K.offsets <= K.tol):
        raise OriginOutside("the origin is not interior to K")
    W0 = simplex_contacts(n)

    def obj(R):
        return math.log(_sandwich(K, W0 @ R.T)[1])

    R, val, cert = _rotation_search(obj, n, starts, seed, scan or (20944 if n == 2 else None))
    W = W0 @ R.T
    s, lam = _sandwich(K, W)
    S = from_halfspaces(W, np.ones(n + 1))
    # rotation applied to the simplex; Phi = R^T applied to K
    return SimplexFit(S, R.T, s, max(lam, 1.0), cert)


def nearest_circumscribed_simplex(mu, mode: str = "min", starts: int = 24, seed: int = 0, scan: int = 3600):
    """Regular circumscribed simplex minimizing the spherical distance to supp mu."""
    X = mu.directions if isinstance(mu, SphericalMeasure) else np.atleast_2d(mu)
    n = X.shape[1]
    if n == 2:
        # piecewise linear in the angle: exact minimization over breakpoints
        from .planar import d0

        val, psi = d0(X, mode)
        a = psi + np.arange(3) * 2 * math.pi / 3
        return from_halfspaces(np.c_[np.cos(a), np.sin(a)], np.ones(3)), val
    W0 = simplex_contacts(n)

    def obj(R):
        return spherical_hausdorff(X, W0 @ R.T, mode)

    R, val, cert = _rotation_search(obj, n, starts, seed, scan)
    W = W0 @ R.T
    return from_halfspaces(W, np.ones(n + 1)), val


# orthonormal frames ----------------------------------------------------------

def _angle(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    c = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
    return math.acos(max(-1.0, min(1.0, c)))


def near_orthonormal_frame(V, eta: float, tol: float = 1e-8):
    """Gram-Schmidt basis close to v_1..v_n for a decomposition of the identity."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    k, n = V.shape
    if np.linalg.norm(V.T @ V - np.eye(n)) > tol:
        raise HypothesisViolated("vectors do not decompose the identity", index=-1)
    if not 0 < eta < 1 / (3 * math.sqrt(k)):
        raise HypothesisViolated("eta must lie in (0, 1/(3 sqrt k))", index=-1)
    for i in range(k):
        if np.linalg.norm(V[i]) <= eta:
            continue
        if min(_angle(V[i], V[j]) for j in range(n)) <= eta:
            continue
        raise HypothesisViolated(f"vector {i} is neither short nor close to v_1..v_n", index=i)
    W = np.zeros((n, n))
    for i in range(n):
        w = V[i] - W[:i].T @ (W[:i] @ V[i])
        W[i] = w / np.linalg.norm(w)
    bound = 3 * math.sqrt(k) * eta
    for i in range(n):
        if _angle(V[i], W[i]) >= bound:
            raise LemmaViolation(f"angle of v_{i} and w_{i} exceeds 3 sqrt(k) eta")
    return W


def align_frame(W, e, tau: float):
    """Rotate an orthonormal basis so that <e, w_i> = 1/sqrt(n) for all i.

    The rotation acts in the plane of sum w_i and e and fixes its complement.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    e = np.asarray(e, dtype=float)
    n = W.shape[0]
    if not 0 < tau < 1 / (2 * n):
        raise HypothesisViolated("tau must lie in (0, 1/(2n))", index=-1)
    dots = W @ e
    bad = np.flatnonzero(np.abs(dots - 1 / math.sqrt(n)) >= tau)
    if len(bad):
        raise HypothesisViolated("<e, w_i> is not tau-close to 1/sqrt(n)", index=int(bad[0]))
    a = W.sum(axis=0) / math.sqrt(n)
    R = plane_rotation(a, e)
    Wt = W @ R.T
    for i in range(n):
        if _angle(W[i], Wt[i]) >= n * tau:
            raise LemmaViolation("rotated basis moved by at least n tau")
    return Wt


def plane_rotation(a, b):
    """Rotation taking unit a to unit b through their acute angle, identity on the complement."""
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    c = float(a @ b)
    v = b - c * a
    s = np.linalg.norm(v)
    n = len(a)
    if s < 1e-15:
        return np.eye(n)
    v /= s
    return (
        np.eye(n)
        + (c - 1) * (np.outer(a, a) + np.outer(v, v))
        + s * (np.outer(v, a) - np.outer(a, v))
    )


# simplex proximity lemmas ----------------------------------------------------

def _contact_match(U, W):
    D = geodesic(U, W)
    return D.min(axis=1)


def sandwich_check(Z: Polytope, S: Polytope, eta: float, r: float = 3.0) -> CheckReport:
    """(1 - r n eta) S in Z in (1 + r n eta) S when every contact of Z is eta-close to one of S."""
    n = Z.dim
    if not 0 < eta < 1 / (9 * n):
        raise NotApplicable("eta must lie in (0, 1/(9n))")
    if np.any(np.abs(Z.offsets - 1) > 1e-9) or np.any(np.abs(S.offsets - 1) > 1e-9):
        raise NotApplicable("both bodies must be circumscribed about the unit ball")
    dev = _contact_match(Z.normals, S.normals)
    if np.any(dev > eta + 1e-12):
        raise NotApplicable("some contact of Z is not eta-close to a contact of S")
    lo, hi = 1 - r * n * eta, 1 + r * n * eta
    inner = lo * S.vertices
    inner_ok = float((inner @ Z.normals.T - Z.offsets).max())
    outer_ok = float((Z.vertices @ S.normals.T - hi * S.offsets).max())
    rep = CheckReport("simplex-sandwich", data={"eta": eta, "r": r})
    rep.add("inner-inclusion", inner_ok <= 1e-9, inner_ok, 0.0)
    rep.add("outer-inclusion", outer_ok <= 1e-9, outer_ok, 0.0)
    fit_lam = (hi / lo)
    rep.add("d-bound", math.log(fit_lam) < 9 * n * eta, math.log(fit_lam), 9 * n * eta)
    rep.data["max_contact_angle"] = float(dev.max())
    return rep


def far_vertex_gamma(n):
    return 9 * 2 ** (n + 2) * n ** (2 * n + 2)


def far_vertex_deficit(Z: Polytope, S: Polytope, contacts, extra, eta: float | None = None) -> float:
    """V(Z)/V(S) when u_1..u_{n+1} are eta-close to w_1..w_{n+1} and u_k is far from every w_i."""
    n = Z.dim
    U = np.atleast_2d(np.asarray(contacts, dtype=float))
    W = S.normals
    gamma = far_vertex_gamma(n)
    close = np.array([_angle(U[i], W[i]) for i in range(n + 1)])
    if eta is None:
        eta = max(float(close.max()), 1e-300)
    if not 0 < eta < 1 / gamma or np.any(close > eta + 1e-15):
        raise NotApplicable("contacts are not eta-close with eta < 1/gamma")
    far = np.array([_angle(extra, w) for w in W])
    if far.min() < gamma * eta:
        raise NotApplicable("extra contact is not gamma*eta-far from the simplex contacts")
    ratio = Z.volume / S.volume
    bound = 1 - far.min() / (2 ** (n + 2) * n ** (2 * n))
    if ratio > bound + 1e-12:
        raise LemmaViolation(f"V(Z)/V(S) = {ratio} exceeds {bound}")
    return ratio


def far_vertex_bound(n, angle):
    return 1 - angle / (2 ** (n + 2) * n ** (2 * n))
