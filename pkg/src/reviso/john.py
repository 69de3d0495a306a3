"""Maximal-volume inscribed (John) ellipsoid, John position, and contact decompositions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .errors import DecompositionFailed, NoConvergence, NotJohnPosition
from .geometry import Polytope, affine_image, from_halfspaces
from .report import CheckReport


@dataclass(frozen=True)
class Ellipsoid:
    """{x : (x - center)^T shape (x - center) <= 1}."""

    center: np.ndarray
    shape: np.ndarray

    @property
    def dim(self):
        return len(self.center)

    @property
    def root(self):
        """Symmetric B with E = B(ball) + center, i.e. B = shape^{-1/2}."""
        w, V = np.linalg.eigh(self.shape)
        return (V / np.sqrt(w)) @ V.T

    @property
    def volume(self):
        n = self.dim
        unit_ball = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
        return unit_ball / math.sqrt(np.linalg.det(self.shape))

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return float(u @ self.center + math.sqrt(u @ np.linalg.solve(self.shape, u)))


@dataclass
class JohnConfig:
    rtol: float = 1e-8
    max_newton: int = 400
    barrier_growth: float = 20.0
    contact_tol: float = 1e-8
    decomposition_tol: float = 1e-6


def _sym_basis(n):
    basis = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = 1.0
            basis.append(E)
    return np.array(basis)


def _vech_to_mat(p, n):
    B = np.zeros((n, n))
    iu = np.triu_indices(n)
    B[iu] = p
    return B + np.triu(B, 1).T


class _MVIE:
    """log-barrier Newton method for max log det B s.t. ||B a_i|| + <a_i, d> <= b_i."""

    def __init__(self, A, b):
        self.A, self.b = A, b
        self.n = A.shape[1]
        self.E = _sym_basis(self.n)
        self.m = len(self.E)
        # M[i] maps vech(B) to B a_i
        self.M = np.einsum("kab,ib->iak", self.E, A)

    def unpack(self, x):
        return _vech_to_mat(x[: self.m], self.n), x[self.m :]

    def parts(self, x):
        B, d = self.unpack(x)
        W = B @ self.A.T  # columns B a_i
        r = np.linalg.norm(W, axis=0)
        s = self.b - self.A @ d - r
        return B, d, W.T, r, s

    def feasible(self, x):
        B, d, _, _, s = self.parts(x)
        if np.any(s <= 0):
            return False
        try:
            np.linalg.cholesky(B)
        except np.linalg.LinAlgError:
            return False
        return True

    def value(self, x, t):
        B, d, _, _, s = self.parts(x)
        sign, logdet = np.linalg.slogdet(B)
        return -t * logdet - np.sum(np.log(s))

    def derivatives(self, x, t, lam=None):
        """Gradient/Hessian of the barrier function, or of the Lagrangian if ``lam`` given."""
        n, m = self.n, self.m
        B, d, W, r, s = self.parts(x)
        Binv = np.linalg.inv(B)
        BE = np.einsum("ab,kbc->kac", Binv, self.E)
        g_ld = np.einsum("kaa->k", BE)
        H_ld = np.einsum("kab,lba->kl", BE, BE)
        J = np.zeros((len(s), m + n))
        J[:, :m] = np.einsum("iak,ia->ik", self.M, W) / r[:, None]
        J[:, m:] = self.A
        # Hess of r_i: M^T (I - w w^T / r^2) M / r
        MtM = np.einsum("iak,ial->ikl", self.M, self.M)
        MtW = np.einsum("iak,ia->ik", self.M, W)
        Hr = (MtM - np.einsum("ik,il->ikl", MtW, MtW) / (r**2)[:, None, None]) / r[:, None, None]
        if lam is None:
            grad = np.r_[-t * g_ld, np.zeros(n)] + J.T @ (1.0 / s)
            H = np.zeros((m + n, m + n))
            H[:m, :m] = t * H_ld + np.einsum("ikl,i->kl", Hr, 1.0 / s)
            H += (J / s[:, None]).T @ (J / s[:, None])
            return grad, H
        grad = np.r_[-g_ld, np.zeros(n)] + J.T @ lam
        H = np.zeros((m + n, m + n))
        H[:m, :m] = H_ld + np.einsum("ikl,i->kl", Hr, lam)
        return grad, H, J, s

    def center(self, x, t, budget):
        """Damped Newton on the barrier function; returns (x, steps used, converged)."""
        for step_no in range(budget):
            grad, H = self.derivatives(x, t)
            try:
                step = -np.linalg.solve(H, grad)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(H, grad, rcond=None)[0]
            dec = -grad @ step
            if dec / 2 <= 1e-10:
                return x, step_no, True
            f0 = self.value(x, t)
            slack = 1e-13 * max(1.0, abs(f0))
            alpha = 1.0
            while alpha > 1e-12:
                xn = x + alpha * step
                if self.feasible(xn) and self.value(xn, t) <= f0 - 0.25 * alpha * dec + slack:
                    break
                alpha *= 0.5
            else:
                # no representable decrease left; a tiny decrement still counts as centred
                return x, step_no, dec / 2 <= 1e-6
            x = xn
        return x, budget, False

    def polish(self, x, lam, active, iters=20):
        """Newton on the KKT system restricted to the active constraints."""
        m, n = self.m, self.n
        idx = np.flatnonzero(active)
        for _ in range(iters):
            grad, H, J, s = self.derivatives(x, 1.0, _scatter(lam, idx, len(self.b)))
            JA = J[idx]
            F = np.r_[grad, -s[idx]]
            if np.max(np.abs(F)) <= 1e-15:
                break
            K = np.zeros((m + n + len(idx), m + n + len(idx)))
            K[: m + n, : m + n] = H
            K[: m + n, m + n :] = JA.T
            K[m + n :, : m + n] = JA
            step = -np.linalg.lstsq(K, F, rcond=None)[0]
            x = x + step[: m + n]
            lam = lam + step[m + n :]
        return x, lam


def _scatter(lam, idx, size):
    out = np.zeros(size)
    out[idx] = lam
    return out


def max_inscribed_ellipsoid(P: Polytope, config: JohnConfig | None = None) -> Ellipsoid:
    """John ellipsoid of ``P`` to relative volume optimality ``config.rtol``."""
    cfg = config or JohnConfig()
    n = P.dim
    A, b = P.normals, P.offsets
    # condition: translate to the Chebyshev-ish center and rescale
    c0 = P.vertices.mean(axis=0)
    radius0 = float(np.min(b - A @ c0))
    if radius0 <= 0:
        c0 = P.centroid
        radius0 = float(np.min(b - A @ c0))
    scale0 = radius0
    bn = (b - A @ c0) / scale0
    solver = _MVIE(A, bn)
    iu = np.triu_indices(n)
    x = np.r_[(0.5 * np.eye(n))[iu], np.zeros(n)]
    F = len(bn)
    t = 1.0
    used = 0
    target = 0.1 * cfg.rtol
    while True:
        x, steps, ok = solver.center(x, t, cfg.max_newton - used)
        used += steps
        gap = F / t
        if gap <= target or not ok:
            break
        t = min(t * cfg.barrier_growth, F / target)
    B, d, _, _, s = solver.parts(x)
    lam = 1.0 / (t * s)
    active = s <= 1e-6 * max(1.0, float(np.max(s)))
    if np.count_nonzero(active) >= n + 1:
        xp, lam_a = solver.polish(x.copy(), lam[active], active)
        if _relaxed_ok(solver, xp):
            x = xp
    if gap > cfg.rtol:
        raise NoConvergence("barrier method did not reach the target gap", best=x, gap=gap)
    B, d = solver.unpack(x)
    Bphys = scale0 * B
    center = c0 + scale0 * d
    Binv = np.linalg.inv(Bphys)
    shape = Binv.T @ Binv
    return Ellipsoid(center, 0.5 * (shape + shape.T))


def _relaxed_ok(solver, x):
    B, d, _, _, s = solver.parts(x)
    try:
        np.linalg.cholesky(B)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(s >= -1e-12))


def john_normalize(P: Polytope, config: JohnConfig | None = None):
    """Affine image Q = M P + t whose John ellipsoid is B^n; returns (Q, (M, t))."""
    E = max_inscribed_ellipsoid(P, config)
    w, V = np.linalg.eigh(E.shape)
    M = (V * np.sqrt(w)) @ V.T
    t = -M @ E.center
    return affine_image(P, M, t), (M, t)


@dataclass
class JohnDecomposition:
    contacts: np.ndarray
    weights: np.ndarray
    residual_iso: float
    residual_centred: float
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.contacts.shape[1]

    @property
    def k(self):
        return len(self.weights)


def moment_matrix(U):
    """Columns (vech(u u^T), u, 1) for each row u of U; the linear map of the John system."""
    n = U.shape[1]
    iu = np.triu_indices(n)
    outer = np.einsum("ka,kb->kab", U, U)[:, iu[0], iu[1]]
    return np.c_[outer, U, np.ones(len(U))].T


def moment_target(n, mass=None):
    iu = np.triu_indices(n)
    return np.r_[np.eye(n)[iu], np.zeros(n), float(n if mass is None else mass)]


def residuals(U, c):
    n = U.shape[1]
    iso = np.linalg.norm(np.einsum("k,ka,kb->ab", c, U, U) - np.eye(n))
    cen = np.linalg.norm(c @ U)
    return float(iso), float(cen)


def min_norm_nonnegative(A, b, x0=None, iters=100):
    """argmin ||c|| over {c >= 0 : A c = b} by semismooth Newton on the dual.

    Returns None when the iteration fails to produce a feasible point.
    """
    m = A.shape[0]
    y = np.zeros(m) if x0 is None else np.linalg.lstsq(A.T, x0, rcond=None)[0]
    for _ in range(iters):
        z = A.T @ y
        c = np.maximum(z, 0.0)
        g = b - A @ c
        if np.linalg.norm(g) <= 1e-14 * max(1.0, np.linalg.norm(b)):
            return c
        active = z > 0
        H = A[:, active] @ A[:, active].T
        step = np.linalg.lstsq(H + 1e-14 * np.eye(m), g, rcond=None)[0]
        f0 = b @ y - 0.5 * c @ c
        alpha = 1.0
        while alpha > 1e-10:
            yn = y + alpha * step
            cn = np.maximum(A.T @ yn, 0.0)
            if b @ yn - 0.5 * cn @ cn >= f0 + 1e-4 * alpha * (g @ step):
                break
            alpha *= 0.5
        y = yn
    c = np.maximum(A.T @ y, 0.0)
    if np.linalg.norm(A @ c - b) <= 1e-10 * max(1.0, np.linalg.norm(b)):
        return c
    return None


def solve_weights(U, mass=None):
    """Nonnegative weights reproducing (Id, 0, n); minimum-norm when not unique."""
    n = U.shape[1]
    A = moment_matrix(U)
    b = moment_target(n, mass)
    x0, rnorm = nnls(A, b, maxiter=50 * A.shape[1])
    c = min_norm_nonnegative(A, b, x0)
    selection = "min-norm-nnls"
    if c is None or np.linalg.norm(A @ c - b) > max(rnorm, 1e-12) * 10:
        c, selection = x0, "nnls-basic"
    return c, selection


def contact_decomposition(Q: Polytope, config: JohnConfig | None = None) -> JohnDecomposition:
    """Contacts and weights of a body whose John ellipsoid is the unit ball."""
    cfg = config or JohnConfig()
    n = Q.dim
    if np.any(Q.offsets < 1 - cfg.decomposition_tol):
        raise NotJohnPosition("unit ball is not contained in the body")
    mask = Q.offsets - 1.0 <= cfg.contact_tol
    U = Q.normals[mask]
    if len(U) < n + 1:
        raise NotJohnPosition(f"only {len(U)} contact candidates, need {n + 1}")
    c, selection = solve_weights(U)
    keep = c > 1e-12
    U, c = U[keep], c[keep]
    if len(c) > n * (n + 3) // 2:
        # min-norm weights spread over every contact; pivot to a basic solution
        from .measures import SphericalMeasure, caratheodory_reduce

        red = caratheodory_reduce(SphericalMeasure(U / np.linalg.norm(U, axis=1)[:, None], c), limit=n * (n + 3) // 2)
        U, c = red.directions, red.weights
        selection += "+basic-reduction"
    iso, cen = residuals(U, c)
    if iso > cfg.decomposition_tol or cen > cfg.decomposition_tol:
        raise DecompositionFailed(f"residuals iso={iso:.3g} centred={cen:.3g} exceed tolerance")
    return JohnDecomposition(
        U, c, iso, cen, {"weight_selection": selection, "candidates": int(mask.sum())}
    )


def john_decomposition(P: Polytope, config: JohnConfig | None = None):
    Q, transform = john_normalize(P, config)
    return Q, transform, contact_decomposition(Q, config)


def verify_john(d: JohnDecomposition, tol: float = 1e-6) -> CheckReport:
    U, c = np.asarray(d.contacts), np.asarray(d.weights)
    k, n = U.shape
    iso, cen = residuals(U, c)
    rep = CheckReport("john-decomposition")
    rep.add("cardinality", n + 1 <= k <= n * (n + 3) // 2, k, n * (n + 3) / 2)
    rep.add("trace", abs(c.sum() - n) <= tol, abs(c.sum() - n), tol)
    rep.add("weights-at-most-one", np.all(c <= 1 + tol), float(np.max(c)), 1 + tol)
    rep.add("weights-positive", np.all(c > 0), float(np.min(c)), 0.0)
    rep.add("isotropic", iso <= tol, iso, tol)
    rep.add("centred", cen <= tol, cen, tol)
    unit = float(np.max(np.abs(np.linalg.norm(U, axis=1) - 1)))
    rep.add("unit-contacts", unit <= tol, unit, tol)
    return rep


def decomposition_to_json(d: JohnDecomposition):
    return {
        "dim": d.dim,
        "atoms": [list(map(float, u)) + [float(w)] for u, w in zip(d.contacts, d.weights)],
        "residual_iso": d.residual_iso,
        "residual_centred": d.residual_centred,
        "metadata": d.metadata,
    }
