"""Finite centred isotropic measures on the sphere."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, minimize

from .errors import (
    CapsNotCovering,
    GeneratorFailed,
    InvalidCardinality,
    InvalidInput,
    InvalidMeasure,
    InvalidSimplex,
    LemmaViolation,
    ReductionStalled,
)
from .geometry import Polytope, random_rotation, simplex_contacts
from .john import moment_matrix, moment_target
from .report import CheckReport


@dataclass(frozen=True, eq=False)
class SphericalMeasure:
    """Atoms (u_i, c_i) with unit u_i (rows of ``directions``) and positive c_i."""

    directions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        U = np.atleast_2d(np.asarray(self.directions, dtype=float))
        c = np.asarray(self.weights, dtype=float).ravel()
        if len(U) != len(c) or len(c) == 0:
            raise InvalidMeasure("directions and weights must be nonempty and of equal length")
        if np.any(c <= 0):
            raise InvalidMeasure("weights must be positive")
        norms = np.linalg.norm(U, axis=1)
        if np.any(np.abs(norms - 1) > 1e-9):
            raise InvalidMeasure("atoms must be unit vectors")
        object.__setattr__(self, "directions", U / norms[:, None])
        object.__setattr__(self, "weights", c)

    @property
    def dim(self):
        return self.directions.shape[1]

    @property
    def k(self):
        return len(self.weights)

    @property
    def mass(self):
        return float(self.weights.sum())

    def moments(self):
        U, c = self.directions, self.weights
        return np.einsum("k,ka,kb->ab", c, U, U), c @ U, float(c.sum())

    def residuals(self):
        M, m, s = self.moments()
        return (
            float(np.linalg.norm(M - np.eye(self.dim))),
            float(np.linalg.norm(m)),
            abs(s - self.dim),
        )

    def rotate(self, R):
        return SphericalMeasure(self.directions @ np.asarray(R).T, self.weights)

    def to_json(self):
        return {
            "dim": self.dim,
            "atoms": [list(map(float, u)) + [float(c)] for u, c in zip(self.directions, self.weights)],
        }


def measure_from_json(data):
    atoms = np.asarray(data["atoms"], dtype=float)
    n = int(data.get("dim", atoms.shape[1] - 1))
    if atoms.shape[1] != n + 1:
        raise InvalidInput("atom length does not match dim")
    return SphericalMeasure(atoms[:, :n], atoms[:, n])


def load_measure(path):
    with open(path) as fh:
        return measure_from_json(json.load(fh))


def validate(mu: SphericalMeasure, tol: float = 1e-8) -> CheckReport:
    iso, cen, mass = mu.residuals()
    rep = CheckReport("isotropic-measure", data={"mass": mu.mass, "atoms": mu.k})
    rep.add("isotropic", iso <= tol, iso, tol)
    rep.add("centred", cen <= tol, cen, tol)
    rep.add("mass", mass <= tol, mass, tol)
    return rep


def is_valid(mu, tol=1e-8):
    return validate(mu, tol).passed


def axis_measure(n=2):
    """Weight 1/2 at each of the 2n signed coordinate vectors."""
    I = np.eye(n)
    return SphericalMeasure(np.r_[I, -I], np.full(2 * n, 0.5))


def standard_simplex_measure(n, R=None):
    U = simplex_contacts(n)
    if R is not None:
        U = U @ np.asarray(R).T
    return SphericalMeasure(U, np.full(n + 1, n / (n + 1)))


def simplex_measure(S: Polytope, tol: float = 1e-8) -> SphericalMeasure:
    """mu_S: weight n/(n+1) at each contact point of a regular simplex circumscribed about the ball."""
    n = S.dim
    W = S.normals
    if len(W) != n + 1 or np.any(np.abs(S.offsets - 1) > tol):
        raise InvalidSimplex("not a simplex circumscribed about the unit ball")
    G = W @ W.T
    off = G[~np.eye(n + 1, dtype=bool)]
    if np.any(np.abs(off + 1.0 / n) > tol):
        raise InvalidSimplex("facet normals do not form a regular configuration")
    return SphericalMeasure(W, np.full(n + 1, n / (n + 1)))


def caratheodory_bound(n):
    return n * (n + 3) // 2 + 1


def caratheodory_reduce(mu: SphericalMeasure, rank_tol: float = 1e-10, limit: int | None = None) -> SphericalMeasure:
    """Basic-solution pivoting down to at most n(n+3)/2 + 1 atoms (or ``limit``) with identical moments."""
    n = mu.dim
    limit = caratheodory_bound(n) if limit is None else limit
    U, c = mu.directions.copy(), mu.weights.copy()
    idx = np.arange(len(c))
    A_all = moment_matrix(U)
    while len(idx) > limit:
        A = A_all[:, idx]
        _, sv, Vt = np.linalg.svd(A)
        z = Vt[-1]
        if np.linalg.norm(A @ z) > rank_tol * max(1.0, sv[0]):
            raise ReductionStalled(
                "no null direction of the moment map",
                partial=SphericalMeasure(U[idx], c[idx]),
            )
        # orient so that the fastest relative decrease is along +z
        if np.max(z / c[idx]) < np.max(-z / c[idx]):
            z = -z
        rates = np.where(z > 0, z / c[idx], 0.0)
        drop = int(np.argmax(rates))  # first maximal index breaks ties
        alpha = c[idx][drop] / z[drop]
        c[idx] = c[idx] - alpha * z
        c[idx[drop]] = 0.0
        keep = c[idx] > 1e-15 * max(1.0, c.max())
        keep[drop] = False
        idx = idx[keep]
    return SphericalMeasure(U[idx], c[idx])


@dataclass(frozen=True, eq=False)
class LiftedSystem:
    vectors: np.ndarray
    weights: np.ndarray

    @property
    def dim(self):
        return self.vectors.shape[1]

    def check(self, tol=1e-8) -> CheckReport:
        N = self.dim
        V, c = self.vectors, self.weights
        e = np.zeros(N)
        e[-1] = 1.0
        iso = np.linalg.norm(np.einsum("k,ka,kb->ab", c, V, V) - np.eye(N))
        first = np.linalg.norm(c @ V - math.sqrt(N) * e)
        mass = abs(c.sum() - N)
        rep = CheckReport("lifted-system")
        rep.add("isotropic", iso <= tol, iso, tol)
        rep.add("first-moment", first <= tol, first, tol)
        rep.add("mass", mass <= tol, mass, tol)
        return rep


def lift(mu: SphericalMeasure, tol: float = 1e-8) -> LiftedSystem:
    if not is_valid(mu, tol):
        raise InvalidMeasure("measure is not centred isotropic")
    return lift_raw(mu.directions, mu.weights)


def lift_raw(U, c):
    n = U.shape[1]
    a, b = math.sqrt(n / (n + 1)), math.sqrt(1 / (n + 1))
    V = np.c_[-a * U, np.full(len(U), b)]
    return LiftedSystem(V, (n + 1) / n * np.asarray(c, dtype=float))


def unlift(L: LiftedSystem) -> SphericalMeasure:
    n = L.dim - 1
    U = -L.vectors[:, :n] / math.sqrt(n / (n + 1))
    return SphericalMeasure(U, n / (n + 1) * L.weights)


def geodesic(X, Y):
    """Matrix of angles between rows of X and rows of Y."""
    X, Y = np.atleast_2d(X)[:, None, :], np.atleast_2d(Y)[None, :, :]
    # 2 atan2(|x - y|, |x + y|) keeps full accuracy near 0 and near pi
    return 2 * np.arctan2(np.linalg.norm(X - Y, axis=2), np.linalg.norm(X + Y, axis=2))


def spherical_hausdorff(X, Y, mode: str = "min") -> float:
    """Hausdorff-type distance on the sphere.

    ``mode="min"`` takes the smaller of the two one-sided deviations,
    ``mode="max"`` the larger one (the usual Hausdorff distance).
    """
    X, Y = np.atleast_2d(np.asarray(X, float)), np.atleast_2d(np.asarray(Y, float))
    if X.size == 0 or Y.size == 0:
        raise InvalidInput("empty point set")
    D = geodesic(X, Y)
    one, two = D.min(axis=1).max(), D.min(axis=0).max()
    if mode == "min":
        return float(min(one, two))
    if mode == "max":
        return float(max(one, two))
    raise InvalidInput(f"unknown mode {mode!r}")


def cap_masses(mu: SphericalMeasure, contacts, eps: float, tol: float = 1e-12) -> np.ndarray:
    """mu(U(w_i, eps)) for each simplex contact point w_i."""
    W = np.asarray(contacts.normals if isinstance(contacts, Polytope) else contacts, dtype=float)
    n = mu.dim
    if not 0 <= eps < 0.5:
        raise InvalidInput("eps must lie in [0, 1/2)")
    D = geodesic(mu.directions, W)
    inside = D <= eps + tol
    outside = np.flatnonzero(~inside.any(axis=1))
    if len(outside):
        raise CapsNotCovering(f"{len(outside)} atoms lie outside every cap", outside=outside)
    masses = inside.T.astype(float) @ mu.weights
    bound = 2 * n * eps
    dev = np.abs(masses - n / (n + 1))
    if np.any(dev > bound + 1e-9):
        raise LemmaViolation(f"cap mass deviation {dev.max():.3g} exceeds 2n*eps = {bound:.3g}")
    return masses


def wasserstein_w1(mu: SphericalMeasure, nu: SphericalMeasure, tol: float = 1e-8) -> float:
    """Kantorovich distance with geodesic ground cost, as a transport LP."""
    if mu.dim != nu.dim:
        raise InvalidInput("dimension mismatch")
    if abs(mu.mass - nu.mass) > tol * max(1.0, mu.mass):
        raise InvalidInput("total masses differ")
    a, b = mu.weights, nu.weights * (mu.mass / nu.mass)
    C = geodesic(mu.directions, nu.directions)
    p, q = C.shape
    A_eq = np.zeros((p + q, p * q))
    for i in range(p):
        A_eq[i, i * q : (i + 1) * q] = 1.0
    for j in range(q):
        A_eq[p + j, j::q] = 1.0
    res = linprog(C.ravel(), A_eq=A_eq[:-1], b_eq=np.r_[a, b][:-1], bounds=(0, None), method="highs")
    if res.status != 0:
        raise InvalidInput(f"transport LP failed: {res.message}")
    return float(max(res.fun, 0.0))


def _tilt_to_centre(U, c):
    """Exponential tilt c_i e^{<lam,u_i>} whose first moment vanishes."""
    n = U.shape[1]

    def f(lam):
        w = c * np.exp(U @ lam)
        return w.sum(), w @ U, (U.T * w) @ U

    res = minimize(
        lambda l: math.log(f(l)[0]),
        np.zeros(n),
        jac=lambda l: f(l)[1] / f(l)[0],
        method="BFGS",
        options={"gtol": 1e-14, "maxiter": 200},
    )
    lam = res.x
    for _ in range(30):
        s, g, H = f(lam)
        if np.linalg.norm(g) <= 1e-15 * s:
            break
        lam = lam - np.linalg.solve(H, g)
        if not np.all(np.isfinite(lam)):
            return None
    return c * np.exp(U @ lam)


def isotropize(U, c=None, tol: float = 1e-10, max_rounds: int = 10_000):
    """Alternate centring tilts and whitening until (U, c) is centred isotropic.

    Returns a SphericalMeasure, or raises GeneratorFailed.
    """
    U = np.asarray(U, dtype=float)
    U = U / np.linalg.norm(U, axis=1)[:, None]
    n = U.shape[1]
    c = np.full(len(U), n / len(U)) if c is None else np.asarray(c, dtype=float).copy()
    for _ in range(max_rounds):
        c = _tilt_to_centre(U, c)
        if c is None or not np.all(np.isfinite(c)) or np.any(c <= 0):
            raise GeneratorFailed("centring tilt diverged; origin not interior to the hull")
        M = np.einsum("k,ka,kb->ab", c, U, U)
        w, V = np.linalg.eigh(M)
        W = U @ ((V / np.sqrt(w)) @ V.T)
        norms = np.linalg.norm(W, axis=1)
        U, c = W / norms[:, None], c * norms**2
        iso = np.linalg.norm(np.einsum("k,ka,kb->ab", c, U, U) - np.eye(n))
        cen = np.linalg.norm(c @ U)
        if iso <= tol and cen <= tol:
            return SphericalMeasure(U, c)
    raise GeneratorFailed("no convergence within the round limit")


def random_isotropic(n: int, k: int, seed: int, tol: float = 1e-10, attempts: int = 500) -> SphericalMeasure:
    """Seeded random centred isotropic measure with k atoms."""
    if k < n + 1:
        raise InvalidCardinality("centred isotropic measures need at least n+1 atoms")
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        U = rng.standard_normal((k, n))
        U /= np.linalg.norm(U, axis=1)[:, None]
        # the origin must be interior to the hull; for k = n+1 only 2^-n of the draws qualify
        res = linprog(
            np.zeros(k),
            A_eq=np.r_[U.T, np.ones((1, k))],
            b_eq=np.r_[np.zeros(n), 1.0],
            bounds=(1e-3 / k, None),
            method="highs",
        )
        if res.status != 0:
            continue
        try:
            return isotropize(U, tol=tol)
        except GeneratorFailed:
            continue
    raise GeneratorFailed("could not generate a measure")


def lemma_cover_check(mu: SphericalMeasure, directions) -> float:
    """min over v of max_i <u_i, v>; at least 1/n for centred isotropic mu."""
    V = np.atleast_2d(directions)
    return float((mu.directions @ V.T).max(axis=0).min())
