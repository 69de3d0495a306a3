"""Determinant inequalities for decompositions of the identity and their stability versions."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidCardinality, InvalidFrame, InvalidInput, LemmaViolation

MAX_FRAME = 24


def frame_residual(V):
    V = np.atleast_2d(np.asarray(V, dtype=float))
    return float(np.linalg.norm(V.T @ V - np.eye(V.shape[1])))


def check_frame(V, tol=1e-8):
    V = np.atleast_2d(np.asarray(V, dtype=float))
    k, n = V.shape
    if k > MAX_FRAME:
        raise InvalidInput(f"frames are limited to {MAX_FRAME} vectors")
    res = frame_residual(V)
    if res > tol:
        raise InvalidFrame(f"sum of v_i (x) v_i differs from Id by {res:.3g}")
    return V


def subset_dets(V):
    """All n-subsets I (as index tuples) with d_I = det[v_I]^2."""
    k, n = V.shape
    subsets = list(itertools.combinations(range(k), n))
    if not subsets:
        return [], np.zeros(0)
    idx = np.array(subsets)
    d = np.linalg.det(V[idx]) ** 2
    return subsets, d


def cauchy_binet(V, lam=None):
    """(det(sum lam_i v_i (x) v_i), sum_I lam_I d_I)."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    k, n = V.shape
    lam = np.ones(k) if lam is None else np.asarray(lam, dtype=float)
    lhs = float(np.linalg.det((V.T * lam) @ V))
    subsets, d = subset_dets(V)
    if not subsets:
        return lhs, 0.0
    lamI = np.prod(lam[np.array(subsets)], axis=1)
    return lhs, float(lamI @ d)


def max_det_subset(V, tol: float = 1e-8):
    """n-subset maximizing det^2; the maximum is at least 1/C(k, n)."""
    V = check_frame(V, tol)
    k, n = V.shape
    subsets, d = subset_dets(V)
    j = int(np.argmax(d))
    best = float(d[j])
    if best < 1.0 / math.comb(k, n) - 1e-12:
        raise LemmaViolation("largest subset determinant below 1/C(k,n)")
    return subsets[j], best, float(d.sum())


def ball_barthe(V, t, tol: float = 1e-8):
    """(det(sum t_i v_i (x) v_i), prod t_i^{|v_i|^2})."""
    V = check_frame(V, tol)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise InvalidInput("t_i must be positive")
    lhs = float(np.linalg.det((V.T * t) @ V))
    rhs = math.exp(float(np.sum((V**2).sum(axis=1) * np.log(t))))
    if lhs < rhs * (1 - 1e-10) - 1e-12:
        raise LemmaViolation(f"determinant inequality fails: {lhs} < {rhs}")
    return lhs, rhs


@dataclass
class ThetaCertificate:
    theta_star: float
    t0: float
    lhs: float
    rhs_base: float
    subset_terms: list

    @property
    def weight_sum(self):
        return float(sum(d for _, d, _ in self.subset_terms))


def theta_star(V, t, tol: float = 1e-8) -> ThetaCertificate:
    """Stability factor for the determinant inequality, with the subset weights used to build it."""
    V = check_frame(V, tol)
    k, n = V.shape
    if k <= n:
        raise InvalidCardinality("theta* needs k >= n+1")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise InvalidInput("t_i must be positive")
    subsets, d = subset_dets(V)
    idx = np.array(subsets)
    log_tI = np.log(t)[idx].sum(axis=1)
    # work relative to the largest t_I to keep the sums finite
    shift = float(log_tI.max())
    tI_rel = np.exp(log_tI - shift)
    t0_rel = math.sqrt(float(tI_rel @ d))
    theta = 1.0 + 0.5 * float(d @ (np.sqrt(tI_rel) / t0_rel - 1.0) ** 2)
    t0 = t0_rel * math.exp(shift / 2)
    lhs = float(np.linalg.det((V.T * t) @ V))
    log_rhs = float(np.sum((V**2).sum(axis=1) * np.log(t)))
    rhs_base = math.exp(log_rhs)
    # per-atom weight identity: sum_{I containing i} d_I = <v_i, v_i>
    per_atom = np.zeros(k)
    np.add.at(per_atom, idx.ravel(), np.repeat(d, n))
    if np.max(np.abs(per_atom - (V**2).sum(axis=1))) > 1e-9:
        raise LemmaViolation("subset weight identity fails")
    if theta < 1 - 1e-15:
        raise LemmaViolation("theta* below 1")
    if math.log(max(lhs, 1e-300)) < math.log(theta) + log_rhs - 1e-9:
        raise LemmaViolation("strengthened determinant inequality fails")
    terms = [(I, float(dI), float(math.exp(lt))) for I, dI, lt in zip(subsets, d, log_tI)]
    return ThetaCertificate(theta, t0, lhs, rhs_base, terms)


def subset_weights_per_atom(V):
    V = np.atleast_2d(np.asarray(V, dtype=float))
    k, n = V.shape
    subsets, d = subset_dets(V)
    per_atom = np.zeros(k)
    np.add.at(per_atom, np.array(subsets).ravel(), np.repeat(d, n))
    return per_atom, float(d.sum())


def amgm_stability(f, nu):
    """(arithmetic/geometric mean ratio, its stability lower bound)."""
    f = np.asarray(f, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if np.any(f <= 0):
        raise InvalidInput("values must be positive")
    if np.any(nu < 0) or abs(nu.sum() - 1) > 1e-12:
        raise InvalidInput("weights must form a probability vector")
    mean = float(nu @ f)
    ratio = mean / math.exp(float(nu @ np.log(f)))
    bound = 1.0 + 0.5 * float(nu @ (np.sqrt(f / mean) - 1.0) ** 2)
    if ratio < bound - 1e-12:
        raise LemmaViolation("mean-ratio stability bound fails")
    return ratio, bound


def xab_bound(a, b, x):
    """((xa-1)^2 + (xb-1)^2, (a^2-b^2)^2 / (2(a^2+b^2)^2))."""
    if min(a, b, x) <= 0:
        raise InvalidInput("a, b, x must be positive")
    lhs = (x * a - 1) ** 2 + (x * b - 1) ** 2
    rhs = (a * a - b * b) ** 2 / (2 * (a * a + b * b) ** 2)
    if lhs < rhs - 1e-15:
        raise LemmaViolation("two-point bound fails")
    return lhs, rhs


def xab_minimum(a, b):
    """Minimizer and minimum of x -> (xa-1)^2 + (xb-1)^2."""
    x = (a + b) / (a * a + b * b)
    return x, (a - b) ** 2 / (a * a + b * b)


def random_frame(n, k, rng):
    """k vectors with sum v_i (x) v_i = Id, from a random k x n matrix with orthonormal columns."""
    Q, _ = np.linalg.qr(rng.standard_normal((k, n)))
    return Q
