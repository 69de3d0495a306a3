"""Transport map from the exponential to the Gaussian density and the lifted cone machinery."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .determinant import subset_dets
from .errors import InvalidMeasure, OutOfCone, OutOfDomain
from .geometry import simplex_volume_formula
from .measures import LiftedSystem, SphericalMeasure, is_valid, lift
from .report import CheckReport
from .zbody import z_body

SQRT_PI = math.sqrt(math.pi)
LN2 = math.log(2.0)
_CF_TERMS = 80
_CF_SWITCH = 4.0
_erfc = np.frompyfunc(math.erfc, 1, 1)


def erfcx(x):
    """Scaled complementary error function exp(x^2) erfc(x)."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    big = x >= _CF_SWITCH
    if np.any(big):
        z = x[big]
        # erfc(z) = e^{-z^2}/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
        f = z.copy()
        for j in range(_CF_TERMS, 0, -1):
            f = z + (j / 2.0) / f
        out[big] = 1.0 / (SQRT_PI * f)
    small = ~big
    if np.any(small):
        z = x[small]
        out[small] = np.exp(z * z) * np.asarray(_erfc(z), dtype=float)
    return out if out.ndim else float(out)


def log_erfc(x):
    x = np.asarray(x, dtype=float)
    out = np.where(
        x >= 0,
        np.log(erfcx(np.maximum(x, 0.0))) - np.maximum(x, 0.0) ** 2,
        np.log(np.asarray(_erfc(np.minimum(x, 0.0)), dtype=float)),
    )
    return out if out.ndim else float(out)


def gaussian_tail(z):
    """(1/sqrt(pi)) int_z^inf e^{-s^2} ds = erfc(z)/2."""
    return 0.5 * np.exp(log_erfc(z))


def _solve_log_erfc(L, tol=1e-15, max_iter=200):
    """psi >= 0 with log erfc(psi) = L for L <= 0 (vectorized Newton from the right)."""
    L = np.asarray(L, dtype=float)
    hi = np.sqrt(np.maximum(-L, 0.0)) + 1.0
    psi = hi.copy()
    for _ in range(max_iter):
        g = log_erfc(psi) - L
        dg = -2.0 / (SQRT_PI * erfcx(psi))
        step = g / dg
        psi_new = np.clip(psi - step, 0.0, hi)
        done = np.abs(psi_new - psi) <= tol * (1.0 + psi)
        psi = psi_new
        if np.all(done):
            break
    return psi


@dataclass(frozen=True)
class PhiValue:
    t: float
    phi: float
    phi_prime: float
    phi_second: float
    residual: float = 0.0


def phi(t):
    """phi(t): 1 - e^{-t} equals the standard Gaussian (variance 1/2) mass below phi(t)."""
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise OutOfDomain("phi is defined for t > 0")
    upper = t >= LN2
    L = np.where(upper, LN2 - t, LN2 + np.log(-np.expm1(-np.minimum(t, LN2))))
    psi = _solve_log_erfc(L)
    out = np.where(upper, psi, -psi)
    return out if out.ndim else float(out)


def phi_derivatives(t, p=None):
    t = np.asarray(t, dtype=float)
    p = phi(t) if p is None else np.asarray(p, dtype=float)
    d1 = SQRT_PI * np.exp(p * p - t)
    d2 = d1 * (2.0 * p * d1 - 1.0)
    return p, d1, d2


def phi_residual(t, p):
    """Defining equation in log form on its well-conditioned side, relative to the size of the log."""
    t, p = float(t), float(p)
    if t >= LN2:
        L = LN2 - t
        return float(log_erfc(p) - L) / max(1.0, abs(L))
    L = LN2 + math.log(-math.expm1(-t))
    return float(log_erfc(-p) - L) / max(1.0, abs(L))


def phi_eval(t: float) -> PhiValue:
    if not t > 0:
        raise OutOfDomain("phi is defined for t > 0")
    p, d1, d2 = phi_derivatives(t)
    return PhiValue(float(t), float(p), float(d1), float(d2), phi_residual(t, p))


def phi_bounds_check(grid) -> CheckReport:
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 4):
        raise OutOfDomain("the derivative bounds are stated for t >= 4")
    p, d1, d2 = phi_derivatives(grid)
    rt = np.sqrt(grid)
    rep = CheckReport("phi-bounds", data={"grid_points": len(grid)})

    def add(name, ok, margin):
        rep.add(name, np.all(ok), float(np.min(margin)), 0.0)

    add("phi>sqrt2", p > math.sqrt(2), p - math.sqrt(2))
    add("phi<sqrt(t)", p < rt, rt - p)
    add("phi'>1/(3sqrt(t))", d1 > 1 / (3 * rt), d1 - 1 / (3 * rt))
    add("phi'<1", d1 < 1, 1 - d1)
    add("phi''<-1/(12t^1.5)", d2 < -1 / (12 * grid**1.5), -1 / (12 * grid**1.5) - d2)
    add("phi'>1/(3phi)", d1 > 1 / (3 * p), d1 - 1 / (3 * p))
    upper = (1 / (2 * p)) * (1 - 1 / (4 * p * p))
    add("phi'<(1-1/(4phi^2))/(2phi)", d1 < upper, upper - d1)
    return rep


def tail_quadrature(z: float) -> float:
    """e^{z^2} times the Gaussian tail at z, by adaptive quadrature of the shifted integrand."""
    val, _ = quad(lambda u: math.exp(-2 * z * u - u * u), 0.0, math.inf, epsabs=0, epsrel=1e-13, limit=200)
    return val / SQRT_PI


def gordon_mill_check(z: float) -> CheckReport:
    """Two-sided tail bounds and the sharpened upper bound, all scaled by e^{z^2}."""
    if not z > 0:
        raise OutOfDomain("z must be positive")
    tail = tail_quadrature(z)
    upper = 1.0 / (2 * SQRT_PI * z)
    lower = upper * 2 * z * z / (2 * z * z + 1)
    improved = upper * (2 * z * z + 2) / (2 * z * z + 3)
    rep = CheckReport("gordon-mill", data={"z": z, "tail_scaled": tail, "lower": lower, "upper": upper, "improved": improved})
    rep.add("lower<tail", lower < tail, tail - lower, 0.0)
    rep.add("tail<upper", tail < upper, upper - tail, 0.0)
    rep.add("tail<improved", tail < improved, improved - tail, 0.0)
    rep.add("improved<upper", improved < upper, upper - improved, 0.0)
    rep.add("library-vs-quadrature", abs(gaussian_tail(z) * math.exp(z * z) - tail) <= 1e-12 * tail,
            abs(gaussian_tail(z) * math.exp(z * z) - tail) / tail, 1e-12)
    return rep


# lifted cone ------------------------------------------------------------------

def _as_lifted(L):
    return lift(L) if isinstance(L, SphericalMeasure) else L


def cone_values(L: LiftedSystem, y):
    y = np.asarray(y, dtype=float)
    return L.vectors @ y


def theta_map(L, y):
    """(Theta(y), dTheta(y)) for y in the open cone."""
    L = _as_lifted(L)
    s = cone_values(L, y)
    if np.any(s <= 0):
        raise OutOfCone("y is not strictly inside the cone")
    p, d1, _ = phi_derivatives(s)
    V, c = L.vectors, L.weights
    return V.T @ (c * p), (V.T * (c * d1)) @ V


def theta_factor(L: LiftedSystem, t):
    """theta(y) for t_i = phi'(<y, u_i>); rows of t give several points at once."""
    V = np.sqrt(L.weights)[:, None] * L.vectors
    subsets, d = subset_dets(V)
    t = np.atleast_2d(t)
    idx = np.array(subsets)
    logtI = np.log(t)[:, idx].sum(axis=2)
    shift = logtI.max(axis=1, keepdims=True)
    tI = np.exp(logtI - shift)
    t0 = np.sqrt(tI @ d)
    return 1.0 + 0.5 * ((np.sqrt(tI) / t0[:, None] - 1.0) ** 2) @ d


def pointwise_chain(L, y) -> CheckReport:
    L = _as_lifted(L)
    s = cone_values(L, y)
    if np.any(s <= 0):
        raise OutOfCone("y is not strictly inside the cone")
    p, d1, _ = phi_derivatives(s)
    c = L.weights
    Th, dTh = theta_map(L, y)
    first_lhs, first_rhs = float(Th @ Th), float(c @ p**2)
    theta = float(theta_factor(L, d1)[0])
    sign, logdet = np.linalg.slogdet(dTh)
    log_lhs = float(c @ np.log(d1))
    log_rhs = logdet - math.log(theta)
    rep = CheckReport("pointwise-chain", data={"theta": theta})
    tol = 1e-10 * max(1.0, abs(first_rhs))
    rep.add("first-term", first_lhs <= first_rhs + tol, first_rhs - first_lhs, 0.0)
    rep.add("second-term", sign > 0 and log_lhs <= log_rhs + 1e-10, log_rhs - log_lhs, 0.0)
    return rep


def random_cone_points(L, m, rng, margin=0.0):
    """Points of the cone: x uniform in (r/sqrt n) Z(mu) with r ~ Gamma(n+1)."""
    L = _as_lifted(L)
    n = L.dim - 1
    out = []
    while len(out) < m:
        r = rng.gamma(n + 1, 1 / math.sqrt(n + 1))
        x = rng.uniform(-n, n, size=n) * r / math.sqrt(n)
        y = np.r_[x, r]
        if np.all(L.vectors @ y > margin * r):
            out.append(y)
    return np.array(out)


# witness integral -------------------------------------------------------------

def _block_sampler(mu, L, Z, seed, block, size):
    n = mu.dim
    rng = np.random.default_rng([seed, block])
    lo, hi = Z.vertices.min(axis=0), Z.vertices.max(axis=0)
    r = rng.gamma(n + 1, 1 / math.sqrt(n + 1), size=size)
    x = (lo + (hi - lo) * rng.random((size, n))) * (r / math.sqrt(n))[:, None]
    y = np.c_[x, r]
    inside = np.all(y @ L.vectors.T > 0, axis=1)
    return y, inside


def witness_integral(mu: SphericalMeasure, samples: int = 1_000_000, seed: int = 0, block_size: int = 100_000):
    """Monte Carlo estimate of int_C exp(-sqrt(n+1) <y, e_{n+1}>) dy, which equals V(Z)/V(T^n).

    Returns (estimate, stderr, acceptance rate).
    """
    if not is_valid(mu):
        raise InvalidMeasure("measure is not centred isotropic")
    n = mu.dim
    L = lift(mu)
    Z = z_body(mu)
    lo, hi = Z.vertices.min(axis=0), Z.vertices.max(axis=0)
    box = float(np.prod(hi - lo))
    hits = 0
    done = 0
    block = 0
    while done < samples:
        size = min(block_size, samples - done)
        _, inside = _block_sampler(mu, L, Z, seed, block, size)
        hits += int(inside.sum())
        done += size
        block += 1
    p = hits / samples
    scale = box / simplex_volume_formula(n)
    return scale * p, scale * math.sqrt(p * (1 - p) / samples), p


def chain_integral(mu: SphericalMeasure, samples: int = 200_000, seed: int = 0, block_size: int = 50_000):
    """Monte Carlo estimate of pi^{-(n+1)/2} int_C theta^{-1} e^{-|Theta|^2} det dTheta dy.

    This dominates V(Z)/V(T^n) and is itself at most 1. Returns (estimate, stderr).
    """
    if not is_valid(mu):
        raise InvalidMeasure("measure is not centred isotropic")
    n = mu.dim
    L = lift(mu)
    Z = z_body(mu)
    lo, hi = Z.vertices.min(axis=0), Z.vertices.max(axis=0)
    box = float(np.prod(hi - lo))
    vals = []
    done, block = 0, 0
    while done < samples:
        size = min(block_size, samples - done)
        y, inside = _block_sampler(mu, L, Z, seed, block, size)
        w = np.zeros(size)
        yi = y[inside]
        s = yi @ L.vectors.T
        p, d1, _ = phi_derivatives(s)
        Th = (p * L.weights) @ L.vectors
        dTh = np.einsum("mk,k,ka,kb->mab", d1, L.weights, L.vectors, L.vectors)
        _, logdet = np.linalg.slogdet(dTh)
        theta = theta_factor(L, d1)
        log_g = -0.5 * (n + 1) * math.log(math.pi) - np.log(theta) - (Th**2).sum(axis=1) + logdet
        w[inside] = np.exp(log_g + math.sqrt(n + 1) * yi[:, -1])
        vals.append(w)
        done += size
        block += 1
    w = np.concatenate(vals) * box / simplex_volume_formula(n)
    return float(w.mean()), float(w.std(ddof=1) / math.sqrt(len(w)))
