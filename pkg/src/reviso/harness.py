"""Test-body families, experiment runs, stability-order fits and report files."""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .distances import delta_bm, delta_vol
from .errors import InsufficientData, InvalidParameter, RevisoError
from .geometry import Polytope, from_halfspaces, random_polytope, regular_simplex, simplex_contacts, simplex_volume_formula
from .john import contact_decomposition, john_normalize
from .measures import SphericalMeasure
from .zbody import nearest_circumscribed_simplex, simplex_distance, z_body

FAMILIES = ("vertex-and-slab", "corner-cut", "cap-cut-ball", "random-john")

CSV_COLUMNS = (
    "family", "eps", "volume", "surface", "ir", "deficit",
    "delta_vol", "delta_bm", "bm_certified", "d_z", "delta_h", "witness",
)


@dataclass
class BodyFamily:
    name: str
    dim: int
    eps: list

    def bodies(self, seed: int = 0):
        return [family_generate(self.name, self.dim, e, rng=_stream(seed, self.name, i)) for i, e in enumerate(self.eps)]


def ir_simplex(n: int) -> float:
    """S(T^n)^n / V(T^n)^{n-1} = n^n V(T^n)."""
    return n**n * simplex_volume_formula(n)


def eps_max(name: str, n: int) -> float:
    if name == "corner-cut":
        return math.sqrt(2 * n * (n + 1)) / 2  # half the edge of T^n
    if name == "vertex-and-slab":
        return 1.0
    if name == "cap-cut-ball":
        return 1.0
    if name == "random-john":
        return 1.0
    raise InvalidParameter(f"unknown family {name!r}")


def _stream(seed, name, index):
    key = sum(ord(c) * 31**i for i, c in enumerate(name)) % (2**32)
    return np.random.default_rng([seed, key, index])


def _sphere_directions(n, m):
    if n == 2:
        a = 2 * math.pi * np.arange(m) / m
        return np.c_[np.cos(a), np.sin(a)]
    # Fibonacci sphere
    i = np.arange(m) + 0.5
    z = 1 - 2 * i / m
    phi = math.pi * (1 + math.sqrt(5)) * i
    r = np.sqrt(1 - z * z)
    return np.c_[r * np.cos(phi), r * np.sin(phi), z]


def family_generate(name: str, n: int, eps: float, rng=None) -> Polytope:
    """One body of the named family at parameter eps."""
    emax = eps_max(name, n)
    if not 0 <= eps < emax:
        raise InvalidParameter(f"eps must lie in [0, {emax:.4g}) for {name}")
    W = simplex_contacts(n)
    if name == "corner-cut":
        h = eps * math.sqrt((n + 1) / (2 * n))  # height of a regular simplex of edge eps
        if eps == 0:
            return regular_simplex(n)
        return from_halfspaces(np.r_[W, -W], np.r_[np.ones(n + 1), np.full(n + 1, n - h)])
    if name == "vertex-and-slab":
        if eps == 0:
            return regular_simplex(n)
        s = 1 - eps ** (n - 1)  # facets pushed in by eps^{n-1}; vertex cuts of height eps on that simplex
        return from_halfspaces(np.r_[W, -W], np.r_[np.full(n + 1, s), np.full(n + 1, n * s - eps)])
    if name == "cap-cut-ball":
        if n not in (2, 3):
            raise InvalidParameter("cap-cut ball is available for n = 2, 3")
        U = _sphere_directions(n, 64 if n == 2 else 128)
        e = np.zeros(n)
        e[0] = 1.0
        return from_halfspaces(np.r_[U, e[None]], np.r_[np.ones(len(U)), 1 - eps])
    if name == "random-john":
        rng = rng if rng is not None else np.random.default_rng(0)
        P = random_polytope(n, 3 * n + 4, rng)
        return john_normalize(P)[0]
    raise InvalidParameter(f"unknown family {name!r}")


def parse_grid(text: str) -> list:
    """'a:b:m' -> m logarithmically spaced values from a to b."""
    try:
        a, b, m = text.split(":")
        a, b, m = float(a), float(b), int(m)
    except ValueError as exc:
        raise InvalidParameter(f"bad grid {text!r}, expected a:b:m") from exc
    if m < 1 or a <= 0 or b < a:
        raise InvalidParameter(f"bad grid {text!r}")
    return np.geomspace(a, b, m).tolist()


# experiments ------------------------------------------------------------------

@dataclass
class ExperimentSpec:
    family: str
    dim: int
    eps: list
    seed: int = 0
    metrics: tuple = ("delta_vol", "delta_bm", "d_z", "delta_h", "witness")
    witness_samples: int = 20_000
    threads: int | None = None


@dataclass
class StabilityRow:
    family: str
    dim: int
    eps: float
    volume: float = math.nan
    surface: float = math.nan
    ir: float = math.nan
    deficit: float = math.nan
    delta_vol: float = math.nan
    delta_bm: float = math.nan
    bm_certified: bool = False
    d_z: float = math.nan
    delta_h: float = math.nan
    witness: float = math.nan
    chain_ok: bool = True
    branch: str = ""
    lemma_ok: bool = True
    error: str = ""

    def csv_values(self):
        return [getattr(self, c) for c in CSV_COLUMNS]


@dataclass
class StabilityReport:
    spec: ExperimentSpec
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(r.chain_ok and r.lemma_ok and not r.error for r in self.rows)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


def _evaluate(args):
    spec, index, eps = args
    row = StabilityRow(spec.family, spec.dim, float(eps))
    n = spec.dim
    try:
        K = family_generate(spec.family, n, eps, rng=_stream(spec.seed, spec.family, index))
        Q = john_normalize(K)[0]
        dec = contact_decomposition(Q)
        mu = SphericalMeasure(dec.contacts, dec.weights)
        Z = z_body(mu)
        T = regular_simplex(n)
        V, S = Q.volume, Q.surface_area
        row.volume, row.surface = V, S
        row.ir = S**n / V ** (n - 1)
        row.deficit = 1 - row.ir / ir_simplex(n)
        # S^n/V^{n-1} <= n^n V(K) <= n^n V(Z) <= n^n V(T^n)
        tol = 1e-7
        chain = [row.ir, n**n * V, n**n * Z.volume, ir_simplex(n)]
        row.chain_ok = all(chain[i] <= chain[i + 1] * (1 + tol) for i in range(3))
        m = spec.metrics
        if "delta_vol" in m:
            row.delta_vol = delta_vol(Q, T, seed=spec.seed).value
        if "delta_bm" in m:
            r = delta_bm(Q, T, seed=spec.seed)
            row.delta_bm, row.bm_certified = r.value, r.certificate == "scan-certified"
        if "d_z" in m:
            row.d_z = simplex_distance(Z, starts=8 if n > 2 else 1, seed=spec.seed).d
        if "delta_h" in m:
            row.delta_h = float(nearest_circumscribed_simplex(mu, seed=spec.seed, starts=8)[1])
        if "witness" in m:
            from .transport import witness_integral

            row.witness = witness_integral(mu, spec.witness_samples, seed=spec.seed + index)[0]
        _lemma_branch(row, n)
    except RevisoError as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _lemma_branch(row: StabilityRow, n: int):
    """Record which side of the d(Z) <= eps/(4n^2) split applies and check the matching bound."""
    if math.isnan(row.d_z):
        return
    ir_t = ir_simplex(n)
    small_bm = not math.isnan(row.delta_bm) and 0 < row.delta_bm < 1 and row.d_z <= row.delta_bm / (4 * n * n)
    small_vol = not math.isnan(row.delta_vol) and 0 < row.delta_vol < 1 and row.d_z <= row.delta_vol / (4 * n * n)
    if not (small_bm or small_vol):
        row.branch = "large-dZ"
        return
    row.branch = "small-dZ"
    if small_bm:
        e = row.delta_bm
        row.lemma_ok &= row.ir <= (1 - math.exp(-2) * (e / math.e) ** n) * ir_t * (1 + 1e-9)
    if small_vol:
        e = row.delta_vol
        row.lemma_ok &= row.ir <= (1 - e / 8) * ir_t * (1 + 1e-9)


def _threads(spec):
    if spec.threads is not None:
        return max(1, spec.threads)
    return max(1, int(os.environ.get("REVISO_THREADS", "1")))


def run_experiment(spec: ExperimentSpec) -> StabilityReport:
    if spec.family not in FAMILIES:
        raise InvalidParameter(f"unknown family {spec.family!r}")
    jobs = [(spec, i, e) for i, e in enumerate(spec.eps)]
    workers = min(_threads(spec), len(jobs)) if jobs else 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_evaluate, jobs))  # map keeps grid order
    else:
        rows = [_evaluate(j) for j in jobs]
    rep = StabilityReport(spec, rows)
    for y, x in (("deficit", "eps"), ("deficit", "delta_bm"), ("deficit", "delta_vol")):
        try:
            rep.fits[f"{y}~{x}"] = slope_estimate(rep, x, y)
        except InsufficientData:
            pass
    return rep


def slope_estimate(table, x: str, y: str, drop: int = 2):
    """Least-squares fit ln y = slope ln x + ln C; returns (slope, C, r^2).

    The ``drop`` points with the largest x are discarded first.
    """
    rows = table.rows if isinstance(table, StabilityReport) else table
    pts = [(getattr(r, x), getattr(r, y)) if not isinstance(r, dict) else (r[x], r[y]) for r in rows]
    pts = sorted((float(a), float(b)) for a, b in pts if np.isfinite(a) and np.isfinite(b) and a > 0 and b > 0)
    if drop:
        pts = pts[:-drop]
    if len(pts) < 8 or len({p[0] for p in pts}) < 2:
        raise InsufficientData(f"need at least 8 usable points, got {len(pts)}")
    lx, ly = np.log(np.array(pts)).T
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    ss = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1 - float((resid**2).sum()) / ss if ss > 0 else 1.0
    return float(slope), math.exp(icpt), r2


# output -----------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_emit(table, path: str, format: str = "csv") -> str:
    """Write the table as CSV (columns in CSV_COLUMNS order) or plot-data JSON."""
    rows = table.rows if isinstance(table, StabilityReport) else list(table)
    if format == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in rows:
                w.writerow([_fmt(v) for v in r.csv_values()])
        return path
    if format == "json":
        series = {}
        for r in rows:
            key = f"{r.family}/n={r.dim}"
            s = series.setdefault(key, {"deficit_vs_eps": [], "deficit_vs_delta_bm": [], "deficit_vs_delta_vol": []})
            s["deficit_vs_eps"].append([r.eps, r.deficit])
            if np.isfinite(r.delta_bm):
                s["deficit_vs_delta_bm"].append([r.delta_bm, r.deficit])
            if np.isfinite(r.delta_vol):
                s["deficit_vs_delta_vol"].append([r.delta_vol, r.deficit])
        out = {"series": series}
        if isinstance(table, StabilityReport):
            out["fits"] = {k: list(v) for k, v in table.fits.items()}
            out["rows"] = [asdict(r) for r in rows]
        with open(path, "w") as fh:
            json.dump(out, fh, indent=1, sort_keys=True, default=float)
        return path
    raise InvalidParameter(f"unknown format {format!r}")


def read_csv(path: str) -> list:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        out = []
        for rec in rd:
            d = {}
            for k, v in rec.items():
                if k == "family":
                    d[k] = v
                elif k == "bm_certified":
                    d[k] = v == "1"
                else:
                    d[k] = float(v)
            out.append(d)
        return out


GAMMA_PLANAR = 1 / 72  # 2^-3 3^-2


def planar_bm_sweep(eps, family: str = "corner-cut", seed: int = 0, threads: int | None = None):
    """ir(K) <= (1 - gamma delta_BM(K, T^2)) ir(T^2) over a planar family; returns (report, empirical gamma)."""
    from .report import CheckReport

    rep = run_experiment(ExperimentSpec(family, 2, list(eps), seed, metrics=("delta_bm",), threads=threads))
    ratios = [r.deficit / r.delta_bm for r in rep.rows if r.bm_certified and r.delta_bm > 1e-9]
    gamma = min(ratios) if ratios else math.nan
    out = CheckReport("planar-bm-order", data={"gamma_empirical": gamma, "fits": rep.fits})
    for r in rep.rows:
        if r.error:
            out.add(f"eps={r.eps:.4g}", False, note=r.error)
            continue
        bound = (1 - GAMMA_PLANAR * r.delta_bm) * ir_simplex(2)
        out.add(f"eps={r.eps:.4g}", r.bm_certified and r.ir <= bound * (1 + 1e-12), r.ir, bound)
    return out, gamma
