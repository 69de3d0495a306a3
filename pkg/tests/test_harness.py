import functools
import math

import numpy as np
import pytest
from scipy.stats import spearmanr

from reviso.errors import InsufficientData, InvalidParameter
from reviso.geometry import regular_simplex, simplex_contacts
from reviso.harness import (
    CSV_COLUMNS, BodyFamily, ExperimentSpec, StabilityRow, family_generate, ir_simplex, parse_grid, read_csv,
    report_emit, run_experiment, slope_estimate,
)
from reviso.measures import SphericalMeasure
from reviso.zbody import nearest_circumscribed_simplex, volume_deficit, z_body


def test_corner_cut_zero_is_simplex():
    for n in (2, 3):
        P, T = family_generate("corner-cut", n, 0.0), regular_simplex(n)
        assert P.volume == pytest.approx(T.volume, rel=1e-12)
        assert np.allclose(np.sort(P.vertices, axis=0), np.sort(T.vertices, axis=0))


def test_vertex_and_slab_facets():
    P = family_generate("vertex-and-slab", 3, 0.1)
    # two facet families of four; the construction yields 8 facets (see notes)
    assert len(P.normals) == 8
    assert np.all(regular_simplex(3).contains(P.vertices, tol=1e-9))


def test_cap_cut_ball():
    P = family_generate("cap-cut-ball", 2, 0.2)
    assert len(P.vertices) >= 40
    assert P.vertices[:, 0].max() == pytest.approx(0.8)
    assert np.all(np.linalg.norm(P.vertices, axis=1) <= 1 / math.cos(math.pi / 64) + 1e-12)


def test_invalid_parameters():
    with pytest.raises(InvalidParameter):
        family_generate("corner-cut", 2, -0.1)
    with pytest.raises(InvalidParameter):
        family_generate("vertex-and-slab", 2, 1.0)
    with pytest.raises(InvalidParameter):
        family_generate("nonsense", 2, 0.1)
    with pytest.raises(InvalidParameter):
        parse_grid("0.1:0.01:5")
    with pytest.raises(InvalidParameter):
        run_experiment(ExperimentSpec("nonsense", 2, [0.1]))


def test_parse_grid():
    g = parse_grid("0.01:0.3:20")
    assert len(g) == 20 and g[0] == pytest.approx(0.01) and g[-1] == pytest.approx(0.3)
    assert np.allclose(np.diff(np.log(g)), np.log(30) / 19)


def test_simplex_row_trivial():
    rep = run_experiment(ExperimentSpec("corner-cut", 2, [0.0], metrics=("d_z", "delta_h", "witness")))
    r = rep.rows[0]
    assert not r.error and r.chain_ok
    assert r.deficit == pytest.approx(0, abs=1e-10)
    assert r.delta_h == pytest.approx(0, abs=1e-8)
    assert r.witness == pytest.approx(1, abs=0.05)


def test_corner_cut_deficit_positive():
    rep = run_experiment(ExperimentSpec("corner-cut", 2, parse_grid("0.01:0.3:8"), metrics=()))
    assert rep.ok
    assert np.all(rep.column("deficit") > 0)
    assert np.all(np.diff(rep.column("deficit")) > 0)


def test_random_john_chain():
    rep = run_experiment(ExperimentSpec("random-john", 3, [0.0] * 100, seed=1, metrics=()))
    assert all(not r.error for r in rep.rows)
    assert all(r.chain_ok for r in rep.rows)


def test_family_bodies_deterministic():
    fam = BodyFamily("random-john", 2, [0.0, 0.0])
    a, b = fam.bodies(3), fam.bodies(3)
    assert all(np.array_equal(x.vertices, y.vertices) for x, y in zip(a, b))
    assert not np.allclose(a[0].volume, a[1].volume)


def _rows(values):
    return [StabilityRow("corner-cut", 2, x, deficit=y) for x, y in values]


def test_slope_recovers_power_law():
    xs = np.geomspace(0.01, 0.3, 12)
    s, C, r2 = slope_estimate(_rows(zip(xs, 3 * xs**1.5)), "eps", "deficit")
    assert s == pytest.approx(1.5, abs=1e-10) and C == pytest.approx(3) and r2 == pytest.approx(1)


def test_slope_insufficient():
    with pytest.raises(InsufficientData):
        slope_estimate(_rows([(0.1, 0.2)] * 12), "eps", "deficit")
    with pytest.raises(InsufficientData):
        slope_estimate(_rows(zip(np.geomspace(0.01, 0.3, 9), np.ones(9))), "eps", "deficit")


def test_csv_empty_and_schema(tmp_path):
    p = tmp_path / "e.csv"
    report_emit([], str(p))
    assert p.read_text() == ",".join(CSV_COLUMNS) + "\n"
    rows = [StabilityRow("corner-cut", 2, e, volume=1.0 + e, deficit=e / 3, bm_certified=True) for e in (0.1, 0.2, 0.3)]
    report_emit(rows, str(p))
    lines = p.read_text().splitlines()
    assert len(lines) == 4 and all(len(l.split(",")) == 12 for l in lines)
    back = read_csv(str(p))
    for r, d in zip(rows, back):
        assert d["volume"] == pytest.approx(r.volume, abs=1e-12)
        assert d["deficit"] == pytest.approx(r.deficit, abs=1e-12)
        assert d["bm_certified"] is True
        assert math.isnan(d["delta_vol"])


def test_csv_deterministic(tmp_path):
    spec = ExperimentSpec("random-john", 2, [0.0] * 3, seed=5, metrics=("d_z", "witness"), witness_samples=2000)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    report_emit(run_experiment(spec), str(a))
    report_emit(run_experiment(spec), str(b))
    assert a.read_bytes() == b.read_bytes()
    js = tmp_path / "p.json"
    report_emit(run_experiment(spec), str(js), "json")
    assert js.stat().st_size > 0


def test_delta_h_tracks_deficit():
    # each simplex contact split into two atoms at +-s: isotropic for every s by symmetry
    W = simplex_contacts(2)
    base = np.arctan2(W[:, 1], W[:, 0])
    taus, dhs = [], []
    for s in np.geomspace(0.002, 0.2, 14):
        ang = np.r_[base - s, base + s]
        mu = SphericalMeasure(np.c_[np.cos(ang), np.sin(ang)], np.full(6, 1 / 3))
        tau = volume_deficit(z_body(mu))
        if tau <= 0.05:
            taus.append(tau)
            dhs.append(nearest_circumscribed_simplex(mu, mode="max")[1])
            # the min-of-one-sided form vanishes here: a rotated triangle sits on half the atoms
            assert nearest_circumscribed_simplex(mu)[1] <= 1e-12
    assert len(taus) >= 8
    assert spearmanr(taus, dhs)[0] > 0.9


@pytest.mark.slow
def test_orders_corner_cut_3d():
    rep = run_experiment(ExperimentSpec("corner-cut", 3, parse_grid("0.02:0.5:15"), metrics=()))
    s = rep.fits["deficit~eps"][0]
    assert abs(s - 2) <= 0.3


@functools.lru_cache(maxsize=None)
def _slab_fits():
    return run_experiment(ExperimentSpec("vertex-and-slab", 3, parse_grid("0.02:0.4:10"), metrics=("delta_vol",))).fits


@pytest.mark.slow
def test_vertex_and_slab_vol_order_matches_cut_scaling():
    # vertex cuts lose surface ~eps^{n-1} and volume ~eps^n; uniform slabs are a homothety,
    # invisible to delta_vol, so deficit ~ delta_vol^{(n-1)/n}
    fits = _slab_fits()
    assert fits["deficit~eps"][0] == pytest.approx(2, abs=0.1)
    assert fits["deficit~delta_vol"][0] == pytest.approx(2 / 3, abs=0.05)


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="measured slope is (n-1)/n = 2/3 for this construction; see notes")
def test_vertex_and_slab_vol_order_at_least_0_7():
    assert _slab_fits()["deficit~delta_vol"][0] >= 0.7
