import math

import numpy as np
import pytest

from lorentzconj.conjugate import (
    PreconditionError,
    build_family,
    classify,
    cut_scan,
    embeddability_check,
    injectivity_radii,
    jacobi_scan,
    one_sided_search,
    symmetric_search,
)
from lorentzconj.geodesic import integrate_geodesic, solve_bvp
from lorentzconj.model import timelike_diameter


def _ads_geodesic(st, T, p=(0.0, 0.0)):
    return integrate_geodesic(st, np.array(p), np.array([1.0, 0.0]), T)


def test_jacobi_scan_models(mink, ads, ds):
    assert jacobi_scan(mink, integrate_geodesic(mink, [0, 0], [1.0, 0.4], 10.0)) == []
    assert jacobi_scan(ds, integrate_geodesic(ds, [0, 0], [1.0, 0.0], 10.0)) == []
    roots = jacobi_scan(ads, _ads_geodesic(ads, 1.5 * math.pi))
    assert roots[0] == pytest.approx(math.pi, abs=1e-6)


def test_jacobi_scan_matches_diameter(ads4):
    roots = jacobi_scan(ads4, _ads_geodesic(ads4, 0.8 * math.pi))
    assert roots[0] == pytest.approx(timelike_diameter(-4.0), abs=1e-6)


def test_one_sided_minkowski_false(mink):
    res = one_sided_search(mink, integrate_geodesic(mink, [0, 0], [3.0, 0.5], 1.0))
    assert not res.flag and res.rings_checked == 1


def test_one_sided_ads_at_diameter(ads):
    res = one_sided_search(ads, _ads_geodesic(ads, math.pi))
    assert res.flag and len(res.witnesses) == 6
    for w in res.witnesses:
        assert w["lengths"][0] == pytest.approx(w["lengths"][1], rel=1e-6)
    # any one-sided witness is a symmetric witness with p_i = p
    assert symmetric_search(ads, _ads_geodesic(ads, math.pi)).flag


def test_one_sided_ads_below_diameter(ads):
    assert not one_sided_search(ads, _ads_geodesic(ads, math.pi - 0.3)).flag


def test_witnesses_replay(ads):
    res = one_sided_search(ads, _ads_geodesic(ads, math.pi), rings=3)
    for w in res.witnesses:
        for seed, vel in zip(w["seeds"], w["velocities"]):
            sols = solve_bvp(ads, w["p"], w["q"], seeds=0, extra_seeds=[np.array(seed)])
            assert min(np.linalg.norm(s.initial_velocity - vel) for s in sols) <= 1e-8


def test_build_family_minkowski(mink):
    sol = integrate_geodesic(mink, [0.0, 0.0], [3.0, 0.0], 1.0)
    fam = build_family(mink, sol, {"radius": 0.1, "per_axis": 5, "rings": 4})
    assert fam.complete and len(fam.members) == 625
    # affine maximizers: the innermost ring moves the endpoints by 0.0125
    assert fam.continuity[-1] < 0.05
    m = fam(0, 24)
    np.testing.assert_allclose(m.initial_velocity, fam.grid_V[24] - fam.grid_U[0], atol=1e-10)


def test_build_family_ads(ads):
    fam = build_family(ads, _ads_geodesic(ads, 0.5 * math.pi), {"per_axis": 3, "rings": 4})
    assert fam.complete
    assert fam.continuity[-1] < fam.continuity[0]
    with pytest.raises(PreconditionError):
        build_family(ads, _ads_geodesic(ads, math.pi), {"per_axis": 3, "rings": 2})


def test_embeddability(ads):
    at = embeddability_check(ads, _ads_geodesic(ads, math.pi), scheme="neighbor")
    assert not at.flag
    for scheme in ("neighbor", "rings"):
        assert embeddability_check(ads, _ads_geodesic(ads, 0.5 * math.pi), scheme=scheme).flag


def test_embeddability_neighbor_falls_back(mink):
    res = embeddability_check(mink, integrate_geodesic(mink, [0, 0], [2.0, 0.3], 1.0), scheme="neighbor", rings=2)
    assert res.flag
    assert any("fell back" in n for n in res.notes)


def test_classify_minkowski(mink):
    rep = classify(mink, integrate_geodesic(mink, [0, 0], [2.0, 0.3], 1.0))
    assert not any(rep.flags.values())
    assert rep.thresholds["rings"] == 6 and rep.thresholds["eps0"] == 0.1


def test_classify_ads_at_diameter(ads):
    rep = classify(ads, _ads_geodesic(ads, math.pi), {"scheme": "neighbor"})
    assert all(rep.flags.values())
    assert rep.flags["ultimate"] == (rep.flags["unreachable"] or rep.flags["symmetric"])
    assert rep.disagreements == []


def test_cut_scan(mink, ads, ds):
    grid = [0.5, 1.0, 2.0, 3.0]
    assert cut_scan(mink, [0.0, 0.0], grid).cut_points == []
    scan = cut_scan(ads, [0.0, 0.0], [0.5 * math.pi, 0.9 * math.pi, math.pi, 1.2 * math.pi])
    assert all(s == pytest.approx(math.pi) for s in scan.initial_cut.values())
    assert cut_scan(ds, [0.0, 0.0], [0.5, 1.0, 1.5], directions=None).cut_points == []


def test_injectivity_radii(mink, ads4):
    D = timelike_diameter(-4.0)
    res = injectivity_radii(
        ads4, [[0.0, 0.0]], np.linspace(D / 6, D, 6), np.linspace(0, 1.2 * D, 25), seeds=8
    )
    assert res["ini_inj"] == pytest.approx(D, abs=1.2 * D / 24)
    assert abs(res["ini_inj"] - res["unique_inj"]) <= 1.2 * D / 24
    flat = injectivity_radii(mink, [[0.0, 0.0]], [1.0, 2.0], np.linspace(0, 3, 7), seeds=4)
    assert flat["ini_inj"] == math.inf and flat["unique_inj"] == math.inf
