import math

import numpy as np
import pytest

from lorentzconj.curves import SampledCurve
from lorentzconj.geodesic import (
    DegenerateInputError,
    convergence_experiment,
    converging_family,
    integrate_geodesic,
    local_maximizer_check,
    solve_bvp,
)
from lorentzconj.model import model_geodesic
from lorentzconj.spacetimes import christoffel_fd


def _unit_timelike(st, p, rng):
    while True:
        v = np.array([1.0, rng.uniform(-0.6, 0.6)])
        n2 = st.norm2(p, v)
        if n2 < -1e-3:
            return v / math.sqrt(-n2)


def test_minkowski_straight(mink):
    sol = integrate_geodesic(mink, [0.0, 0.0], [1.0, 0.0], 5.0)
    np.testing.assert_array_equal(sol.points[:, 1], 0.0)
    np.testing.assert_allclose(sol.points[:, 0], sol.grid, rtol=0, atol=1e-14)
    np.testing.assert_allclose(sol.end_point, [5.0, 0.0], atol=1e-14)


def _sphere_xyz(beta, lam):
    return np.array([math.cos(beta) * math.cos(lam), math.cos(beta) * math.sin(lam), math.sin(beta)])


def test_product_great_circle(sphere):
    p = np.array([0.0, 0.1, 0.2])
    v = np.array([1.5, 0.3, 0.8])
    sol = integrate_geodesic(sphere, p, v, 6.0)
    # closed-form flow on the unit sphere: P cos(ws) + (T / w) sin(ws)
    b, l = p[1], p[2]
    P = _sphere_xyz(b, l)
    dP_db = np.array([-math.sin(b) * math.cos(l), -math.sin(b) * math.sin(l), math.cos(b)])
    dP_dl = np.array([-math.cos(b) * math.sin(l), math.cos(b) * math.cos(l), 0.0])
    T = dP_db * v[1] + dP_dl * v[2]
    w = np.linalg.norm(T)
    for s in np.linspace(0, 6.0, 13):
        x = sol.at(s)
        assert x[0] == pytest.approx(p[0] + v[0] * s, abs=1e-10)
        ref = P * math.cos(w * s) + T / w * math.sin(w * s)
        np.testing.assert_allclose(_sphere_xyz(x[1], x[2]), ref, atol=1e-8)


def test_ads_matches_model_geodesic(ads, rng):
    for _ in range(3):
        p = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1)])
        v = _unit_timelike(ads, p, rng)
        sol = integrate_geodesic(ads, p, v, math.pi)
        for s in np.linspace(0, math.pi, 7):
            np.testing.assert_allclose(sol.at(s), model_geodesic(ads, p, v, s), atol=1e-8)


def test_norm_conserved(ads, spheroid):
    for st, p, v in ((ads, [0.1, 0.4], [1.3, 0.2]), (spheroid, [0.0, 0.2, 0.0], [2.0, 0.5, 1.0])):
        sol = integrate_geodesic(st, p, v, 4.0)
        n0 = st.norm2(sol.points[0], sol.velocities[0])
        drift = max(abs(st.norm2(x, u) - n0) for x, u in zip(sol.points, sol.velocities))
        assert drift <= 1e-8 * 4.0


def test_christoffel_closed_form_vs_fd(ads, ds, spheroid, rng):
    for st in (ads, ds, spheroid):
        for _ in range(5):
            x = np.zeros(st.dim)
            x[1:] = rng.uniform(-0.5, 0.5, st.dim - 1)
            x[0] = rng.uniform(-1, 1)
            np.testing.assert_allclose(st.christoffel(x), christoffel_fd(st.metric, x), atol=1e-7)


def test_bvp_minkowski_unique(mink):
    sols = solve_bvp(mink, [0.0, 0.0], [2.0, 1.0])
    assert len(sols) == 1
    np.testing.assert_allclose(sols[0].initial_velocity, [2.0, 1.0], atol=1e-10)


def test_bvp_ads_refocusing(ads):
    p = np.array([0.0, 0.0])
    q = model_geodesic(ads, p, np.array([1.0, 0.0]), math.pi)
    sols = solve_bvp(ads, p, q, seeds=8)
    timelike = [s for s in sols if s.is_timelike()]
    assert len(timelike) >= 2
    for s in timelike:
        assert s.length == pytest.approx(math.pi, abs=1e-6)


def test_bvp_degenerate(mink):
    with pytest.raises(DegenerateInputError):
        solve_bvp(mink, [1.0, 0.0], [1.0, 0.0])


def test_local_maximizer_check(mink, ads):
    seg = integrate_geodesic(mink, [0.0, 0.0], [1.0, 0.3], 2.0)
    for w in (0.1, 0.5, seg.length):
        assert local_maximizer_check(mink, seg, w)
    long = integrate_geodesic(ads, [0.0, 0.0], [1.0, 0.0], 1.5 * math.pi)
    assert local_maximizer_check(ads, long, 0.1 * math.pi)
    # the whole segment runs past the conjugate point at pi
    assert not local_maximizer_check(ads, long, long.length)
    broken = SampledCurve.polyline([(0, 0), (1, 0.9), (2, 0)], space=mink)
    assert not local_maximizer_check(mink, broken, 1.0)


def test_bvp_outputs_are_local_maximizers(ads, rng):
    for _ in range(3):
        p = rng.uniform(-0.5, 0.5, 2)
        v = _unit_timelike(ads, p, rng) * rng.uniform(0.5, 2.5)
        q = model_geodesic(ads, p, v, 1.0)
        for s in solve_bvp(ads, p, q):
            assert local_maximizer_check(ads, s, min(0.5, s.length))


def test_convergence_minkowski_lines(mink):
    limit = integrate_geodesic(mink, [0.0, 0.0], [1.0, 0.0], 1.0)
    fam = [integrate_geodesic(mink, [0.0, 0.0], [1.0, 1.0 / n], 1.0) for n in (10, 100, 1000, 10**4, 10**5)]
    rep = convergence_experiment(mink, fam, limit)
    assert rep.converged and rep.together
    for seq in (rep.c0, rep.velocity, rep.d_gamma):
        assert np.all(np.diff(seq) < 0)
    assert rep.c0[-1] == pytest.approx(1e-5, rel=1e-6)


def test_convergence_constant_family(ads):
    limit = integrate_geodesic(ads, [0.0, 0.0], [1.0, 0.2], 1.0)
    rep = convergence_experiment(ads, [limit] * 4, limit)
    assert rep.c0 == rep.velocity == rep.d_gamma == [0.0] * 4


def test_convergence_ads_shooting(ads):
    limit = integrate_geodesic(ads, [0.0, 0.0], [1.2, 0.3], 1.0)
    fam = converging_family(ads, limit, dp=[0.3, -0.2], dq=[-0.1, 0.4], rings=12)
    rep = convergence_experiment(ads, fam, limit)
    assert rep.converged and rep.together
