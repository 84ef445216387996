"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Tolerances and sizes are the stated ones. Runtime limits are wall-clock
measurements of the criterion's own computation in this process.
"""

import math
import time

import numpy as np
import pytest

from lorentzconj.comparison import cartan_hadamard_experiment, rauch_experiment
from lorentzconj.conjugate import (
    build_family,
    classify,
    embeddability_check,
    injectivity_radii,
    jacobi_at_endpoint,
    jacobi_scan,
    one_sided_search,
    symmetric_search,
)
from lorentzconj.curves import SampledCurve, canonicalize, l_g_length, tau_length
from lorentzconj.frechet import ParamPath, discrete_frechet, normalize_monotone
from lorentzconj.geodesic import (
    convergence_experiment,
    converging_family,
    integrate_geodesic,
    local_maximizer_check,
)
from lorentzconj.model import model_geodesic, model_tau_oracle, tau_model, timelike_diameter

from conftest import SCHROEDER_V


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def _unit(st, p, phi):
    """Future unit timelike vector at p with rapidity phi in the orthonormal frame."""
    E = st.orthonormal_frame(np.asarray(p, float))
    c = np.zeros(st.dim)
    c[0], c[1] = math.cosh(phi), math.sinh(phi)
    return E @ c


# -- 1 ---------------------------------------------------------------------


def _corpus(rng, size=200):
    curves = []
    for _ in range(size - 40):
        k = int(rng.integers(2, 12))
        curves.append(np.cumsum(rng.normal(size=(k, 2)), axis=0))
    # reparametrized copies (same samples, different parameters) and exact duplicates
    for c in curves[:40]:
        curves.append(c.copy())
    return curves


def test_criterion_01_frechet_metric_axioms(rng, verdict):
    t0 = time.perf_counter()
    corpus = _corpus(rng)
    n = len(corpus)
    D = np.zeros((n, n))
    sym_ok = True
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = discrete_frechet(corpus[i], corpus[j])
            D[j, i] = discrete_frechet(corpus[j], corpus[i])
            sym_ok &= D[i, j] == D[j, i]
    triples = rng.integers(0, n, size=(10_000, 3))
    worst = max(D[a, c] - D[a, b] - D[b, c] for a, b, c in triples)
    tri_ok = worst <= 1e-12
    # d = 0 implies equal canonical forms within the mesh
    zero_ok = True
    zeros = 0
    for i, j in zip(*np.nonzero(D == 0.0)):
        if i >= j:
            continue
        zeros += 1
        params = rng.uniform(0.1, 1.0, len(corpus[j])).cumsum()
        params = (params - params[0]) / (params[-1] - params[0])
        a = canonicalize(SampledCurve(np.linspace(0, 1, len(corpus[i])), corpus[i]))
        b = canonicalize(SampledCurve(params, corpus[j]))
        mesh = np.max(np.linalg.norm(np.diff(corpus[i], axis=0), axis=1))
        u = np.linspace(0, 1, 101)
        zero_ok &= np.max(np.linalg.norm(a.canonical.sample(u) - b.canonical.sample(u), axis=1)) <= 1e-9 * max(1, mesh)
    dt = time.perf_counter() - t0
    ok = sym_ok and tri_ok and zero_ok and zeros >= 40 and dt < 60
    verdict(1, ok, f"{n} curves, symmetry exact={sym_ok}, worst triangle slack {worst:.2e}, {zeros} zero pairs, {dt:.1f}s")


# -- 2 ---------------------------------------------------------------------


def _segment_distance(X, V):
    a, b = V[:-1], V[1:]
    d = b - a
    ll = np.maximum(np.einsum("ij,ij->i", d, d), 1e-300)
    out = np.empty(len(X))
    for k, x in enumerate(X):
        w = np.clip(np.einsum("ij,ij->i", x - a, d) / ll, 0.0, 1.0)
        out[k] = np.min(np.linalg.norm(a + w[:, None] * d - x, axis=1))
    return out


def test_criterion_02_normalization(rng, verdict):
    worst_lip, worst_haus, ok = 0.0, 0.0, True
    for _ in range(100):
        m = int(rng.integers(5, 80))
        t = np.linspace(0, 1, m)
        steps = rng.uniform(0, 1, size=(2, m - 1)) * (rng.uniform(size=(2, m - 1)) > 0.3)
        steps[:, 0] += 1e-3  # at least one increment per coordinate
        phi = np.concatenate([[0.0], np.cumsum(steps[0])])
        psi = np.concatenate([[0.0], np.cumsum(steps[1])])
        phi, psi = phi / phi[-1], psi / psi[-1]
        phi[-1] = psi[-1] = 1.0
        alpha = ParamPath(t, phi, psi)
        out = normalize_monotone(alpha, extra=int(rng.integers(0, 50)))
        du = np.diff(out.u)
        inc = np.abs(np.diff(out.phi)) + np.abs(np.diff(out.psi))
        lip = float(np.max(np.abs(inc - du) / du))
        mesh = float(np.max(np.diff(t)))
        haus = max(_segment_distance(out.image, alpha.image).max(), _segment_distance(alpha.image, out.image).max())
        worst_lip = max(worst_lip, lip)
        worst_haus = max(worst_haus, haus / mesh)
        ok &= bool(np.all(np.diff(out.phi) >= 0) and np.all(np.diff(out.psi) >= 0))
        ok &= out.u[0] == 0.0 and abs(out.u[-1] - 2.0) <= 1e-12
    ok = ok and worst_lip <= 1e-9 and worst_haus <= 1.0
    verdict(2, ok, f"max |sum-norm increment - du|/du = {worst_lip:.1e}, max Hausdorff/mesh = {worst_haus:.1e}")


# -- 3 ---------------------------------------------------------------------


def _causal_polyline(st, rng, samples=1000):
    k = int(rng.integers(2, 8))
    verts = [np.array([rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)])]
    for _ in range(k):
        v = _unit(st, verts[-1], rng.uniform(-1.0, 1.0))
        verts.append(verts[-1] + rng.uniform(0.05, 0.3) * v)
    verts = np.array(verts)
    knots = np.linspace(0, 1, len(verts))
    u = np.linspace(0, 1, samples)
    pts = np.column_stack([np.interp(u, knots, verts[:, d]) for d in range(st.dim)])
    return SampledCurve(u, pts, space=st)


def test_criterion_03_lg_equals_ltau(mink, ds, ads, rng, verdict):
    worst = {}
    for name, st in (("Minkowski", mink), ("dS", ds), ("AdS", ads)):
        worst[name] = 0.0
        for _ in range(50):
            c = _causal_polyline(st, rng)
            worst[name] = max(worst[name], abs(l_g_length(c, st) - tau_length(c).value))
    ok = all(w <= 1e-4 for w in worst.values())
    verdict(3, ok, "max |L_g - L_tau|: " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


# -- 4 ---------------------------------------------------------------------


def test_criterion_04_model_golden_values(mink, ads, ads4, ds, rng, verdict):
    diam_ok = timelike_diameter(-1.0) == math.pi and timelike_diameter(-4.0) == math.pi / 2
    flat = 0.0
    for _ in range(100):
        x = rng.uniform(-5, 5, 2)
        dx = rng.uniform(-3, 3)
        dt = abs(dx) + rng.uniform(1e-3, 4)
        flat = max(flat, abs(tau_model(mink, x, x + [dt, dx]) - math.sqrt(dt * dt - dx * dx)))
    curved = 0.0
    cases = [(ads, 40), (ads4, 30), (ds, 30)]
    for st, count in cases:
        D = timelike_diameter(st.K)
        smax = 0.9 * D if math.isfinite(D) else 2.0
        for _ in range(count):
            p = rng.uniform(-0.5, 0.5, 2)
            q = model_geodesic(st, p, _unit(st, p, rng.uniform(-1, 1)), rng.uniform(0.1, smax))
            curved = max(curved, abs(tau_model(st, p, q) - model_tau_oracle(st, p, q)))
    ok = diam_ok and flat <= 1e-12 and curved <= 1e-6
    verdict(4, ok, f"diameters exact={diam_ok}, flat max err {flat:.1e}, curved vs shooting max err {curved:.1e} (100 pairs)")


# -- 5 ---------------------------------------------------------------------


def test_criterion_05_jacobi(mink, ads, ds, rng, verdict):
    t0 = time.perf_counter()
    first = []
    for _ in range(5):
        p = rng.uniform(-0.5, 0.5, 2)
        sol = integrate_geodesic(ads, p, _unit(ads, p, rng.uniform(-1, 1)), 1.3 * math.pi)
        roots = jacobi_scan(ads, sol)
        first.append(roots[0] if roots else math.inf)
    ads_err = max(abs(r - math.pi) for r in first)
    empty = True
    for st in (mink, ds):
        for phi in (-0.7, 0.0, 0.7):
            empty &= jacobi_scan(st, integrate_geodesic(st, [0.0, 0.0], _unit(st, [0.0, 0.0], phi), 10.0)) == []
    dt = time.perf_counter() - t0
    ok = ads_err <= 1e-6 and empty and dt < 30
    verdict(5, ok, f"AdS first conjugate max |t - pi| = {ads_err:.1e}, flat/dS empty={empty}, {dt:.1f}s")


# -- 6 ---------------------------------------------------------------------


def _equivalence_cases(mink, ads, ads4, spheroid):
    cases = []
    for L, phi, p in ((1.0, 0.0, (0, 0)), (3.0, 0.5, (1, -1)), (0.5, -0.8, (0, 2)), (10.0, 0.2, (0, 0)),
                      (2.0, 1.0, (-1, 0)), (5.0, -0.3, (2, 1))):
        cases.append(("Minkowski", mink, p, L * _unit(mink, p, phi)))
    for frac, phi, p in ((0.5, 0.0, (0, 0)), (0.7, 0.4, (0.2, 0.3)), (0.9, -0.5, (0, -0.4)),
                         ((math.pi - 0.3) / math.pi, 0.0, (0, 0)), (1.0, 0.0, (0, 0)), (1.0, 0.6, (0.3, 0.2)),
                         (1.0, -0.4, (-0.2, 0.5))):
        cases.append(("AdS", ads, p, frac * math.pi * _unit(ads, p, phi)))
    for frac in (0.6, 1.0):
        cases.append(("AdS K=-4", ads4, (0, 0), frac * math.pi / 2 * _unit(ads4, (0, 0), 0.3)))
    for lam0, scale in ((0.0, 1.0), (1.0, 1.0), (0.0, 0.4 / 0.6), (2.0, 0.8 / 0.6), (0.5, 1.0)):
        v = SCHROEDER_V.copy()
        v[2] *= scale
        cases.append(("R x ellipsoid", spheroid, (0.0, 0.0, lam0), v))
    return cases


def test_criterion_06_equivalence_of_notions(mink, ads, ads4, spheroid, verdict):
    cases = _equivalence_cases(mink, ads, ads4, spheroid)
    rows, agree = [], True
    for name, st, p, v in cases:
        sol = integrate_geodesic(st, np.asarray(p, float), v, 1.0)
        jac, _ = jacobi_at_endpoint(st, sol)
        one = one_sided_search(st, sol, rings=6, eps0=0.1).flag
        sym = symmetric_search(st, sol, rings=6, eps0=0.1).flag
        rows.append((name, round(sol.length, 4), jac, one, sym))
        agree &= jac == one == sym
    positives = sum(r[2] for r in rows)
    ok = agree and len(rows) >= 20 and 0 < positives < len(rows)
    bad = [r for r in rows if not (r[2] == r[3] == r[4])]
    verdict(6, ok, f"{len(rows)} geodesics, {positives} conjugate, disagreements: {bad or 'none'}")


# -- 7 ---------------------------------------------------------------------


def test_criterion_07_unreachable(ads, verdict):
    o = np.zeros(2)
    at = embeddability_check(ads, integrate_geodesic(ads, o, math.pi * _unit(ads, o, 0.0), 1.0), scheme="neighbor")
    below = {}
    for frac in (0.5, 0.75, 0.9):
        sol = integrate_geodesic(ads, o, frac * math.pi * _unit(ads, o, 0.0), 1.0)
        below[frac] = embeddability_check(ads, sol, scheme="neighbor").flag
    ok = (not at.flag) and all(below.values())
    verdict(7, ok, f"tau = pi unreachable={not at.flag}; reachable at {sorted(k for k, r in below.items() if r)} pi")


# -- 8 ---------------------------------------------------------------------


def test_criterion_08_schroeder(spheroid, verdict):
    sol = integrate_geodesic(spheroid, np.zeros(3), SCHROEDER_V, 1.0)
    rep = classify(spheroid, sol)
    fam = build_family(spheroid, sol, {"radius": 0.1, "per_axis": 3, "rings": 4})
    f = rep.flags
    ok = f["symmetric"] and not f["unreachable"] and f["ultimate"] and fam.complete
    verdict(8, ok, f"flags {f}, family complete={fam.complete}, continuity {np.round(fam.continuity, 3).tolist()}")


# -- 9 ---------------------------------------------------------------------


def test_criterion_09_rauch(ads, ads4, verdict):
    t0 = time.perf_counter()
    ok, parts = True, []
    for st, K in ((ads, -1.0), (ads4, -4.0)):
        D = timelike_diameter(K)
        out = rauch_experiment(st, K, [f * D for f in (0.25, 0.5, 0.75, 0.9, 0.94, 1.0)], margin=0.05)
        low = [r for r in out["rows"] if r["symmetric"] and r["L"] < D - 0.05 * D]
        at = [r["symmetric"] for r in out["rows"] if r["L"] == D]
        ok &= not low and at == [True] and out["consistent"]
        parts.append(f"K={K:g}: " + "".join("T" if r["symmetric"] else "F" for r in out["rows"]))
    dt = time.perf_counter() - t0
    ok = ok and dt < 300
    verdict(9, ok, f"{'; '.join(parts)} (L/D = .25 .5 .75 .9 .94 1), {dt:.1f}s")


# -- 10 --------------------------------------------------------------------


def test_criterion_10_cartan_hadamard(mink, verdict):
    res = {}
    for L in (1.0, 10.0, 100.0):
        rep = cartan_hadamard_experiment(mink, integrate_geodesic(mink, np.zeros(2), [L, 0.0], 1.0))
        res[L] = rep["exists"] and rep["unique"] and rep["continuous"] and not rep["flags"]["ultimate"]
    verdict(10, all(res.values()), f"exists/unique/continuous/not ultimate per L: {res}")


# -- 11 --------------------------------------------------------------------


def test_criterion_11_injectivity(mink, ads, verdict):
    radii = np.linspace(0, 1.2 * math.pi, 25)
    params = np.linspace(math.pi / 6, math.pi, 6)
    a = injectivity_radii(ads, [[0.0, 0.0], [0.4, 0.3]], params, radii)
    m = injectivity_radii(mink, [[0.0, 0.0], [0.4, 0.3]], params, radii)
    res = a["resolution"]
    ads_ok = a["gap"] <= res and abs(a["ini_inj"] - math.pi) <= res
    mink_ok = math.isinf(m["ini_inj"]) and math.isinf(m["unique_inj"])
    verdict(
        11,
        ads_ok and mink_ok,
        f"AdS IniInj {a['ini_inj']:.6f} UniqueInj {a['unique_inj']:.6f} (resolution {res:.3f}); "
        f"Minkowski {m['ini_inj']}/{m['unique_inj']}",
    )


# -- 12 --------------------------------------------------------------------


def test_criterion_12_convergence(mink, ads, rng, verdict):
    rows = []
    for k in range(10):
        st = mink if k < 5 else ads
        p = rng.uniform(-0.3, 0.3, 2)
        L = rng.uniform(0.5, 2.0) if st is mink else rng.uniform(0.3, 0.8) * math.pi
        limit = integrate_geodesic(st, p, L * _unit(st, p, rng.uniform(-0.8, 0.8)), 1.0)
        fam = converging_family(st, limit, rng.normal(size=2), rng.normal(size=2))
        rep = convergence_experiment(st, fam, limit, tol=1e-3)
        geo = local_maximizer_check(st, limit, min(0.5, limit.length))
        rows.append((rep.converged and rep.together and geo, max(rep.c0[-1], rep.velocity[-1], rep.d_gamma[-1])))
    ok = all(r[0] for r in rows)
    verdict(12, ok, f"10 families, worst final deviation {max(r[1] for r in rows):.1e}, limits locally maximizing")
