import math

import numpy as np
import pytest

from lorentzconj.curves import SampledCurve, canonicalize
from lorentzconj.frechet import (
    IncompatibleSpacesError,
    ParamPath,
    d_gamma,
    discrete_frechet,
    frechet_refine,
    normalize_monotone,
)
from lorentzconj.model import ModelSpace


def brute_force(P, Q):
    """Minimum over every monotone coupling, enumerated by recursion."""
    n, m = len(P) - 1, len(Q) - 1
    best = math.inf

    def walk(i, j, cur):
        nonlocal best
        cur = max(cur, float(np.linalg.norm(P[i] - Q[j])))
        if cur >= best:
            return
        if (i, j) == (n, m):
            best = cur
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            if i + di <= n and j + dj <= m:
                walk(i + di, j + dj, cur)

    walk(0, 0, 0.0)
    return best


def test_examples():
    P = np.array([(0, 0), (2, 0)], float)
    assert discrete_frechet(P, P) == 0.0
    assert discrete_frechet(np.array([(0, 0), (1, 0)], float), np.array([(0, 1), (1, 1)], float)) == 1.0
    # the vertex DP sees the extra vertex (error within the mesh width 2); the
    # refined value tends to the continuous value 0
    R = np.array([(0, 0), (1, 0), (2, 0)], float)
    assert discrete_frechet(P, R) == 1.0
    res = frechet_refine(SampledCurve.polyline(P), SampledCurve.polyline(R), target_gap=1e-3)
    # discrete error halves per bisection, so it is bounded by the last change
    assert res.converged and res.value <= 2 * res.certified_gap + 1e-12


def test_matches_exhaustive_enumeration(rng):
    for _ in range(60):
        P = rng.normal(size=(rng.integers(1, 6), 2))
        Q = rng.normal(size=(rng.integers(1, 6), 2))
        assert discrete_frechet(P, Q) == pytest.approx(brute_force(P, Q), abs=1e-15)


def test_coupling_is_valid_and_attains_value(rng):
    P, Q = rng.normal(size=(7, 2)), rng.normal(size=(5, 2))
    val, cpl = discrete_frechet(P, Q, return_coupling=True)
    assert cpl.is_valid(6, 4)
    assert max(np.linalg.norm(P[i] - Q[j]) for i, j in cpl.pairs) == pytest.approx(val)


def test_d_gamma_examples(mink):
    a = SampledCurve.polyline([(0, 0), (2, 0)], space=mink)
    b = SampledCurve.polyline([(0, 0), (2.2, 0)], space=mink)
    assert d_gamma(a, b) == pytest.approx(0.4, abs=1e-12)
    assert d_gamma(a, a) == 0.0
    s = np.linspace(0, 1, 33)
    c = SampledCurve(s**3, np.outer(s, [2.0, 0.5]), space=mink)
    d = SampledCurve(s, np.outer(s, [2.0, 0.5]), space=mink)
    assert d_gamma(canonicalize(c), canonicalize(d)) == pytest.approx(0.0, abs=1e-9)


def test_incompatible_spaces(mink):
    other = ModelSpace(-1.0, 2)
    a = SampledCurve.polyline([(0, 0), (2, 0)], space=mink)
    b = SampledCurve.polyline([(0, 0), (2, 0)], space=other)
    with pytest.raises(IncompatibleSpacesError):
        discrete_frechet(a, b)


def _point_to_polyline(X, V):
    a, b = V[:-1], V[1:]
    d = b - a
    ll = np.maximum(np.einsum("ij,ij->i", d, d), 1e-300)
    out = np.empty(len(X))
    for k, x in enumerate(X):
        w = np.clip(np.einsum("ij,ij->i", x - a, d) / ll, 0.0, 1.0)
        out[k] = np.min(np.linalg.norm(a + w[:, None] * d - x, axis=1))
    return out


def _hausdorff(A, B):
    """Hausdorff distance between the polylines through A and through B (vertex sampled)."""
    return max(_point_to_polyline(A, B).max(), _point_to_polyline(B, A).max())


def test_normalize_diagonal():
    t = np.linspace(0, 1, 11)
    out = normalize_monotone(ParamPath(t, t, t))
    np.testing.assert_allclose(out.u, 2 * t)
    np.testing.assert_allclose(out.phi, out.u / 2)
    np.testing.assert_allclose(out.psi, out.u / 2)


def test_normalize_quadratic_lipschitz_and_image():
    t = np.linspace(0, 1, 201)
    alpha = ParamPath(t, t**2, t)
    out = normalize_monotone(alpha, extra=101)
    du = np.diff(out.u)
    assert np.all(np.abs(np.diff(out.phi)) + np.abs(np.diff(out.psi)) <= du * (1 + 1e-9))
    assert _hausdorff(out.image, alpha.image) <= np.max(np.diff(t))


def test_normalize_plateau():
    t = np.linspace(0, 1, 101)
    phi = np.where(t < 0.3, t / 0.3 * 0.4, np.where(t < 0.6, 0.4, 0.4 + (t - 0.6) / 0.4 * 0.6))
    alpha = ParamPath(t, phi, t)
    out = normalize_monotone(alpha)
    assert _hausdorff(out.image, alpha.image) <= np.max(np.diff(t)) + 1e-12
    # the combined parameter phi + psi has no plateau
    assert np.all(np.diff(out.phi + out.psi) > 0)


def test_refine_straight_segments(mink):
    a = SampledCurve.polyline([(0, 0), (2, 0)], space=mink)
    b = SampledCurve.polyline([(0, 0.1), (2, 0.1)], space=mink)
    res = frechet_refine(a, b, target_gap=1e-4)
    assert res.converged and res.iterations == 1
    assert res.value == pytest.approx(0.1)


def test_refine_arc_vs_chord():
    th = 0.6
    arc = SampledCurve.from_function(lambda s: np.array([math.sin(th * (2 * s - 1)), math.cos(th * (2 * s - 1))]), n=5)
    chord = SampledCurve.polyline([(math.sin(-th), math.cos(th)), (math.sin(th), math.cos(th))], samples_per_edge=4)
    res = frechet_refine(arc, chord, target_gap=1e-4)
    sagitta = 1 - math.cos(th)
    assert res.converged
    assert abs(res.value - sagitta) <= 1e-4


def test_refine_identical_curves_different_samples():
    f = lambda s: np.array([s, s**2])  # noqa: E731
    a = SampledCurve.from_function(f, n=9)
    b = SampledCurve.from_function(f, n=13)
    res = frechet_refine(a, b, target_gap=1e-4)
    assert res.value <= 1e-4 + 1e-3  # within target gap of the mesh-limited value


def test_metric_axioms(rng):
    for _ in range(40):
        A, B, C = (rng.normal(size=(rng.integers(2, 8), 2)) for _ in range(3))
        ab, ba = discrete_frechet(A, B), discrete_frechet(B, A)
        assert ab == ba
        assert discrete_frechet(A, C) <= ab + discrete_frechet(B, C) + 1e-12
        assert discrete_frechet(A, A) == 0.0


def test_reparametrization_within_mesh_bound(rng):
    f = lambda s: np.column_stack([np.cos(3 * s), np.sin(2 * s) + s])  # noqa: E731
    s = np.linspace(0, 1, 81)
    base = f(s)
    mesh = np.max(np.linalg.norm(np.diff(base, axis=0), axis=1))
    for _ in range(100):
        w = np.cumsum(rng.uniform(0.1, 1.0, size=81))
        phi = (w - w[0]) / (w[-1] - w[0])
        other = f(phi)
        mesh2 = max(mesh, np.max(np.linalg.norm(np.diff(other, axis=0), axis=1)))
        assert discrete_frechet(base, other) <= mesh2


def test_d_gamma_dominates_frechet(mink, rng):
    for _ in range(20):
        a = SampledCurve.polyline([(0, 0), (2 + rng.uniform(), rng.uniform(-0.5, 0.5))], space=mink)
        b = SampledCurve.polyline([(0, 0), (2 + rng.uniform(), rng.uniform(-0.5, 0.5))], space=mink)
        assert d_gamma(a, b) >= discrete_frechet(a, b)
