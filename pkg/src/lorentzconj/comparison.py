"""Timelike triangle comparison against the model spaces L^2(K)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ._pool import ordered_map
from .conjugate import PreconditionError, Schedule, build_family, classify, symmetric_search
from .curves import SampledCurve
from .geodesic import geodesic_d_gamma, integrate_geodesic, solve_bvp
from .model import ModelSpace, model_geodesic, tau_model, timelike_diameter

__all__ = [
    "InvalidTriangleError",
    "DiameterError",
    "IncompatibleSidesError",
    "TriangleRealization",
    "TimelikeTriangle",
    "realize_triangle",
    "curvature_bound_test",
    "StackReport",
    "stack_triangles",
    "rauch_experiment",
    "cartan_hadamard_experiment",
]

TRI_TOL = 1e-9
CONCAVITY_TOL = 1e-9
NULL_SCALE = 1e-3
LABELS = "xyz"


class InvalidTriangleError(ValueError):
    """Side lengths violate the reverse triangle inequality."""


class DiameterError(ValueError):
    """A side is at least the timelike diameter of the model space."""


class IncompatibleSidesError(ValueError):
    """Stacked triangles do not share a side of equal length."""


_MODELS = {}


def _model(K):
    key = float(K)
    if key not in _MODELS:
        _MODELS[key] = ModelSpace(key, 2)
    return _MODELS[key]


@dataclass(frozen=True, eq=False)
class TriangleRealization:
    """Comparison triangle x <= y <= z in L^2(K) with given side lengths (a, b, c) = (xy, yz, xz)."""

    K: float
    coords: tuple
    lengths: tuple

    @property
    def space(self):
        return _model(self.K)

    def vertex(self, label):
        return self.coords[LABELS.index(label)]

    def side_lengths(self):
        m = self.space
        x, y, z = self.coords
        return (tau_model(m, x, y), tau_model(m, y, z), tau_model(m, x, z))

    def side_point(self, side, s):
        """Point on side ``side`` ('xy', 'yz', 'xz') at tau-distance s from its first vertex.

        Found by bisection along the model geodesic on tau from the start.
        """
        m = self.space
        a, b = self.vertex(side[0]), self.vertex(side[1])
        L = tau_model(m, a, b)
        if s <= 0.0:
            return a.copy()
        if s >= L:
            return b.copy()
        v = m.log(a, b)
        u = brentq(lambda u: tau_model(m, a, model_geodesic(m, a, v, u)) - s, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
        return model_geodesic(m, a, v, u)

    def to_dict(self):
        return {"K": self.K, "coords": [list(map(float, c)) for c in self.coords], "lengths": list(self.lengths)}


def realize_triangle(lengths, K):
    """Comparison triangle with x at the origin, z on the time axis and y to the right.

    y is the endpoint of the unit-rapidity-phi geodesic of length a from x,
    with phi >= 0 chosen by root finding so that tau(y, z) = b.
    """
    a, b, c = (float(t) for t in lengths)
    if a < 0 or b < 0 or c <= 0:
        raise InvalidTriangleError("need a, b >= 0 and c > 0")
    if c < a + b - TRI_TOL * max(1.0, c):
        raise InvalidTriangleError(f"c = {c} < a + b = {a + b}")
    D = timelike_diameter(K)
    if c >= D:
        raise DiameterError(f"side {c} >= timelike diameter {D}")
    m = _model(K)
    x = np.zeros(2)
    z = np.array([c, 0.0])  # the t-axis is a unit-speed geodesic in every model chart
    if a <= 0.0:
        y = x.copy()
    elif b <= 0.0:
        y = z.copy()
    else:

        def point(phi):
            return model_geodesic(m, x, a * np.array([math.cosh(phi), math.sinh(phi)]), 1.0)

        def f(phi):
            return tau_model(m, point(phi), z) - b

        f0 = f(0.0)
        if f0 <= 0.0:
            phi = 0.0
        else:
            hi = 0.5
            while f(hi) > 0.0:
                hi *= 2.0
                if hi > 60:
                    raise InvalidTriangleError("no comparison point found")
            phi = brentq(f, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
        y = point(phi)
    r = TriangleRealization(float(K), (x, y, z), (a, b, c))
    got = r.side_lengths()
    if max(abs(g - w) for g, w in zip(got, (a, b, c))) > TRI_TOL * max(1.0, c):
        raise InvalidTriangleError(f"realization residual too large: {got} vs {(a, b, c)}")
    return r


# -- triangles in a space --------------------------------------------------


def _model_side(space, a, b, n):
    v = space.log(a, b)
    return SampledCurve.from_function(lambda u: model_geodesic(space, a, v, u), n=n, space=space)


def _bvp_side(space, a, b, n):
    sols = [s for s in solve_bvp(space, a, b) if s.is_timelike()]
    if not sols:
        raise InvalidTriangleError("no timelike side geodesic")
    best = max(sols, key=lambda s: s.length)
    return SampledCurve.from_function(best.at, n=n, space=space)


class TimelikeTriangle:
    """Vertices x << y << z of a space with maximizing sides (affinely parametrized geodesics)."""

    def __init__(self, space, x, y, z, samples=33, tau=None):
        self.space = space
        self.vertices = tuple(np.asarray(v, float) for v in (x, y, z))
        self._tau = tau or space.time_sep
        x, y, z = self.vertices
        self.side_lengths = (self._tau(x, y), self._tau(y, z), self._tau(x, z))
        a, b, c = self.side_lengths
        if min(a, b) <= space.tol_chron:
            raise InvalidTriangleError("vertices must be chronologically ordered x << y << z")
        if c + TRI_TOL < a + b:
            raise InvalidTriangleError("reverse triangle inequality fails")
        build = _model_side if isinstance(space, ModelSpace) else _bvp_side
        self.sides = {
            "xy": build(space, x, y, samples),
            "yz": build(space, y, z, samples),
            "xz": build(space, x, z, samples),
        }

    def tau(self, p, q):
        return self._tau(p, q)

    def vertex(self, label):
        return self.vertices[LABELS.index(label)]

    def side_length(self, side):
        return {"xy": self.side_lengths[0], "yz": self.side_lengths[1], "xz": self.side_lengths[2]}[side]


@dataclass
class ComparisonReport:
    K: float
    sense: str
    pairs: int
    worst_margin: float
    passed: bool
    tol: float
    rows: list = field(default_factory=list)

    def to_dict(self):
        return {
            "K": self.K,
            "sense": self.sense,
            "pairs": self.pairs,
            "worst_margin": self.worst_margin,
            "passed": self.passed,
            "tol": self.tol,
        }


def curvature_bound_test(space, triangle, K, side_samples=9, sense="above", tol=1e-9, tau=None):
    """Compare tau between side points with tau-bar between their comparison points.

    sense='above' checks tau(p, q) >= tau-bar(p-bar, q-bar) and sense='below'
    the reverse, over all pairs of sample points on the three sides. The
    margin of a pair is the signed slack (tau^2 - tau-bar^2) / max(tau + tau-bar, 1e-3),
    i.e. tau - tau-bar away from the null cone; the test passes when the
    worst margin is >= -tol.
    """
    if sense not in ("above", "below"):
        raise ValueError("sense must be 'above' or 'below'")
    tau = tau or triangle.tau
    real = realize_triangle(triangle.side_lengths, K)
    m = real.space
    fr = np.linspace(0.0, 1.0, side_samples)
    pts = []
    for side in ("xy", "yz", "xz"):
        L = triangle.side_length(side)
        for u in fr:
            p = triangle.sides[side].at(u)
            pts.append((side, u, p, real.side_point(side, u * L)))
    rows = []
    worst = math.inf
    for i, (s1, u1, p, pb) in enumerate(pts):
        for s2, u2, q, qb in pts[i + 1 :]:
            for a, b, ab, bb in ((p, q, pb, qb), (q, p, qb, pb)):
                t = tau(a, b)
                tb = tau_model(m, ab, bb)
                if t <= 0.0 and tb <= 0.0:
                    continue
                # equals t - tb unless the pair is nearly null, where tau^2 is the smooth quantity
                diff = (t * t - tb * tb) / max(t + tb, NULL_SCALE)
                margin = diff if sense == "above" else -diff
                worst = min(worst, margin)
                rows.append((s1, u1, s2, u2, t, tb, margin))
    worst = 0.0 if math.isinf(worst) else worst
    return ComparisonReport(float(K), sense, len(rows), worst, worst >= -tol, tol, rows)


# -- stacking ----------------------------------------------------------------


@dataclass
class StackReport:
    concave: bool
    defect: float
    pivot: np.ndarray
    outer_boundary: list
    placed: tuple

    def to_dict(self):
        return {
            "concave": self.concave,
            "defect": self.defect,
            "pivot": self.pivot.tolist(),
            "outer_boundary": [np.asarray(p).tolist() for p in self.outer_boundary],
            "placed": [np.asarray(p).tolist() for p in self.placed],
        }


def _frame_coords(m, A, P):
    """b-orthonormal frame at A adapted to the side A -> P.

    Returns (XA, e_t, e_s): the position of A (ambient for K != 0), the unit
    tangent towards P and the unit spacelike normal, oriented like the chart's
    +x direction. For K != 0 the three vectors span the ambient space.
    """
    if m.K == 0:
        XA = np.asarray(A, float)
        et = np.asarray(P, float) - XA
        et = et / math.sqrt(-m.b(et, et))
        return XA, et, np.array([et[1], et[0]])
    XA = m.embed(A)
    et = m.embed_jacobian(A) @ m.log(A, P)
    et = et / math.sqrt(-m.b(et, et))
    es = None
    for c in np.eye(3):
        w = c - (m.b(c, XA) / m.b(XA, XA)) * XA + m.b(c, et) * et
        if m.b(w, w) > 1e-12:
            es = w / math.sqrt(m.b(w, w))
            break
    if m.b(es, m.embed_jacobian(A) @ np.array([0.0, 1.0])) < 0:
        es = -es
    return XA, et, es


def _decompose(m, frame, X):
    XA, et, es = frame
    if m.K == 0:
        d = np.asarray(X, float) - XA
        return np.array([0.0, -m.b(d, et), m.b(d, es)])
    E = m.embed(X)
    return np.array([m.b(E, XA) / m.b(XA, XA), -m.b(E, et), m.b(E, es)])


def _compose(m, frame, c, ref_t, ref_x):
    XA, et, es = frame
    if m.K == 0:
        return XA + c[1] * et + c[2] * es
    E = c[0] * XA + c[1] * et + c[2] * es
    return m.chart_point(E, ref_t=ref_t, ref_x=ref_x)


def _unit_end_velocity(m, a, b):
    """Unit tangent at b of the geodesic from a to b."""
    _, w = model_geodesic(m, a, m.log(a, b), 1.0, return_velocity=True)
    return w / math.sqrt(-m.norm2(b, w))


def stack_triangles(t1, t2, shared_side=("xz", "xy")):
    """Glue t2 to t1 along a shared side and test concavity of the outer boundary.

    shared_side names the common side in each triangle as (apex, pivot)
    vertex labels; the apexes and the pivots are identified. t2 is moved by
    an isometry of L^2(K) so that its third vertex lies on the other side of
    the shared side. The outer boundary runs c1 -> pivot -> c2 through the
    third vertices; it is concave when, at the pivot, it does not turn
    towards the apex: with n the unit normal to the incoming direction
    pointing to the apex side, the defect g(u_out, n) must be <= 1e-9.
    """
    if t1.K != t2.K:
        raise IncompatibleSidesError("triangles live in different model spaces")
    s1, s2 = shared_side
    m = t1.space
    A1, P1 = t1.vertex(s1[0]), t1.vertex(s1[1])
    A2, P2 = t2.vertex(s2[0]), t2.vertex(s2[1])
    L1, L2 = tau_model(m, A1, P1), tau_model(m, A2, P2)
    if abs(L1 - L2) > TRI_TOL * max(1.0, L1):
        raise IncompatibleSidesError(f"shared sides differ: {L1} vs {L2}")
    C1 = t1.vertex(next(c for c in LABELS if c not in s1))
    C2 = t2.vertex(next(c for c in LABELS if c not in s2))
    f1 = _frame_coords(m, A1, P1)
    f2 = _frame_coords(m, A2, P2)
    c1 = _decompose(m, f1, C1)
    c2 = _decompose(m, f2, C2)
    # reflect t2 if needed so the third vertices are on opposite sides
    sigma = -1.0 if c1[2] * c2[2] > 0 else 1.0
    ref_t, ref_x = P1[0], P1[1]

    def place(X):
        c = _decompose(m, f2, X)
        c[2] *= sigma
        return _compose(m, f1, c, ref_t, ref_x)

    placed = tuple(place(v) for v in t2.coords)
    C2p = place(C2)
    # incoming direction at the pivot (continuing c1 -> pivot) and outgoing towards c2
    u_in = _unit_end_velocity(m, C1, P1) if tau_model(m, C1, P1) > 0 else None
    if u_in is None:
        u_in = -_unit_end_velocity(m, P1, C1) if tau_model(m, P1, C1) > 0 else None
    u_out = m.log(P1, C2p) if tau_model(m, P1, C2p) > 0 else -m.log(C2p, P1)
    u_out = u_out / math.sqrt(abs(m.norm2(P1, u_out)))
    if u_in is None:
        raise IncompatibleSidesError("outer boundary is not timelike at the pivot")
    # normal to u_in at the pivot, pointing to the apex side
    g = m.metric(P1)
    w_apex = -_unit_end_velocity(m, A1, P1)
    n = w_apex + (w_apex @ g @ u_in) * u_in
    nn = float(n @ g @ n)
    if nn <= 1e-24:
        defect = 0.0  # apex on the line of u_in: degenerate (flat) configuration
    else:
        n = n / math.sqrt(nn)
        defect = float(u_out @ g @ n)
    return StackReport(defect <= CONCAVITY_TOL, defect, np.asarray(P1, float), [C1, P1, C2p], placed)


# -- experiments ---------------------------------------------------------------


def _unit_geodesic(space, L, p=None):
    p = np.zeros(space.dim) if p is None else np.asarray(p, float)
    e0 = space.orthonormal_frame(p)[:, 0]
    return integrate_geodesic(space, p, L * e0, 1.0)


def rauch_experiment(space, K, length_grid, rings=6, eps0=0.1, margin=0.05, workers=None):
    """symmetric_search along geodesics of tau-length L for each L in the grid.

    Returns rows (L, flag) and whether the table is consistent with a
    timelike diameter bound: no positive flag below D_K - margin * D_K
    (margin absolute when D_K is infinite, where nothing may be flagged).
    """
    D = timelike_diameter(K)
    sched = Schedule(rings=rings, eps0=eps0)

    def row(L):
        sol = _unit_geodesic(space, float(L))
        res = symmetric_search(space, sol, schedule=sched)
        return {"L": float(L), "symmetric": res.flag, "rings_checked": res.rings_checked}

    rows = ordered_map(row, list(length_grid), workers)
    cutoff = D - margin * D if math.isfinite(D) else math.inf
    violations = [r for r in rows if r["symmetric"] and r["L"] < cutoff]
    return {
        "K": float(K),
        "D_K": D,
        "margin": margin,
        "rows": rows,
        "consistent": not violations,
        "schedule": sched.to_dict(),
    }


def cartan_hadamard_experiment(space, geodesic, grid_spec=None, tol=None, classify_config=None):
    """Family existence, continuity and uniqueness-at-resolution about a geodesic.

    Uniqueness: for every ring pair, every shooting solution within the
    closeness bound of the central geodesic coincides with the family member
    (d_Gamma <= tol).
    """
    spec = {"radius": 0.1, "per_axis": 3, "rings": 4}
    spec.update(grid_spec or {})
    try:
        fam = build_family(space, geodesic, spec)
    except PreconditionError as exc:
        return {"exists": False, "error": str(exc)}
    base = fam.center
    p, q, v = base.initial_point, base.end_point, base.initial_velocity
    tol = 1e-6 if tol is None else tol
    unique = True
    worst_dev = 0.0
    for r in range(spec["rings"]):
        eps = spec["radius"] / 2.0**r
        for k in range(space.dim):
            for sgn in (1.0, -1.0):
                d = np.zeros(space.dim)
                d[k] = sgn * eps
                a, b = p + d, q + d
                guess = v + (b - a) - (q - p)
                sols = [s for s in solve_bvp(space, a, b, extra_seeds=[guess]) if s.is_timelike()]
                if not sols:
                    unique = False
                    continue
                ref = max(sols, key=lambda s: s.length)
                for s in sols:
                    dev = geodesic_d_gamma(s, ref)
                    if dev > tol:
                        unique = False
                    worst_dev = max(worst_dev, dev)
    report = classify(space, base, classify_config)
    cont = fam.continuity
    continuous = bool(cont) and cont[-1] <= cont[0] and cont[-1] < 0.05 * max(1.0, base.length)
    return {
        "exists": fam.complete,
        "continuity": cont,
        "continuous": continuous,
        "unique": unique,
        "uniqueness_worst": worst_dev,
        "flags": report.flags,
        "family": fam.to_dict(),
    }
