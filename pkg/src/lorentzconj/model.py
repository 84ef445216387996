"""Constant-curvature model spacetimes: Minkowski, de Sitter and anti-de Sitter covers.

Charts
------
K = 0
    Cartesian (t, x_1, ..., x_{n-1}), g = -dt^2 + dx^2.
K < 0 (universal cover of anti-de Sitter, radius R = 1/sqrt(-K))
    Global (t, x) with t in R covering the time circle. The embedding into
    R^{2,n-1} (b = -X0^2 - X1^2 + |Xs|^2, quadric b = -R^2) is
    X = (w cos(t/R), w sin(t/R), x) with w = sqrt(R^2 + |x|^2). Then
    g = -(1 + |x|^2/R^2) dt^2 + dx^2 - (x.dx)^2/(R^2 + |x|^2).
K > 0 (de Sitter, dimension 2 only, universal cover)
    (t, x) with x in R covering the spatial circle,
    X = (R sinh(t/R), R cosh(t/R) cos(x/R), R cosh(t/R) sin(x/R)) in R^{1,2},
    g = -dt^2 + cosh(t/R)^2 dx^2.

In all charts the t-axis is a unit-speed timelike geodesic through the
origin, where g is the Minkowski metric.
"""

from __future__ import annotations

import math

import numpy as np
import sympy as sp

from .spacetimes import SmoothSpacetime

__all__ = ["ModelSpace", "OracleFailure", "timelike_diameter", "tau_model", "model_geodesic", "model_tau_oracle"]


class OracleFailure(RuntimeError):
    """No connecting timelike geodesic was found by shooting."""


def _metric_expr(K, dim):
    syms = sp.symbols("t " + " ".join(f"x{i}" for i in range(1, dim)))
    t, xs = syms[0], list(syms[1:])
    if K == 0:
        return syms, sp.diag(-1, *([1] * (dim - 1)))
    R2 = sp.nsimplify(1 / abs(K))
    if K < 0:
        r2 = sum(x**2 for x in xs)
        g = sp.zeros(dim, dim)
        g[0, 0] = -(1 + r2 / R2)
        for i, xi in enumerate(xs, start=1):
            for j, xj in enumerate(xs, start=1):
                g[i, j] = (1 if i == j else 0) - xi * xj / (R2 + r2)
        return syms, g
    if dim != 2:
        raise ValueError("de Sitter model is provided in dimension 2 only")
    R = sp.sqrt(R2)
    return syms, sp.diag(-1, sp.cosh(t / R) ** 2)


class ModelSpace(SmoothSpacetime):
    """L^2(K) and its n-dimensional analogue with closed-form geometry."""

    def __init__(self, K=0.0, dim=2):
        K = float(K)
        dim = int(dim)
        if dim < 2:
            raise ValueError("model spaces need dim >= 2")
        coords, g = _metric_expr(K, dim)
        super().__init__(coords, g, name="minkowski" if K == 0 else "model_k")
        self.K = K
        self.R = math.inf if K == 0 else 1.0 / math.sqrt(abs(K))
        self.signature_index = 1
        self.chart = {0: "cartesian"}.get(int(np.sign(K)), "global-cover")
        self.convexity_window = 0.5 * self.timelike_diameter if K < 0 else None

    # -- basic invariants -------------------------------------------------
    @property
    def timelike_diameter(self):
        return timelike_diameter(self.K)

    def b(self, v, w):
        """Inner product of the flat ambient / tangent space with signature (-,+,...)."""
        v = np.asarray(v, float)
        w = np.asarray(w, float)
        if self.K < 0:
            return float(-v[0] * w[0] - v[1] * w[1] + v[2:] @ w[2:])
        return float(-v[0] * w[0] + v[1:] @ w[1:])

    def describe(self):
        if self.K == 0:
            return {"space": "minkowski", "dim": self.dim}
        return {"space": "model_k", "K": self.K, "dim": self.dim}

    # -- embedding --------------------------------------------------------
    def embed(self, x):
        x = np.asarray(x, float)
        if self.K == 0:
            return x.copy()
        R = self.R
        if self.K < 0:
            w = math.sqrt(R * R + x[1:] @ x[1:])
            return np.concatenate([[w * math.cos(x[0] / R), w * math.sin(x[0] / R)], x[1:]])
        return np.array(
            [
                R * math.sinh(x[0] / R),
                R * math.cosh(x[0] / R) * math.cos(x[1] / R),
                R * math.cosh(x[0] / R) * math.sin(x[1] / R),
            ]
        )

    def embed_jacobian(self, x):
        x = np.asarray(x, float)
        n = self.dim
        if self.K == 0:
            return np.eye(n)
        R = self.R
        if self.K < 0:
            y = x[1:]
            w = math.sqrt(R * R + y @ y)
            c, s = math.cos(x[0] / R), math.sin(x[0] / R)
            J = np.zeros((n + 1, n))
            J[0, 0], J[1, 0] = -w * s / R, w * c / R
            J[0, 1:], J[1, 1:] = y / w * c, y / w * s
            J[2:, 1:] = np.eye(n - 1)
            return J
        ch, sh = math.cosh(x[0] / R), math.sinh(x[0] / R)
        c, s = math.cos(x[1] / R), math.sin(x[1] / R)
        return np.array([[ch, 0.0], [sh * c, -ch * s], [sh * s, ch * c]])

    def chart_point(self, X, ref_t=0.0, ref_x=None):
        """Chart coordinates of an embedded point, choosing the cover lift nearest the reference."""
        X = np.asarray(X, float)
        if self.K == 0:
            return X.copy()
        R = self.R
        if self.K < 0:
            ang = math.atan2(X[1], X[0])
            base = ref_t / R
            ang += 2 * math.pi * round((base - ang) / (2 * math.pi))
            return np.concatenate([[R * ang], X[2:]])
        t = R * math.asinh(X[0] / R)
        ang = math.atan2(X[2], X[1])
        base = (0.0 if ref_x is None else ref_x) / R
        ang += 2 * math.pi * round((base - ang) / (2 * math.pi))
        return np.array([t, R * ang])

    def chart_velocity(self, x, V):
        J = self.embed_jacobian(x)
        v, *_ = np.linalg.lstsq(J, np.asarray(V, float), rcond=None)
        return v

    def _accel_coeff(self, V):
        # X'' = kappa X on the quadric
        if self.K < 0:
            return self.b(V, V) / self.R**2
        return -self.b(V, V) / self.R**2

    # -- closed forms -----------------------------------------------------
    def causal_query(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if np.array_equal(x, y):
            return True
        return self._cone_margin(x, y) >= -1e-12

    def _cone_margin(self, x, y):
        """Signed slack of the causal condition (>= 0 iff y in J^+(x))."""
        if self.K == 0:
            d = y - x
            return d[0] - float(np.linalg.norm(d[1:]))
        R = self.R
        if self.K < 0:
            return (y[0] - x[0]) / R - self._sphere_dist(x, y)
        eta = lambda t: 2.0 * math.atan(math.tanh(t / (2 * R)))  # noqa: E731
        return eta(y[0]) - eta(x[0]) - abs(y[1] - x[1]) / R

    def _conformal_dir(self, x):
        v = np.concatenate([[self.R], x[1:]])
        return v / np.linalg.norm(v)

    def _sphere_dist(self, x, y):
        c = float(self._conformal_dir(x) @ self._conformal_dir(y))
        return math.acos(max(-1.0, min(1.0, c)))

    def refocus_point(self, x):
        """Common endpoint of all timelike geodesics from x at proper time D_K (K < 0)."""
        if self.K >= 0:
            raise ValueError("refocusing only occurs for K < 0")
        x = np.asarray(x, float)
        return np.concatenate([[x[0] + math.pi * self.R], -x[1:]])

    def time_sep(self, x, y):
        return tau_model(self, x, y)

    def log(self, x, y):
        """Chart velocity v at x with model_geodesic(x, v, 1) = y, for y in the causal diamond of x."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if self.K == 0:
            return y - x
        tau = tau_model(self, x, y)
        if math.isinf(tau):
            raise ValueError("no geodesic: y lies beyond the refocusing diamond of x")
        P, Q = self.embed(x), self.embed(y)
        th = tau / self.R
        if self.K < 0:
            fac = 1.0 if th < 1e-8 else th / math.sin(th)
            V = (Q - P * math.cos(th)) * fac
        else:
            fac = 1.0 if th < 1e-8 else th / math.sinh(th)
            V = (Q - P * math.cosh(th)) * fac
        return self.chart_velocity(x, V)


def timelike_diameter(K):
    """pi / sqrt(-K) for K < 0 and infinity otherwise."""
    K = float(K)
    return math.pi / math.sqrt(-K) if K < 0 else math.inf


def tau_model(space, x, y):
    """Closed-form time separation of a model space.

    For K < 0, points of J^+(x) inside the diamond bounded by x and its
    refocusing point are joined by timelike geodesics and
    tau = 2R asin(sqrt(-b(X-Y, X-Y)) / (2R)); the rest of J^+(x) has
    tau = +inf because causal curves can linger near the conformal boundary.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    K = space.K
    if K == 0:
        d = y - x
        s = d[0] * d[0] - d[1:] @ d[1:]
        return math.sqrt(s) if d[0] > 0 and s > 0 else 0.0
    if space._cone_margin(x, y) <= 0.0:
        return 0.0
    R = space.R
    D = space.embed(y) - space.embed(x)
    q = -space.b(D, D)
    if K < 0:
        star = space.refocus_point(x)
        inside = (star[0] - y[0]) / R - space._sphere_dist(y, star) >= -1e-12
        if not inside:
            return math.inf
        s = min(1.0, math.sqrt(max(q, 0.0)) / (2 * R))
        return 2 * R * math.asin(s)
    return 2 * R * math.asinh(math.sqrt(max(q, 0.0)) / (2 * R))


def model_geodesic(space, p, v, t, return_velocity=False):
    """Point (and optionally velocity) at parameter t of the geodesic with data (p, v).

    Closed form on the quadric, X(s) = P c(s) + V s(s); the cover lift is
    tracked continuously along the path.
    """
    p = np.asarray(p, float)
    v = np.asarray(v, float)
    if space.K == 0:
        return (p + t * v, v.copy()) if return_velocity else p + t * v
    P = space.embed(p)
    V = space.embed_jacobian(p) @ v
    kappa = space._accel_coeff(V)

    def flow(s):
        if kappa < 0:
            w = math.sqrt(-kappa)
            X = P * math.cos(w * s) + V * math.sin(w * s) / w
            dX = -P * w * math.sin(w * s) + V * math.cos(w * s)
        elif kappa > 0:
            w = math.sqrt(kappa)
            X = P * math.cosh(w * s) + V * math.sinh(w * s) / w
            dX = P * w * math.sinh(w * s) + V * math.cosh(w * s)
        else:
            X = P + V * s
            dX = V
        return X, dX

    # lift: follow the point along the path so angular jumps stay small
    n = 16
    while True:
        ss = np.linspace(0.0, t, n + 1)
        x = p.copy()
        ok = True
        for s in ss[1:]:
            X, _ = flow(s)
            nxt = space.chart_point(X, ref_t=x[0], ref_x=x[1] if space.K > 0 else None)
            if space.K < 0 and abs(nxt[0] - x[0]) > 0.5 * math.pi * space.R:
                ok = False
                break
            if space.K > 0 and abs(nxt[1] - x[1]) > 0.5 * math.pi * space.R:
                ok = False
                break
            x = nxt
        if ok or n > 1 << 16:
            break
        n *= 4
    if not return_velocity:
        return x
    _, dX = flow(t)
    return x, space.chart_velocity(x, dX)


def model_tau_oracle(space, x, y, seeds=8):
    """Time separation by shooting: the longest timelike geodesic from x to y.

    Uses numerical integration of the geodesic equation in the chart, so it
    shares no formula with ``tau_model``.
    """
    from .geodesic import solve_bvp

    sols = [s for s in solve_bvp(space, x, y, seeds=seeds) if s.is_timelike()]
    if not sols:
        raise OracleFailure(f"no timelike geodesic from {x} to {y}")
    return max(s.length for s in sols)
