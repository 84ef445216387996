"""Smooth spacetimes given by a symbolic metric on a single chart."""

from __future__ import annotations

import numpy as np
import sympy as sp

from ._codegen import build_kernels
from .space import PreLengthSpace

__all__ = ["SmoothSpacetime", "ProductSpacetime", "christoffel_fd"]

_KERNEL_CACHE = {}


def _kernels_for(coords, g):
    key = (tuple(str(c) for c in coords), sp.srepr(sp.Matrix(g)))
    if key not in _KERNEL_CACHE:
        _KERNEL_CACHE[key] = build_kernels(coords, g)
    return _KERNEL_CACHE[key]


class SmoothSpacetime(PreLengthSpace):
    """Spacetime (M, g) with g of signature (-,+,...,+) on a box chart.

    Christoffel symbols and their derivatives are derived in closed form from
    the symbolic metric. ``time_sep`` defaults to maximising the length over
    the connecting geodesics found by shooting; subclasses with a closed form
    override it.
    """

    name = "smooth"

    def __init__(self, coords, metric, lo=None, hi=None, name=None, convexity_window=None):
        coords = list(coords)
        super().__init__(len(coords))
        self.coords = coords
        self.metric_expr = sp.Matrix(metric)
        self.kernels = _kernels_for(coords, self.metric_expr)
        n = self.dim
        self.lo = np.full(n, -1e12) if lo is None else np.asarray(lo, float)
        self.hi = np.full(n, 1e12) if hi is None else np.asarray(hi, float)
        if name is not None:
            self.name = name
        # parameter length below which geodesic segments are maximizing
        self.convexity_window = convexity_window

    def in_domain(self, x):
        x = np.asarray(x, float)
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi))

    def metric(self, x):
        out = np.empty((self.dim, self.dim))
        self.kernels.metric(np.ascontiguousarray(x, dtype=float), out)
        return out

    def christoffel(self, x):
        n = self.dim
        out = np.empty((n, n, n))
        self.kernels.christoffel(np.ascontiguousarray(x, dtype=float), out)
        return out

    def inner(self, x, v, w):
        return float(np.asarray(v, float) @ self.metric(x) @ np.asarray(w, float))

    def norm2(self, x, v):
        return self.inner(x, v, v)

    def is_timelike(self, x, v, tol=1e-12):
        return self.norm2(x, v) < -tol

    def time_sep(self, x, y):
        from .geodesic import bvp_time_sep

        return bvp_time_sep(self, x, y)

    def orthonormal_frame(self, x):
        """Columns e_0..e_{n-1}: e_0 future timelike unit, the rest spacelike unit."""
        g = self.metric(x)
        n = self.dim
        basis = np.eye(n)
        frame = []
        for k in range(n):
            v = basis[:, k].copy()
            for e in frame:
                ee = e @ g @ e
                v = v - (v @ g @ e) / ee * e
            nrm = v @ g @ v
            v = v / np.sqrt(abs(nrm))
            if k == 0 and v[0] < 0:
                v = -v
            frame.append(v)
        return np.column_stack(frame)


def christoffel_fd(metric_fn, x, h=1e-5):
    """Christoffel symbols from central differences of ``metric_fn`` with a Richardson step."""
    x = np.asarray(x, float)
    n = x.size

    def dmetric(step):
        out = np.empty((n, n, n))
        for d in range(n):
            e = np.zeros(n)
            e[d] = step
            out[:, :, d] = (metric_fn(x + e) - metric_fn(x - e)) / (2 * step)
        return out

    d1 = dmetric(h)
    d2 = dmetric(h / 2)
    dg = (4 * d2 - d1) / 3  # dg[b, c, d] = d_d g_bc
    ginv = np.linalg.inv(metric_fn(x))
    # lower[d, b, c] = 1/2 (d_c g_db + d_b g_dc - d_d g_bc)
    lower = 0.5 * (
        np.einsum("dbc->dbc", dg)  # d_c g_db
        + np.einsum("dcb->dbc", dg)  # d_b g_dc
        - np.einsum("bcd->dbc", dg)  # d_d g_bc
    )
    return np.einsum("ad,dbc->abc", ginv, lower)


class ProductSpacetime(SmoothSpacetime):
    """M = R x N with g = -dt^2 + h for a Riemannian surface or flat fibre N.

    Chart: (t, fibre coordinates). For the sphere and spheroid the fibre chart
    is (beta, lam) with beta the (parametric) latitude, so
    h = E(beta) dbeta^2 + G(beta) dlam^2.
    """

    name = "product"

    def __init__(self, fiber, coords, metric, lo=None, hi=None, params=None):
        super().__init__(coords, metric, lo=lo, hi=hi, name="product")
        self.fiber = fiber
        self.params = dict(params or {})

    @classmethod
    def flat(cls, k=1):
        syms = sp.symbols("t " + " ".join(f"x{i}" for i in range(k)))
        g = sp.diag(-1, *([1] * k))
        return cls("flat", syms, g, params={"k": k})

    @classmethod
    def sphere(cls, radius=1.0):
        t, beta, lam = sp.symbols("t beta lam")
        r = sp.nsimplify(radius)
        g = sp.diag(-1, r**2, r**2 * sp.cos(beta) ** 2)
        lim = np.pi / 2 - 1e-3
        return cls(
            "sphere", (t, beta, lam), g, lo=[-1e12, -lim, -1e12], hi=[1e12, lim, 1e12], params={"radius": radius}
        )

    @classmethod
    def spheroid(cls, a=1.0, b=0.6):
        """Ellipsoid of revolution with equatorial radius a and polar radius b."""
        t, beta, lam = sp.symbols("t beta lam")
        A, B = sp.nsimplify(a), sp.nsimplify(b)
        g = sp.diag(-1, A**2 * sp.sin(beta) ** 2 + B**2 * sp.cos(beta) ** 2, A**2 * sp.cos(beta) ** 2)
        lim = np.pi / 2 - 1e-3
        return cls(
            "ellipsoid", (t, beta, lam), g, lo=[-1e12, -lim, -1e12], hi=[1e12, lim, 1e12], params={"a": a, "b": b}
        )

    def time_sep(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if self.fiber == "flat":
            d = y - x
            s = d[0] ** 2 - d[1:] @ d[1:]
            return float(np.sqrt(s)) if d[0] > 0 and s > 0 else 0.0
        if self.fiber == "sphere":
            dt = y[0] - x[0]
            r = self.params["radius"]
            c = np.sin(x[1]) * np.sin(y[1]) + np.cos(x[1]) * np.cos(y[1]) * np.cos(y[2] - x[2])
            dist = r * float(np.arccos(np.clip(c, -1.0, 1.0)))
            s = dt * dt - dist * dist
            return float(np.sqrt(s)) if dt > 0 and s > 0 else 0.0
        return super().time_sep(x, y)

    def describe(self):
        d = {"space": "product", "fiber": self.fiber, "dim": self.dim}
        d.update(self.params)
        return d
