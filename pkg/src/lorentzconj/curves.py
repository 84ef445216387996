"""Sampled causal curves, tau-length by partitions and curve classes."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ClassificationError",
    "DegenerateCurveError",
    "SampledCurve",
    "CurveClass",
    "TauLength",
    "tau_length",
    "partition_sum",
    "classify_character",
    "is_maximizer",
    "canonicalize",
    "l_g_length",
    "read_curve_csv",
    "write_curve_csv",
]

MIN_GAP = 1e-12


class ClassificationError(ValueError):
    """The curve does not have the causal character an operation needs."""


class DegenerateCurveError(ValueError):
    """Consecutive samples coincide, so the curve is not nowhere constant."""


class SampledCurve:
    """A curve known at a strictly increasing parameter grid in [0, 1].

    ``func`` optionally evaluates the exact curve at any parameter and is used
    for refinement; otherwise values between samples are chart-linear.
    """

    def __init__(self, params, points, space=None, func=None, interpolation=None):
        params = np.asarray(params, dtype=float)
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if params.ndim != 1 or params.shape[0] != points.shape[0]:
            raise ValueError("params and points must have matching length")
        if params.shape[0] < 2:
            raise ValueError("a curve needs at least two samples")
        if np.any(np.diff(params) <= 0):
            raise ValueError("params must be strictly increasing")
        if params[0] < -1e-12 or params[-1] > 1 + 1e-12:
            raise ValueError("params must lie in [0, 1]")
        self.params = params
        self.points = points
        self.space = space
        self.func = func
        self.interpolation = interpolation or ("exact" if func is not None else "chart-linear")
        gaps = self.segment_lengths()
        if np.any(gaps <= MIN_GAP):
            i = int(np.argmin(gaps))
            raise DegenerateCurveError(f"samples {i} and {i + 1} coincide (gap {gaps[i]:.3g})")

    @classmethod
    def from_function(cls, func, n=65, space=None, params=None):
        params = np.linspace(0.0, 1.0, n) if params is None else np.asarray(params, float)
        pts = np.array([np.atleast_1d(func(s)) for s in params], dtype=float)
        return cls(params, pts, space=space, func=func)

    @classmethod
    def polyline(cls, vertices, space=None, samples_per_edge=1):
        """Chart-linear polyline through ``vertices`` with uniform params per edge."""
        v = np.asarray(vertices, dtype=float)
        k = samples_per_edge
        pts = [v[0]]
        for a, b in zip(v[:-1], v[1:]):
            for j in range(1, k + 1):
                pts.append(a + (b - a) * j / k)
        pts = np.array(pts)
        params = np.linspace(0.0, 1.0, len(pts))
        return cls(params, pts, space=space)

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    def segment_lengths(self):
        d = np.diff(self.points, axis=0)
        if self.space is None or _euclidean(self.space):
            return np.sqrt(np.sum(d * d, axis=1))
        return np.array([self.space.metric_d(a, b) for a, b in zip(self.points[:-1], self.points[1:])])

    def at(self, s):
        s = float(s)
        if self.func is not None:
            return np.atleast_1d(np.asarray(self.func(s), float))
        return np.array([np.interp(s, self.params, self.points[:, k]) for k in range(self.dim)])

    def sample(self, params):
        params = np.asarray(params, float)
        if self.func is not None:
            return np.array([self.at(s) for s in params])
        return np.column_stack([np.interp(params, self.params, self.points[:, k]) for k in range(self.dim)])

    def refined(self):
        """Insert the midpoint of every parameter interval."""
        mids = 0.5 * (self.params[:-1] + self.params[1:])
        params = np.empty(2 * len(self.params) - 1)
        params[0::2] = self.params
        params[1::2] = mids
        if self.func is not None:
            mid_pts = np.array([self.at(s) for s in mids])
        else:
            mid_pts = 0.5 * (self.points[:-1] + self.points[1:])
        pts = np.empty((params.size, self.dim))
        pts[0::2] = self.points
        pts[1::2] = mid_pts
        return SampledCurve(params, pts, space=self.space, func=self.func, interpolation=self.interpolation)

    def reparametrized(self, phi):
        """The curve c o phi^{-1}: same points at new params phi(params)."""
        new = np.asarray([phi(s) for s in self.params], float)
        return SampledCurve(new, self.points, space=self.space, interpolation=self.interpolation)

    def restricted(self, i, j):
        """Samples i..j (inclusive) rescaled to [0, 1]."""
        p = self.params[i : j + 1]
        p = (p - p[0]) / (p[-1] - p[0])
        return SampledCurve(p, self.points[i : j + 1], space=self.space, interpolation=self.interpolation)

    def mesh(self):
        return float(np.max(self.segment_lengths()))

    def lipschitz_constant(self):
        """Empirical Lipschitz constant w.r.t. d; blow-ups show up as large values."""
        return float(np.max(self.segment_lengths() / np.diff(self.params)))


def _euclidean(space):
    from .space import PreLengthSpace

    return type(space).metric_d is PreLengthSpace.metric_d


@dataclass(frozen=True)
class TauLength:
    value: float
    gap: float

    def __float__(self):
        return self.value


def partition_sum(space, points):
    return float(sum(space.time_sep(a, b) for a, b in zip(points[:-1], points[1:])))


def _require_causal(c):
    if c.space is None:
        raise ClassificationError("curve has no space attached")
    for i, (a, b) in enumerate(zip(c.points[:-1], c.points[1:])):
        if not c.space.causal_query(a, b):
            raise ClassificationError(f"samples {i} -> {i + 1} are not causally related")


def tau_length(c, check=True):
    """Partition approximation of L_tau with a refinement-gap estimate.

    By the reverse triangle inequality partition sums only decrease under
    refinement, so the finest-grid sum is an upper bound; ``gap`` is the drop
    from the every-other-node sub-partition to the full grid.
    """
    if check:
        _require_causal(c)
    taus = np.array([c.space.time_sep(a, b) for a, b in zip(c.points[:-1], c.points[1:])])
    fine = float(np.sum(taus))
    if len(c) < 3:
        return TauLength(fine, 0.0)
    idx = list(range(0, len(c), 2))
    if idx[-1] != len(c) - 1:
        idx.append(len(c) - 1)
    coarse = partition_sum(c.space, c.points[idx])
    return TauLength(fine, max(coarse - fine, 0.0))


def classify_character(c, tol=1e-12):
    """'timelike', 'null' or 'causal-mixed' from consecutive-sample time separations.

    Consecutive pairs suffice because << and <= are transitive.
    """
    _require_causal(c)
    taus = np.array([c.space.time_sep(a, b) for a, b in zip(c.points[:-1], c.points[1:])])
    if np.all(taus > tol):
        return "timelike"
    if np.all(taus <= tol):
        return "null"
    return "causal-mixed"


def is_maximizer(c, tol=1e-9):
    length = tau_length(c).value
    return abs(length - c.space.time_sep(c.start, c.end)) <= tol


class CurveClass:
    """Equivalence class of a curve, stored as its d-arclength representative."""

    def __init__(self, canonical):
        self.canonical = canonical

    @property
    def points(self):
        return self.canonical.points

    @property
    def space(self):
        return self.canonical.space

    def sample(self, m):
        return self.canonical.sample(np.linspace(0.0, 1.0, m))

    def __len__(self):
        return len(self.canonical)


def canonicalize(c):
    """Reparametrize proportionally to d-arclength on [0, 1]."""
    if isinstance(c, CurveClass):
        c = c.canonical
    seg = c.segment_lengths()
    if np.any(seg <= MIN_GAP):
        raise DegenerateCurveError("repeated consecutive points")
    s = np.concatenate([[0.0], np.cumsum(seg)])
    s /= s[-1]
    s[-1] = 1.0
    return CurveClass(SampledCurve(s, c.points, space=c.space, interpolation=c.interpolation))


def l_g_length(c, spacetime, tol=1e-12):
    """Integral of sqrt(-g(c', c')) for the chart-linear interpolant (midpoint rule)."""
    total = 0.0
    for i, (a, b) in enumerate(zip(c.points[:-1], c.points[1:])):
        d = b - a
        g = spacetime.metric(0.5 * (a + b))
        q = float(d @ g @ d)
        if q > tol * max(1.0, float(d @ d)):
            raise ClassificationError(f"spacelike velocity on segment {i}")
        total += math.sqrt(max(-q, 0.0))
    return total


def read_curve_csv(path, space=None):
    """Read a curve file with header ``t,x1,...,x_dim`` (t is the curve parameter)."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    header, body = rows[0], rows[1:]
    if header[0].strip() != "t":
        raise ValueError(f"{path}: first column must be 't'")
    data = np.array([[float(v) for v in r] for r in body])
    t = data[:, 0]
    if len(t) < 2 or np.any(np.diff(t) <= 0):
        raise ValueError(f"{path}: column 't' must be strictly increasing")
    # parameter interval is immaterial for curve classes; rescale to [0, 1]
    s = (t - t[0]) / (t[-1] - t[0])
    s[-1] = 1.0
    return SampledCurve(s, data[:, 1:], space=space)


def write_curve_csv(path, curve):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"x{k + 1}" for k in range(curve.dim)])
        for s, p in zip(curve.params, curve.points):
            w.writerow([repr(float(s))] + [repr(float(v)) for v in p])
