"""Lorentzian pre-length spaces: time separation, relations, axiom audits."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DomainError",
    "PreLengthSpace",
    "AuditReport",
    "as_event",
    "chronological",
    "causal",
    "reverse_triangle_audit",
    "relation_audit",
    "space_from_descriptor",
]

TOL_CHRON = 1e-12


class DomainError(ValueError):
    """Coordinates outside the chart domain of a space."""


def as_event(space, x):
    """Validate ``x`` as an event of ``space`` and return it as a float array."""
    x = np.asarray(x, dtype=float)
    if x.shape != (space.dim,):
        raise DomainError(f"expected {space.dim} coordinates, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"non-finite coordinates {x}")
    if not space.in_domain(x):
        raise DomainError(f"{x} is outside the chart domain of {space.name}")
    return x


class PreLengthSpace:
    """A Lorentzian pre-length space (X, d, <<, <=, tau) realised on a chart.

    Subclasses provide ``time_sep``; relations are derived from it rather
    than stored. ``metric_d`` is the Euclidean chart distance unless
    overridden.
    """

    name = "abstract"
    tol_chron = TOL_CHRON

    def __init__(self, dim):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = int(dim)

    def in_domain(self, x):
        return True

    def metric_d(self, x, y):
        return float(np.linalg.norm(np.asarray(y, float) - np.asarray(x, float)))

    def time_sep(self, x, y):
        raise NotImplementedError

    def causal_query(self, x, y):
        """x <= y: equality, positive tau, or a causal straight chart segment."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if np.array_equal(x, y):
            return True
        if self.time_sep(x, y) > self.tol_chron:
            return True
        return self._segment_is_causal(x, y)

    def _segment_is_causal(self, x, y, samples=9):
        metric = getattr(self, "metric", None)
        if metric is None:
            return False
        d = y - x
        for s in np.linspace(0.0, 1.0, samples):
            g = metric(x + s * d)
            if d @ g @ d > 1e-12 * max(1.0, d @ d):
                return False
        return self.future_pointing(x, d)

    def future_pointing(self, x, v):
        # chart time coordinate is the first one for every shipped space
        return v[0] > 0

    def describe(self):
        return {"space": self.name, "dim": self.dim}

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()})"


def chronological(space, x, y, tol=None):
    """x << y, i.e. tau(x, y) exceeds the strict-positivity threshold."""
    x = as_event(space, x)
    y = as_event(space, y)
    tol = space.tol_chron if tol is None else tol
    return space.time_sep(x, y) > tol


def causal(space, x, y):
    x = as_event(space, x)
    y = as_event(space, y)
    return bool(space.causal_query(x, y))


@dataclass
class AuditReport:
    checked: int = 0
    violations: list = field(default_factory=list)
    worst_margin: float = math.inf

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {
            "checked": self.checked,
            "violations": len(self.violations),
            "worst_margin": None if math.isinf(self.worst_margin) else self.worst_margin,
        }


def reverse_triangle_audit(space, samples, tol=1e-12):
    """Check tau(x,z) + tol >= tau(x,y) + tau(y,z) over causally ordered triples.

    The margin of a triple is tau(x,z) - tau(x,y) - tau(y,z); the report keeps
    every triple whose margin is below -tol and the smallest margin seen.
    """
    pts = [np.asarray(s, float) for s in samples]
    m = len(pts)
    tau = np.zeros((m, m))
    rel = np.zeros((m, m), dtype=bool)
    for i in range(m):
        for j in range(m):
            tau[i, j] = space.time_sep(pts[i], pts[j])
            rel[i, j] = i == j or space.causal_query(pts[i], pts[j])
    report = AuditReport()
    for i, j, k in itertools.product(range(m), repeat=3):
        if not (rel[i, j] and rel[j, k]):
            continue
        if i == j or j == k:
            continue
        report.checked += 1
        lhs, rhs = tau[i, k], tau[i, j] + tau[j, k]
        if math.isinf(lhs):
            continue
        margin = lhs - rhs
        report.worst_margin = min(report.worst_margin, margin)
        if margin < -tol:
            report.violations.append((i, j, k, margin))
    return report


def relation_audit(space, samples):
    """Check tau>0 => x<<y => x<=y, tau vanishing off <=, and asymmetry of <<.

    Returns a list of human-readable failures (empty when all hold).
    """
    pts = [np.asarray(s, float) for s in samples]
    failures = []
    for i, x in enumerate(pts):
        if space.time_sep(x, x) != 0.0:
            failures.append(f"tau(x,x) != 0 at sample {i}")
        for j, y in enumerate(pts):
            if i == j:
                continue
            t = space.time_sep(x, y)
            le = space.causal_query(x, y)
            if t > space.tol_chron and not le:
                failures.append(f"tau>0 without x<=y at ({i},{j})")
            if t > space.tol_chron and space.time_sep(y, x) > 0:
                failures.append(f"tau positive both ways at ({i},{j})")
            if not le and t != 0.0:
                failures.append(f"tau nonzero off the causal relation at ({i},{j})")
    return failures


def space_from_descriptor(desc):
    """Build a concrete space from a JSON-style descriptor.

    ``{"space": "minkowski", "dim": 2}``, ``{"space": "model_k", "K": -1, "dim": 2}``
    or ``{"space": "product", "fiber": "sphere"|"ellipsoid"|"flat", ...}``.
    """
    from .model import ModelSpace
    from .spacetimes import ProductSpacetime

    if not isinstance(desc, dict) or "space" not in desc:
        raise ValueError("descriptor must be an object with a 'space' key")
    kind = desc["space"]
    dim = int(desc.get("dim", 2))
    if kind == "minkowski":
        return ModelSpace(0.0, dim)
    if kind == "model_k":
        if "K" not in desc:
            raise ValueError("model_k descriptor needs 'K'")
        return ModelSpace(float(desc["K"]), dim)
    if kind == "product":
        fiber = desc.get("fiber", "flat")
        if fiber == "flat":
            return ProductSpacetime.flat(dim - 1)
        if fiber == "sphere":
            return ProductSpacetime.sphere(float(desc.get("radius", 1.0)))
        if fiber == "ellipsoid":
            return ProductSpacetime.spheroid(float(desc.get("a", 1.0)), float(desc.get("b", 0.6)))
        raise ValueError(f"unknown fiber {fiber!r}")
    raise ValueError(f"unknown space kind {kind!r}")
