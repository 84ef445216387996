"""Fréchet distance on classes of nowhere-constant curves, and d_Gamma."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy.spatial.distance import cdist

from .curves import CurveClass, SampledCurve, tau_length

__all__ = [
    "IncompatibleSpacesError",
    "MonotoneCoupling",
    "ParamPath",
    "RefineResult",
    "discrete_frechet",
    "d_gamma",
    "normalize_monotone",
    "frechet_refine",
]


class IncompatibleSpacesError(ValueError):
    """Curves live over different ground metrics."""


@dataclass(frozen=True)
class MonotoneCoupling:
    """Index pairs (i, j) from (0, 0) to (N, M); each step advances i, j or both by one."""

    pairs: tuple

    def is_valid(self, n, m):
        if self.pairs[0] != (0, 0) or self.pairs[-1] != (n, m):
            return False
        for (i0, j0), (i1, j1) in zip(self.pairs[:-1], self.pairs[1:]):
            di, dj = i1 - i0, j1 - j0
            if (di, dj) not in ((1, 0), (0, 1), (1, 1)):
                return False
        return True


@numba.njit(cache=True)
def _dfd_table(dist):
    p, q = dist.shape
    ret = np.empty((p, q))
    ret[0, 0] = dist[0, 0]
    for i in range(1, p):
        ret[i, 0] = max(ret[i - 1, 0], dist[i, 0])
    for j in range(1, q):
        ret[0, j] = max(ret[0, j - 1], dist[0, j])
    for i in range(1, p):
        for j in range(1, q):
            ret[i, j] = max(min(ret[i - 1, j], ret[i, j - 1], ret[i - 1, j - 1]), dist[i, j])
    return ret


def _points_and_space(c):
    if isinstance(c, CurveClass):
        return c.canonical.points, c.canonical.space
    if isinstance(c, SampledCurve):
        return c.points, c.space
    return np.asarray(c, float), None


def _same_space(sa, sb):
    if sa is None or sb is None or sa is sb:
        return True
    return sa.describe() == sb.describe()


def _distance_matrix(P, Q, space):
    from .curves import _euclidean

    if space is None or _euclidean(space):
        return cdist(P, Q)
    return np.array([[space.metric_d(a, b) for b in Q] for a in P])


def _backtrack(table):
    i, j = table.shape[0] - 1, table.shape[1] - 1
    path = [(i, j)]
    while (i, j) != (0, 0):
        cands = []
        if i > 0 and j > 0:
            cands.append((table[i - 1, j - 1], (i - 1, j - 1)))
        if i > 0:
            cands.append((table[i - 1, j], (i - 1, j)))
        if j > 0:
            cands.append((table[i, j - 1], (i, j - 1)))
        i, j = min(cands, key=lambda c: c[0])[1]
        path.append((i, j))
    return MonotoneCoupling(tuple(reversed(path)))


def discrete_frechet(a, b, return_coupling=False):
    """Minimum over monotone couplings of the maximum coupled d-distance.

    Accepts curve classes, sampled curves or raw point arrays. The value
    upper-bounds the continuous Fréchet distance of the chart-linear
    interpolants and exceeds it by at most the larger mesh width.
    """
    P, sa = _points_and_space(a)
    Q, sb = _points_and_space(b)
    if len(P) == 0 or len(Q) == 0:
        raise ValueError("curves must not be empty")
    if not _same_space(sa, sb):
        raise IncompatibleSpacesError(f"{sa!r} vs {sb!r}")
    if P.shape[1] != Q.shape[1]:
        raise IncompatibleSpacesError("curves have different dimensions")
    table = _dfd_table(np.ascontiguousarray(_distance_matrix(P, Q, sa or sb)))
    value = float(table[-1, -1])
    if return_coupling:
        return value, _backtrack(table)
    return value


def d_gamma(a, b, length_a=None, length_b=None):
    """d_F plus the discrepancy of tau-lengths.

    Known lengths (for instance L_g of an integrated geodesic) may be passed
    in; otherwise partition tau-lengths are computed on the samples.
    """
    la = tau_length(_as_curve(a)).value if length_a is None else float(length_a)
    lb = tau_length(_as_curve(b)).value if length_b is None else float(length_b)
    return discrete_frechet(a, b) + abs(la - lb)


def _as_curve(c):
    return c.canonical if isinstance(c, CurveClass) else c


@dataclass(frozen=True)
class ParamPath:
    """Sampled pair (phi, psi) of non-decreasing maps on the grid ``u``."""

    u: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        for name in ("u", "phi", "psi"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), float))
        if not (self.u.shape == self.phi.shape == self.psi.shape):
            raise ValueError("u, phi, psi must share a shape")
        if np.any(np.diff(self.u) <= 0):
            raise ValueError("u must be strictly increasing")
        if np.any(np.diff(self.phi) < 0) or np.any(np.diff(self.psi) < 0):
            raise ValueError("phi and psi must be non-decreasing")
        if not (self.phi[0] == self.psi[0] == 0.0 and self.phi[-1] == self.psi[-1] == 1.0):
            raise ValueError("endpoints must be pinned to (0,0) and (1,1)")

    @property
    def image(self):
        return np.column_stack([self.phi, self.psi])

    def __call__(self, u):
        return np.column_stack([np.interp(u, self.u, self.phi), np.interp(u, self.u, self.psi)])


def normalize_monotone(alpha, extra=0):
    """Reparametrize by the left-continuous inverse of s = phi + psi.

    The result lives on [0, 2], has the same image, and is 1-Lipschitz in
    the sum norm (exactly: |d phi| + |d psi| = du). The output grid is the set
    of values s(t_k) (plateaus of s collapse to one node) plus ``extra``
    uniformly spaced values.
    """
    s = alpha.phi + alpha.psi
    knots = np.unique(s)
    if extra:
        knots = np.unique(np.concatenate([knots, np.linspace(0.0, 2.0, extra)]))
    # drop rounding-level duplicates (they would make the Lipschitz ratio meaningless)
    keep = np.concatenate([[True], np.diff(knots) > 1e-12])
    keep[-1] = True
    knots = knots[keep]
    if len(knots) > 2 and knots[-1] - knots[-2] <= 1e-12:
        knots = np.delete(knots, -2)
    # theta(u) = inf{t : s(t) >= u} for piecewise-linear s
    t_of_u = np.empty_like(knots)
    for k, u in enumerate(knots):
        i = int(np.searchsorted(s, u, side="left"))
        if i == 0:
            t_of_u[k] = alpha.u[0]
        elif s[i] == u:
            t_of_u[k] = alpha.u[i]
        else:
            w = (u - s[i - 1]) / (s[i] - s[i - 1])
            t_of_u[k] = alpha.u[i - 1] + w * (alpha.u[i] - alpha.u[i - 1])
    phi = np.interp(t_of_u, alpha.u, alpha.phi)
    psi = np.interp(t_of_u, alpha.u, alpha.psi)
    phi[0] = psi[0] = 0.0
    phi[-1] = psi[-1] = 1.0
    return ParamPath(knots, np.maximum.accumulate(phi), np.maximum.accumulate(psi))


@dataclass(frozen=True)
class RefineResult:
    value: float
    certified_gap: float
    converged: bool
    iterations: int

    def to_dict(self):
        return {
            "value": self.value,
            "certified_gap": self.certified_gap,
            "converged": self.converged,
            "iterations": self.iterations,
        }


def frechet_refine(a, b, target_gap=1e-4, max_iter=12):
    """Bisect both sample grids until successive DP values differ by <= target_gap."""
    a = _as_curve(a)
    b = _as_curve(b)
    prev = discrete_frechet(a, b)
    gap = np.inf
    for it in range(1, max_iter + 1):
        a, b = a.refined(), b.refined()
        val = discrete_frechet(a, b)
        gap = abs(prev - val)
        prev = val
        if gap <= target_gap:
            return RefineResult(val, gap, True, it)
    return RefineResult(prev, gap, False, max_iter)
