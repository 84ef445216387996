"""Geodesics on smooth spacetimes: integration, shooting and maximality checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._integrate import STATUS_EXIT, STATUS_MAXSTEPS, STATUS_OK, STATUS_UNDERFLOW
from ._pool import ordered_map
from .curves import SampledCurve, tau_length
from .frechet import discrete_frechet
from .space import DomainError

__all__ = [
    "IntegratorError",
    "DegenerateInputError",
    "GeodesicSolution",
    "integrate_geodesic",
    "exp_map",
    "solve_bvp",
    "bvp_time_sep",
    "geodesic_d_gamma",
    "converging_family",
    "local_maximizer_check",
    "ConvergenceReport",
    "convergence_experiment",
    "DEDUP_TOL",
]

RTOL = 1e-12
ATOL = 1e-13
MAX_STEPS = 200_000
SHOOT_STEPS = 4_000
DEDUP_TOL = 1e-4
NORM_DRIFT_TOL = 1e-8


class IntegratorError(RuntimeError):
    """Step-size underflow or step budget exhausted."""


class DegenerateInputError(ValueError):
    """Boundary value problem with coinciding endpoints."""


def _state0(p, v):
    return np.ascontiguousarray(np.concatenate([p, v]), dtype=float)


def _run(st, y0, t1, variational=False, n_err=0, max_steps=MAX_STEPS):
    k = st.kernels
    step = k.integrate_var if variational else k.integrate_geo
    return step(y0, float(t1), RTOL, ATOL, st.lo, st.hi, max_steps, n_err)


@dataclass(frozen=True, eq=False)
class GeodesicSolution:
    """An integrated geodesic s -> gamma(s), s in [0, t_max].

    ``grid`` holds the accepted integrator nodes and ``states`` the
    position/velocity pairs there. Values between nodes are obtained by
    integrating from the nearest node, so sampling is as accurate as the
    integrator.
    """

    space: object
    initial_point: np.ndarray
    initial_velocity: np.ndarray
    grid: np.ndarray
    states: np.ndarray
    t_max: float
    exited: bool = False
    integrator_meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.initial_point.shape[0]

    @property
    def points(self):
        return self.states[:, : self.dim]

    @property
    def velocities(self):
        return self.states[:, self.dim :]

    @property
    def end_point(self):
        return self.states[-1, : self.dim]

    @property
    def end_velocity(self):
        return self.states[-1, self.dim :]

    @property
    def norm2(self):
        """g(v, v), constant along the geodesic."""
        return self.space.norm2(self.initial_point, self.initial_velocity)

    @property
    def speed(self):
        return math.sqrt(max(-self.norm2, 0.0))

    @property
    def length(self):
        """L_g over the integrated range."""
        return self.speed * float(self.grid[-1])

    def is_timelike(self, tol=1e-12):
        return self.norm2 < -tol * max(1.0, float(self.initial_velocity @ self.initial_velocity))

    def state_at(self, s):
        s = float(s)
        if s < -1e-14 or s > self.grid[-1] + 1e-12:
            raise DomainError(f"parameter {s} outside [0, {self.grid[-1]}]")
        k = int(np.searchsorted(self.grid, s, side="right")) - 1
        k = min(max(k, 0), len(self.grid) - 1)
        ds = s - self.grid[k]
        if abs(ds) < 1e-15:
            return self.states[k].copy()
        ts, ys, status = _run(self.space, np.ascontiguousarray(self.states[k]), ds)
        return ys[-1].copy()

    def at(self, s):
        return self.state_at(s)[: self.dim]

    def sample(self, m=129):
        """Points at m equally spaced parameters of [0, t_max]."""
        ss = np.linspace(0.0, float(self.grid[-1]), m)
        return np.array([self.at(s) for s in ss])

    def curve(self, m=129):
        """The geodesic as a SampledCurve on [0, 1] with exact evaluation."""
        T = float(self.grid[-1])
        return SampledCurve.from_function(lambda u: self.at(u * T), n=m, space=self.space)

    def restricted(self, a, b):
        """Segment on [a, b] reparametrized affinely to [0, b - a]."""
        y = self.state_at(a)
        return integrate_geodesic(self.space, y[: self.dim], y[self.dim :], b - a)

    def affine_unit(self):
        """Same geodesic reparametrized onto [0, 1]."""
        T = float(self.grid[-1])
        return integrate_geodesic(self.space, self.initial_point, self.initial_velocity * T, 1.0)

    def to_dict(self, samples=None):
        d = {
            "initial_point": self.initial_point.tolist(),
            "initial_velocity": self.initial_velocity.tolist(),
            "t_max": self.t_max,
            "end_point": self.end_point.tolist(),
            "length": self.length,
            "norm2": self.norm2,
            "exited": self.exited,
            "integrator": dict(self.integrator_meta),
        }
        if samples:
            d["samples"] = self.sample(samples).tolist()
        return d


def integrate_geodesic(st, p, v, t_max, allow_spacelike=False):
    """Solve gamma'' + Gamma(gamma)(gamma', gamma') = 0 on [0, t_max].

    Leaving the chart truncates the solution (``exited`` set). The
    conservation of g(gamma', gamma') is checked at every node.
    """
    p = np.asarray(p, float)
    v = np.asarray(v, float)
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    if not st.in_domain(p):
        raise DomainError(f"{p} outside the chart domain")
    scale = max(1.0, float(v @ v))
    n0 = st.norm2(p, v)
    if not allow_spacelike and n0 > 1e-12 * scale:
        raise ValueError("initial velocity is spacelike")
    ts, ys, status = _run(st, _state0(p, v), t_max)
    if status == STATUS_UNDERFLOW:
        raise IntegratorError("step size underflow")
    if status == STATUS_MAXSTEPS:
        raise IntegratorError("maximum number of steps exceeded")
    n = st.dim
    drift = max(abs(st.norm2(y[:n], y[n:]) - n0) for y in ys)
    if drift > NORM_DRIFT_TOL * scale * max(1.0, t_max):
        raise IntegratorError(f"g(v,v) drifted by {drift:.3g}")
    meta = {"method": "dopri5", "rtol": RTOL, "atol": ATOL, "steps": len(ts) - 1, "norm_drift": drift}
    return GeodesicSolution(
        st, p.copy(), v.copy(), ts.copy(), ys.copy(), float(t_max), status == STATUS_EXIT, meta
    )


def exp_map(st, p, v, with_jacobian=False):
    """gamma_v(1) and, optionally, d(gamma_v(1))/dv from the variational equations."""
    n = st.dim
    p = np.asarray(p, float)
    v = np.asarray(v, float)
    if not with_jacobian:
        ts, ys, status = _run(st, _state0(p, v), 1.0)
        if status != STATUS_OK:
            return None
        return ys[-1, :n].copy()
    y0 = np.zeros(2 * n + 2 * n * n)
    y0[:n] = p
    y0[n : 2 * n] = v
    y0[2 * n + n * n :] = np.eye(n).ravel()
    # step control on the geodesic itself; the Jacobian rides along
    ts, ys, status = _run(st, y0, 1.0, variational=True, n_err=2 * n, max_steps=SHOOT_STEPS)
    if status != STATUS_OK:
        return None
    y = ys[-1]
    return y[:n].copy(), y[2 * n : 2 * n + n * n].reshape(n, n).copy()


def _newton(st, p, q, v, tol, max_iter, uphill=6):
    """Damped Newton on v -> exp_p(v) - q. Returns (v, residual) of the best iterate.

    Near a fold of exp_p the residual of the Newton iterates is not monotone
    and damped steps stall, so while J is ill-conditioned up to ``uphill``
    full steps may increase the residual (by at most a factor 1e3).
    """
    out = exp_map(st, p, v, with_jacobian=True)
    if out is None:
        return v, math.inf
    x, J = out
    F = x - q
    res = float(np.linalg.norm(F))
    best_v, best = v, res
    # iterate past ``tol`` so degenerate (cusp-like) roots are resolved well
    # enough for deduplication
    tight = min(tol, 1e-13 * max(1.0, float(np.linalg.norm(q))))
    history = [res]
    for it in range(max_iter):
        if best <= tight:
            break
        # give up on slow, non-converging runs (targets no geodesic reaches)
        if it >= 8 and best > tol and best > 0.5 * history[-6]:
            break
        step = np.linalg.lstsq(J, -F, rcond=1e-13)[0]
        sv = np.linalg.svd(J, compute_uv=False)
        # trust region: never move the velocity by more than half its size
        cap = 0.5 * max(1.0, float(np.linalg.norm(v)))
        sn = float(np.linalg.norm(step))
        if sn > cap:
            step *= cap / sn
        moved = False
        if uphill > 0 and sv[-1] < 1e-2 * sv[0]:
            out = exp_map(st, p, v + step, with_jacobian=True)
            if out is not None:
                xt, Jt = out
                rt = float(np.linalg.norm(xt - q))
                if rt < 1e3 * res:
                    if rt >= res:
                        uphill -= 1
                    v, J, F, res = v + step, Jt, xt - q, rt
                    moved = True
        if not moved:
            lam = 1.0
            for _ in range(12):
                vt = v + lam * step
                out = exp_map(st, p, vt, with_jacobian=True)
                if out is not None:
                    xt, Jt = out
                    rt = float(np.linalg.norm(xt - q))
                    if rt < res:
                        v, J, F, res = vt, Jt, xt - q, rt
                        moved = True
                        break
                lam *= 0.5
        if not moved:
            break
        if res < best:
            best_v, best = v, res
        history.append(best)
    return best_v, best


def default_seeds(st, p, q, count=8):
    """Deterministic boost/rotation lattice around the chart direction q - p.

    Seed 0 is q - p itself. Further seeds boost its orthonormal-frame
    components by rapidities +-0.5, +-1, ... within spatial directions that
    rotate by the golden angle, keeping the Lorentzian norm.
    """
    p = np.asarray(p, float)
    d = np.asarray(q, float) - p
    E = st.orthonormal_frame(p)
    c = np.linalg.solve(E, d)
    n = st.dim
    seeds = [d]
    for k in range(1, count):
        phi = 0.5 * ((k + 1) // 2) * (1 if k % 2 else -1)
        if n == 2:
            u = np.array([0.0, 1.0])
        else:
            ang = 2.399963229728653 * k
            u = np.zeros(n)
            u[1] = math.cos(ang)
            u[2] = math.sin(ang)
        # boost in the plane (e0, u)
        B = np.eye(n)
        ch, sh = math.cosh(phi), math.sinh(phi)
        B += (ch - 1.0) * (np.outer(np.eye(n)[0], np.eye(n)[0]) + np.outer(u, u))
        B += sh * (np.outer(np.eye(n)[0], u) + np.outer(u, np.eye(n)[0]))
        seeds.append(E @ (B @ c))
    return seeds


def solve_bvp(st, p, q, seeds=8, extra_seeds=(), tol=1e-8, dedup_tol=DEDUP_TOL, max_iter=60, causal_only=True, workers=1):
    """All geodesics gamma: [0, 1] -> M with gamma(0) = p, gamma(1) = q found by multiseeded shooting.

    Solutions are deduplicated by initial-velocity distance (relative to |v|)
    and, with ``causal_only``, restricted to future-directed causal ones.
    An empty list means no seed converged.
    """
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    if np.allclose(p, q, rtol=0, atol=1e-14):
        raise DegenerateInputError("p = q")
    starts = list(default_seeds(st, p, q, seeds)) if seeds else []
    starts += [np.asarray(s, float) for s in extra_seeds]

    def shoot(v0):
        v, res = _newton(st, p, q, v0, tol, max_iter)
        return v, res, v0

    found = []
    for v, res, v0 in ordered_map(shoot, starts, workers):
        if not (res <= tol and np.all(np.isfinite(v))):
            continue
        if causal_only:
            nrm = st.norm2(p, v)
            if nrm > 1e-10 * max(1.0, float(v @ v)) or not st.future_pointing(p, v):
                continue
        if any(np.linalg.norm(v - w) <= dedup_tol * max(1.0, np.linalg.norm(w)) for w, _ in found):
            continue
        found.append((v, v0))
    sols = []
    for v, v0 in found:
        try:
            sol = integrate_geodesic(st, p, v, 1.0, allow_spacelike=not causal_only)
        except (IntegratorError, ValueError):
            continue
        sol.integrator_meta["seed"] = v0.tolist()
        sol.integrator_meta["dedup_tol"] = dedup_tol
        sols.append(sol)
    return sols


def bvp_time_sep(st, x, y, seeds=8):
    """tau(x, y) as the largest L_g among connecting future timelike geodesics (0 if none)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if np.array_equal(x, y):
        return 0.0
    if y[0] <= x[0]:
        return 0.0
    best = 0.0
    for s in solve_bvp(st, x, y, seeds=seeds):
        if s.is_timelike():
            best = max(best, s.length)
    return best


def geodesic_d_gamma(a, b, m=129):
    """d_Gamma between two geodesics: discrete Frechet on m samples plus |L_g(a) - L_g(b)|."""
    pa = a.sample(m) if isinstance(a, GeodesicSolution) else np.asarray(a.points)
    pb = b.sample(m) if isinstance(b, GeodesicSolution) else np.asarray(b.points)
    la = a.length if isinstance(a, GeodesicSolution) else tau_length(a).value
    lb = b.length if isinstance(b, GeodesicSolution) else tau_length(b).value
    return discrete_frechet(pa, pb) + abs(la - lb)


def local_maximizer_check(st, sol, window, tol=1e-6, return_details=False):
    """Windowed maximality: every segment of tau-length ``window`` realizes tau of its endpoints.

    Windows slide by half their length. ``sol`` may be a GeodesicSolution
    (window in proper time) or a SampledCurve (window as a parameter span).
    """
    details = []
    if isinstance(sol, GeodesicSolution):
        if not sol.is_timelike():
            raise ValueError("local maximality is checked for timelike geodesics")
        L = sol.length
        if window <= 0 or window > L * (1 + 1e-12):
            raise DomainError(f"window {window} outside (0, {L}]")
        T = float(sol.grid[-1])
        w = window / sol.speed
        starts = np.arange(0.0, T - w + 1e-12, 0.5 * w)
        if starts.size == 0 or starts[-1] < T - w - 1e-12:
            starts = np.append(starts, T - w)
        for a in starts:
            x, y = sol.at(a), sol.at(min(a + w, T))
            seg = sol.speed * (min(a + w, T) - a)
            details.append((float(a), seg, st.time_sep(x, y)))
    else:
        c = sol
        if window <= 0 or window > 1.0:
            raise DomainError(f"window {window} outside (0, 1]")
        params = c.params
        i = 0
        while i < len(params) - 1:
            j = int(np.searchsorted(params, params[i] + window - 1e-12))
            j = min(max(j, i + 1), len(params) - 1)
            seg = tau_length(c.restricted(i, j)).value
            details.append((float(params[i]), seg, st.time_sep(c.points[i], c.points[j])))
            if j == len(params) - 1:
                break
            i = max(i + 1, (i + j) // 2)
    ok = all(math.isfinite(tau) and abs(tau - seg) <= tol * max(1.0, tau) for _, seg, tau in details)
    return (ok, details) if return_details else ok


@dataclass
class ConvergenceReport:
    c0: list
    velocity: list
    d_gamma: list
    tol: float
    together: bool
    converged: bool
    ratio_gap: float

    def to_dict(self):
        return {
            "c0": self.c0,
            "velocity": self.velocity,
            "d_gamma": self.d_gamma,
            "tol": self.tol,
            "together": self.together,
            "converged": self.converged,
            "ratio_gap": self.ratio_gap,
        }


def _unit(sol):
    T = float(sol.grid[-1])
    return sol if T == 1.0 else sol.affine_unit()


def convergence_experiment(st, family, limit, tol=1e-3, m=129):
    """Three deviation sequences of ``family`` from ``limit``, all on [0, 1].

    c0: sup chart distance at equal parameters; velocity: |v_n - v| of the
    initial velocities; d_gamma: Frechet plus length discrepancy. The sequences
    must all end below ``tol`` or all stay above it.
    """
    lim = _unit(limit)
    ref = lim.sample(m)
    c0, vel, dg = [], [], []
    for g in family:
        g = _unit(g)
        pts = g.sample(m)
        c0.append(float(np.max(np.linalg.norm(pts - ref, axis=1))))
        vel.append(float(np.linalg.norm(g.initial_velocity - lim.initial_velocity)))
        dg.append(discrete_frechet(pts, ref) + abs(g.length - lim.length))
    if not family:
        return ConvergenceReport([], [], [], tol, True, True, 0.0)
    finals = [c0[-1] <= tol, vel[-1] <= tol, dg[-1] <= tol]
    together = all(finals) or not any(finals)
    # indicator of one sequence vanishing while another does not
    hi = max(c0[-1], vel[-1], dg[-1])
    lo = min(c0[-1], vel[-1], dg[-1])
    ratio_gap = 0.0 if hi <= tol else (hi - lo) / hi
    return ConvergenceReport(c0, vel, dg, tol, together, all(finals), ratio_gap)


def converging_family(st, limit, dp, dq, rings=14, eps0=0.1):
    """Maximizers from p + eps_n dp to q + eps_n dq with eps_n = eps0 / 2^n.

    Each member is the longest shooting solution, continued from the
    previous member's initial velocity.
    """
    lim = _unit(limit)
    p, q = lim.initial_point, lim.end_point
    dp = np.asarray(dp, float)
    dq = np.asarray(dq, float)
    guess = lim.initial_velocity
    out = []
    for n in range(rings):
        eps = eps0 / 2.0**n
        a, b = p + eps * dp, q + eps * dq
        sols = [s for s in solve_bvp(st, a, b, seeds=0, extra_seeds=[guess + eps * (dq - dp)]) if s.is_timelike()]
        if not sols:
            sols = [s for s in solve_bvp(st, a, b) if s.is_timelike()]
        if not sols:
            raise IntegratorError(f"no timelike geodesic for family member {n}")
        g = max(sols, key=lambda s: s.length)
        out.append(g)
        guess = g.initial_velocity
    return out
