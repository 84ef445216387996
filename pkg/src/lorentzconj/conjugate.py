"""Conjugate points along timelike geodesics: classical and synthetic detectors.

Synthetic notions are decided on finite rings of perturbed endpoints
(radius eps_i = eps0 / 2^i) together with a shrinking d_Gamma closeness
bound delta_i (see Schedule); every flag is a statement at that resolution.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ._integrate import STATUS_OK
from ._pool import ordered_map
from .frechet import discrete_frechet
from .geodesic import (
    RTOL,
    ATOL,
    MAX_STEPS,
    GeodesicSolution,
    geodesic_d_gamma,
    integrate_geodesic,
    solve_bvp,
)

__all__ = [
    "PreconditionError",
    "Schedule",
    "JacobiSystem",
    "jacobi_system",
    "jacobi_scan",
    "jacobi_at_endpoint",
    "DetectorResult",
    "one_sided_search",
    "symmetric_search",
    "TimelikeFamily",
    "build_family",
    "embeddability_check",
    "neighbor_geodesic",
    "ConjugateReport",
    "classify",
    "CutScan",
    "cut_scan",
    "injectivity_radii",
]

DISTINCT_TOL = 1e-4
SAMPLES = 129


class PreconditionError(ValueError):
    """A detector's precondition (e.g. a unique maximizer) does not hold."""


@dataclass(frozen=True)
class Schedule:
    """Ring radii and d_Gamma closeness bounds.

    eps_i = eps0 / 2^i and delta_i = kappa * (scale^2 * eps_i)^(1/3), where
    ``scale`` is the chart extent |q - p| of the geodesic under test. The
    cube root is the slowest rate at which geodesics follow their endpoints
    near a conjugate point (the exponential map there has a cusp, so a
    displacement eps of the endpoint moves the geodesic by ~ scale^(2/3) eps^(1/3)).
    """

    rings: int = 6
    eps0: float = 0.1
    kappa: float = 1.0

    def eps(self, i):
        return self.eps0 / 2.0**i

    def delta(self, i, scale=1.0):
        return self.kappa * (scale * scale * self.eps(i)) ** (1.0 / 3.0)

    def to_dict(self, scale=1.0):
        return {
            "rings": self.rings,
            "eps0": self.eps0,
            "kappa": self.kappa,
            "scale": scale,
            "eps": [self.eps(i) for i in range(self.rings)],
            "delta": [self.delta(i, scale) for i in range(self.rings)],
            "distinct_tol": DISTINCT_TOL,
        }


def _scale(base):
    return max(float(np.linalg.norm(base.end_point - base.initial_point)), 1e-12)


def _schedule(rings, eps0, schedule):
    if schedule is None:
        return Schedule(rings=rings, eps0=eps0)
    return schedule


# -- Jacobi fields -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JacobiSystem:
    """Propagator A(s) with J(s) = A(s) J'(0) for Jacobi fields vanishing at s = 0.

    Obtained from the variational equations of the geodesic flow, which use
    the Christoffel symbols of the base geodesic and their derivatives.
    """

    base: GeodesicSolution
    grid: np.ndarray
    propagator: np.ndarray  # (len(grid), n, n)
    derivative: np.ndarray


def _var_state(sol):
    n = sol.dim
    y0 = np.zeros(2 * n + 2 * n * n)
    y0[:n] = sol.initial_point
    y0[n : 2 * n] = sol.initial_velocity
    y0[2 * n + n * n :] = np.eye(n).ravel()
    return y0


def _integrate_var(st, y0, t1):
    ts, ys, status = st.kernels.integrate_var(y0, float(t1), RTOL, ATOL, st.lo, st.hi, MAX_STEPS, 0)
    return ts, ys, status


def jacobi_system(st, sol, t_end=None):
    n = sol.dim
    t_end = float(sol.grid[-1]) if t_end is None else float(t_end)
    ts, ys, status = _integrate_var(st, _var_state(sol), t_end)
    if status != STATUS_OK:
        raise RuntimeError(f"variational integration failed (status {status})")
    A = ys[:, 2 * n : 2 * n + n * n].reshape(-1, n, n)
    dA = ys[:, 2 * n + n * n :].reshape(-1, n, n)
    return JacobiSystem(sol, ts.copy(), A.copy(), dA.copy())


def _scaled_det(A, s):
    # det A(s) / s^n removes the trivial growth near s = 0
    n = A.shape[0]
    return float(np.linalg.det(A)) / s**n


def jacobi_scan(st, sol, t_end=None, tol=1e-6):
    """Parameters in (0, t_end] where the Jacobi propagator is singular.

    Odd-multiplicity zeros are found by a sign change of det A and refined by
    root bracketing; even multiplicities by a local minimum of the smallest
    singular value that falls below 1e-6 of its scale.
    """
    if not sol.is_timelike():
        raise ValueError("jacobi_scan needs a timelike geodesic")
    n = sol.dim
    T = float(sol.grid[-1]) if t_end is None else float(t_end)
    y0 = _var_state(sol)
    ts, ys, status = _integrate_var(st, y0, T)
    if status != STATUS_OK:
        raise RuntimeError(f"variational integration failed (status {status})")
    # denser evaluation grid than accepted steps alone, marched incrementally
    fine = np.unique(np.concatenate([ts, np.linspace(0.0, T, 400)]))
    states = [y0]
    for a, b in zip(fine[:-1], fine[1:]):
        _, yy, _ = _integrate_var(st, states[-1], b - a)
        states.append(yy[-1].copy())
    keep = fine > 1e-3 * T
    fine_all = fine
    fine = fine[keep]
    states_all = states

    def A_at(s):
        k = int(np.searchsorted(fine_all, s, side="right")) - 1
        k = min(max(k, 0), len(fine_all) - 1)
        y = states_all[k]
        if s != fine_all[k]:
            _, yy, _ = _integrate_var(st, y, s - fine_all[k])
            y = yy[-1]
        return y[2 * n : 2 * n + n * n].reshape(n, n)

    vals = np.array([_scaled_det(A_at(s), s) for s in fine])
    sig = np.array([np.linalg.svd(A_at(s), compute_uv=False)[-1] / s for s in fine])
    roots = []
    for k in range(len(fine) - 1):
        a, b = fine[k], fine[k + 1]
        if vals[k] == 0.0:
            roots.append(a)
        elif vals[k] * vals[k + 1] < 0:
            r = brentq(lambda s: _scaled_det(A_at(s), s), a, b, xtol=tol * 1e-3, rtol=1e-15)
            roots.append(r)
    for k in range(1, len(fine) - 1):
        if sig[k] <= sig[k - 1] and sig[k] <= sig[k + 1] and sig[k] < 1e-2:
            res = minimize_scalar(
                lambda s: np.linalg.svd(A_at(s), compute_uv=False)[-1] / s,
                bounds=(fine[k - 1], fine[k + 1]),
                method="bounded",
                options={"xatol": tol * 1e-3},
            )
            if res.fun < 1e-6 and all(abs(res.x - r) > 10 * tol for r in roots):
                roots.append(float(res.x))
    if abs(vals[-1]) < 1e-9 * max(1.0, np.max(np.abs(vals))) and all(abs(T - r) > 10 * tol for r in roots):
        roots.append(T)
    return sorted(roots)


def jacobi_at_endpoint(st, sol, tol=1e-6, overshoot=0.02):
    """True if a conjugate parameter lies within tol (relative) of the endpoint."""
    T = float(sol.grid[-1])
    roots = jacobi_scan(st, sol, t_end=T * (1 + overshoot))
    return any(abs(r - T) <= tol * max(1.0, T) for r in roots), roots


# -- ring search helpers -------------------------------------------------


def _directions(n):
    eye = np.eye(n)
    return [eye[k] * s for k in range(n) for s in (1.0, -1.0)]


def _ring(center, eps, with_center=True):
    pts = [np.asarray(center, float)] if with_center else []
    pts += [center + eps * d for d in _directions(len(center))]
    return pts


def _ring_seeds(st, p, v, eps):
    """Perturbations of v along every orthonormal-frame direction at scales eps and sqrt(eps)."""
    E = st.orthonormal_frame(p)
    speed = max(math.sqrt(max(-st.norm2(p, v), 0.0)), 1e-12)
    seeds = [v]
    for scale in (eps, math.sqrt(eps)):
        for k in range(st.dim):
            for sgn in (1.0, -1.0):
                seeds.append(v + sgn * scale * speed * E[:, k])
    return seeds


def _unit_solution(sol):
    T = float(sol.grid[-1])
    return sol if T == 1.0 else sol.affine_unit()


def _connecting(st, p, q, v_guess, eps, seeds, extra=()):
    try:
        return [
            s
            for s in solve_bvp(st, p, q, seeds=seeds, extra_seeds=_ring_seeds(st, p, v_guess, eps) + list(extra))
            if s.is_timelike()
        ]
    except ValueError:
        return []


@dataclass
class DetectorResult:
    flag: bool
    witnesses: list = field(default_factory=list)
    rings_checked: int = 0
    schedule: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "flag": self.flag,
            "rings_checked": self.rings_checked,
            "witnesses": self.witnesses,
            "schedule": self.schedule,
            "notes": self.notes,
        }


def _witness(i, p, q, a, b, da, db):
    return {
        "ring": i,
        "p": np.asarray(p).tolist(),
        "q": np.asarray(q).tolist(),
        "velocities": [a.initial_velocity.tolist(), b.initial_velocity.tolist()],
        "seeds": [a.integrator_meta.get("seed"), b.integrator_meta.get("seed")],
        "lengths": [a.length, b.length],
        "d_gamma_to_base": [da, db],
    }


def _close_pair(base, sols, delta):
    """Two d_F-distinct solutions both within delta of base in d_Gamma, or None."""
    close = []
    for s in sols:
        dg = geodesic_d_gamma(s, base, SAMPLES)
        if dg < delta:
            close.append((s, dg))
    for (a, da), (b, db) in itertools.combinations(close, 2):
        if discrete_frechet(a.sample(SAMPLES), b.sample(SAMPLES)) > DISTINCT_TOL:
            return a, b, da, db
    return None


def _pair_search(st, sol, schedule, vary_start, seeds, workers):
    base = _unit_solution(sol)
    p, q = base.initial_point, base.end_point
    v = base.initial_velocity
    scale = _scale(base)
    result = DetectorResult(False, schedule=schedule.to_dict(scale))
    for i in range(schedule.rings):
        eps, delta = schedule.eps(i), schedule.delta(i, scale)
        starts = _ring(p, eps) if vary_start else [p]
        pairs = [(a, b) for a in starts for b in _ring(q, eps)]

        def probe(pair):
            a, b = pair
            if np.allclose(a, b):
                return None
            sols = _connecting(st, a, b, v, eps, seeds)
            return _close_pair(base, sols, delta)

        hit = None
        # scan in order, stopping at the first witness (deterministic)
        for a, b in pairs:
            w = probe((a, b))
            if w is not None:
                hit = (a, b, w)
                break
        result.rings_checked = i + 1
        if hit is None:
            result.notes.append(f"ring {i}: no pair of distinct nearby geodesics")
            return result
        a, b, (g1, g2, d1, d2) = hit
        result.witnesses.append(_witness(i, a, b, g1, g2, d1, d2))
    result.flag = True
    return result


def one_sided_search(st, sol, rings=6, eps0=0.1, schedule=None, seeds=0, workers=None):
    """Pairs of distinct geodesics from the fixed start to targets q_i -> q, both converging to sol.

    Ring i consists of q itself and q +- eps_i e_k. The flag is set when every
    ring provides a witness pair.
    """
    return _pair_search(st, sol, _schedule(rings, eps0, schedule), False, seeds, workers)


def symmetric_search(st, sol, rings=6, eps0=0.1, schedule=None, seeds=0, workers=None):
    """As one_sided_search, with both endpoints ranging over rings."""
    return _pair_search(st, sol, _schedule(rings, eps0, schedule), True, seeds, workers)


# -- timelike families ---------------------------------------------------


@dataclass
class TimelikeFamily:
    """Maximizers F(p', q') on grids around the endpoints of a central geodesic."""

    center: GeodesicSolution
    grid_U: list
    grid_V: list
    members: dict
    missing: list
    continuity: list
    schedule: dict

    @property
    def complete(self):
        return not self.missing

    def __call__(self, i, j):
        return self.members[(i, j)]

    def to_dict(self):
        return {
            "grid_size": [len(self.grid_U), len(self.grid_V)],
            "members": len(self.members),
            "missing": [list(m) for m in self.missing],
            "continuity": self.continuity,
            "complete": self.complete,
            "schedule": self.schedule,
        }


def _lattice(center, radius, per_axis):
    n = len(center)
    ticks = np.linspace(-radius, radius, per_axis)
    return [center + np.array(off) for off in itertools.product(ticks, repeat=n)]


def _fan(st, p, v, fractions=(0.25, 0.5, 1.0)):
    """v plus spatial frame offsets (all sign/size combinations) as fractions of its speed."""
    E = st.orthonormal_frame(p)
    speed = math.sqrt(max(-st.norm2(p, v), 0.0)) or float(np.linalg.norm(v))
    ticks = [0.0] + [sg * f for f in fractions for sg in (1.0, -1.0)]
    out = []
    for combo in itertools.product(ticks, repeat=st.dim - 1):
        out.append(v + speed * (E[:, 1:] @ np.array(combo)))
    return out


def _maximizer(st, p, q, v_guess, seeds=8, fan=False):
    """Longest connecting timelike geodesic found (None if there is none).

    v_guess is one velocity or a list of them. With ``fan``, a spatial fan
    of seeds around the first guess is tried when nothing else converges.
    """
    guesses = [np.asarray(g, float) for g in (v_guess if isinstance(v_guess, list) else [v_guess])]
    try:
        sols = [s for s in solve_bvp(st, p, q, seeds=seeds, extra_seeds=guesses) if s.is_timelike()]
        if not sols and fan:
            sols = [s for s in solve_bvp(st, p, q, seeds=0, extra_seeds=_fan(st, p, guesses[0])[1:]) if s.is_timelike()]
    except ValueError:
        return None
    if not sols:
        return None
    return max(sols, key=lambda s: s.length)


def _maximizers(st, sols, tol=1e-7):
    if not sols:
        return []
    top = max(s.length for s in sols)
    return [s for s in sols if s.length >= top - tol * max(1.0, top)]


def _check_unique_center(st, base, seeds):
    p, q = base.initial_point, base.end_point
    sols = [s for s in solve_bvp(st, p, q, seeds=seeds, extra_seeds=_ring_seeds(st, p, base.initial_velocity, 1e-2)) if s.is_timelike()]
    maxs = _maximizers(st, sols)
    if len(maxs) != 1:
        raise PreconditionError(f"{len(maxs)} maximizers between the endpoints; a unique one is required")
    m = maxs[0]
    if geodesic_d_gamma(m, base, SAMPLES) > 1e-6:
        raise PreconditionError("the central geodesic is not the maximizer between its endpoints")
    return m


def build_family(st, sol, grid_spec=None, seeds=8):
    """Maximizer family about sol on endpoint grids, with a continuity statistic.

    grid_spec: {"radius": 0.1, "per_axis": 5, "rings": 6}. Grid points that
    are not timelike related get no member; nodes without a maximizer are
    listed in ``missing``. Continuity at sol is measured on rings of radius
    radius / 2^i around both endpoints (max d_Gamma to sol over the ring).
    """
    spec = {"radius": 0.1, "per_axis": 5, "rings": 6}
    spec.update(grid_spec or {})
    base = _unit_solution(sol)
    _check_unique_center(st, base, seeds)
    p, q, v = base.initial_point, base.end_point, base.initial_velocity
    U = _lattice(p, spec["radius"], spec["per_axis"])
    V = _lattice(q, spec["radius"], spec["per_axis"])
    # continuation: solve outward from the center, seeding each node with
    # the velocities of its nearest solved neighbours
    keys = sorted(
        ((i, j) for i in range(len(U)) for j in range(len(V))),
        key=lambda k: float(np.linalg.norm(U[k[0]] - p) + np.linalg.norm(V[k[1]] - q)),
    )
    members, missing = {}, []
    ends, vels = [], []
    for i, j in keys:
        a, b = U[i], V[j]
        guesses = [v + (b - a) - (q - p)]
        if ends:
            E = np.asarray(ends)
            dist = np.linalg.norm(E[:, 0] - a, axis=1) + np.linalg.norm(E[:, 1] - b, axis=1)
            for k in np.argsort(dist)[:2]:
                guesses.append(vels[k] + (b - E[k, 1]) - (a - E[k, 0]))
        m = _maximizer(st, a, b, guesses, seeds=0, fan=True)
        if m is None:
            missing.append((i, j))
            continue
        members[(i, j)] = m
        ends.append((a, b))
        vels.append(m.initial_velocity)
    missing.sort()
    continuity = []
    for r in range(spec["rings"]):
        eps = spec["radius"] / 2.0**r
        worst = 0.0
        for a in _ring(p, eps):
            for b in _ring(q, eps):
                m = _maximizer(st, a, b, v + (b - a) - (q - p), seeds=0, fan=True)
                if m is None:
                    worst = math.inf
                    continue
                worst = max(worst, geodesic_d_gamma(m, base, SAMPLES))
        continuity.append(worst)
    return TimelikeFamily(base, U, V, members, missing, continuity, spec)


# -- embeddability -------------------------------------------------------


def neighbor_geodesic(st, sol, seeds=8):
    """A second timelike geodesic from sol(0) to sol(1): the farthest from sol in d_Gamma.

    A well separated neighbour keeps its d_Gamma offset above the closeness
    bound at every ring of a finite schedule.
    """
    base = _unit_solution(sol)
    p, q = base.initial_point, base.end_point
    extra = _ring_seeds(st, p, base.initial_velocity, 1e-2)
    sols = [s for s in solve_bvp(st, p, q, seeds=seeds, extra_seeds=extra) if s.is_timelike()]
    others = [(geodesic_d_gamma(s, base, SAMPLES), i) for i, s in enumerate(sols)]
    others = [(d, i) for d, i in others if d > DISTINCT_TOL]
    if not others:
        raise PreconditionError("no second timelike geodesic between the endpoints")
    return sols[max(others)[1]]


def embeddability_check(st, sol, rings=6, eps0=0.1, schedule=None, scheme="rings", neighbor=None, seeds=0):
    """Is some connecting geodesic d_Gamma-close to sol for all perturbed endpoint pairs?

    scheme="rings": pairs from rings around both endpoints (centers included).
    scheme="neighbor": pairs (sigma(s_i), sigma(1 - s_i)) on a second geodesic
    ``neighbor`` from p to q, with s_i = eps_i (default: the farthest distinct
    connecting geodesic; without one the rings scheme is used).
    A ring is bad if one of its pairs admits no timelike geodesic within
    delta_i of sol. sol is reported unreachable when the bad rings persist:
    the finest ceil(rings / 2) rings are all bad.
    """
    sched = _schedule(rings, eps0, schedule)
    base = _unit_solution(sol)
    p, q, v = base.initial_point, base.end_point, base.initial_velocity
    notes = [f"scheme={scheme}"]
    if scheme == "neighbor" and neighbor is None:
        try:
            neighbor = neighbor_geodesic(st, base)
        except PreconditionError:
            scheme = "rings"
            notes.append("no second connecting geodesic; fell back to scheme=rings")
    if scheme not in ("rings", "neighbor"):
        raise ValueError(f"unknown scheme {scheme!r}")
    nb = _unit_solution(neighbor) if scheme == "neighbor" else None
    tail = max(1, math.ceil(sched.rings / 2))
    rows = []
    scale = _scale(base)
    # finest ring first; one good ring in the tail settles reachability
    for i in range(sched.rings - 1, sched.rings - 1 - tail, -1):
        eps, delta = sched.eps(i), sched.delta(i, scale)
        extra = []
        if nb is not None:
            pairs = [(nb.at(eps), nb.at(1.0 - eps))]
            # the neighbour's own segment is a known connecting geodesic
            extra = [(1.0 - 2 * eps) * nb.state_at(eps)[st.dim:]]
        else:
            pairs = [(a, b) for a in _ring(p, eps) for b in _ring(q, eps)]
        bad = None
        best_overall = 0.0
        for a, b in pairs:
            guess = v + (b - a) - (q - p)
            sols = _connecting(st, a, b, guess, eps, seeds, extra)
            best = min((geodesic_d_gamma(s, base, SAMPLES) for s in sols), default=math.inf)
            best_overall = max(best_overall, best)
            if best >= delta:
                bad = {"p": np.asarray(a).tolist(), "q": np.asarray(b).tolist(), "closest": best, "solutions": len(sols)}
                break
        rows.append({"ring": i, "eps": eps, "delta": delta, "worst_closest": best_overall, "bad_pair": bad})
        if bad is None:
            break
    unreachable = len(rows) == tail and all(r["bad_pair"] is not None for r in rows)
    notes.append(f"unreachable={unreachable}")
    return DetectorResult(not unreachable, witnesses=rows, rings_checked=len(rows), schedule=sched.to_dict(scale), notes=notes)


# -- classification ------------------------------------------------------


@dataclass
class ConjugateReport:
    flags: dict
    witnesses: dict
    thresholds: dict
    disagreements: list

    def to_dict(self):
        return {
            "flags": self.flags,
            "witnesses": self.witnesses,
            "thresholds": self.thresholds,
            "disagreements": self.disagreements,
        }


def classify(st, sol, config=None):
    """Run all detectors on sol and assemble a ConjugateReport.

    config keys: rings, eps0, kappa, seeds, scheme, neighbor.
    """
    cfg = {"rings": 6, "eps0": 0.1, "kappa": 1.0, "seeds": 0, "scheme": "rings"}
    cfg.update(config or {})
    sched = Schedule(cfg["rings"], cfg["eps0"], cfg["kappa"])
    base = _unit_solution(sol)
    jac, roots = jacobi_at_endpoint(st, base)
    one = one_sided_search(st, base, schedule=sched, seeds=cfg["seeds"])
    sym = one if one.flag else symmetric_search(st, base, schedule=sched, seeds=cfg["seeds"])
    emb = embeddability_check(st, base, schedule=sched, scheme=cfg["scheme"], neighbor=cfg.get("neighbor"), seeds=cfg["seeds"])
    unreachable = not emb.flag
    flags = {
        "jacobi": bool(jac),
        "one_sided": one.flag,
        "symmetric": sym.flag,
        "unreachable": unreachable,
        "ultimate": bool(unreachable or sym.flag),
    }
    disagreements = []
    if not (flags["jacobi"] == flags["one_sided"] == flags["symmetric"]):
        disagreements.append("jacobi/one_sided/symmetric differ at this resolution")
    thresholds = sched.to_dict(_scale(base))
    thresholds.update({"seeds": cfg["seeds"], "scheme": cfg["scheme"], "jacobi_tol": 1e-6})
    witnesses = {
        "jacobi": roots,
        "one_sided": one.witnesses,
        "symmetric": sym.witnesses,
        "embeddability": emb.witnesses,
    }
    return ConjugateReport(flags, witnesses, thresholds, disagreements)


# -- cut loci and injectivity radii ---------------------------------------


@dataclass
class CutScan:
    base: np.ndarray
    targets: list  # (direction index, parameter, point, maximizer count)
    cut_points: list
    initial_cut: dict  # direction index -> parameter (inf if none)
    initial_cut_points: dict

    def to_dict(self):
        return {
            "base": self.base.tolist(),
            "cut_points": [np.asarray(c).tolist() for c in self.cut_points],
            "initial_cut": {str(k): v for k, v in self.initial_cut.items()},
            "targets": [[k, s, np.asarray(x).tolist(), c] for k, s, x, c in self.targets],
        }


def unit_directions(st, p, count=5, max_rapidity=1.0):
    """Future unit timelike vectors at p with rapidities spread in [-max, max] (in the e0-e1 plane)."""
    E = st.orthonormal_frame(p)
    phis = np.linspace(-max_rapidity, max_rapidity, count) if count > 1 else np.zeros(1)
    out = []
    for phi in phis:
        c = np.zeros(st.dim)
        c[0], c[1] = math.cosh(phi), math.sinh(phi)
        out.append(E @ c)
    return out


def count_maximizers(st, p, q, seeds=8, extra_seeds=()):
    """Number of distinct maximizers from p to q among shooting solutions."""
    try:
        sols = [s for s in solve_bvp(st, p, q, seeds=seeds, extra_seeds=extra_seeds) if s.is_timelike()]
    except ValueError:
        return 0
    if not sols:
        return 0
    tau = st.time_sep(p, q)
    if not math.isfinite(tau):
        return 0
    maxs = [s for s in sols if abs(s.length - tau) <= 1e-6 * max(1.0, tau)]
    distinct = []
    for s in maxs:
        pts = s.sample(65)
        if all(discrete_frechet(pts, d) > DISTINCT_TOL for d in distinct):
            distinct.append(pts)
    return len(distinct)


def cut_scan(st, p, param_grid, directions=None, seeds=8, workers=None):
    """Cut points along unit-speed geodesics from p at the given proper times.

    A target is a cut point when it has at least two distinct maximizers. The
    initial cut parameter of a direction is the first grid parameter at which
    a cut point occurs.
    """
    p = np.asarray(p, float)
    dirs = unit_directions(st, p) if directions is None else [np.asarray(d, float) for d in directions]
    grid = [float(s) for s in param_grid if s > 0]
    jobs = [(k, s) for k in range(len(dirs)) for s in grid]

    def probe(job):
        k, s = job
        sol = integrate_geodesic(st, p, dirs[k], s)
        if sol.exited:
            return k, s, sol.end_point, 0
        q = sol.end_point
        # rapidity-perturbed seeds reach refocusing multiplicities
        extra = [s * d for d in unit_directions(st, p, count=7, max_rapidity=1.5)] + [s * dirs[k]]
        return k, s, q, count_maximizers(st, p, q, seeds=seeds, extra_seeds=extra)

    targets = ordered_map(probe, jobs, workers)
    cut_points = [q for k, s, q, c in targets if c >= 2]
    initial, initial_pts = {}, {}
    for k in range(len(dirs)):
        hits = [(s, q) for kk, s, q, c in targets if kk == k and c >= 2]
        initial[k] = hits[0][0] if hits else math.inf
        initial_pts[k] = hits[0][1] if hits else None
    return CutScan(p, targets, cut_points, initial, initial_pts)


def injectivity_radii(st, sample_points, param_grid, radius_grid, directions=None, seeds=8):
    """Initial and unique injectivity radii on a finite sample.

    IniInj(p) is the d-distance from p to its nearest initial cut point
    (inf if none was found). UniqueInj is the largest radius in
    ``radius_grid`` such that every scanned target in the open d-ball of
    that radius that has a maximizer has exactly one. Both radii for the set are minima
    over the sample points.
    """
    radius_grid = np.sort(np.asarray(radius_grid, float))
    per_point = []
    unique = math.inf
    for p in sample_points:
        p = np.asarray(p, float)
        scan = cut_scan(st, p, param_grid, directions=directions, seeds=seeds)
        dists = [st.metric_d(p, q) for q in scan.initial_cut_points.values() if q is not None]
        per_point.append(float(min(dists)) if dists else math.inf)
        bad = [st.metric_d(p, q) for k, s, q, c in scan.targets if c >= 2]
        ok = [float(r) for r in radius_grid if all(d >= r - 1e-12 * max(1.0, r) for d in bad)]
        u = ok[-1] if ok else 0.0
        if not bad:
            u = math.inf
        unique = min(unique, u)
    ini = min(per_point) if per_point else math.inf
    steps = np.diff(radius_grid)
    resolution = float(np.max(steps)) if steps.size else 0.0
    gap = 0.0 if (math.isinf(ini) and math.isinf(unique)) else float(abs(ini - unique))
    return {
        "ini_inj_points": per_point,
        "ini_inj": ini,
        "unique_inj": unique,
        "resolution": resolution,
        "gap": gap,
        "consistent": bool(gap <= resolution),
    }
