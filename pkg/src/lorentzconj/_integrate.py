"""Adaptive Dormand-Prince 5(4) integrator compiled with numba.

The right-hand side is a compiled function ``rhs(y, out)`` (autonomous).
Every accepted step is stored so callers can scan the trajectory.
"""

import numba
import numpy as np

__all__ = ["dopri5", "STATUS_OK", "STATUS_EXIT", "STATUS_UNDERFLOW", "STATUS_MAXSTEPS"]

STATUS_OK = 0
STATUS_EXIT = 1
STATUS_UNDERFLOW = 2
STATUS_MAXSTEPS = 3

_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@numba.njit(cache=True)
def _in_box(y, lo, hi):
    for i in range(lo.shape[0]):
        if y[i] < lo[i] or y[i] > hi[i] or not np.isfinite(y[i]):
            return False
    return True


@numba.njit
def dopri5(rhs, y0, t1, rtol, atol, lo, hi, max_steps, n_err=0):
    """Integrate y' = rhs(y) from 0 to ``t1`` (may be negative).

    Returns (ts, ys, status). ``lo``/``hi`` bound the leading components
    (chart box); leaving it truncates the solution with STATUS_EXIT.
    Only the first ``n_err`` components enter the error norm (all if 0).
    """
    m = y0.shape[0]
    me = m if n_err <= 0 else min(n_err, m)
    cap = 64
    ts = np.empty(cap)
    ys = np.empty((cap, m))
    ts[0] = 0.0
    ys[0] = y0
    if t1 == 0.0:
        return ts[:1], ys[:1], STATUS_OK
    direction = 1.0 if t1 > 0 else -1.0
    span = abs(t1)
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    k5 = np.empty(m)
    k6 = np.empty(m)
    k7 = np.empty(m)
    tmp = np.empty(m)
    ynew = np.empty(m)
    y = y0.copy()
    rhs(y, k1)
    scale0 = 0.0
    for i in range(me):
        s = atol + rtol * abs(y[i])
        scale0 = max(scale0, abs(k1[i]) / s)
    h = 0.01 * span if scale0 == 0.0 else min(0.01 / scale0 ** 0.2, span)
    h = max(h, 1e-6 * span)
    t = 0.0
    n = 0
    fac_min, fac_max, safety = 0.2, 5.0, 0.9
    while t < span:
        if n >= max_steps:
            return ts[: n + 1], ys[: n + 1], STATUS_MAXSTEPS
        if t + h > span:
            h = span - t
        if h < 1e-14 * max(1.0, span):
            return ts[: n + 1], ys[: n + 1], STATUS_UNDERFLOW
        hd = h * direction
        for i in range(m):
            tmp[i] = y[i] + hd * _A21 * k1[i]
        rhs(tmp, k2)
        for i in range(m):
            tmp[i] = y[i] + hd * (_A31 * k1[i] + _A32 * k2[i])
        rhs(tmp, k3)
        for i in range(m):
            tmp[i] = y[i] + hd * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        rhs(tmp, k4)
        for i in range(m):
            tmp[i] = y[i] + hd * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
        rhs(tmp, k5)
        for i in range(m):
            tmp[i] = y[i] + hd * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
        rhs(tmp, k6)
        for i in range(m):
            ynew[i] = y[i] + hd * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
        rhs(ynew, k7)
        err = 0.0
        for i in range(me):
            e = hd * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
            s = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            err += (e / s) ** 2
        err = (err / me) ** 0.5
        if not np.isfinite(err):
            h *= 0.25
            continue
        if err <= 1.0:
            t += h
            n += 1
            if n >= cap:
                cap *= 2
                ts2 = np.empty(cap)
                ys2 = np.empty((cap, m))
                ts2[:n] = ts[:n]
                ys2[:n] = ys[:n]
                ts = ts2
                ys = ys2
            for i in range(m):
                y[i] = ynew[i]
                k1[i] = k7[i]
            ts[n] = t * direction
            ys[n] = y
            if not _in_box(y, lo, hi):
                return ts[: n + 1], ys[: n + 1], STATUS_EXIT
            fac = fac_max if err == 0.0 else min(fac_max, safety * err ** -0.2)
            h *= fac
        else:
            h *= max(fac_min, safety * err ** -0.2)
    return ts[: n + 1], ys[: n + 1], STATUS_OK
