"""Compiled Dormand-Prince 8(5,3) stepper for the radial hyperbolic ODE.

State vector: ``(phi, dphi, acc)`` where ``acc`` accumulates
``int |phi|^p sinh(t)^(n-1) dt``. Butcher and dense-output tables are taken
from scipy's DOP853 implementation; the stepping loop, PI step control and
event location live here so that a whole shot runs without returning to
Python.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _c

N_STAGES = _c.N_STAGES
N_EXT = _c.N_STAGES_EXTENDED
N_DENSE = _c.INTERPOLATOR_POWER
A = np.ascontiguousarray(_c.A, dtype=np.float64)
B = np.ascontiguousarray(_c.B, dtype=np.float64)
C = np.ascontiguousarray(_c.C, dtype=np.float64)
E3 = np.ascontiguousarray(_c.E3, dtype=np.float64)
E5 = np.ascontiguousarray(_c.E5, dtype=np.float64)
D = np.ascontiguousarray(_c.D, dtype=np.float64)

DIM = 3

# termination status codes
HORIZON = 0
ZERO_CROSSING = 1
NORM_EXCEEDED = 2
POSITIVE_MIN = 3
STEP_BUDGET = 4
STEP_UNDERFLOW = 5

# event kinds
EV_ZERO = 0
EV_MIN = 1
EV_MAX = 2

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
# PI controller exponents (Soderlind PI.4.2 scaled for an order-8 method)
K_I = 0.7 / 8.0
K_P = 0.4 / 8.0


@njit(cache=True)
def coth(t):
    return 1.0 + 2.0 / math.expm1(2.0 * t)


@njit(cache=True)
def rhs(t, y, lam, nm1, q, p, normalized, out):
    phi = y[0]
    dphi = y[1]
    aphi = abs(phi)
    g = phi * aphi ** (q - 1.0)
    if normalized:
        force = lam * (phi - g)
    else:
        force = lam * phi - g
    out[0] = dphi
    out[1] = force - nm1 * coth(t) * dphi
    out[2] = aphi ** p * math.sinh(t) ** nm1


@njit(cache=True)
def dense_eval(F, y_old, x, comp):
    """Evaluate component ``comp`` of the step interpolant at fraction x."""
    acc = 0.0
    for i in range(N_DENSE):
        acc += F[N_DENSE - 1 - i, comp]
        if i % 2 == 0:
            acc *= x
        else:
            acc *= 1.0 - x
    return acc + y_old[comp]


@njit(cache=True)
def _step(t, y, f, h, lam, nm1, q, p, normalized, K, ynew, tmp):
    for j in range(DIM):
        K[0, j] = f[j]
    for s in range(1, N_STAGES):
        for j in range(DIM):
            acc = 0.0
            for i in range(s):
                acc += A[s, i] * K[i, j]
            tmp[j] = y[j] + h * acc
        rhs(t + C[s] * h, tmp, lam, nm1, q, p, normalized, K[s])
    for j in range(DIM):
        acc = 0.0
        for i in range(N_STAGES):
            acc += B[i] * K[i, j]
        ynew[j] = y[j] + h * acc
    rhs(t + h, ynew, lam, nm1, q, p, normalized, K[N_STAGES])


@njit(cache=True)
def _error_norm(K, h, y, ynew, rtol, atol):
    e5 = 0.0
    e3 = 0.0
    for j in range(DIM):
        scale = atol + max(abs(y[j]), abs(ynew[j])) * rtol
        a5 = 0.0
        a3 = 0.0
        for i in range(N_STAGES + 1):
            a5 += E5[i] * K[i, j]
            a3 += E3[i] * K[i, j]
        e5 += (a5 / scale) ** 2
        e3 += (a3 / scale) ** 2
    if e5 == 0.0 and e3 == 0.0:
        return 0.0
    return abs(h) * e5 / math.sqrt((e5 + 0.01 * e3) * DIM)


@njit(cache=True)
def _dense(t, y, ynew, f, fnew, h, lam, nm1, q, p, normalized, K, F, tmp):
    for s in range(N_STAGES + 1, N_EXT):
        for j in range(DIM):
            acc = 0.0
            for i in range(s):
                acc += A[s, i] * K[i, j]
            tmp[j] = y[j] + h * acc
        rhs(t + C[s] * h, tmp, lam, nm1, q, p, normalized, K[s])
    for j in range(DIM):
        dy = ynew[j] - y[j]
        F[0, j] = dy
        F[1, j] = h * f[j] - dy
        F[2, j] = 2.0 * dy - h * (fnew[j] + f[j])
        for r in range(N_DENSE - 3):
            acc = 0.0
            for i in range(N_EXT):
                acc += D[r, i] * K[i, j]
            F[3 + r, j] = h * acc


@njit(cache=True)
def _locate(F, y_old, h, comp, lo_val, atol):
    """Bisect the interpolant of ``comp`` for its sign change on [0, 1]."""
    lo = 0.0
    hi = 1.0
    for _ in range(200):
        if (hi - lo) * abs(h) <= atol:
            break
        mid = 0.5 * (lo + hi)
        v = dense_eval(F, y_old, mid, comp)
        if (v > 0.0) == (lo_val > 0.0) and v != 0.0:
            lo = mid
        else:
            hi = mid
    return hi


@njit(cache=True)
def integrate_kernel(t0, y0, t_max, lam, nm1, q, p, normalized, rtol, atol,
                     max_step, max_steps, norm_cap, stop_on_min):
    cap = 1024
    ts = np.empty(cap + 1)
    ys = np.empty((cap + 1, DIM))
    Fs = np.empty((cap, N_DENSE, DIM))
    ev_t = np.empty(64)
    ev_y = np.empty((64, 2))
    ev_k = np.empty(64, dtype=np.int64)
    n_ev = 0

    K = np.empty((N_EXT, DIM))
    f = np.empty(DIM)
    fnew = np.empty(DIM)
    ynew = np.empty(DIM)
    tmp = np.empty(DIM)
    F = np.empty((N_DENSE, DIM))
    y = y0.copy()

    t = t0
    ts[0] = t
    ys[0] = y
    rhs(t, y, lam, nm1, q, p, normalized, f)
    h = min(t0, max_step)
    err_prev = 1e-4
    n = 0
    status = HORIZON

    while t < t_max:
        if n >= max_steps:
            status = STEP_BUDGET
            break
        rejected = False
        underflow = False
        while True:
            min_step = 10.0 * (np.nextafter(t, np.inf) - t)
            if h < min_step:
                underflow = True
                break
            if t + h > t_max:
                h = t_max - t
            _step(t, y, f, h, lam, nm1, q, p, normalized, K, ynew, tmp)
            err = _error_norm(K, h, y, ynew, rtol, atol)
            if err <= 1.0:
                if err == 0.0:
                    fac = MAX_FACTOR
                else:
                    fac = SAFETY * err ** (-K_I) * err_prev ** K_P
                    fac = min(MAX_FACTOR, max(MIN_FACTOR, fac))
                if rejected:
                    fac = min(1.0, fac)
                err_prev = max(err, 1e-4)
                break
            fac = max(MIN_FACTOR, SAFETY * err ** (-1.0 / 8.0))
            h *= fac
            rejected = True
        if underflow:
            status = STEP_UNDERFLOW
            break

        for j in range(DIM):
            fnew[j] = K[N_STAGES, j]
        _dense(t, y, ynew, f, fnew, h, lam, nm1, q, p, normalized, K, F, tmp)

        stop = False
        if ynew[0] <= 0.0 < y[0]:
            x = _locate(F, y, h, 0, y[0], atol)
            hb = x * h
            _step(t, y, f, hb, lam, nm1, q, p, normalized, K, ynew, tmp)
            for j in range(DIM):
                fnew[j] = K[N_STAGES, j]
            _dense(t, y, ynew, f, fnew, hb, lam, nm1, q, p, normalized, K, F, tmp)
            h = hb
            ev_t[n_ev] = t + hb
            ev_y[n_ev, 0] = ynew[0]
            ev_y[n_ev, 1] = ynew[1]
            ev_k[n_ev] = EV_ZERO
            n_ev += 1
            status = ZERO_CROSSING
            stop = True
        elif y[1] * ynew[1] < 0.0:
            x = _locate(F, y, h, 1, y[1], atol)
            kind = EV_MIN if y[1] < 0.0 else EV_MAX
            if n_ev < 64:
                ev_t[n_ev] = t + x * h
                ev_y[n_ev, 0] = dense_eval(F, y, x, 0)
                ev_y[n_ev, 1] = dense_eval(F, y, x, 1)
                ev_k[n_ev] = kind
                n_ev += 1
                if stop_on_min and kind == EV_MIN and ev_y[n_ev - 1, 0] > 0.0:
                    status = POSITIVE_MIN
                    stop = True

        if n >= cap:
            cap2 = 2 * cap
            ts2 = np.empty(cap2 + 1)
            ys2 = np.empty((cap2 + 1, DIM))
            Fs2 = np.empty((cap2, N_DENSE, DIM))
            ts2[: n + 1] = ts[: n + 1]
            ys2[: n + 1] = ys[: n + 1]
            Fs2[:n] = Fs[:n]
            ts, ys, Fs, cap = ts2, ys2, Fs2, cap2
        Fs[n] = F
        t = t + h
        y[:] = ynew
        f[:] = fnew
        n += 1
        ts[n] = t
        ys[n] = y

        if stop:
            break
        if norm_cap > 0.0 and y[2] > norm_cap:
            status = NORM_EXCEEDED
            break
        h = min(h * fac, max_step)

    return (ts[: n + 1].copy(), ys[: n + 1].copy(), Fs[:n].copy(), status,
            ev_t[:n_ev].copy(), ev_y[:n_ev].copy(), ev_k[:n_ev].copy())


@njit(cache=True)
def dense_eval_many(ts, ys, Fs, tq, comp):
    """Evaluate component ``comp`` of the piecewise interpolant at sorted ``tq``."""
    out = np.empty(tq.shape[0])
    nsteps = Fs.shape[0]
    i = 0
    for k in range(tq.shape[0]):
        tk = tq[k]
        while i < nsteps - 1 and tk > ts[i + 1]:
            i += 1
        h = ts[i + 1] - ts[i]
        if h == 0.0:
            out[k] = ys[i, comp]
        else:
            out[k] = dense_eval(Fs[i], ys[i], (tk - ts[i]) / h, comp)
    return out
