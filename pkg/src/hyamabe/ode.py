"""Shooting trajectories of the radial Yamabe ODE on hyperbolic space.

The ODE is

    phi'' + (n-1) coth(t) phi' = lam*phi - phi^q        (unnormalized)
    phi'' + (n-1) coth(t) phi' = lam*(phi - phi^q)      (normalized, lam > 0)

with phi(0) = alpha, phi'(0) = 0. The coefficient is singular at t = 0, so
integration starts at a small ``t_start`` from the Taylor expansion of the
regular solution.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, replace

import numpy as np

from . import _dop853 as k
from .errors import EnergyIncrease, StepBudgetExhausted, TolerancesNotMet


@dataclass(frozen=True)
class OdeParams:
    lam: float
    n: int
    q: float
    normalized: bool = False

    def __post_init__(self):
        if not self.q > 1:
            raise ValueError(f"q must be > 1, got {self.q}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.normalized and not self.lam > 0:
            raise ValueError("normalized form requires lam > 0")

    @property
    def p(self) -> float:
        return float(self.q) + 1.0

    def force(self, phi):
        """Right-hand side F(phi) of the ODE (without the first-order term)."""
        lam, q = float(self.lam), float(self.q)
        g = phi * np.abs(phi) ** (q - 1.0)
        if self.normalized:
            return lam * (phi - g)
        return lam * phi - g

    @property
    def equilibrium_scale(self) -> float:
        """Factor lam^{1/(q-1)} mapping normalized solutions to unnormalized ones."""
        return float(self.lam) ** (1.0 / (float(self.q) - 1.0))


@dataclass(frozen=True)
class IntegrationControls:
    t_start: float = 1e-6
    t_max: float = 50.0
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_steps: int = 200_000
    max_step: float = 0.5
    check_energy: bool = True

    def __post_init__(self):
        if not 0 < self.t_start <= 1e-3:
            raise ValueError(f"t_start must lie in (0, 1e-3], got {self.t_start}")
        if not self.t_max > self.t_start:
            raise ValueError("t_max must exceed t_start")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1 or self.max_step <= 0:
            raise ValueError("step limits must be positive")


class EventKind(enum.Enum):
    ZERO_CROSSING = "ZeroCrossing"
    LOCAL_MIN = "LocalMin"
    LOCAL_MAX = "LocalMax"


_KIND = {k.EV_ZERO: EventKind.ZERO_CROSSING, k.EV_MIN: EventKind.LOCAL_MIN,
         k.EV_MAX: EventKind.LOCAL_MAX}


@dataclass(frozen=True)
class Event:
    kind: EventKind
    t: float
    phi: float
    dphi: float


class Termination(enum.Enum):
    HORIZON = "horizon"
    ZERO_CROSSING = "zero_crossing"
    NORM_EXCEEDED = "norm_exceeded"
    POSITIVE_MIN = "positive_local_min"
    STEP_BUDGET = "step_budget"
    STEP_UNDERFLOW = "step_underflow"


_STATUS = {
    k.HORIZON: Termination.HORIZON,
    k.ZERO_CROSSING: Termination.ZERO_CROSSING,
    k.NORM_EXCEEDED: Termination.NORM_EXCEEDED,
    k.POSITIVE_MIN: Termination.POSITIVE_MIN,
    k.STEP_BUDGET: Termination.STEP_BUDGET,
    k.STEP_UNDERFLOW: Termination.STEP_UNDERFLOW,
}


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted steps of one shot plus the step interpolants.

    ``y`` has columns ``(phi, dphi, acc)`` where ``acc`` is the running
    integral of ``|phi|^p sinh^{n-1}`` from ``t_start`` (without the sphere
    volume factor). ``dense[i]`` holds the interpolant coefficients on
    ``[t[i], t[i+1]]``.
    """

    t: np.ndarray
    y: np.ndarray
    dense: np.ndarray
    events: tuple[Event, ...]
    termination: Termination
    params: OdeParams | None = None
    alpha: float | None = None
    controls: IntegrationControls | None = None
    scale: float = 1.0

    @property
    def phi(self) -> np.ndarray:
        return self.y[:, 0]

    @property
    def dphi(self) -> np.ndarray:
        return self.y[:, 1]

    @property
    def accumulator(self) -> np.ndarray:
        return self.y[:, 2]

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def crossed_zero(self) -> bool:
        return self.termination is Termination.ZERO_CROSSING

    @property
    def zero_crossing(self) -> float | None:
        for ev in self.events:
            if ev.kind is EventKind.ZERO_CROSSING:
                return ev.t
        return None

    def events_of(self, kind: EventKind) -> list[Event]:
        return [ev for ev in self.events if ev.kind is kind]

    @property
    def energy_trace(self) -> np.ndarray:
        """Energy at every accepted sample, shape ``(len(t),)``."""
        return energy(self.params, self.phi, self.dphi)

    def evaluate(self, tq, comp: int = 0) -> np.ndarray:
        """Interpolated ``phi`` (comp=0), ``dphi`` (1) or accumulator (2) at ``tq``."""
        tq = np.atleast_1d(np.asarray(tq, dtype=float))
        order = np.argsort(tq, kind="stable")
        vals = np.empty_like(tq)
        if self.dense.shape[0] == 0:
            vals[:] = self.y[0, comp]
            return vals
        vals[order] = k.dense_eval_many(self.t, self.y, self.dense, tq[order], comp)
        return vals

    @classmethod
    def from_samples(cls, t, phi, dphi) -> "Trajectory":
        """Build a trajectory from samples with cubic Hermite interpolation.

        Used for synthetic probes; the accumulator column is zero.
        """
        t = np.asarray(t, dtype=float)
        y = np.zeros((t.size, k.DIM))
        y[:, 0] = phi
        y[:, 1] = dphi
        h = np.diff(t)[:, None]
        dense = np.zeros((t.size - 1, k.N_DENSE, k.DIM))
        for comp, deriv in ((0, y[:, 1]), (1, None)):
            dy = np.diff(y[:, comp])[:, None][:, 0]
            dense[:, 0, comp] = dy
            if deriv is not None:
                dense[:, 1, comp] = h[:, 0] * deriv[:-1] - dy
                dense[:, 2, comp] = 2 * dy - h[:, 0] * (deriv[1:] + deriv[:-1])
        return cls(t=t, y=y, dense=dense, events=(), termination=Termination.HORIZON)

    def to_csv(self, fh=None) -> str | None:
        """Write ``t, phi, dphi, energy`` rows with 17 significant digits."""
        own = fh is None
        if own:
            fh = io.StringIO()
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "phi", "dphi", "energy"])
        e = self.energy_trace
        for row in zip(self.t, self.phi, self.dphi, e):
            writer.writerow([f"{v:.17g}" for v in row])
        if own:
            return fh.getvalue()
        return None


def energy(params: OdeParams, phi, dphi):
    """E = dphi^2/2 - lam*phi^2/2 + phi^{q+1}/(q+1); the potential carries an
    extra factor lam in the normalized form."""
    lam, q = float(params.lam), float(params.q)
    phi = np.asarray(phi, dtype=float)
    pot = np.abs(phi) ** (q + 1.0) / (q + 1.0)
    if params.normalized:
        pot = lam * pot
    return 0.5 * np.asarray(dphi) ** 2 - 0.5 * lam * phi ** 2 + pot


def coth(t):
    """(e^{2t}+1)/(e^{2t}-1) evaluated without cancellation near 0."""
    return 1.0 + 2.0 / np.expm1(2.0 * np.asarray(t, dtype=float))


def series_start(params: OdeParams, alpha: float, t_start: float) -> tuple[float, float]:
    """Second-order Taylor data of the regular solution at ``t_start``.

    Near 0 the equation reads phi'' + (n-1)/t phi' = F(phi), which forces
    n phi''(0) = F(alpha).
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not 0 < t_start <= 1e-3:
        raise ValueError(f"t_start must lie in (0, 1e-3], got {t_start}")
    f = float(params.force(float(alpha)))
    n = params.n
    return alpha + f * t_start ** 2 / (2 * n), f * t_start / n


def series_accumulator(params: OdeParams, alpha: float, t_start: float, k_pow: float) -> float:
    """int_0^{t_start} phi^k sinh^{n-1} dt from the Taylor form of phi."""
    n = params.n
    c = float(params.force(float(alpha))) / (2 * n)
    t = t_start
    lead = t ** n / n + (n - 1) / 6.0 * t ** (n + 2) / (n + 2)
    return alpha ** k_pow * lead + k_pow * alpha ** (k_pow - 1) * c * t ** (n + 2) / (n + 2)


def integrate(params: OdeParams, alpha: float, controls: IntegrationControls | None = None,
              *, norm_cap: float = 0.0, stop_on_positive_min: bool = False) -> Trajectory:
    """Integrate from the series handoff until a zero crossing or ``t_max``.

    ``norm_cap`` (if positive) stops the shot once the running accumulator of
    ``|phi|^p sinh^{n-1}`` exceeds it; ``stop_on_positive_min`` stops at the
    first local minimum with phi > 0.
    """
    controls = controls or IntegrationControls()
    phi0, dphi0 = series_start(params, alpha, controls.t_start)
    acc0 = series_accumulator(params, alpha, controls.t_start, params.p)
    y0 = np.array([phi0, dphi0, acc0])
    ts, ys, Fs, status, ev_t, ev_y, ev_k = k.integrate_kernel(
        controls.t_start, y0, float(controls.t_max), float(params.lam), float(params.n - 1),
        float(params.q), params.p, bool(params.normalized), controls.rel_tol,
        controls.abs_tol, controls.max_step, controls.max_steps, float(norm_cap),
        bool(stop_on_positive_min),
    )
    events = tuple(Event(_KIND[int(kk)], float(tt), float(yy[0]), float(yy[1]))
                   for tt, yy, kk in zip(ev_t, ev_y, ev_k))
    traj = Trajectory(t=ts, y=ys, dense=Fs, events=events, termination=_STATUS[int(status)],
                      params=params, alpha=float(alpha), controls=controls)
    if traj.termination is Termination.STEP_BUDGET:
        raise StepBudgetExhausted(f"step budget {controls.max_steps} exhausted at t={traj.t_end:.6g}",
                                  traj)
    if traj.termination is Termination.STEP_UNDERFLOW:
        raise TolerancesNotMet(f"step size underflow at t={traj.t_end:.6g}", traj)
    if controls.check_energy:
        check_energy_monotone(traj)
    return traj


def energy_slack(e_prev, controls: IntegrationControls):
    return 100.0 * np.maximum(controls.abs_tol, controls.rel_tol * np.abs(e_prev))


def check_energy_monotone(traj: Trajectory) -> None:
    e = traj.energy_trace
    if e.size < 2:
        return
    rise = np.diff(e) - energy_slack(e[:-1], traj.controls)
    bad = np.flatnonzero(rise > 0)
    if bad.size:
        i = int(bad[0])
        raise EnergyIncrease(
            f"energy increased from {e[i]:.17g} to {e[i + 1]:.17g} at t={traj.t[i + 1]:.6g}", traj)


def rescale_normalized(traj: Trajectory, lam: float) -> Trajectory:
    """Map a normalized-form trajectory to the unnormalized equation.

    phi -> lam^{1/(q-1)} phi solves phi'' + (n-1)coth phi' = lam phi - phi^q.
    """
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    params = traj.params
    q = float(params.q)
    c = float(lam) ** (1.0 / (q - 1.0))
    p = params.p
    factors = np.array([c, c, c ** p])
    y = traj.y * factors
    dense = traj.dense * factors
    events = tuple(replace(ev, phi=ev.phi * c, dphi=ev.dphi * c) for ev in traj.events)
    new_params = OdeParams(lam=lam, n=params.n, q=params.q, normalized=False)
    alpha = None if traj.alpha is None else traj.alpha * c
    return Trajectory(t=traj.t, y=y, dense=dense, events=events, termination=traj.termination,
                      params=new_params, alpha=alpha, controls=traj.controls,
                      scale=traj.scale * c)
