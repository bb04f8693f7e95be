"""Classification of shots into the families N / P / ground state, and the
bisection on the initial value that isolates the ground state."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import Indeterminate, SeedFailure
from .ode import (EventKind, IntegrationControls, OdeParams, Termination, Trajectory, energy,
                  integrate)

DEFAULT_WIDTH_TOL = 1e-14
SMALLNESS = 1e-8
# sinh(t)^(n-1) must stay finite in double precision
MAX_HORIZON = 200.0


class Family(enum.Enum):
    N = "N"
    P = "P"
    GROUND_STATE_CANDIDATE = "GroundStateCandidate"

    @property
    def below(self) -> bool:
        """True for verdicts that place alpha at or below the ground state."""
        return self is not Family.N


@dataclass(frozen=True)
class SolutionClass:
    tag: Family
    evidence: dict


def classify(params: OdeParams, trajectory: Trajectory, reference_n_norm: float | None = None,
             smallness: float = SMALLNESS) -> SolutionClass:
    """Decide the family of a shot from its events and accumulators.

    ``reference_n_norm`` is the accumulated ``int phi^p sinh^{n-1}`` of a
    known N solution with larger initial value; a positive shot whose running
    accumulator exceeds it lies below the ground state.
    """
    lam = float(params.lam)
    if trajectory.crossed_zero:
        ev = trajectory.events_of(EventKind.ZERO_CROSSING)[0]
        return SolutionClass(Family.N, {"b": ev.t, "dphi_b": ev.dphi,
                                        "energy_b": float(energy(params, 0.0, ev.dphi))})
    if lam > 0:
        for ev in trajectory.events_of(EventKind.LOCAL_MIN):
            if ev.phi > 0:
                return SolutionClass(Family.P, {"local_min_t": ev.t, "local_min_phi": ev.phi})
        # overdamped approach to the equilibrium: no local minimum, but the
        # shot ends closer to 1 than to 0 (in normalized units)
        equilibrium = 1.0 if params.normalized else params.equilibrium_scale
        level = float(trajectory.phi[-1]) / equilibrium
        if trajectory.termination is Termination.HORIZON and level > 0.5:
            return SolutionClass(Family.P, {"t_max": trajectory.t_end, "phi_end_normalized": level})
    else:
        acc = float(trajectory.accumulator[-1])
        if reference_n_norm is not None and acc > reference_n_norm:
            return SolutionClass(Family.P, {"accumulated": acc, "reference": reference_n_norm})
    if trajectory.termination is Termination.HORIZON:
        phi = trajectory.phi
        decreasing = bool(np.all(np.diff(phi) <= 0))
        if decreasing and 0 < phi[-1] < smallness:
            return SolutionClass(Family.GROUND_STATE_CANDIDATE,
                                 {"t_max": trajectory.t_end, "phi_end": float(phi[-1])})
    raise Indeterminate(
        f"no decisive evidence for alpha={trajectory.alpha!r} (termination "
        f"{trajectory.termination.value}, phi_end={trajectory.phi[-1]:.3g})")


@dataclass(frozen=True)
class Bracket:
    alpha_lo: float
    alpha_hi: float
    width_tol: float

    def __post_init__(self):
        if not 0 < self.alpha_lo < self.alpha_hi:
            raise ValueError("bracket requires 0 < alpha_lo < alpha_hi")

    @property
    def width(self) -> float:
        return (self.alpha_hi - self.alpha_lo) / self.alpha_hi


@dataclass
class GroundState:
    """Outcome of :func:`find_ground_state`."""

    alpha: float
    trajectory: Trajectory
    bracket: Bracket
    lo_trajectory: Trajectory
    hi_trajectory: Trajectory
    iterations: int
    history: list = field(default_factory=list)

    def __iter__(self):
        yield self.alpha
        yield self.trajectory


class _Shooter:
    def __init__(self, params, controls, smallness):
        self.params = params
        self.controls = controls
        self.smallness = smallness
        self.lam = float(params.lam)
        self.reference = None
        self.history = []

    def shoot(self, alpha):
        cap = self.reference if (self.lam <= 0 and self.reference is not None) else 0.0
        controls = self.controls
        while True:
            traj = integrate(self.params, alpha, controls, norm_cap=cap,
                             stop_on_positive_min=self.lam > 0)
            try:
                verdict = classify(self.params, traj, self.reference, self.smallness)
                break
            except Indeterminate:
                # slowly decaying positive shots need a longer horizon before
                # the norm test becomes decisive
                if cap == 0.0 or controls.t_max >= MAX_HORIZON:
                    raise
                controls = replace(controls, t_max=min(2 * controls.t_max, MAX_HORIZON))
        if verdict.tag is Family.N:
            self.reference = float(traj.accumulator[-1])
        self.history.append((float(alpha), verdict.tag.value))
        return verdict, traj


def find_ground_state(params: OdeParams, controls: IntegrationControls | None = None,
                      width_tol: float = DEFAULT_WIDTH_TOL, *, alpha_guess: float | None = None,
                      smallness: float = SMALLNESS, max_seed: int = 80,
                      max_iter: int = 200) -> GroundState:
    """Bisect on phi(0) for the unique positive finite-energy solution.

    The upper end of the bracket is grown until the shot crosses zero and the
    lower end shrunk until it does not. ``alpha_guess`` narrows the initial
    bracket; correctness does not depend on it.
    """
    controls = controls or IntegrationControls()
    sh = _Shooter(params, controls, smallness)

    if alpha_guess is not None and alpha_guess > 0:
        hi, spread = alpha_guess * (1 + 1e-4), 1e-4
    else:
        hi, spread = (2.0 if params.normalized else 1.0), 1.0
    # Before any zero-crossing shot exists there is no reference norm, so a
    # shot that merely fails to cross is only recorded as a lower candidate.
    lo = None
    for _ in range(max_seed):
        try:
            verdict, hi_traj = sh.shoot(hi)
        except Indeterminate:
            verdict = None
        if verdict is not None and verdict.tag is Family.N:
            break
        lo = hi
        hi = hi * (1 + spread) if alpha_guess is not None else hi * 2.0
        spread = min(spread * 10, 1.0)
    else:
        raise SeedFailure(f"no zero-crossing shot found up to alpha={hi:.6g}")

    if lo is None:
        if alpha_guess is not None and alpha_guess > 0:
            lo, spread = alpha_guess * (1 - 1e-4), 1e-4
        elif params.normalized:
            lo, spread = 0.5, 0.5
        else:
            lo, spread = hi / 2.0, 0.5
    else:
        spread = 1e-4 if alpha_guess is not None else 0.5
    lo = min(lo, hi * (1 - 1e-12))
    for _ in range(max_seed):
        verdict, traj = sh.shoot(lo)
        if verdict.tag.below:
            lo_traj = traj
            break
        hi, hi_traj = lo, traj
        lo = lo * (1 - spread) if spread < 0.5 else lo / 2.0
        spread = min(spread * 10, 0.5)
    else:
        raise SeedFailure(f"no positive shot found down to alpha={lo:.6g}")

    it = 0
    while (hi - lo) / hi > width_tol and it < max_iter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        verdict, traj = sh.shoot(mid)
        if verdict.tag is Family.N:
            hi, hi_traj = mid, traj
        else:
            lo, lo_traj = mid, traj
        it += 1

    alpha = 0.5 * (lo + hi)
    mid_traj = integrate(params, alpha, controls)
    return GroundState(alpha=alpha, trajectory=mid_traj,
                       bracket=Bracket(lo, hi, width_tol), lo_trajectory=lo_traj,
                       hi_trajectory=hi_traj, iterations=it, history=sh.history)
