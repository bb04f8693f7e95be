"""H^n-Yamabe constants Q_{n,m}(r) of H^n x S^m with metric g_h + r g_0."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .dimension import Dimensions, lambda_of_r, sphere_yamabe
from .errors import UnknownQ0
from .norms import (DEFAULT_SPACING, NormBundle, choose_truncation, tail_bound, weighted_grad2,
                    weighted_lk)
from .ode import IntegrationControls, OdeParams, rescale_normalized
from .shooting import DEFAULT_WIDTH_TOL, SMALLNESS, find_ground_state

log = logging.getLogger(__name__)

# Q_{n,m}(0) = Y_{R^n}(R^n x S^m, g_e + g_0), published to five decimals.
Q0_TABLE = {
    (2, 2): 59.40481,
    (2, 3): 78.18644,
    (3, 2): 75.39687,
}

# self-consistent inflation of ||f||_p and Q used in the tail bound
BOUND_INFLATION = 1.01


@dataclass(frozen=True)
class SolverSettings:
    controls: IntegrationControls = field(default_factory=IntegrationControls)
    width_tol: float = DEFAULT_WIDTH_TOL
    smallness: float = SMALLNESS
    cutoff: float = 1e-13
    spacing: float = DEFAULT_SPACING
    spread_tol: float = 1e-3


@dataclass
class QResult:
    dims: Dimensions
    r: float
    lam: float
    alpha_lambda: float
    normalized_form: bool
    norms: NormBundle
    q_value: float
    uncertainty: float
    diagnostics: dict

    def to_dict(self) -> dict:
        return {
            "n": self.dims.n,
            "m": self.dims.m,
            "r": self.r,
            "lambda": self.lam,
            "alpha_lambda": self.alpha_lambda,
            "normalized_form": self.normalized_form,
            "q_value": self.q_value,
            "uncertainty": self.uncertainty,
            "norms": asdict(self.norms),
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class BoundaryConstants:
    q0: float | None
    q1: float


def q_from_lp(dims: Dimensions, r: float, lp: float) -> float:
    """a r^{m/(n+m)} V(S^m)^{2/(n+m)} ||f||_p^{4/(n+m-2)}."""
    der = dims.derived
    n, m = dims.n, dims.m
    return (float(der.a) * r ** (m / (n + m)) * der.vol_sphere_m ** (2.0 / (n + m))
            * lp ** (4.0 / (n + m - 2)))


def ode_params(dims: Dimensions, r) -> OdeParams:
    lam = float(lambda_of_r(dims, r))
    return OdeParams(lam=lam, n=dims.n, q=float(dims.derived.q), normalized=lam > 0)


def compute_q(dims: Dimensions, r: float, settings: SolverSettings | None = None, *,
              alpha_guess: float | None = None, allow_r_above_one: bool = False) -> QResult:
    """Solve for the ground state at ``r`` and assemble Q_{n,m}(r).

    ``alpha_guess`` is an initial value in the form actually integrated
    (normalized when lambda > 0); it only seeds the bracket.
    """
    settings = settings or SolverSettings()
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    if r > 1 and not allow_r_above_one:
        raise ValueError(f"r={r} outside (0, 1]; pass allow_r_above_one to override")
    r_exact = Fraction(r) if isinstance(r, (int, Fraction)) else r
    r = float(r)
    params = ode_params(dims, r_exact)
    lam = float(params.lam)
    gs = find_ground_state(params, settings.controls, settings.width_tol,
                           alpha_guess=alpha_guess, smallness=settings.smallness)
    mid, lo, hi = gs.trajectory, gs.lo_trajectory, gs.hi_trajectory
    if params.normalized:
        mid, lo, hi = (rescale_normalized(tr, lam) for tr in (mid, lo, hi))

    cutoff = settings.cutoff * (mid.scale if params.normalized else 1.0)
    t_cut, eps = choose_truncation(mid, lo, hi, cutoff, settings.spread_tol)

    n = dims.n
    p = float(dims.derived.p)
    ip = weighted_lk(mid, p, n, t_cut, settings.spacing)
    l2sq = weighted_lk(mid, 2.0, n, t_cut, settings.spacing)
    g2 = weighted_grad2(mid, n, t_cut, settings.spacing)
    lp = ip ** (1.0 / p)
    q_value = q_from_lp(dims, r, lp)

    tb = tail_bound(eps, r, dims, lp * BOUND_INFLATION, q_value * BOUND_INFLATION)
    ip_lo = weighted_lk(lo, p, n, t_cut, settings.spacing)
    ip_hi = weighted_lk(hi, p, n, t_cut, settings.spacing)
    spread = abs(ip_hi - ip_lo)
    expo = (p - 2.0) / p
    uncertainty = q_value * expo * (spread + tb) / ip

    t_grid = mid.t[mid.t <= t_cut]
    monotone = bool(np.all(mid.evaluate(t_grid, 1) <= 0))
    if not monotone:
        log.warning("ground state for %s at r=%g is not monotone before t=%g", dims, r, t_cut)

    a = float(dims.derived.a)
    s = a * lam
    rayleigh = (a * g2 + s * l2sq - a * ip) / (a * ip)

    norms = NormBundle(lp=lp, l2=math.sqrt(l2sq), grad2=math.sqrt(g2), tail_bound_p=tb,
                       truncation_t=t_cut, p=p)
    diagnostics = {
        "bisection_iterations": gs.iterations,
        "shots": len(gs.history),
        "bracket": [gs.bracket.alpha_lo, gs.bracket.alpha_hi],
        "truncation_t": t_cut,
        "phi_at_truncation": eps,
        "tail_bound": tb,
        "tail_relative": tb / ip,
        "bracket_spread_relative": spread / ip,
        "rayleigh_residual": rayleigh,
        "monotone": monotone,
        "tolerances": {
            "rel_tol": settings.controls.rel_tol,
            "abs_tol": settings.controls.abs_tol,
            "t_start": settings.controls.t_start,
            "t_max": settings.controls.t_max,
            "width_tol": settings.width_tol,
            "smallness": settings.smallness,
            "cutoff": settings.cutoff,
            "spacing": settings.spacing,
        },
    }
    return QResult(dims=dims, r=r, lam=lam, alpha_lambda=gs.alpha,
                   normalized_form=params.normalized, norms=norms, q_value=q_value,
                   uncertainty=uncertainty, diagnostics=diagnostics)


def boundary_constants(dims: Dimensions) -> BoundaryConstants:
    """Stored Q_{n,m}(0) and Q_{n,m}(1) = Y(S^{n+m}).

    Raises :class:`UnknownQ0` (carrying q1) when no Q(0) value is stored.
    """
    q1 = sphere_yamabe(dims.k)
    key = (dims.n, dims.m)
    if key not in Q0_TABLE:
        raise UnknownQ0(f"Q(0) not stored for (n, m) = {key}", q1=q1)
    return BoundaryConstants(q0=Q0_TABLE[key], q1=q1)


def small_r_lower_bound(dims: Dimensions, r: float, q0: float | None = None) -> float:
    """Lower bound (m(m-1) - r n(n-1)) / (m(m-1)) * Q(0) for small r."""
    n, m = dims.n, dims.m
    if not 0 < r < m * (m - 1) / (n * (n - 1)):
        raise ValueError(f"r={r} outside (0, m(m-1)/(n(n-1)))")
    if q0 is None:
        q0 = boundary_constants(dims).q0
    return (m * (m - 1) - r * n * (n - 1)) / (m * (m - 1)) * q0


def scaling_upper_bound(q_at_r0: float, r0: float, r1: float, dims: Dimensions) -> float:
    """Upper bound (r1/r0)^{m/(n+m)} Q(r0) for Q(r1) when r0 <= r1."""
    if not r0 > 0:
        raise ValueError(f"r0 must be positive, got {r0}")
    if r1 < r0:
        raise ValueError(f"need r0 <= r1, got r0={r0}, r1={r1}")
    return (r1 / r0) ** (dims.m / dims.k) * q_at_r0
