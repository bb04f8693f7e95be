"""sinh-weighted integrals of radial profiles and the tail-truncation bound.

For a radial function f(x) = phi(|x|) on H^n,

    int_{H^n} f^k   = V(S^{n-1}) int_0^inf phi^k    sinh^{n-1}(t) dt
    int_{H^n} |df|^2 = V(S^{n-1}) int_0^inf phi'^2  sinh^{n-1}(t) dt
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dimension import Dimensions, sphere_volume
from .ode import Trajectory, series_accumulator

GAUSS_NODES = 5
DEFAULT_SPACING = 1e-3

_GL_X, _GL_W = np.polynomial.legendre.leggauss(GAUSS_NODES)


@dataclass(frozen=True)
class NormBundle:
    lp: float
    l2: float
    grad2: float
    tail_bound_p: float
    truncation_t: float
    p: float

    @property
    def lp_power(self) -> float:
        """||f||_p^p."""
        return self.lp ** self.p


def _panels(knots: np.ndarray, t0: float, t1: float, spacing: float):
    """Gauss nodes and weights for panels no wider than ``spacing`` that
    respect the step boundaries in ``knots``."""
    edges = knots[(knots > t0) & (knots < t1)]
    edges = np.concatenate(([t0], edges, [t1]))
    widths = np.diff(edges)
    counts = np.maximum(1, np.ceil(widths / spacing).astype(int))
    starts = np.repeat(edges[:-1], counts)
    sub = np.repeat(widths / counts, counts)
    offs = np.concatenate([np.arange(c) for c in counts]) * sub
    a = starts + offs
    mid = a + 0.5 * sub
    nodes = (mid[:, None] + 0.5 * sub[:, None] * _GL_X[None, :]).ravel()
    weights = (0.5 * sub[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


def sinh_weighted_integral(func, n: int, t0: float, t1: float, knots=None,
                           spacing: float = DEFAULT_SPACING) -> float:
    """int_{t0}^{t1} func(t) sinh^{n-1}(t) dt by composite Gauss-Legendre."""
    if t1 <= t0:
        return 0.0
    knots = np.asarray([] if knots is None else knots, dtype=float)
    nodes, weights = _panels(knots, t0, t1, spacing)
    return float(np.dot(weights, func(nodes) * np.sinh(nodes) ** (n - 1)))


def _cut(trajectory: Trajectory, t_cut):
    if t_cut is None:
        return trajectory.t_end
    if t_cut > trajectory.t_end * (1 + 1e-14):
        raise ValueError(f"t_cut={t_cut} beyond the last sample {trajectory.t_end}")
    return min(float(t_cut), trajectory.t_end)


def weighted_lk(trajectory: Trajectory, k: float, n: int, t_cut: float | None = None,
                spacing: float = DEFAULT_SPACING) -> float:
    """V(S^{n-1}) int_0^{t_cut} |phi|^k sinh^{n-1} dt.

    The piece on [0, t_start] comes from the Taylor form of phi.
    """
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    t1 = _cut(trajectory, t_cut)
    t0 = trajectory.t_start
    body = sinh_weighted_integral(lambda t: np.abs(trajectory.evaluate(t, 0)) ** k, n, t0, t1,
                                  trajectory.t, spacing)
    head = 0.0
    if trajectory.params is not None and trajectory.alpha is not None:
        head = series_accumulator(trajectory.params, trajectory.alpha, t0, k)
    return sphere_volume(n - 1) * (head + body)


def weighted_grad2(trajectory: Trajectory, n: int, t_cut: float | None = None,
                   spacing: float = DEFAULT_SPACING) -> float:
    """V(S^{n-1}) int_0^{t_cut} phi'^2 sinh^{n-1} dt."""
    t1 = _cut(trajectory, t_cut)
    t0 = trajectory.t_start
    body = sinh_weighted_integral(lambda t: trajectory.evaluate(t, 1) ** 2, n, t0, t1,
                                  trajectory.t, spacing)
    head = 0.0
    if trajectory.params is not None and trajectory.alpha is not None:
        # phi' ~ F(alpha) t / n near the origin
        f = float(trajectory.params.force(trajectory.alpha))
        head = (f / n) ** 2 * t0 ** (n + 2) / (n + 2)
    return sphere_volume(n - 1) * (head + body)


def tail_bound(eps: float, r: float, dims: Dimensions, lp_upper: float, q_upper: float) -> float:
    """Upper bound on int_{|x|>t} f^p once phi(t) < eps.

    Uses f^p <= eps^{p-2} f^2 beyond t together with the lower bound
    D_{m,n} ||f||_2^2 on the Rayleigh numerator.
    """
    for name, v in (("eps", eps), ("r", r), ("lp_upper", lp_upper), ("q_upper", q_upper)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    der = dims.derived
    n, m = dims.n, dims.m
    p = float(der.p)
    denom = r ** (m / (m + n)) * der.vol_sphere_m ** (2.0 / (m + n)) * float(der.d)
    return eps ** (p - 2.0) * lp_upper ** 2 * q_upper / denom


def choose_truncation(mid: Trajectory, lo: Trajectory, hi: Trajectory, smallness: float,
                      spread_tol: float = 1e-3, samples: int = 20001) -> tuple[float, float]:
    """Cut-off where the computed ground state stops being trustworthy.

    Returns ``(t, eps)``: the first grid point where ``phi`` drops below
    ``smallness`` or where the two bracketing shots disagree by more than
    ``spread_tol`` relative, and an upper bound for phi there.
    """
    t_hi = min(mid.t_end, lo.t_end, hi.t_end)
    grid = np.linspace(mid.t_start, t_hi, samples)
    pm = mid.evaluate(grid)
    pl = lo.evaluate(grid)
    ph = hi.evaluate(grid)
    bad = (pm < smallness) | (np.abs(ph - pl) > spread_tol * np.abs(pm)) | (pm <= 0)
    idx = int(np.argmax(bad)) if bad.any() else samples - 1
    idx = max(idx, 1)
    eps = float(max(pm[idx], pl[idx], ph[idx]))
    return float(grid[idx]), eps
