"""Dimensional constants for products H^n x S^m.

All rational quantities are kept as :class:`fractions.Fraction`; floats only
appear for sphere volumes and when handing values to the integrator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational


@dataclass(frozen=True)
class Dimensions:
    """Dimensions of the hyperbolic factor ``n`` and the sphere factor ``m``."""

    n: int
    m: int

    def __post_init__(self):
        for name in ("n", "m"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            if value < 2:
                raise ValueError(f"{name} must be >= 2, got {value}")

    @property
    def k(self) -> int:
        return self.n + self.m

    @cached_property
    def derived(self) -> "DerivedConstants":
        return derive(self)


@dataclass(frozen=True)
class DerivedConstants:
    a: Fraction
    p: Fraction
    q: Fraction
    c: Fraction
    d: Fraction
    vol_sphere_m: float
    vol_sphere_n_minus_1: float


def sphere_volume(k: int) -> float:
    """Volume of the round unit sphere S^k, evaluated through log-Gamma."""
    if k < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {k}")
    half = (k + 1) / 2.0
    return math.exp(math.log(2.0) + half * math.log(math.pi) - math.lgamma(half))


def derive(dims: Dimensions) -> DerivedConstants:
    n, m, k = dims.n, dims.m, dims.k
    a = Fraction(4 * (k - 1), k - 2)
    p = Fraction(2 * k, k - 2)
    c = Fraction((n - 1) * (m - 1), m + n - 2)
    d = Fraction(m + n - 1, m + n - 2) * (n - 1) ** 2 + m * (m - 1) - n * (n - 1)
    return DerivedConstants(
        a=a,
        p=p,
        q=p - 1,
        c=c,
        d=d,
        vol_sphere_m=sphere_volume(m),
        vol_sphere_n_minus_1=sphere_volume(n - 1),
    )


def _is_exact(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


def lambda_of_scalar(dims: Dimensions, s):
    """Coefficient lambda = s / a_{n+m} for total scalar curvature ``s``."""
    a = dims.derived.a
    if _is_exact(s):
        return Fraction(s) / a
    return float(s) / float(a)


def scalar_curvature(dims: Dimensions, r):
    """Scalar curvature m(m-1)/r - n(n-1) of g_h^n + r g_0^m."""
    n, m = dims.n, dims.m
    if _is_exact(r):
        return Fraction(m * (m - 1)) / Fraction(r) - n * (n - 1)
    return m * (m - 1) / float(r) - n * (n - 1)


def lambda_of_r(dims: Dimensions, r):
    """lambda(r) = (-n(n-1) + m(m-1)/r) / a_{n+m}.

    Exact (a Fraction) when ``r`` is an int or Fraction, float otherwise.
    """
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    return lambda_of_scalar(dims, scalar_curvature(dims, r))


class Regime(enum.Enum):
    POSITIVE_ACHIEVED = "PositiveAchieved"
    POSITIVE_NOT_ACHIEVED = "PositiveNotAchieved"
    MINUS_INFINITY = "MinusInfinity"


def regime(s_g, dims: Dimensions) -> Regime:
    """Classify the H^n-Yamabe constant by the scalar curvature ``s_g`` of the
    compact factor: positive and achieved above c_{m,n}, positive but not
    achieved at c_{m,n}, and -inf below it."""
    c = dims.derived.c
    if _is_exact(s_g):
        s, thr = Fraction(s_g), c
    else:
        s, thr = float(s_g), float(c)
    if s > thr:
        return Regime.POSITIVE_ACHIEVED
    if s == thr:
        return Regime.POSITIVE_NOT_ACHIEVED
    return Regime.MINUS_INFINITY


def sphere_yamabe(k: int) -> float:
    """Yamabe constant k(k-1) V(S^k)^{2/k} of the round sphere S^k."""
    if k < 3:
        raise ValueError(f"k must be >= 3, got {k}")
    return k * (k - 1) * sphere_volume(k) ** (2.0 / k)
