"""Ball and lens volumes in R^d and the connection probability ``p_conn``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

__all__ = ["unit_ball_volume", "ball_volume", "lens_volume", "p_conn", "LensGeometry"]


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(1 + d / 2)


def ball_volume(d: int, R: float) -> float:
    """Volume of a radius-``R`` ball in ``d`` dimensions."""
    if d < 1 or R <= 0:
        raise ValueError("need d >= 1 and R > 0")
    if d == 1:
        return 2.0 * R
    return unit_ball_volume(d) * R ** d


def lens_volume(d: int, R: float, r):
    """Volume of the intersection of two radius-``R`` balls with centres ``r`` apart.

    The lens is two spherical caps of height ``R - r/2``; its volume is
    ``omega_d(R) * I_x((d+1)/2, 1/2)`` with ``x = 1 - r^2/(4R^2)``. Accepts
    scalars or arrays; zero for ``r >= 2R``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("centre distance must be non-negative")
    if d == 1:
        out = np.maximum(2.0 * R - r, 0.0)
    else:
        x = np.clip(1.0 - r * r / (4.0 * R * R), 0.0, 1.0)
        out = ball_volume(d, R) * special.betainc((d + 1) / 2.0, 0.5, x)
        out = np.where(r >= 2 * R, 0.0, out)
    return float(out) if out.ndim == 0 else out


def p_conn(d: int, R: float = 1.0) -> float:
    """Probability that two uniform points of a radius-``R`` ball are within ``R``.

    Averages ``lens_volume(r) / omega_d(R)`` against the neighbour distance
    density ``d r^(d-1) / R^d`` on ``[0, R]``. The value does not depend on R.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    omega = ball_volume(d, R)

    def integrand(r: float) -> float:
        return lens_volume(d, R, r) / omega * d * r ** (d - 1) / R ** d

    value, _ = integrate.quad(integrand, 0.0, R, epsabs=1e-12, epsrel=1e-12, limit=200)
    return value


@dataclass(frozen=True)
class LensGeometry:
    """Shared and exclusive neighbourhood volumes of two balls of radius ``R``."""

    dim: int
    radius: float

    @property
    def omega(self) -> float:
        return ball_volume(self.dim, self.radius)

    def lambda2(self, r):
        """Shared volume ``vol(B_o(R) & B_x(R))`` at distance ``r``."""
        return lens_volume(self.dim, self.radius, r)

    def lambda1(self, r):
        """Volume of ``B_o(R)`` outside ``B_x(R)``."""
        return self.omega - self.lambda2(r)
