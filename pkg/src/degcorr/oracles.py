"""Independent cross-checks for the geometry and moment formulas.

None of these share code with the paths they check: lens volumes are found by
hit-or-miss sampling against an envelope built from ball volumes only,
``p_conn`` by sampling point pairs in a ball, and moments by numerical
integration of the weight density.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .models import WeightLaw
from .rng import stream

__all__ = ["lens_volume_mc", "p_conn_mc", "moment_quadrature", "uniform_in_ball"]


def _ball_vol(d: int, R: float) -> float:
    return math.pi ** (d / 2) / math.gamma(1 + d / 2) * R ** d


def uniform_in_ball(rng: np.random.Generator, size: int, d: int, R: float = 1.0) -> np.ndarray:
    """Uniform points in a ``d``-ball by rejection from the enclosing cube."""
    out = np.empty((0, d))
    while len(out) < size:
        need = size - len(out)
        batch = rng.uniform(-R, R, size=(int(need * 2 ** d / _ball_vol(d, 1.0) * 1.1) + 16, d))
        batch = batch[np.einsum("ij,ij->i", batch, batch) <= R * R]
        out = np.concatenate([out, batch[:need]])
    return out


def lens_volume_mc(d: int, R: float, r: float, samples: int = 10**7, seed: int = 0,
                   slabs: int = 64) -> tuple[float, float]:
    """Monte Carlo volume of two intersecting radius-``R`` balls; returns ``(value, stderr)``.

    The lens is symmetric about the mid-plane, so it is twice the cap
    ``{x : x_1 >= r/2, |x| <= R}``. The cap is covered by ``slabs`` cylinders
    along ``x_1``, each as wide as the cap's cross-section at its lower end;
    samples are split over the cylinders in proportion to their volume and
    accepted when they fall inside the ball.
    """
    if r >= 2 * R:
        return 0.0, 0.0
    a = r / 2.0
    if d == 1:
        return 2.0 * (R - a), 0.0
    rng = stream(seed, "oracle", "lens", d)
    edges = np.linspace(a, R, slabs + 1)
    radii = np.sqrt(np.maximum(R * R - edges[:-1] ** 2, 0.0))
    vols = np.diff(edges) * _ball_vol(d - 1, 1.0) * radii ** (d - 1)
    alloc = np.maximum(np.floor(samples * vols / vols.sum()).astype(int), 2)
    est, var = 0.0, 0.0
    for lo, hi, rho, vol, m in zip(edges[:-1], edges[1:], radii, vols, alloc):
        x1 = rng.uniform(lo, hi, m)
        y = uniform_in_ball(rng, m, d - 1, rho) if d > 2 else rng.uniform(-rho, rho, (m, 1))
        hit = x1 * x1 + np.einsum("ij,ij->i", y, y) <= R * R
        q = hit.mean()
        est += vol * q
        var += vol * vol * q * (1 - q) / m
    return 2 * est, 2 * math.sqrt(var)


def p_conn_mc(d: int, samples: int = 10**7, seed: int = 0) -> tuple[float, float]:
    """Fraction of uniform point pairs in the unit ball lying within distance 1."""
    rng = stream(seed, "oracle", "pconn", d)
    hits = 0
    done = 0
    chunk = 10**6
    while done < samples:
        m = min(chunk, samples - done)
        x = uniform_in_ball(rng, m, d)
        y = uniform_in_ball(rng, m, d)
        diff = x - y
        hits += int(np.count_nonzero(np.einsum("ij,ij->i", diff, diff) <= 1.0))
        done += m
    q = hits / samples
    return q, math.sqrt(q * (1 - q) / samples)


def _density(w: WeightLaw):
    if w.kind == "exponential":
        lam = w.params[0]
        return (lambda x: lam * math.exp(-lam * x)), 0.0
    if w.kind == "gamma":
        shape, rate = w.params
        c = rate ** shape / math.gamma(shape)
        return (lambda x: c * x ** (shape - 1) * math.exp(-rate * x)), 0.0
    if w.kind == "pareto":
        shape, scale = w.params
        return (lambda x: shape * scale ** shape / x ** (shape + 1)), scale
    return None, None


def moment_quadrature(w: WeightLaw, order: int) -> float:
    """``E[W**order]`` by adaptive quadrature of the density (sums for atoms).

    Returns ``inf`` when the integral diverges.
    """
    if w.kind == "constant":
        return w.params[0] ** order
    if w.kind == "finite_discrete":
        values, probs = w.params
        return math.fsum(p * v ** order for v, p in zip(values, probs))
    pdf, lo = _density(w)
    if w.kind == "pareto" and w.params[0] <= order:
        return math.inf
    value, _ = integrate.quad(lambda x: x ** order * pdf(x), lo, math.inf, epsabs=1e-12, epsrel=1e-10, limit=400)
    return value
