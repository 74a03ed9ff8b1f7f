"""Joint law of the root degree and a uniform neighbour's degree in the local limit.

For the rank-1 IRG the limit is a Galton-Watson tree: ``d_o ~ Po(s W)`` and,
independently, ``d_V ~ 1 + Po(s W*)`` with ``W*`` the size-biased weight
(``s = 1`` for the sum-of-weights normalisation). For the RGG,
``d_o ~ Po(p omega_d(R))`` and given ``d_o = k`` and neighbour distance ``r``,
``d_V = 1 + Po(p lambda_1(r)) + Bin(k - 1, lambda_2(r) / omega_d(R))``.

Samplers are vectorised; where ``d_o = 0`` no neighbour exists and the
returned ``d_V`` entry is :data:`ABSENT`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..models import RggParams, WeightLaw
from .geometry import LensGeometry, ball_volume

__all__ = ["ABSENT", "LimitLaw", "rv_sampler", "sample_joint_rgg", "sample_joint_irg"]

ABSENT = -1


def rv_sampler(geom: LensGeometry, rng: np.random.Generator | None = None, size=None, *, u=None):
    """Distance from the root to a uniform neighbour: ``R * U**(1/d)``.

    Pass ``u`` to evaluate the inverse CDF at given quantiles instead of drawing.
    """
    if u is None:
        u = rng.random(size)
    return geom.radius * np.asarray(u, dtype=float) ** (1.0 / geom.dim)


@dataclass(frozen=True)
class LimitLaw:
    kind: str
    weight: WeightLaw | None = None
    rgg: RggParams | None = None
    degree_scale: float = 1.0

    @classmethod
    def irg(cls, weight: WeightLaw, degree_scale: float = 1.0) -> LimitLaw:
        return cls("irg", weight=weight, degree_scale=float(degree_scale))

    @classmethod
    def irg_for_normalization(cls, weight: WeightLaw, normalization: str) -> LimitLaw:
        """Limit of :func:`~degcorr.models.sample_irg` under the given normalisation.

        Dividing ``W_i W_j`` by ``n`` instead of ``sum W`` multiplies every
        expected degree by ``E[W]``.
        """
        if normalization == "n":
            return cls.irg(weight, weight.mean)
        if normalization == "total_weight":
            return cls.irg(weight, 1.0)
        raise ValueError(f"unknown normalization {normalization!r}")

    @classmethod
    def from_rgg(cls, params: RggParams) -> LimitLaw:
        return cls("rgg", rgg=params)

    @property
    def geometry(self) -> LensGeometry:
        if self.rgg is None:
            raise AttributeError("only RGG limit laws have a lens geometry")
        return LensGeometry(self.rgg.dim, self.rgg.radius)

    @property
    def mean_degree(self) -> float:
        if self.kind == "irg":
            return self.degree_scale * self.weight.mean
        return self.rgg.edge_prob * ball_volume(self.rgg.dim, self.rgg.radius)

    def require_root_moment(self, order: int) -> None:
        """Raise :class:`InfiniteMoment` unless ``E[d_o**order]`` is finite."""
        # A mixed Poisson has the same finite moments as its mixing weight.
        if self.kind == "irg" and order > 0:
            self.weight.moment(order)

    def describe(self) -> dict:
        if self.kind == "irg":
            return {"kind": "irg", "weight": str(self.weight), "degree_scale": self.degree_scale}
        return {"kind": "rgg", "dim": self.rgg.dim, "radius": self.rgg.radius, "p": self.rgg.edge_prob}

    # -- sampling ------------------------------------------------------------

    def sample_root_degree(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "irg":
            w = self.weight.sample(rng, size)
            return rng.poisson(self.degree_scale * w)
        return rng.poisson(self.mean_degree, size)

    def sample_joint(self, rng: np.random.Generator, size: int, *, r=None) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``size`` pairs ``(d_o, d_V)``; ``d_V`` is ABSENT where ``d_o = 0``.

        ``r`` (RGG only) fixes the root-neighbour distance instead of drawing it.
        """
        if self.kind == "irg":
            return _joint_irg(self, rng, size)
        return _joint_rgg(self, rng, size, r)


def _joint_irg(law: LimitLaw, rng: np.random.Generator, size: int):
    s = law.degree_scale
    w = law.weight.sample(rng, size)
    d_o = rng.poisson(s * w)
    d_v = np.full(size, ABSENT, dtype=np.int64)
    has = d_o > 0
    m = int(has.sum())
    if m:
        ws = law.weight.size_biased().sample(rng, m)
        d_v[has] = 1 + rng.poisson(s * ws)
    return d_o.astype(np.int64), d_v


def _joint_rgg(law: LimitLaw, rng: np.random.Generator, size: int, r=None):
    p = law.rgg.edge_prob
    geom = law.geometry
    omega = geom.omega
    d_o = rng.poisson(p * omega, size).astype(np.int64)
    d_v = np.full(size, ABSENT, dtype=np.int64)
    has = d_o > 0
    m = int(has.sum())
    if m:
        dist = rv_sampler(geom, rng, m) if r is None else np.broadcast_to(np.asarray(r, float), (m,))
        shared = np.clip(geom.lambda2(dist), 0.0, omega)
        exclusive = rng.poisson(p * (omega - shared))
        common = rng.binomial(d_o[has] - 1, shared / omega)
        d_v[has] = 1 + exclusive + common
    return d_o, d_v


def sample_joint_rgg(law: LimitLaw, rng: np.random.Generator, *, r: float | None = None) -> tuple[int, int | None]:
    """One ``(d_o, d_V)`` draw; ``d_V`` is ``None`` when the root is isolated."""
    d_o, d_v = law.sample_joint(rng, 1, r=r)
    return int(d_o[0]), (None if d_v[0] == ABSENT else int(d_v[0]))


def sample_joint_irg(law: LimitLaw, rng: np.random.Generator) -> tuple[int, int | None]:
    d_o, d_v = law.sample_joint(rng, 1)
    return int(d_o[0]), (None if d_v[0] == ABSENT else int(d_v[0]))
