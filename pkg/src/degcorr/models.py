"""Seeded samplers for rank-1 inhomogeneous random graphs and random geometric graphs.

Randomness is split into independent streams per purpose (``weights``,
``positions``, ``edges``), each derived from the user seed with
:func:`degcorr.rng.mix`. Keeping the geometric stream separate from the edge
coins means an RGG sampled with ``p < 1`` is an independent thinning of the
``p = 1`` graph drawn from the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import special

from .errors import InfiniteMoment, RadiusTooLarge
from .graph import Graph, from_edge_list
from .rng import stream

__all__ = [
    "WeightLaw",
    "RggParams",
    "SampledGraph",
    "weight_moments",
    "sample_irg",
    "sample_rgg",
    "torus_distance",
    "PAIR_SCAN_MAX_N",
]

# Below this size the IRG sampler visits every pair; above it, skip sampling.
PAIR_SCAN_MAX_N = 2_000


@dataclass(frozen=True)
class WeightLaw:
    """Distribution of the vertex weight ``W``.

    Public kinds are ``constant(c)``, ``exponential(rate)``,
    ``pareto(shape, scale)`` and ``finite_discrete(values, probs)``. ``gamma``
    exists so that size-biasing is closed: the size-biased exponential is a
    gamma with shape 2.
    """

    kind: str
    params: tuple

    # -- constructors --------------------------------------------------------

    @classmethod
    def constant(cls, c: float) -> WeightLaw:
        if c < 0:
            raise ValueError("constant weight must be non-negative")
        return cls("constant", (float(c),))

    @classmethod
    def exponential(cls, rate: float) -> WeightLaw:
        if rate <= 0:
            raise ValueError("rate must be positive")
        return cls("exponential", (float(rate),))

    @classmethod
    def gamma(cls, shape: float, rate: float) -> WeightLaw:
        if shape <= 0 or rate <= 0:
            raise ValueError("gamma shape and rate must be positive")
        return cls("gamma", (float(shape), float(rate)))

    @classmethod
    def pareto(cls, shape: float, scale: float = 1.0) -> WeightLaw:
        if shape <= 0 or scale <= 0:
            raise ValueError("pareto shape and scale must be positive")
        return cls("pareto", (float(shape), float(scale)))

    @classmethod
    def finite_discrete(cls, values, probs) -> WeightLaw:
        values = tuple(float(v) for v in values)
        probs = tuple(float(p) for p in probs)
        if len(values) != len(probs) or not values:
            raise ValueError("values and probabilities must be non-empty and of equal length")
        if min(values) < 0 or min(probs) < 0:
            raise ValueError("values and probabilities must be non-negative")
        if not math.isclose(sum(probs), 1.0, rel_tol=0, abs_tol=1e-9):
            raise ValueError(f"probabilities sum to {sum(probs)}, not 1")
        return cls("finite_discrete", (values, probs))

    @classmethod
    def parse(cls, text: str) -> WeightLaw:
        """Parse ``const:2``, ``exp:1``, ``pareto:3:1``, ``gamma:2:1`` or ``discrete:1,2:0.5,0.5``."""
        head, _, rest = text.partition(":")
        args = rest.split(":") if rest else []
        try:
            if head in ("const", "constant"):
                return cls.constant(float(args[0]))
            if head in ("exp", "exponential"):
                return cls.exponential(float(args[0]))
            if head == "pareto":
                return cls.pareto(float(args[0]), float(args[1]) if len(args) > 1 else 1.0)
            if head == "gamma":
                return cls.gamma(float(args[0]), float(args[1]))
            if head in ("discrete", "finite_discrete"):
                return cls.finite_discrete(args[0].split(","), args[1].split(","))
        except (IndexError, ValueError) as exc:
            raise ValueError(f"bad weight law {text!r}: {exc}") from exc
        raise ValueError(f"unknown weight law {text!r}")

    def __str__(self) -> str:
        if self.kind == "constant":
            return f"const:{self.params[0]:g}"
        if self.kind == "exponential":
            return f"exp:{self.params[0]:g}"
        if self.kind == "pareto":
            return f"pareto:{self.params[0]:g}:{self.params[1]:g}"
        if self.kind == "gamma":
            return f"gamma:{self.params[0]:g}:{self.params[1]:g}"
        vals, probs = self.params
        return "discrete:" + ",".join(f"{v:g}" for v in vals) + ":" + ",".join(f"{p:g}" for p in probs)

    # -- distribution --------------------------------------------------------

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(size, self.params[0])
        if self.kind == "exponential":
            return rng.exponential(1.0 / self.params[0], size)
        if self.kind == "gamma":
            shape, rate = self.params
            return rng.gamma(shape, 1.0 / rate, size)
        if self.kind == "pareto":
            shape, scale = self.params
            return scale * (1.0 - rng.random(size)) ** (-1.0 / shape)
        values, probs = self.params
        return np.asarray(values)[rng.choice(len(values), size=size, p=probs)]

    def moment(self, order: int) -> float:
        """``E[W**order]``; raises :class:`InfiniteMoment` when it diverges."""
        if self.kind == "constant":
            return self.params[0] ** order
        if self.kind == "exponential":
            return math.factorial(order) / self.params[0] ** order
        if self.kind == "gamma":
            shape, rate = self.params
            return float(np.exp(special.gammaln(shape + order) - special.gammaln(shape))) / rate ** order
        if self.kind == "pareto":
            shape, scale = self.params
            if shape <= order:
                raise InfiniteMoment(f"pareto with shape {shape:g} has no finite moment of order {order}")
            return shape * scale ** order / (shape - order)
        values, probs = self.params
        return math.fsum(p * v ** order for v, p in zip(values, probs))

    @property
    def mean(self) -> float:
        return self.moment(1)

    def size_biased(self) -> WeightLaw:
        """Law with density proportional to ``w * P(W in dw)``."""
        if self.kind == "constant":
            if self.params[0] == 0:
                raise ValueError("size-biasing needs E[W] > 0")
            return self
        if self.kind == "exponential":
            return WeightLaw.gamma(2.0, self.params[0])
        if self.kind == "gamma":
            shape, rate = self.params
            return WeightLaw.gamma(shape + 1.0, rate)
        if self.kind == "pareto":
            shape, scale = self.params
            if shape <= 1:
                raise InfiniteMoment(f"pareto with shape {shape:g} has infinite mean; no size-biased law")
            return WeightLaw.pareto(shape - 1.0, scale)
        values, probs = self.params
        m = self.mean
        if m == 0:
            raise ValueError("size-biasing needs E[W] > 0")
        return WeightLaw.finite_discrete(values, [v * p / m for v, p in zip(values, probs)])


def weight_moments(w: WeightLaw) -> tuple[float, float]:
    """``(E[W], E[W^2])`` in closed form."""
    return w.moment(1), w.moment(2)


@dataclass(frozen=True)
class RggParams:
    dim: int
    radius: float
    edge_prob: float = 1.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not 0 < self.edge_prob <= 1:
            raise ValueError(f"edge probability must lie in (0, 1], got {self.edge_prob}")

    def side_length(self, n: int) -> float:
        return n ** (1.0 / self.dim)

    def check_fits(self, n: int) -> None:
        L = self.side_length(n)
        if 2 * self.radius >= L:
            raise RadiusTooLarge(f"2R = {2 * self.radius:g} must be below the torus side n^(1/d) = {L:g}")


@dataclass
class SampledGraph:
    graph: Graph
    seed: int
    model_tag: str
    params: dict[str, Any] = field(default_factory=dict)
    positions: np.ndarray | None = None
    weights: np.ndarray | None = None

    def meta(self) -> dict[str, Any]:
        return {"model": self.model_tag, "n": self.graph.node_count, "seed": self.seed,
                "params": self.params, "edges": self.graph.edge_count}


# -- rank-1 inhomogeneous random graph -----------------------------------------

def _irg_pair_scan(w: np.ndarray, denom: float, rng: np.random.Generator) -> np.ndarray:
    n = len(w)
    chunks = []
    for i in range(n - 1):
        p = np.minimum(w[i] * w[i + 1:] / denom, 1.0)
        hits = np.flatnonzero(rng.random(n - 1 - i) < p)
        if len(hits):
            chunks.append(np.stack([np.full(len(hits), i), hits + i + 1], axis=1))
    return np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)


def _irg_skip(w: np.ndarray, denom: float, rng: np.random.Generator) -> np.ndarray:
    # Weights sorted in decreasing order make p(u, v) non-increasing in v, so a
    # geometric jump with the current bound followed by acceptance with
    # p_true / p_bound samples every pair with its exact probability.
    order = np.argsort(-w, kind="stable")
    ws = w[order].tolist()
    n = len(ws)
    buf = rng.random(1 << 16)
    pos = 0

    def uniform() -> float:
        nonlocal buf, pos
        if pos == len(buf):
            buf = rng.random(1 << 16)
            pos = 0
        pos += 1
        return buf[pos - 1]

    src: list[int] = []
    dst: list[int] = []
    log = math.log
    for u in range(n - 1):
        wu = ws[u]
        if wu == 0.0:
            break
        v = u + 1
        p = min(wu * ws[v] / denom, 1.0)
        while v < n and p > 0.0:
            if p < 1.0:
                v += int(log(1.0 - uniform()) / log(1.0 - p))
            if v < n:
                q = min(wu * ws[v] / denom, 1.0)
                if uniform() < q / p:
                    src.append(u)
                    dst.append(v)
                p = q
                v += 1
    pairs = np.array([src, dst], dtype=np.int64).T.reshape(-1, 2)
    return order[pairs]


def sample_irg(n: int, w: WeightLaw, seed: int, *, normalization: str = "n") -> SampledGraph:
    """Rank-1 inhomogeneous random graph.

    Each pair ``i < j`` is joined independently with probability
    ``min(W_i W_j / D, 1)``. ``normalization="n"`` uses ``D = n``;
    ``normalization="total_weight"`` uses ``D = sum(W_i)``, under which the
    root degree is asymptotically ``Po(W)`` whatever ``E[W]`` is.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    weights = w.sample(stream(seed, "weights"), n).astype(float)
    if normalization == "n":
        denom = float(n)
    elif normalization == "total_weight":
        denom = float(weights.sum())
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    rng = stream(seed, "edges")
    if denom == 0 or n == 1:
        edges = np.empty((0, 2), dtype=np.int64)
    elif n <= PAIR_SCAN_MAX_N:
        edges = _irg_pair_scan(weights, denom, rng)
    else:
        edges = _irg_skip(weights, denom, rng)
    g = from_edge_list(n, edges)
    params = {"weight": str(w), "normalization": normalization}
    return SampledGraph(g, seed, "irg", params, weights=weights)


# -- random geometric graph ----------------------------------------------------

def torus_distance(a: np.ndarray, b: np.ndarray, side: float) -> np.ndarray:
    """Euclidean distance on the flat torus ``[-side/2, side/2)^d``."""
    delta = np.abs(np.asarray(a, float) - np.asarray(b, float))
    delta = np.minimum(delta, side - delta)
    return np.sqrt(np.sum(delta * delta, axis=-1))


def _grid_pairs(pos: np.ndarray, side: float, radius: float) -> np.ndarray:
    n, d = pos.shape
    m = min(int(side // radius), max(2, int((4 * n) ** (1.0 / d))))
    cell_side = side / m
    cells = np.minimum(((pos + side / 2) // cell_side).astype(np.int64), m - 1)
    flat = np.ravel_multi_index(cells.T, (m,) * d)
    order = np.argsort(flat, kind="stable")
    sorted_flat = flat[order]
    sorted_cells = cells[order]
    bounds = np.searchsorted(sorted_flat, np.arange(m ** d + 1))

    offsets = {tuple(o % m) for o in np.array(np.meshgrid(*[[-1, 0, 1]] * d, indexing="ij")).reshape(d, -1).T}
    idx = np.arange(n)
    r2 = radius * radius
    found = []
    for off in sorted(offsets):
        nb = np.ravel_multi_index(((sorted_cells + np.array(off)) % m).T, (m,) * d)
        start, stop = bounds[nb], bounds[nb + 1]
        counts = stop - start
        total = int(counts.sum())
        if not total:
            continue
        I = np.repeat(idx, counts)
        J = np.repeat(start - np.cumsum(counts) + counts, counts) + np.arange(total)
        keep = I < J
        I, J = I[keep], J[keep]
        a, b = order[I], order[J]
        delta = np.abs(pos[a] - pos[b])
        delta = np.minimum(delta, side - delta)
        close = np.einsum("ij,ij->i", delta, delta) <= r2
        found.append(np.stack([a[close], b[close]], axis=1))
    pairs = np.concatenate(found) if found else np.empty((0, 2), dtype=np.int64)
    lo, hi = np.minimum(pairs[:, 0], pairs[:, 1]), np.maximum(pairs[:, 0], pairs[:, 1])
    keys = np.unique(lo * n + hi)
    return np.stack([keys // n, keys % n], axis=1)


def sample_rgg(n: int, params: RggParams, seed: int) -> SampledGraph:
    """Random geometric graph on the torus of volume ``n``.

    ``n`` uniform points; each pair at torus distance ``<= R`` is joined
    independently with probability ``p``. Neighbour search uses a periodic cell
    grid with cells of side at least ``R``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    params.check_fits(n)
    d = params.dim
    side = params.side_length(n)
    pos = (stream(seed, "positions").random((n, d)) - 0.5) * side
    pos = np.where(pos >= side / 2, pos - side, pos)
    edges = _grid_pairs(pos, side, params.radius)
    # One coin per candidate edge in canonical order couples all values of p.
    coins = stream(seed, "edges").random(len(edges))
    edges = edges[coins < params.edge_prob]
    g = from_edge_list(n, edges)
    meta = {"dim": d, "radius": params.radius, "p": params.edge_prob}
    return SampledGraph(g, seed, "rgg", meta, positions=pos)
