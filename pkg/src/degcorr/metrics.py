"""Degree-degree correlation measures of a finite graph.

All sums run over directed edges. Pearson, Spearman, Kendall, ANND and ANNR are
evaluated in exact integer arithmetic from the integer tables held by
:class:`~degcorr.graph.EmpiricalDistributions` and converted to ``float`` once,
so no cancellation occurs in the ``sum d^3 - (sum d^2)^2 / |E|`` style
differences. Only the degree distance, whose transform is real valued, is a
floating point sum (``math.fsum``).
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Union

import numpy as np

from .errors import NoEdges, TransformDomain
from .graph import EmpiricalDistributions, Graph, empirical_distributions

__all__ = [
    "UNDEFINED",
    "Undefined",
    "MetricReport",
    "G_TRANSFORMS",
    "resolve_transform",
    "pearson",
    "spearman",
    "kendall",
    "degree_distance",
    "annd",
    "annr",
    "compute_report",
]


class Undefined:
    """Marker for a correlation whose denominator vanishes (regular edge ends)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return "UNDEFINED"

    def __str__(self) -> str:
        return "undefined"

    def __reduce__(self):
        return (Undefined, ())


UNDEFINED = Undefined()

Transform = Union[str, Callable[[int], float], Mapping[int, float]]

G_TRANSFORMS: dict[str, Callable[[int], float]] = {
    "identity": float,
    "log1p": math.log1p,
}


def _as_distributions(x: EmpiricalDistributions | Graph) -> EmpiricalDistributions:
    return empirical_distributions(x) if isinstance(x, Graph) else x


def _require_edges(e: EmpiricalDistributions) -> None:
    if e.directed_edge_count == 0:
        raise NoEdges("graph has no edges")


def _nonzero(e: EmpiricalDistributions):
    ii, jj = np.nonzero(e.joint_counts)
    return ii.tolist(), jj.tolist(), e.joint_counts[ii, jj].tolist()


def _bilinear(e: EmpiricalDistributions, left: list[int], right: list[int]) -> int:
    """``sum_{k,l} joint[k,l] * left[k] * right[l]`` with Python integers."""
    ii, jj, cc = _nonzero(e)
    return sum(c * left[i] * right[j] for i, j, c in zip(ii, jj, cc))


def _tied_F_counts(e: EmpiricalDistributions) -> list[int]:
    # |E| * (F*(k) + F*(k-1)) on the support; F*(k-1) is the previous cumulative value.
    cum = [int(x) for x in e.cum_start_counts]
    return [c + (cum[i - 1] if i else 0) for i, c in enumerate(cum)]


def pearson(e: EmpiricalDistributions | Graph) -> float | Undefined:
    """Pearson correlation of endpoint degrees over directed edges.

    Returns :data:`UNDEFINED` when every edge end has the same degree.
    """
    e = _as_distributions(e)
    _require_edges(e)
    E = e.directed_edge_count
    deg = [int(k) for k in e.support]
    cnt = [int(c) for c in e.node_counts[e.node_degrees > 0]]
    s_uv = _bilinear(e, deg, deg)
    s2 = sum(c * k * k for k, c in zip(deg, cnt))
    s3 = sum(c * k ** 3 for k, c in zip(deg, cnt))
    den = s3 * E - s2 * s2
    if den == 0:
        return UNDEFINED
    return float(Fraction(s_uv * E - s2 * s2, den))


def spearman(e: EmpiricalDistributions | Graph) -> float:
    """Compact Spearman's rho with uniform tie-breaking."""
    e = _as_distributions(e)
    _require_edges(e)
    E = e.directed_edge_count
    t = _tied_F_counts(e)
    # 3/|E| * sum h * F_tied F_tied - 3, with every factor scaled by |E|
    return float(Fraction(3 * _bilinear(e, t, t), E ** 3) - 3)


def kendall(e: EmpiricalDistributions | Graph) -> float:
    """Compact Kendall's tau from the four-corner sums of the joint CDF."""
    e = _as_distributions(e)
    _require_edges(e)
    E = e.directed_edge_count
    cum = e.cum_joint_counts.tolist()

    def H(i: int, j: int) -> int:
        return cum[i][j] if i >= 0 and j >= 0 else 0

    ii, jj, cc = _nonzero(e)
    total = 0
    for i, j, c in zip(ii, jj, cc):
        total += c * (H(i, j) + H(i - 1, j) + H(i, j - 1) + H(i - 1, j - 1))
    return float(Fraction(total, E * E) - 1)


def resolve_transform(g: Transform) -> tuple[str, Callable[[int], float]]:
    """Name and callable for a built-in name, a callable or a degree table."""
    if isinstance(g, str):
        try:
            return g, G_TRANSFORMS[g]
        except KeyError:
            raise TransformDomain(f"unknown transform {g!r}; built-ins: {sorted(G_TRANSFORMS)}") from None
    if isinstance(g, Mapping):
        table = dict(g)

        def lookup(k: int) -> float:
            try:
                return float(table[k])
            except KeyError:
                raise TransformDomain(f"transform table has no entry for degree {k}") from None

        return "table", lookup
    if callable(g):
        return getattr(g, "__name__", "custom"), g
    raise TypeError(f"cannot use {type(g).__name__} as a degree transform")


def _transform_values(func: Callable[[int], float], degrees: np.ndarray) -> list[float]:
    values = []
    for k in degrees.tolist():
        try:
            y = float(func(k))
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise TransformDomain(f"transform undefined at degree {k}: {exc}") from exc
        if not math.isfinite(y) or y < 0:
            raise TransformDomain(f"transform must map degree {k} to a finite non-negative value, got {y}")
        values.append(y)
    diffs = np.diff(values)
    if len(diffs) and not (np.all(diffs >= 0) or np.all(diffs <= 0)):
        raise TransformDomain("transform is not monotone on the occurring degrees")
    return values


def degree_distance(e: EmpiricalDistributions | Graph, g_transform: Transform = "identity") -> float:
    """Mean of ``|g(d_u) - g(d_v)|`` over directed edges."""
    e = _as_distributions(e)
    _require_edges(e)
    _, func = resolve_transform(g_transform)
    gv = _transform_values(func, e.support)
    ii, jj, cc = _nonzero(e)
    return math.fsum(c * abs(gv[i] - gv[j]) for i, j, c in zip(ii, jj, cc)) / e.directed_edge_count


def _per_degree(e: EmpiricalDistributions, weights: list[int], scale: int) -> dict[int, float]:
    out: dict[int, float] = {}
    joint = e.joint_counts.tolist()
    for i, k in enumerate(e.support.tolist()):
        num = sum(c * w for c, w in zip(joint[i], weights))
        out[k] = float(Fraction(num, int(e.start_counts[i]) * scale))
    return out


def annd(e: EmpiricalDistributions | Graph) -> dict[int, float]:
    """Average nearest neighbour degree for each degree ``k >= 1`` present."""
    e = _as_distributions(e)
    if e.directed_edge_count == 0:
        return {}
    return _per_degree(e, e.support.tolist(), 1)


def annr(e: EmpiricalDistributions | Graph) -> dict[int, float]:
    """Average nearest neighbour rank ``F*(d_V)`` for each degree ``k >= 1`` present."""
    e = _as_distributions(e)
    if e.directed_edge_count == 0:
        return {}
    return _per_degree(e, e.cum_start_counts.tolist(), e.directed_edge_count)


@dataclass(frozen=True)
class MetricReport:
    pearson: float | Undefined
    spearman: float
    kendall: float
    degree_distance: float
    annd: dict[int, float]
    annr: dict[int, float]
    g_name: str = "identity"
    n: int = 0
    directed_edges: int = 0
    extra: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        """JSON-ready dict; ``annd``/``annr`` keys become strings."""
        return {
            "pearson": "undefined" if self.pearson is UNDEFINED else self.pearson,
            "spearman": self.spearman,
            "kendall": self.kendall,
            "degree_distance": self.degree_distance,
            "g": self.g_name,
            "annd": {str(k): v for k, v in sorted(self.annd.items())},
            "annr": {str(k): v for k, v in sorted(self.annr.items())},
            "n": self.n,
            "directed_edges": self.directed_edges,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> MetricReport:
        p = data["pearson"]
        return cls(
            pearson=UNDEFINED if p == "undefined" else float(p),
            spearman=float(data["spearman"]),
            kendall=float(data["kendall"]),
            degree_distance=float(data["degree_distance"]),
            annd={int(k): float(v) for k, v in data["annd"].items()},
            annr={int(k): float(v) for k, v in data["annr"].items()},
            g_name=data.get("g", "identity"),
            n=int(data.get("n", 0)),
            directed_edges=int(data.get("directed_edges", 0)),
        )


def compute_report(x: EmpiricalDistributions | Graph, g: Transform = "identity") -> MetricReport:
    """All six measures at once; raises :class:`NoEdges` on an edgeless graph."""
    e = _as_distributions(x)
    _require_edges(e)
    name, _ = resolve_transform(g)
    return MetricReport(
        pearson=pearson(e),
        spearman=spearman(e),
        kendall=kendall(e),
        degree_distance=degree_distance(e, g),
        annd=annd(e),
        annr=annr(e),
        g_name=name,
        n=e.n,
        directed_edges=e.directed_edge_count,
    )
