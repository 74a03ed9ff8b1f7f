"""Simple undirected graphs, edge-list I/O and empirical degree distributions.

A :class:`Graph` stores a CSR adjacency over dense ids ``0..n-1``. Every metric
in the package is a function of :class:`EmpiricalDistributions`, which keeps
integer counts so that ratios can be evaluated exactly when needed.

Sums over directed edges ``u -> v`` visit every undirected edge once in each
direction, so the directed edge count equals the degree sum.
"""

from __future__ import annotations

import os
import warnings
from collections.abc import Callable, Hashable, Iterable, Sequence
from typing import Any

import numpy as np

from .errors import EdgeListFormatError, InvalidNode, SelfLoop

__all__ = [
    "Graph",
    "EmpiricalDistributions",
    "from_edge_list",
    "from_labeled_edges",
    "read_edge_list",
    "write_edge_list",
    "directed_edge_fold",
    "directed_degree_pairs",
    "empirical_distributions",
    "disjoint_union",
    "relabel",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Graph:
    """Immutable simple undirected graph on nodes ``0..n-1``.

    ``edges`` holds each undirected edge once as ``(u, v)`` with ``u < v``,
    sorted lexicographically. ``labels`` maps dense ids back to external ids
    when the graph was built from arbitrary labels.
    """

    __slots__ = ("_n", "_edges", "_indptr", "_indices", "_degree", "labels", "duplicates_removed")

    def __init__(self, n: int, edges: np.ndarray, *, labels: Sequence[Hashable] | None = None,
                 duplicates_removed: int = 0):
        # ``edges`` must already be canonical (u < v, unique, sorted); use from_edge_list.
        self._n = int(n)
        self._edges = _frozen(np.asarray(edges, dtype=np.int64).reshape(-1, 2))
        u, v = self._edges[:, 0], self._edges[:, 1]
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        order = np.lexsort((dst, src))
        self._indices = _frozen(dst[order])
        degree = np.bincount(src, minlength=self._n).astype(np.int64)
        self._degree = _frozen(degree)
        indptr = np.zeros(self._n + 1, dtype=np.int64)
        np.cumsum(degree, out=indptr[1:])
        self._indptr = _frozen(indptr)
        self.labels = tuple(labels) if labels is not None else None
        self.duplicates_removed = int(duplicates_removed)

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @property
    def directed_edge_count(self) -> int:
        return 2 * len(self._edges)

    @property
    def degree(self) -> np.ndarray:
        return self._degree

    @property
    def edges(self) -> np.ndarray:
        return self._edges

    def adjacency(self, u: int) -> np.ndarray:
        """Sorted neighbour ids of ``u``."""
        return self._indices[self._indptr[u]:self._indptr[u + 1]]

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        return self._indptr, self._indices

    def __len__(self) -> int:
        return self._n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._edges, other._edges)

    def __hash__(self) -> int:
        return hash((self._n, self._edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, edges={len(self._edges)})"


def _canonical_edges(n: int, edges: Any) -> tuple[np.ndarray, int]:
    arr = np.asarray(edges if len(edges) else np.empty((0, 2)), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        arr = arr.reshape(-1, 2)
    if arr.size:
        bad = (arr < 0) | (arr >= n)
        if bad.any():
            u, v = arr[np.argmax(bad.any(axis=1))]
            raise InvalidNode(f"edge ({u}, {v}) has an id outside [0, {n})")
        loops = arr[:, 0] == arr[:, 1]
        if loops.any():
            u = arr[np.argmax(loops), 0]
            raise SelfLoop(f"self-loop at node {u}")
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    keys = np.unique(lo * n + hi)
    canon = np.stack([keys // n, keys % n], axis=1) if n else np.empty((0, 2), dtype=np.int64)
    return canon, len(arr) - len(canon)


def from_edge_list(n: int, edges: Iterable[tuple[int, int]] | np.ndarray, *,
                   labels: Sequence[Hashable] | None = None) -> Graph:
    """Build a :class:`Graph` from unordered pairs of ids in ``[0, n)``.

    Duplicate pairs (in either orientation) are collapsed; their number is kept
    in ``Graph.duplicates_removed`` and reported with a :class:`UserWarning`.

    Raises:
        InvalidNode: an id lies outside ``[0, n)``.
        SelfLoop: a pair ``(u, u)`` is present.
    """
    if n < 0:
        raise ValueError("node count must be non-negative")
    if not isinstance(edges, np.ndarray):
        edges = list(edges)
    canon, dups = _canonical_edges(n, edges)
    if dups:
        warnings.warn(f"collapsed {dups} duplicate edge(s)", UserWarning, stacklevel=2)
    return Graph(n, canon, labels=labels, duplicates_removed=dups)


def from_labeled_edges(pairs: Iterable[tuple[Hashable, Hashable]],
                       nodes: Iterable[Hashable] = ()) -> Graph:
    """Build a graph from arbitrary hashable node labels.

    Labels are mapped to dense ids in first-seen order (``nodes`` first, which
    allows isolated vertices); the mapping is kept in ``Graph.labels``.
    """
    index: dict[Hashable, int] = {}
    for x in nodes:
        index.setdefault(x, len(index))
    dense = []
    for a, b in pairs:
        dense.append((index.setdefault(a, len(index)), index.setdefault(b, len(index))))
    labels = [None] * len(index)
    for lab, i in index.items():
        labels[i] = lab
    return from_edge_list(len(index), dense, labels=labels)


def read_edge_list(path: str | os.PathLike) -> Graph:
    """Parse the ``n <count>`` + ``u v`` per line text format."""
    n = None
    pairs: list[tuple[int, int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if n is None:
                if len(parts) != 2 or parts[0] != "n":
                    raise EdgeListFormatError(f"{path}:{lineno}: expected header 'n <node_count>'")
                try:
                    n = int(parts[1])
                except ValueError as exc:
                    raise EdgeListFormatError(f"{path}:{lineno}: bad node count {parts[1]!r}") from exc
                continue
            if len(parts) != 2:
                raise EdgeListFormatError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise EdgeListFormatError(f"{path}:{lineno}: non-integer id in {line!r}") from exc
    if n is None:
        raise EdgeListFormatError(f"{path}: missing 'n <node_count>' header")
    return from_edge_list(n, np.array(pairs, dtype=np.int64).reshape(-1, 2))


def write_edge_list(g: Graph, path: str | os.PathLike, comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"n {g.node_count}\n")
        if g.edge_count:
            np.savetxt(fh, g.edges, fmt="%d")


def directed_degree_pairs(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Endpoint degrees ``(d_u, d_v)`` for every directed edge ``u -> v``."""
    u, v = g.edges[:, 0], g.edges[:, 1]
    du, dv = g.degree[u], g.degree[v]
    return np.concatenate([du, dv]), np.concatenate([dv, du])


def directed_edge_fold(g: Graph, reducer: Callable[[Any, tuple[int, int]], Any], initial: Any = 0) -> Any:
    """Fold ``reducer(acc, (d_u, d_v))`` over all directed edges.

    Edges are visited by source id, then target id, so the result is
    deterministic even for non-commutative reducers.
    """
    indptr, indices = g.csr()
    deg = g.degree
    acc = initial
    for u in range(g.node_count):
        du = int(deg[u])
        for v in indices[indptr[u]:indptr[u + 1]]:
            acc = reducer(acc, (du, int(deg[v])))
    return acc


def relabel(g: Graph, perm: Sequence[int] | np.ndarray) -> Graph:
    """Graph with node ``u`` renamed ``perm[u]``."""
    perm = np.asarray(perm, dtype=np.int64)
    return from_edge_list(g.node_count, perm[g.edges])


def disjoint_union(*graphs: Graph) -> Graph:
    offset = 0
    parts = []
    for g in graphs:
        parts.append(g.edges + offset)
        offset += g.node_count
    edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    return from_edge_list(offset, edges)


def _step_index(support: np.ndarray, k: Any) -> np.ndarray:
    return np.searchsorted(support, np.asarray(k), side="right") - 1


class EmpiricalDistributions:
    """Empirical degree laws of one graph.

    ``node_degrees``/``node_counts`` give the degree histogram (isolated nodes
    included). ``support`` lists the degrees that occur at an edge endpoint and
    ``joint_counts[i, j]`` counts directed edges from a ``support[i]`` vertex
    to a ``support[j]`` vertex. Cumulative tables are kept as integer counts
    over ``support`` and evaluated as step functions.
    """

    def __init__(self, g: Graph):
        self.n = g.node_count
        self.directed_edge_count = g.directed_edge_count
        deg = g.degree
        degrees, counts = np.unique(deg, return_counts=True)
        self.node_degrees = _frozen(degrees.astype(np.int64))
        self.node_counts = _frozen(counts.astype(np.int64))
        self.max_degree = int(degrees[-1]) if len(degrees) else 0

        mask = self.node_degrees > 0
        self.support = _frozen(self.node_degrees[mask].copy())
        s = len(self.support)
        # directed edges starting at degree k: k * (#nodes of degree k)
        self.start_counts = _frozen(self.support * self.node_counts[mask])
        du, dv = directed_degree_pairs(g)
        iu = np.searchsorted(self.support, du)
        iv = np.searchsorted(self.support, dv)
        joint = np.bincount(iu * s + iv, minlength=s * s).reshape(s, s) if s else np.zeros((0, 0), np.int64)
        self.joint_counts = _frozen(joint.astype(np.int64))
        self.cum_start_counts = _frozen(np.cumsum(self.start_counts))
        self.cum_joint_counts = _frozen(joint.cumsum(axis=0).cumsum(axis=1).astype(np.int64))

    # -- densities -----------------------------------------------------------

    @property
    def f(self) -> dict[int, float]:
        return {int(k): int(c) / self.n for k, c in zip(self.node_degrees, self.node_counts)}

    @property
    def f_star(self) -> dict[int, float]:
        E = self.directed_edge_count
        return {int(k): int(c) / E for k, c in zip(self.support, self.start_counts)}

    @property
    def h(self) -> dict[tuple[int, int], float]:
        E = self.directed_edge_count
        ii, jj = np.nonzero(self.joint_counts)
        return {(int(self.support[i]), int(self.support[j])): int(self.joint_counts[i, j]) / E
                for i, j in zip(ii, jj)}

    def f_at(self, k: int) -> float:
        i = np.searchsorted(self.node_degrees, k)
        if i < len(self.node_degrees) and self.node_degrees[i] == k:
            return int(self.node_counts[i]) / self.n
        return 0.0

    def f_star_at(self, k: int) -> float:
        i = np.searchsorted(self.support, k)
        if i < len(self.support) and self.support[i] == k:
            return int(self.start_counts[i]) / self.directed_edge_count
        return 0.0

    def h_at(self, k: int, l: int) -> float:
        i, j = np.searchsorted(self.support, k), np.searchsorted(self.support, l)
        s = len(self.support)
        if i < s and j < s and self.support[i] == k and self.support[j] == l:
            return int(self.joint_counts[i, j]) / self.directed_edge_count
        return 0.0

    # -- cumulative forms ----------------------------------------------------

    def F(self, k):
        """Degree CDF over nodes."""
        idx = _step_index(self.node_degrees, k)
        cum = np.concatenate([[0], np.cumsum(self.node_counts)])
        return cum[idx + 1] / self.n

    def F_star_counts(self, k):
        """``|E| * F*(k)`` as integers."""
        idx = _step_index(self.support, k)
        cum = np.concatenate([[0], self.cum_start_counts])
        return cum[idx + 1]

    def F_star(self, k):
        return self.F_star_counts(k) / self.directed_edge_count

    def H_counts(self, k, l):
        """``|E| * H(k, l)`` as integers."""
        i = _step_index(self.support, k)
        j = _step_index(self.support, l)
        padded = np.pad(self.cum_joint_counts, ((1, 0), (1, 0)))
        return padded[i + 1, j + 1]

    def H(self, k, l):
        return self.H_counts(k, l) / self.directed_edge_count

    def F_tied(self, k):
        """``F*(k) + F*(k - 1)``: twice the mid-point of the tie block at ``k``."""
        k = np.asarray(k)
        return (self.F_star_counts(k) + self.F_star_counts(k - 1)) / self.directed_edge_count

    def H_tied(self, k, l):
        """Four-corner sum ``H(k,l) + H(k-1,l) + H(k,l-1) + H(k-1,l-1)``."""
        k, l = np.asarray(k), np.asarray(l)
        total = self.H_counts(k, l) + self.H_counts(k - 1, l) + self.H_counts(k, l - 1) + self.H_counts(k - 1, l - 1)
        return total / self.directed_edge_count

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmpiricalDistributions):
            return NotImplemented
        return (self.f == other.f and self.f_star == other.f_star and self.h == other.h
                and self.max_degree == other.max_degree)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (f"EmpiricalDistributions(n={self.n}, directed_edges={self.directed_edge_count}, "
                f"max_degree={self.max_degree})")


def empirical_distributions(g: Graph) -> EmpiricalDistributions:
    return EmpiricalDistributions(g)
