"""Balanced node separators for subgraphs.

Two strategies are provided: a median-line split for embedded graphs (road
networks, grids) and a centroid split for forests. Both take a
:class:`SubgraphView` and return a :class:`Separation` expressed in global
node ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Protocol, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .graph import Graph


class StrategyError(RuntimeError):
    """The strategy could not produce a valid separation for this subgraph."""


class SeparatorConfigError(ValueError):
    """The strategy is missing an input it needs (e.g. coordinates)."""


def balance_limit(n: int) -> int:
    return math.ceil(2 * n / 3)


@dataclass(frozen=True, eq=False)
class SubgraphView:
    """Induced subgraph on a sorted set of global node ids.

    ``src``/``dst``/``weights`` are the induced arcs in local ids
    (``nodes[i]`` is local node ``i``); for directed graphs they keep their
    orientation.
    """

    nodes: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    weights: np.ndarray
    directed: bool = False
    coords: Optional[np.ndarray] = None

    @classmethod
    def of(cls, g: Graph, nodes=None, scratch: Optional[np.ndarray] = None) -> "SubgraphView":
        """View of ``g`` induced on ``nodes`` (all nodes if omitted).

        ``scratch`` is an optional length-``g.n`` int array filled with -1; it
        is returned to that state afterwards.
        """
        if nodes is None:
            nodes = np.arange(g.n, dtype=np.int64)
            src = np.repeat(nodes, np.diff(g.indptr))
            dst = g.indices.astype(np.int64)
            coords = g.coords
            return cls(nodes, src, dst, np.asarray(g.weights), g.directed, coords)
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        k = len(nodes)
        own = scratch is None
        local = np.full(g.n, -1, dtype=np.int64) if own else scratch
        local[nodes] = np.arange(k)
        starts = g.indptr[nodes]
        counts = g.indptr[nodes + 1] - starts
        offs = np.cumsum(counts) - counts
        pos = np.repeat(starts - offs, counts) + np.arange(int(counts.sum()))
        src = np.repeat(np.arange(k), counts)
        dst = local[g.indices[pos]]
        keep = dst >= 0
        if not own:
            local[nodes] = -1
        coords = g.coords[nodes] if g.coords is not None else None
        return cls(nodes, src[keep], dst[keep], np.asarray(g.weights)[pos[keep]], g.directed, coords)

    def __len__(self) -> int:
        return len(self.nodes)

    def csr(self) -> csr_matrix:
        """Local arc matrix, keeping arc orientation."""
        k = len(self.nodes)
        return csr_matrix((self.weights, (self.src, self.dst)), shape=(k, k))

    def components(self, removed: Optional[np.ndarray] = None) -> list[np.ndarray]:
        """Connected components (ignoring direction) as sorted local id arrays.

        Nodes flagged in the boolean mask ``removed`` are left out. Components
        are ordered by their smallest id.
        """
        k = len(self.nodes)
        src, dst = self.src, self.dst
        if removed is not None and removed.any():
            keep = ~(removed[src] | removed[dst])
            src, dst = src[keep], dst[keep]
        adj = csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(k, k))
        _, labels = connected_components(adj, directed=True, connection="weak")
        if removed is not None:
            labels = np.where(removed, -1, labels)
        order = np.argsort(labels, kind="stable")
        labels_sorted = labels[order]
        cuts = np.flatnonzero(np.diff(labels_sorted)) + 1
        groups = np.split(order, cuts)
        comps = [grp for grp in groups if len(grp) and labels[grp[0]] >= 0]
        comps.sort(key=lambda c: int(c[0]))
        return comps

    def sub(self, local_ids: np.ndarray) -> "SubgraphView":
        """Restrict to a subset given in local ids."""
        local_ids = np.sort(np.asarray(local_ids, dtype=np.int64))
        remap = np.full(len(self.nodes), -1, dtype=np.int64)
        remap[local_ids] = np.arange(len(local_ids))
        keep = (remap[self.src] >= 0) & (remap[self.dst] >= 0)
        coords = self.coords[local_ids] if self.coords is not None else None
        return SubgraphView(self.nodes[local_ids], remap[self.src[keep]], remap[self.dst[keep]],
                            self.weights[keep], self.directed, coords)


@dataclass(frozen=True, eq=False)
class Separation:
    """Separator node set plus the parts left after removing it (global ids)."""

    separator: np.ndarray
    parts: list

    def __repr__(self) -> str:
        return (f"Separation(separator={self.separator.tolist()}, "
                f"parts={[p.tolist() for p in self.parts]})")


class SeparatorStrategy(Protocol):
    name: str
    requires_coords: bool

    def __call__(self, view: SubgraphView) -> Separation: ...


def _as_view(g: Union[Graph, SubgraphView]) -> SubgraphView:
    return SubgraphView.of(g) if isinstance(g, Graph) else g


def _separation(view: SubgraphView, sep_local: np.ndarray, parts_local) -> Separation:
    nodes = view.nodes
    return Separation(np.sort(nodes[sep_local]), [nodes[p] for p in parts_local])


# -- median line ---------------------------------------------------------------


def _median_cut(view: SubgraphView, axis: int) -> np.ndarray:
    """Low-side endpoints of arcs crossing the median line on ``axis``."""
    k = len(view.nodes)
    order = np.lexsort((np.arange(k), view.coords[:, axis]))
    low = np.zeros(k, dtype=bool)
    low[order[: (k + 1) // 2]] = True
    s_low, d_low = low[view.src], low[view.dst]
    ends = np.concatenate([view.src[s_low & ~d_low], view.dst[d_low & ~s_low]])
    return np.unique(ends)


def _split_connected(view: SubgraphView) -> np.ndarray:
    vertical = _median_cut(view, 0)
    horizontal = _median_cut(view, 1)
    return horizontal if len(horizontal) < len(vertical) else vertical


def median_line_separator(g: Union[Graph, SubgraphView], coords=None) -> Separation:
    """Smaller of the vertical and horizontal median-line separators.

    Nodes are sorted by coordinate (ties by id) and the first ``ceil(n/2)``
    form the low half. The separator is the set of low-half endpoints of
    edges crossing to the high half; the parts are the connected components
    left after removing it. An input that is already disconnected into
    pieces of at most ``ceil(2n/3)`` nodes gets an empty separator; otherwise
    only its largest component is split.
    """
    view = _as_view(g)
    if coords is not None:
        view = SubgraphView(view.nodes, view.src, view.dst, view.weights, view.directed,
                            np.asarray(coords, dtype=np.float64).reshape(len(view.nodes), 2))
    if view.coords is None:
        raise SeparatorConfigError("median-line separator needs node coordinates")
    k = len(view.nodes)
    if k < 2:
        raise StrategyError("cannot separate fewer than two nodes")
    limit = balance_limit(k)

    comps = view.components()
    if len(comps) > 1:
        if max(len(c) for c in comps) <= limit:
            return _separation(view, np.empty(0, dtype=np.int64), comps)
        big = max(comps, key=len)
        sep_local = big[_split_connected(view.sub(big))]
    else:
        sep_local = _split_connected(view)

    removed = np.zeros(k, dtype=bool)
    removed[sep_local] = True
    parts = view.components(removed)
    if any(len(p) > limit for p in parts):
        raise StrategyError(f"median split left a part larger than {limit} of {k} nodes")
    return _separation(view, sep_local, parts)


# -- centroid ------------------------------------------------------------------


def _centroid(view: SubgraphView, comp: np.ndarray) -> int:
    """Node of the tree ``comp`` minimising its largest remaining branch (ties: lowest id)."""
    k = len(view.nodes)
    ptr = np.zeros(k + 1, dtype=np.int64)
    src, dst = np.concatenate([view.src, view.dst]), np.concatenate([view.dst, view.src])
    order = np.argsort(src, kind="stable")
    nbrs = dst[order].tolist()
    np.add.at(ptr, src + 1, 1)
    ptr = np.cumsum(ptr).tolist()

    root = int(comp[0])
    parent = {root: -1}
    bfs = [root]
    for u in bfs:
        for v in nbrs[ptr[u]:ptr[u + 1]]:
            if v not in parent:
                parent[v] = u
                bfs.append(v)
    size = dict.fromkeys(bfs, 1)
    heaviest = dict.fromkeys(bfs, 0)
    for u in reversed(bfs):
        p = parent[u]
        if p >= 0:
            size[p] += size[u]
            heaviest[p] = max(heaviest[p], size[u])
    t = len(bfs)
    best, best_key = -1, None
    for u in bfs:
        key = (max(heaviest[u], t - size[u]), u)
        if best_key is None or key < best_key:
            best, best_key = u, key
    return best


def centroid_separator(g: Union[Graph, SubgraphView]) -> Separation:
    """Separate a forest at the centroid of its largest tree."""
    view = _as_view(g)
    k = len(view.nodes)
    if k < 2:
        raise StrategyError("cannot separate fewer than two nodes")
    pairs = np.unique(np.stack([np.minimum(view.src, view.dst),
                                np.maximum(view.src, view.dst)], axis=1), axis=0)
    comps = view.components()
    if len(pairs) != k - len(comps):
        raise StrategyError("centroid separator needs a forest, input has a cycle")
    big = max(comps, key=len)  # first maximal component holds the smallest id
    c = _centroid(view, big)
    removed = np.zeros(k, dtype=bool)
    removed[c] = True
    return _separation(view, np.array([c]), view.components(removed))


# -- strategies & validation ---------------------------------------------------


class MedianLineStrategy:
    name = "median"
    requires_coords = True

    def __call__(self, view: SubgraphView) -> Separation:
        return median_line_separator(view)


class CentroidStrategy:
    name = "centroid"
    requires_coords = False

    def __call__(self, view: SubgraphView) -> Separation:
        return centroid_separator(view)


STRATEGIES = {"median": MedianLineStrategy, "centroid": CentroidStrategy}


def get_strategy(name: str) -> SeparatorStrategy:
    try:
        return STRATEGIES[name]()
    except KeyError:
        raise SeparatorConfigError(f"unknown separator strategy {name!r}") from None


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    witness: tuple = ()


def validate_separation(g: Union[Graph, SubgraphView], s: Separation) -> list[Violation]:
    """Check the separation invariants; returns one entry per violation."""
    view = _as_view(g)
    nodes = view.nodes
    k = len(nodes)
    out: list[Violation] = []
    owner = np.full(k, -2, dtype=np.int64)  # -2 unassigned, -1 separator, i part i
    groups = [(-1, np.asarray(s.separator, dtype=np.int64))]
    groups += [(i, np.asarray(p, dtype=np.int64)) for i, p in enumerate(s.parts)]
    for label, members in groups:
        loc = np.searchsorted(nodes, members)
        inside = (loc < k) & (nodes[np.minimum(loc, k - 1)] == members) if k else np.zeros(len(members), bool)
        for v in members[~inside].tolist():
            out.append(Violation("foreign node", f"node {v} is not in the subgraph", (v,)))
        loc = loc[inside]
        clash = loc[owner[loc] != -2]
        for v in nodes[clash].tolist():
            out.append(Violation("overlap", f"node {v} is assigned more than once", (v,)))
        owner[loc] = label
    for v in nodes[owner == -2].tolist():
        out.append(Violation("coverage", f"node {v} is in neither separator nor parts", (v,)))
    a, b = owner[view.src], owner[view.dst]
    crossing = (a >= 0) & (b >= 0) & (a != b)
    seen = set()
    for u, v in zip(nodes[view.src[crossing]].tolist(), nodes[view.dst[crossing]].tolist()):
        e = (min(u, v), max(u, v))
        if e not in seen:
            seen.add(e)
            out.append(Violation("crossing edge", f"edge {e[0]}-{e[1]} joins two parts", e))
    limit = balance_limit(k)
    for i, p in enumerate(s.parts):
        if len(p) > limit:
            out.append(Violation("balance", f"part {i} has {len(p)} nodes, limit {limit}", (i,)))
    return out
