"""Separator hierarchy with per-separator distance tables.

Every internal hierarchy node stores, for each of its separator nodes, the
shortest-path distance to every node of its subgraph (distances *within*
the subgraph), plus each node's separators sorted by that distance. After
construction all tables live in a few flat arrays shared with the compiled
kernels; :class:`HierarchyNode` exposes per-node views into them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .graph import Graph
from .separators import (SeparatorConfigError, StrategyError,
                         SubgraphView, get_strategy)

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


class MemoryCapExceeded(MemoryError):
    def __init__(self, estimate: int, cap: int):
        super().__init__(f"estimated {estimate} bytes exceeds the cap of {cap} bytes")
        self.estimate = estimate
        self.cap = cap


def depth_bound(n: int) -> int:
    """Levels allowed for ``n`` nodes when every child has at most 2/3 of its parent."""
    return math.ceil(math.log(n, 1.5)) + 1 if n > 1 else 1


def memory_estimate(n: int, separator_bound: int, depth_bound: int, *, directed: bool = False) -> int:
    """Upper bound in bytes for the tables of a hierarchy on ``n`` nodes.

    Assumes separators of at most ``separator_bound`` nodes at the top that
    shrink like the square root of the subgraph size (each level holds at most
    ``n`` nodes, each level's subgraphs at most ``(2/3)**i`` of ``n``).
    Per table entry we count the distance (8), its rank slot (4) and the heap
    slot, key and position of the live queues (16), and 8 more for directed
    graphs.
    """
    if min(n, separator_bound, depth_bound) <= 0:
        raise ValueError("memory_estimate arguments must be positive")
    per_entry = 28 + (8 if directed else 0)
    levels = sum((2 / 3) ** (i / 2) for i in range(depth_bound))
    entries_per_node = min(separator_bound, n) * levels
    per_node = 64 + 16 * depth_bound  # graph, chains, node lists, site flags
    return n * math.ceil(per_entry * entries_per_node + per_node)


@dataclass(eq=False)
class HierarchyNode:
    """One subgraph of the hierarchy.

    ``nodes`` holds sorted global ids; local id ``i`` means ``nodes[i]``.
    ``child_of[i]`` is the index into ``children`` holding local node ``i``,
    or -1 when it is a separator node.
    """

    index: int
    nodes: np.ndarray
    depth: int
    is_base: bool
    sep_local: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    child_of: Optional[np.ndarray] = None
    children: list = field(default_factory=list)
    parent: Optional["HierarchyNode"] = field(default=None, repr=False)
    _dist: Optional[np.ndarray] = field(default=None, repr=False)
    _dist_to: Optional[np.ndarray] = field(default=None, repr=False)
    _order: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def separator(self) -> np.ndarray:
        """Separator nodes in global ids, ascending."""
        return self.nodes[self.sep_local]

    @property
    def dist_from(self) -> np.ndarray:
        """``[separator, local]`` distances from each separator node."""
        return self._dist.T

    @property
    def dist_to(self) -> Optional[np.ndarray]:
        """``[separator, local]`` distances *to* each separator (directed graphs only)."""
        return None if self._dist_to is None else self._dist_to.T

    @property
    def sorted_seps(self) -> np.ndarray:
        """``[local, rank]`` separator indices ordered by distance from the node."""
        return self._order

    def local(self, v: int) -> int:
        i = int(np.searchsorted(self.nodes, v))
        if i >= len(self.nodes) or self.nodes[i] != v:
            raise KeyError(v)
        return i


@dataclass(eq=False)
class Hierarchy:
    graph: Graph
    root: HierarchyNode
    hnodes: list
    base_case_size: int
    directed: bool
    strategy: str
    # flat storage shared with the kernels
    h_size: np.ndarray = field(repr=False)
    h_nsep: np.ndarray = field(repr=False)
    h_base: np.ndarray = field(repr=False)
    h_depth: np.ndarray = field(repr=False)
    h_parent: np.ndarray = field(repr=False)
    toff: np.ndarray = field(repr=False)
    noff: np.ndarray = field(repr=False)
    soff: np.ndarray = field(repr=False)
    flat_nodes: np.ndarray = field(repr=False)
    flat_sep: np.ndarray = field(repr=False)
    flat_child: np.ndarray = field(repr=False)
    dist: np.ndarray = field(repr=False)
    dist_to: np.ndarray = field(repr=False)
    order: np.ndarray = field(repr=False)
    chain_ptr: np.ndarray = field(repr=False)
    chain_h: np.ndarray = field(repr=False)
    chain_loc: np.ndarray = field(repr=False)
    leaf_ptr: np.ndarray = field(repr=False)
    leaf_nbr: np.ndarray = field(repr=False)
    leaf_w: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def table_entries(self) -> int:
        return int(self.toff[-1])

    def stats(self) -> dict:
        return {
            "nodes": self.graph.n,
            "total_nodes": int(self.h_size.sum()),
            "graphs": len(self.hnodes),
            "depth": int(self.h_depth.max()) + 1,
            "max_separator": int(self.h_nsep.max()) if len(self.h_nsep) else 0,
            "base_leaves": int(self.h_base.sum()),
            "table_entries": self.table_entries,
        }

    def table_nbytes(self) -> int:
        return sum(a.nbytes for a in (self.dist, self.dist_to, self.order))

    def locate(self, v: int) -> list:
        """Root-to-home chain of ``(HierarchyNode, local id)`` for node ``v``.

        The chain stops where ``v`` is a separator node or at a base leaf.
        """
        v = self.graph.check_node(v)
        a, b = int(self.chain_ptr[v]), int(self.chain_ptr[v + 1])
        return [(self.hnodes[h], int(l))
                for h, l in zip(self.chain_h[a:b].tolist(), self.chain_loc[a:b].tolist())]


# -- construction --------------------------------------------------------------


@dataclass
class _Record:
    nodes: np.ndarray
    parent: int
    depth: int
    is_base: bool = True
    sep_local: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    child_of: Optional[np.ndarray] = None
    children: list = field(default_factory=list)
    dist: Optional[np.ndarray] = None
    dist_to: Optional[np.ndarray] = None
    order: Optional[np.ndarray] = None
    leaf_arcs: Optional[tuple] = None


def _separator_tables(view: SubgraphView, sep_local: np.ndarray, directed: bool):
    csr = view.csr()
    dist = _csgraph_dijkstra(csr, directed=True, indices=sep_local).T.copy()
    dist_to = None
    if directed:
        dist_to = _csgraph_dijkstra(csr.T.tocsr(), directed=True, indices=sep_local).T.copy()
    key = dist_to if directed else dist
    # stable sort: equal distances keep ascending separator order, i.e. id order
    order = np.argsort(key, axis=1, kind="stable")
    return dist, dist_to, order


def build(g: Graph, strategy="median", base_case_size: int = 20, *,
          directed: Optional[bool] = None, mem_cap: Optional[int] = None) -> Hierarchy:
    """Build the separator hierarchy and all site-independent tables.

    Subgraphs of at most ``base_case_size`` nodes become base leaves; so does
    any subgraph the strategy fails on. ``directed`` defaults to the graph's
    own flag; separators are always found on the underlying undirected graph.
    """
    if base_case_size < 1:
        raise ValueError("base_case_size must be at least 1")
    if isinstance(strategy, str):
        strategy = get_strategy(strategy)
    directed = g.directed if directed is None else directed
    if directed and not g.directed:
        raise ValueError("directed hierarchy requested for an undirected graph")
    if strategy.requires_coords and g.coords is None:
        raise SeparatorConfigError(f"strategy {strategy.name!r} needs node coordinates")
    if mem_cap is not None and g.n:
        sep_bound = 1 if strategy.name == "centroid" else math.ceil(math.sqrt(g.n))
        est = memory_estimate(g.n, sep_bound, depth_bound(g.n), directed=directed)
        if est > mem_cap:
            raise MemoryCapExceeded(est, mem_cap)

    scratch = np.full(g.n, -1, dtype=np.int64)
    records: list[_Record] = [_Record(np.arange(g.n, dtype=np.int64), -1, 0)]
    stack = [0]
    while stack:
        idx = stack.pop()
        rec = records[idx]
        k = len(rec.nodes)
        view = SubgraphView.of(g, rec.nodes, scratch)
        sep = None
        if k > base_case_size:
            try:
                sep = strategy(view)
            except StrategyError as exc:
                log.info("subgraph of %d nodes kept as base case: %s", k, exc)
            if sep is not None and any(len(p) >= k for p in sep.parts):
                sep = None
        if sep is None:
            rec.leaf_arcs = (view.src, view.dst, view.weights)
            continue
        rec.is_base = False
        rec.sep_local = np.searchsorted(rec.nodes, sep.separator)
        rec.child_of = np.full(k, -1, dtype=np.int32)
        if len(rec.sep_local):
            rec.dist, rec.dist_to, rec.order = _separator_tables(view, rec.sep_local, directed)
        for ci, part in enumerate(sep.parts):
            rec.child_of[np.searchsorted(rec.nodes, part)] = ci
            rec.children.append(len(records))
            records.append(_Record(np.asarray(part, dtype=np.int64), idx, rec.depth + 1))
        # children pushed in reverse so they are expanded in part order
        stack.extend(reversed(rec.children))
    return _assemble(g, records, base_case_size, directed, strategy.name)


def _assemble(g, records, base_case_size, directed, strategy_name, flat=None) -> Hierarchy:
    H = len(records)
    h_size = np.array([len(r.nodes) for r in records], dtype=np.int64)
    h_nsep = np.array([len(r.sep_local) for r in records], dtype=np.int64)
    h_base = np.array([r.is_base for r in records], dtype=np.bool_)
    h_depth = np.array([r.depth for r in records], dtype=np.int64)
    h_parent = np.array([r.parent for r in records], dtype=np.int64)
    toff = np.zeros(H + 1, dtype=np.int64)
    np.cumsum(h_size * h_nsep, out=toff[1:])
    noff = np.zeros(H + 1, dtype=np.int64)
    np.cumsum(h_size, out=noff[1:])
    soff = np.zeros(H + 1, dtype=np.int64)
    np.cumsum(h_nsep, out=soff[1:])
    max_sep = int(h_nsep.max()) if H else 0
    order_dtype = np.int16 if max_sep < 2 ** 15 else np.int32

    if flat is None:
        flat_nodes = np.concatenate([r.nodes for r in records])
        flat_sep = np.concatenate([r.sep_local for r in records]).astype(np.int64)
        flat_child = np.concatenate([r.child_of if r.child_of is not None
                                     else np.full(len(r.nodes), -1, np.int32) for r in records])
        tables = [r for r in records if r.dist is not None]
        dist = np.concatenate([r.dist.ravel() for r in tables]) if tables else np.empty(0)
        for r in tables:
            r.dist = None
        dist_to = (np.concatenate([r.dist_to.ravel() for r in tables])
                   if directed and tables else np.empty(0))
        for r in tables:
            r.dist_to = None
        order = (np.concatenate([r.order.ravel().astype(order_dtype) for r in tables])
                 if tables else np.empty(0, order_dtype))
        for r in tables:
            r.order = None
    else:
        flat_nodes, flat_sep, flat_child, dist, dist_to, order = flat

    # home of each node: where it is a separator, or its base leaf
    home_depth = np.zeros(g.n, dtype=np.int64)
    for i in range(H):
        nodes = flat_nodes[noff[i]:noff[i + 1]]
        if h_base[i]:
            home_depth[nodes] = h_depth[i]
        else:
            sl = flat_sep[soff[i]:soff[i + 1]]
            home_depth[nodes[sl]] = h_depth[i]
    chain_ptr = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(home_depth + 1, out=chain_ptr[1:])
    chain_h = np.empty(int(chain_ptr[-1]), dtype=np.int32)
    chain_loc = np.empty(int(chain_ptr[-1]), dtype=np.int32)
    for i in range(H):
        nodes = flat_nodes[noff[i]:noff[i + 1]]
        slot = chain_ptr[nodes] + h_depth[i]
        chain_h[slot] = i
        chain_loc[slot] = np.arange(len(nodes))

    # base-leaf adjacency, indexed by flat node slot, neighbours in leaf-local ids
    counts = np.zeros(int(noff[-1]), dtype=np.int64)
    nbr_parts, w_parts = [], []
    for i, r in enumerate(records):
        if not h_base[i]:
            continue
        if r.leaf_arcs is None:
            r.leaf_arcs = _leaf_arcs(g, r.nodes)
        src, dst, w = r.leaf_arcs
        o = np.argsort(src, kind="stable")
        counts[noff[i]:noff[i + 1]] = np.bincount(src, minlength=len(r.nodes))
        nbr_parts.append(dst[o])
        w_parts.append(w[o])
        r.leaf_arcs = None
    leaf_ptr = np.zeros(len(counts) + 1, dtype=np.int64)
    np.cumsum(counts, out=leaf_ptr[1:])
    leaf_nbr = np.concatenate(nbr_parts).astype(np.int64) if nbr_parts else np.empty(0, np.int64)
    leaf_w = np.concatenate(w_parts).astype(np.float64) if w_parts else np.empty(0)

    hnodes = []
    for i, r in enumerate(records):
        k = int(h_size[i])
        m = int(h_nsep[i])
        hn = HierarchyNode(i, flat_nodes[noff[i]:noff[i + 1]], int(h_depth[i]), bool(h_base[i]),
                           flat_sep[soff[i]:soff[i + 1]],
                           None if h_base[i] else flat_child[noff[i]:noff[i + 1]])
        if m:
            a, b = toff[i], toff[i + 1]
            hn._dist = dist[a:b].reshape(k, m)
            hn._order = order[a:b].reshape(k, m)
            if directed:
                hn._dist_to = dist_to[a:b].reshape(k, m)
        elif not h_base[i]:
            hn._dist = np.empty((k, 0))
            hn._order = np.empty((k, 0), dtype=order_dtype)
            if directed:
                hn._dist_to = np.empty((k, 0))
        hnodes.append(hn)
    for i in range(H):
        p = int(h_parent[i])
        if p >= 0:
            hnodes[i].parent = hnodes[p]
            hnodes[p].children.append(hnodes[i])

    return Hierarchy(g, hnodes[0], hnodes, base_case_size, directed, strategy_name,
                     h_size, h_nsep, h_base, h_depth, h_parent, toff, noff, soff,
                     flat_nodes, flat_sep, flat_child, dist, dist_to, order,
                     chain_ptr, chain_h, chain_loc, leaf_ptr, leaf_nbr, leaf_w)


def _leaf_arcs(g: Graph, nodes: np.ndarray):
    view = SubgraphView.of(g, nodes)
    return view.src, view.dst, view.weights


# -- serialisation -------------------------------------------------------------


def save(h: Hierarchy, path) -> None:
    """Write ``h`` (graph included) to an ``.npz`` archive."""
    g = h.graph
    extra = {}
    if g.coords is not None:
        extra["g_coords"] = g.coords
    if g.original_ids is not None:
        extra["g_original_ids"] = g.original_ids
    with open(path, "wb") as fh:
        np.savez(
            fh,
            format_version=np.array(FORMAT_VERSION),
            header=np.array([g.n, int(g.directed), h.base_case_size, int(h.directed)]),
            strategy=np.array(h.strategy),
            g_indptr=g.indptr, g_indices=g.indices, g_weights=g.weights,
            h_nodes_len=h.h_size, h_nsep=h.h_nsep, h_base=h.h_base, h_depth=h.h_depth,
            h_parent=h.h_parent, flat_nodes=h.flat_nodes, flat_sep=h.flat_sep,
            flat_child=h.flat_child, dist=h.dist, dist_to=h.dist_to, order=h.order,
            **extra,
        )


def load(path) -> Hierarchy:
    with np.load(path, allow_pickle=False) as z:
        version = int(z["format_version"])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported hierarchy format version {version}")
        n, g_directed, base_case, directed = (int(x) for x in z["header"])
        g = Graph(n, z["g_indptr"], z["g_indices"], z["g_weights"], bool(g_directed),
                  z["g_coords"] if "g_coords" in z else None,
                  z["g_original_ids"] if "g_original_ids" in z else None)
        h_size, h_nsep = z["h_nodes_len"], z["h_nsep"]
        h_base, h_depth, h_parent = z["h_base"], z["h_depth"], z["h_parent"]
        flat = tuple(z[k] for k in ("flat_nodes", "flat_sep", "flat_child", "dist", "dist_to", "order"))
        strategy = str(z["strategy"])
    noff = np.concatenate([[0], np.cumsum(h_size)])
    soff = np.concatenate([[0], np.cumsum(h_nsep)])
    records = []
    for i in range(len(h_size)):
        records.append(_Record(flat[0][noff[i]:noff[i + 1]], int(h_parent[i]), int(h_depth[i]),
                               bool(h_base[i]), flat[1][soff[i]:soff[i + 1]]))
    return _assemble(g, records, base_case, bool(directed), strategy, flat)
