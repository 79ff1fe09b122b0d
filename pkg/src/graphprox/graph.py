"""Weighted graphs, DIMACS ingestion and plain Dijkstra.

The :class:`Graph` keeps a CSR layout (``indptr``/``indices``/``weights``) for
the vectorised paths and lazily materialises Python adjacency lists for the
pure-Python Dijkstra routines, which double as the reference oracle.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

INF = math.inf


class GraphError(ValueError):
    """Invalid graph construction or node reference."""


class DimacsParseError(GraphError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable weighted graph with dense integer node ids.

    For undirected graphs every edge is stored in both directions, so
    ``indptr``/``indices`` always describe out-arcs.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    directed: bool = False
    coords: Optional[np.ndarray] = None
    original_ids: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int, float]],
        *,
        directed: bool = False,
        coords=None,
        original_ids=None,
    ) -> "Graph":
        """Build a graph from ``(u, v, w)`` triples; parallel edges keep the minimum."""
        best: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) references a node outside 0..{n - 1}")
            if not (w >= 0 and math.isfinite(w)):
                raise GraphError(f"edge ({u}, {v}) has invalid weight {w}")
            if u == v:
                continue
            if not directed and u > v:
                u, v = v, u
            key = (u, v)
            if key not in best or w < best[key]:
                best[key] = w
        return cls._from_arc_dict(n, best, directed, coords, original_ids)

    @classmethod
    def _from_arc_dict(cls, n, best, directed, coords, original_ids) -> "Graph":
        if best:
            arr = np.array([(u, v) for u, v in best], dtype=np.int64)
            src, dst = arr[:, 0], arr[:, 1]
            w = np.fromiter(best.values(), dtype=np.float64, count=len(best))
        else:
            src = dst = np.empty(0, dtype=np.int64)
            w = np.empty(0, dtype=np.float64)
        if not directed:
            src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
            w = np.concatenate([w, w])
        return cls.from_arrays(n, src, dst, w, directed=directed, coords=coords,
                               original_ids=original_ids)

    @classmethod
    def from_arrays(cls, n, src, dst, w, *, directed=False, coords=None,
                    original_ids=None) -> "Graph":
        """Build from parallel arc arrays that already contain no duplicates."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        w = np.asarray(w, dtype=np.float64)
        order = np.lexsort((dst, src))
        src, dst, w = src[order], dst[order], w[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        if coords is not None:
            coords = np.asarray(coords, dtype=np.float64).reshape(n, 2)
        if original_ids is not None:
            original_ids = np.asarray(original_ids, dtype=np.int64)
        g = cls(n, indptr, dst.astype(np.int32), w, directed, coords, original_ids)
        for arr in (g.indptr, g.indices, g.weights):
            arr.setflags(write=False)
        return g

    # -- basic accessors ---------------------------------------------------

    def __len__(self) -> int:
        return self.n

    @property
    def arc_count(self) -> int:
        return int(self.indices.shape[0])

    @property
    def edge_count(self) -> int:
        """Number of edges; undirected edges are counted once."""
        return self.arc_count if self.directed else self.arc_count // 2

    def neighbors(self, u: int) -> list[tuple[int, float]]:
        return self.adjacency[u]

    def edges(self) -> list[tuple[int, int, float]]:
        """Edge list; undirected edges appear once with ``u < v``."""
        src = np.repeat(np.arange(self.n), np.diff(self.indptr))
        out = []
        for u, v, w in zip(src.tolist(), self.indices.tolist(), self.weights.tolist()):
            if self.directed or u < v:
                out.append((u, v, w))
        return out

    @cached_property
    def adjacency(self) -> list[list[tuple[int, float]]]:
        ptr = self.indptr.tolist()
        idx = self.indices.tolist()
        wts = self.weights.tolist()
        return [list(zip(idx[ptr[u]:ptr[u + 1]], wts[ptr[u]:ptr[u + 1]]))
                for u in range(self.n)]

    @cached_property
    def reverse_adjacency(self) -> list[list[tuple[int, float]]]:
        if not self.directed:
            return self.adjacency
        radj: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        for u, row in enumerate(self.adjacency):
            for v, w in row:
                radj[v].append((u, w))
        return radj

    def to_csr(self) -> csr_matrix:
        return csr_matrix((self.weights, self.indices, self.indptr), shape=(self.n, self.n))

    def check_node(self, v) -> int:
        if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)):
            raise GraphError(f"node id must be an integer, got {v!r}")
        if not 0 <= v < self.n:
            raise GraphError(f"unknown node id {v} (graph has {self.n} nodes)")
        return int(v)


# -- DIMACS --------------------------------------------------------------------


def _parse_number(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise DimacsParseError(lineno, f"bad number {tok!r}") from None


def parse_dimacs(gr_text: str, co_text: Optional[str] = None, *,
                 directed: bool = False) -> Graph:
    """Parse 9th DIMACS challenge ``.gr`` (and optional ``.co``) text.

    Ids are remapped to 0-based and duplicate arcs keep their minimum weight.
    Unless ``directed`` is set, arcs are read as undirected edges and an
    edge given in both directions takes the smaller of the two weights.
    """
    n = None
    arcs: dict[tuple[int, int], float] = {}
    for lineno, line in enumerate(gr_text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        tag = parts[0]
        if tag == "p":
            if n is not None:
                raise DimacsParseError(lineno, "duplicate problem line")
            if len(parts) != 4 or parts[1] != "sp":
                raise DimacsParseError(lineno, "malformed header, expected 'p sp <n> <m>'")
            try:
                n = int(parts[2])
                int(parts[3])
            except ValueError:
                raise DimacsParseError(lineno, "malformed header counts") from None
            if n < 0:
                raise DimacsParseError(lineno, "negative node count")
        elif tag == "a":
            if n is None:
                raise DimacsParseError(lineno, "arc before problem line")
            if len(parts) != 4:
                raise DimacsParseError(lineno, "malformed arc, expected 'a <u> <v> <w>'")
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise DimacsParseError(lineno, "non-integer node id") from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise DimacsParseError(lineno, f"node id out of range 1..{n}")
            w = _parse_number(parts[3], lineno)
            if w < 0 or not math.isfinite(w):
                raise DimacsParseError(lineno, f"invalid weight {parts[3]}")
            if u == v:
                continue
            key = (u - 1, v - 1)
            old = arcs.get(key)
            if old is None or w < old:
                arcs[key] = w
        else:
            raise DimacsParseError(lineno, f"unknown line type {tag!r}")
    if n is None:
        raise DimacsParseError(0, "missing problem line")

    if not directed:
        merged: dict[tuple[int, int], float] = {}
        for (u, v), w in arcs.items():
            key = (u, v) if u < v else (v, u)
            old = merged.get(key)
            if old is None or w < old:
                merged[key] = w
        arcs = merged

    coords = parse_dimacs_coords(co_text, n) if co_text is not None else None
    return Graph._from_arc_dict(n, arcs, directed, coords, None)


def parse_dimacs_coords(co_text: str, n: int) -> np.ndarray:
    coords = np.full((n, 2), np.nan)
    for lineno, line in enumerate(co_text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0] in ("c", "p"):
            continue
        if parts[0] != "v" or len(parts) != 4:
            raise DimacsParseError(lineno, "malformed coordinate line, expected 'v <id> <x> <y>'")
        try:
            v = int(parts[1])
        except ValueError:
            raise DimacsParseError(lineno, "non-integer node id") from None
        if not 1 <= v <= n:
            raise DimacsParseError(lineno, f"node id out of range 1..{n}")
        coords[v - 1] = (_parse_number(parts[2], lineno), _parse_number(parts[3], lineno))
    if np.isnan(coords).any():
        missing = int(np.flatnonzero(np.isnan(coords[:, 0]))[0]) + 1
        raise DimacsParseError(0, f"no coordinates for node {missing}")
    return coords


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def to_dimacs(g: Graph) -> tuple[str, Optional[str]]:
    """Serialise to ``(gr_text, co_text)``; undirected edges are written as arc pairs."""
    arcs = []
    src = np.repeat(np.arange(g.n), np.diff(g.indptr))
    for u, v, w in zip(src.tolist(), g.indices.tolist(), g.weights.tolist()):
        arcs.append(f"a {u + 1} {v + 1} {_fmt(w)}")
    gr = "\n".join([f"p sp {g.n} {len(arcs)}", *arcs]) + "\n"
    co = None
    if g.coords is not None:
        lines = [f"p aux sp co {g.n}"]
        lines += [f"v {i + 1} {_fmt(x)} {_fmt(y)}" for i, (x, y) in enumerate(g.coords.tolist())]
        co = "\n".join(lines) + "\n"
    return gr, co


def read_dimacs(gr_path, co_path=None, **kwargs) -> Graph:
    with open(gr_path) as fh:
        gr = fh.read()
    co = None
    if co_path is not None:
        with open(co_path) as fh:
            co = fh.read()
    return parse_dimacs(gr, co, **kwargs)


# -- structure -----------------------------------------------------------------


def induced_subgraph(g: Graph, nodes: Sequence[int]) -> Graph:
    """Subgraph on ``nodes`` (relabelled in the given order), keeping ``original_ids``."""
    nodes = np.asarray(nodes, dtype=np.int64)
    local = np.full(g.n, -1, dtype=np.int64)
    local[nodes] = np.arange(len(nodes))
    src = np.repeat(np.arange(g.n), np.diff(g.indptr))
    keep = (local[src] >= 0) & (local[g.indices] >= 0)
    orig = g.original_ids[nodes] if g.original_ids is not None else nodes
    coords = g.coords[nodes] if g.coords is not None else None
    return Graph.from_arrays(len(nodes), local[src[keep]], local[g.indices[keep]],
                             g.weights[keep], directed=g.directed, coords=coords,
                             original_ids=orig)


def largest_connected_component(g: Graph) -> Graph:
    """Induced subgraph on the largest (weakly) connected component.

    Ties go to the component holding the smallest original id. The result's
    ``original_ids`` maps new ids back to ids of ``g``'s source.
    """
    if g.n == 0:
        return g
    _, labels = connected_components(g.to_csr(), directed=True, connection="weak")
    sizes = np.bincount(labels)
    first = np.full(len(sizes), g.n, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(g.n))
    candidates = np.flatnonzero(sizes == sizes.max())
    best = int(candidates[np.argmin(first[candidates])])
    nodes = np.flatnonzero(labels == best)
    return induced_subgraph(g, nodes)


# -- shortest paths ------------------------------------------------------------


def _dijkstra(adj, n: int, source: int, restrict_to) -> list[float]:
    allowed = None
    if restrict_to is not None:
        allowed = set(restrict_to)
        if source not in allowed:
            raise GraphError("restrict_to must contain the source")
    dist = [INF] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v] and (allowed is None or v in allowed):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def dijkstra(g: Graph, source: int, restrict_to: Optional[Iterable[int]] = None) -> list[float]:
    """Distances from ``source``, using only nodes in ``restrict_to`` if given.

    Unreachable nodes get ``inf``.
    """
    source = g.check_node(source)
    return _dijkstra(g.adjacency, g.n, source, restrict_to)


def dijkstra_reverse(g: Graph, source: int,
                     restrict_to: Optional[Iterable[int]] = None) -> list[float]:
    """Distances from every node *to* ``source``."""
    source = g.check_node(source)
    return _dijkstra(g.reverse_adjacency, g.n, source, restrict_to)


def nearest_by_dijkstra(g: Graph, q: int, sites) -> Optional[tuple[int, float]]:
    """Closest site to ``q`` as ``(site, dist)``, or ``None`` if none is reachable.

    The search stops once the first site is settled, after draining the
    remaining nodes at that same distance so ties resolve to the smallest id.
    """
    q = g.check_node(q)
    if not sites:
        return None
    adj = g.adjacency
    dist = {q: 0.0}
    done = set()
    heap = [(0.0, q)]
    found = -1
    found_d = INF
    while heap:
        d, u = heapq.heappop(heap)
        if d > found_d:
            break
        if u in done:
            continue
        done.add(u)
        if u in sites:
            if found < 0 or u < found:
                found, found_d = u, d
        for v, w in adj[u]:
            nd = d + w
            if nd < dist.get(v, INF):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    if found < 0:
        return None
    return found, found_d
