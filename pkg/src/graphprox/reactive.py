"""Reactive nearest-site structure over a separator hierarchy.

Each separator node ``s`` of each hierarchy node ``H`` owns a deletable
priority queue holding the enabled sites of ``H`` keyed by their distance
from ``s`` inside ``H``. A query combines, level by level, the best
"through a separator" candidate ``d(q, s) + min(Q_s)`` with the answer
found deeper down; base leaves are searched directly with Dijkstra.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Optional

import numpy as np

from . import _kernels as K
from .graph import GraphError
from .hierarchy import Hierarchy, HierarchyNode


class NNAnswer(NamedTuple):
    site: int
    dist: float


class SeparatorQueue:
    """Read-only view of the queue owned by separator ``sep`` of ``owner``."""

    def __init__(self, r: "ReactiveNN", owner: HierarchyNode, sep: int):
        self._r = r
        self.owner = owner
        self.sep = sep

    def __len__(self) -> int:
        return int(self._r._count[self.owner.index])

    @property
    def separator_node(self) -> int:
        return int(self.owner.separator[self.sep])

    def _column(self, arr: np.ndarray) -> np.ndarray:
        h = self.owner
        a, b = self._r._h.toff[h.index], self._r._h.toff[h.index + 1]
        return arr[a:b].reshape(len(h.nodes), len(h.sep_local))[:len(self), self.sep]

    def entries(self) -> dict:
        """``{global site: key}`` for every queued site."""
        locs = self._column(self._r._heap)
        keys = self._column(self._r._hkey)
        return dict(zip(self.owner.nodes[locs].tolist(), keys.tolist()))

    def find_min(self) -> Optional[NNAnswer]:
        if not len(self):
            return None
        top = int(self._column(self._r._heap)[0])
        return NNAnswer(int(self.owner.nodes[top]), float(self._column(self._r._hkey)[0]))


class ReactiveNN:
    """Nearest enabled site queries with enable/disable updates.

    Queries only read the structure; ``enable``, ``disable`` and
    ``nearest_other`` mutate it and need exclusive access.
    """

    def __init__(self, hierarchy: Hierarchy, sites: Iterable[int] = ()):
        h = self._h = hierarchy
        self.graph = h.graph
        self._enabled = np.zeros(h.n, dtype=np.uint8)
        self._count = np.zeros(len(h.hnodes), dtype=np.int64)
        self._heap = np.empty(h.table_entries, dtype=np.int32)
        self._hkey = np.empty(h.table_entries)
        self._pos = np.full(h.table_entries, -1, dtype=np.int32)
        self._dist_q = h.dist_to if h.directed else h.dist
        sites = np.unique(np.fromiter((self.graph.check_node(v) for v in sites), dtype=np.int64))
        self._enabled[sites] = 1
        self._populate()

    def _populate(self) -> None:
        h = self._h
        for hn in h.hnodes:
            m = len(hn.sep_local)
            if hn.is_base or m == 0:
                continue
            members = np.flatnonzero(self._enabled[hn.nodes])
            cnt = len(members)
            self._count[hn.index] = cnt
            if not cnt:
                continue
            k = len(hn.nodes)
            a, b = h.toff[hn.index], h.toff[hn.index + 1]
            heap = self._heap[a:b].reshape(k, m)
            hkey = self._hkey[a:b].reshape(k, m)
            pos = self._pos[a:b].reshape(k, m)
            # a sorted array is a valid heap; stable sort breaks key ties by id
            keys = hn._dist[members]
            ranks = np.argsort(keys, axis=0, kind="stable")
            heap[:cnt] = members[ranks]
            hkey[:cnt] = np.take_along_axis(keys, ranks, axis=0)
            pos[heap[:cnt], np.arange(m)] = np.arange(cnt, dtype=np.int32)[:, None]

    # -- site set ----------------------------------------------------------

    @property
    def hierarchy(self) -> Hierarchy:
        return self._h

    @property
    def site_count(self) -> int:
        return int(self._enabled.sum())

    def sites(self) -> set:
        return set(np.flatnonzero(self._enabled).tolist())

    def is_enabled(self, v: int) -> bool:
        return bool(self._enabled[self.graph.check_node(v)])

    def queue(self, owner: HierarchyNode, sep: int) -> SeparatorQueue:
        return SeparatorQueue(self, owner, sep)

    def queues(self):
        for hn in self._h.hnodes:
            if not hn.is_base:
                for s in range(len(hn.sep_local)):
                    yield SeparatorQueue(self, hn, s)

    # -- updates -----------------------------------------------------------

    def _kernel_args(self):
        h = self._h
        return (h.chain_ptr, h.chain_h, h.chain_loc, h.h_base, h.h_nsep, h.toff,
                h.dist, self._heap, self._hkey, self._pos, self._count, self._enabled)

    def enable(self, p: int) -> bool:
        """Make ``p`` a site; returns False if it already was one."""
        p = self.graph.check_node(p)
        return bool(K.enable_site(p, *self._kernel_args()))

    def disable(self, p: int) -> bool:
        """Remove ``p`` from the sites; returns False if it was not one."""
        p = self.graph.check_node(p)
        return bool(K.disable_site(p, *self._kernel_args()))

    # -- queries -----------------------------------------------------------

    def nearest(self, q: int, optimized: bool = True) -> Optional[NNAnswer]:
        """Closest enabled site to ``q`` (ties to the smallest id), or None.

        With ``optimized`` each level scans its separators by increasing
        distance from ``q`` and stops once they are farther than the best
        site found so far.
        """
        q = self.graph.check_node(q)
        h = self._h
        site, d = K.nearest_site(q, optimized, h.chain_ptr, h.chain_h, h.chain_loc, h.h_base,
                                 h.h_size, h.h_nsep, h.toff, h.noff, h.flat_nodes,
                                 self._dist_q, h.order, self._heap, self._hkey, self._count,
                                 self._enabled, h.leaf_ptr, h.leaf_nbr, h.leaf_w)
        if site < 0:
            return None
        return NNAnswer(int(site), float(d))

    def nearest_other(self, q: int, optimized: bool = True) -> Optional[NNAnswer]:
        """Closest enabled site other than ``q`` itself."""
        q = self.graph.check_node(q)
        was = self.disable(q)
        try:
            return self.nearest(q, optimized)
        finally:
            if was:
                self.enable(q)

    def apply(self, codes, targets, optimized: bool = True):
        """Run an operation list in one compiled call.

        ``codes[i]`` is 0 (query), 1 (enable) or 2 (disable) on node
        ``targets[i]``. Returns ``(sites, dists)`` for the queries in order,
        with site -1 and distance inf where no site is reachable.
        """
        codes = np.ascontiguousarray(codes, dtype=np.int64)
        targets = np.ascontiguousarray(targets, dtype=np.int64)
        if len(targets) and (targets.min() < 0 or targets.max() >= self.graph.n):
            raise GraphError("operation list references an unknown node id")
        nq = int((codes == 0).sum())
        sites = np.empty(nq, dtype=np.int64)
        dists = np.empty(nq)
        h = self._h
        K.run_separator_ops(codes, targets, optimized, h.chain_ptr, h.chain_h, h.chain_loc,
                            h.h_base, h.h_size, h.h_nsep, h.toff, h.noff, h.flat_nodes, h.dist,
                            self._dist_q, h.order, self._heap, self._hkey, self._pos, self._count,
                            self._enabled, h.leaf_ptr, h.leaf_nbr, h.leaf_w, sites, dists)
        return sites, dists

    # -- diagnostics -------------------------------------------------------

    def check_queues(self) -> list:
        """Recompute every queue from scratch; returns a description per mismatch."""
        problems = []
        for hn in self._h.hnodes:
            if hn.is_base or not len(hn.sep_local):
                continue
            members = np.flatnonzero(self._enabled[hn.nodes])
            want_sites = set(hn.nodes[members].tolist())
            k, m = len(hn.nodes), len(hn.sep_local)
            a, b = self._h.toff[hn.index], self._h.toff[hn.index + 1]
            pos = self._pos[a:b].reshape(k, m)
            cnt = int(self._count[hn.index])
            if cnt != len(members):
                problems.append(f"graph {hn.index}: count {cnt} for {len(members)} sites")
                continue
            absent = np.ones(k, dtype=bool)
            absent[members] = False
            if (pos[absent] != -1).any():
                problems.append(f"graph {hn.index}: position map lists absent sites")
            for s in range(m):
                q = SeparatorQueue(self, hn, s)
                got = q.entries()
                if set(got) != want_sites:
                    problems.append(f"graph {hn.index} sep {s}: sites differ")
                    continue
                keys = hn._dist[members, s]
                if any(got[v] != kk for v, kk in zip(hn.nodes[members].tolist(), keys.tolist())):
                    problems.append(f"graph {hn.index} sep {s}: keys differ")
                slots = q._column(self._heap)
                if cnt:
                    pair = [(hn._dist[x, s], x) for x in slots.tolist()]
                    if any(pair[(i - 1) // 2] > pair[i] for i in range(1, cnt)):
                        problems.append(f"graph {hn.index} sep {s}: heap order broken")
                    if (pos[slots, s] != np.arange(cnt)).any():
                        problems.append(f"graph {hn.index} sep {s}: position map stale")
                    if pair[0] != min(pair):
                        problems.append(f"graph {hn.index} sep {s}: find-min wrong")
        return problems


__all__ = ["NNAnswer", "ReactiveNN", "SeparatorQueue", "GraphError"]
