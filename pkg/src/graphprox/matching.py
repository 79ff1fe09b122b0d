"""Greedy stable roommates matching on graph sites via nearest-neighbour chains."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

from scipy.sparse.csgraph import connected_components

from .graph import Graph, dijkstra
from .reactive import ReactiveNN


class MatchingError(ValueError):
    pass


@dataclass
class Matching:
    pairs: list  # (a, b) with a < b
    unmatched: Optional[int] = None
    nn_queries: int = 0
    disables: int = 0

    def partner(self) -> dict:
        out = {}
        for a, b in self.pairs:
            out[a] = b
            out[b] = a
        return out

    def sites(self) -> set:
        s = {v for p in self.pairs for v in p}
        if self.unmatched is not None:
            s.add(self.unmatched)
        return s


def greedy_stable_matching(r: ReactiveNN, sites: Iterable[int]) -> Matching:
    """Match sites greedily by closest pairs using a nearest-neighbour chain.

    ``sites`` must be exactly the enabled sites of ``r``. Matched sites are
    disabled as they are paired; on an odd count one site stays enabled and
    is reported as unmatched.
    """
    sites = sorted({r.graph.check_node(v) for v in sites})
    if set(sites) != r.sites():
        raise MatchingError("the structure's enabled sites must equal the sites to match")
    if r.graph.directed:
        raise MatchingError("stable matching needs an undirected graph")
    if sites:
        _, labels = connected_components(r.graph.to_csr(), directed=False)
        if len(set(labels[sites].tolist())) > 1:
            raise MatchingError("some pair of sites is unreachable from each other")

    m = Matching([])
    remaining = set(sites)
    nxt = 0  # sites[nxt:] holds every unmatched site not yet on the stack
    stack: list[int] = []
    on_stack: set[int] = set()
    while remaining:
        if not stack:
            while sites[nxt] not in remaining:
                nxt += 1
            stack.append(sites[nxt])
            on_stack.add(sites[nxt])
        t = stack[-1]
        ans = r.nearest_other(t)
        m.nn_queries += 1
        if ans is None:
            # t is the last site left
            m.unmatched = t
            remaining.discard(t)
            break
        u = ans.site
        if len(stack) >= 2 and stack[-2] == u:
            stack.pop()
            stack.pop()
            on_stack.difference_update((t, u))
            m.pairs.append((min(t, u), max(t, u)))
            for v in (t, u):
                r.disable(v)
                m.disables += 1
                remaining.discard(v)
        elif u in on_stack:
            raise RuntimeError(f"nearest-neighbour chain revisited site {u}")
        else:
            stack.append(u)
            on_stack.add(u)
    return m


def _site_distances(g: Graph, sites: list) -> dict:
    d = {}
    for p in sites:
        row = dijkstra(g, p)
        d[p] = {q: row[q] for q in sites}
    return d


def verify_stability(g: Graph, m: Matching) -> list:
    """Blocking pairs ``(p, q)``, each strictly closer to the other than to its partner."""
    sites = sorted(m.sites())
    dist = _site_distances(g, sites)
    partner = m.partner()

    def to_partner(v):
        return dist[v][partner[v]] if v in partner else math.inf

    blocking = []
    for i, p in enumerate(sites):
        for q in sites[i + 1:]:
            if partner.get(p) == q:
                continue
            d = dist[p][q]
            if d < to_partner(p) and d < to_partner(q):
                blocking.append((p, q))
    return blocking


def brute_force_greedy(g: Graph, sites: Iterable[int]) -> Matching:
    """Repeatedly match the globally closest remaining pair (ties by ids)."""
    sites = sorted(set(sites))
    dist = _site_distances(g, sites)
    cand = sorted((dist[p][q], p, q) for i, p in enumerate(sites) for q in sites[i + 1:])
    left = set(sites)
    m = Matching([])
    for d, p, q in cand:
        if p in left and q in left:
            m.pairs.append((p, q))
            left -= {p, q}
    if left:
        (m.unmatched,) = left
    return m
