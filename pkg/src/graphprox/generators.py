"""Synthetic test and benchmark graphs."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .graph import Graph

# Weights are drawn as multiples of 2**-10 so every path length is an exact
# float64 sum and distance comparisons stay exact.
WEIGHT_QUANTUM = 1.0 / 1024


def random_weights(rng: np.random.Generator, size: int, high: float = 10.0) -> np.ndarray:
    """Uniform weights in ``(0, high]`` on the dyadic grid ``WEIGHT_QUANTUM``."""
    steps = int(round(high / WEIGHT_QUANTUM))
    return rng.integers(1, steps + 1, size=size) * WEIGHT_QUANTUM


def grid_graph(rows: int, cols: Optional[int] = None, *, rng: Optional[np.random.Generator] = None,
               high: float = 10.0) -> Graph:
    """``rows x cols`` 4-neighbour grid with node ``r * cols + c`` at ``(c, r)``.

    Unit weights unless ``rng`` is given.
    """
    cols = rows if cols is None else cols
    ids = np.arange(rows * cols).reshape(rows, cols)
    horiz = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1)
    vert = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1)
    pairs = np.concatenate([horiz, vert])
    if rng is None:
        w = np.ones(len(pairs))
    else:
        w = random_weights(rng, len(pairs), high)
    src = np.concatenate([pairs[:, 0], pairs[:, 1]])
    dst = np.concatenate([pairs[:, 1], pairs[:, 0]])
    coords = np.stack([np.tile(np.arange(cols), rows), np.repeat(np.arange(rows), cols)], axis=1)
    return Graph.from_arrays(rows * cols, src, dst, np.concatenate([w, w]), coords=coords)


def random_tree(n: int, rng: np.random.Generator, *, high: float = 10.0) -> Graph:
    """Random recursive tree: node ``i`` hangs off a uniform earlier node."""
    if n <= 1:
        return Graph.from_edges(n, [])
    child = np.arange(1, n)
    parent = np.array([rng.integers(0, i) for i in range(1, n)])
    perm = rng.permutation(n)
    u, v = perm[child], perm[parent]
    w = random_weights(rng, n - 1, high)
    return Graph.from_arrays(n, np.concatenate([u, v]), np.concatenate([v, u]),
                             np.concatenate([w, w]))


def random_strongly_connected(n: int, rng: np.random.Generator, *, extra: int = 2,
                              high: float = 10.0, coords: bool = True) -> Graph:
    """Directed graph on a random Hamiltonian cycle plus ``extra * n`` random arcs.

    Nodes get random planar coordinates so coordinate-based separators apply.
    """
    perm = rng.permutation(n)
    arcs = {}
    for i in range(n):
        arcs[(int(perm[i]), int(perm[(i + 1) % n]))] = None
    while len(arcs) < min(n * (1 + extra), n * (n - 1)):
        u, v = (int(x) for x in rng.integers(0, n, size=2))
        if u != v:
            arcs.setdefault((u, v), None)
    pairs = np.array(list(arcs), dtype=np.int64)
    w = random_weights(rng, len(pairs), high)
    xy = rng.random((n, 2)) if coords else None
    return Graph.from_arrays(n, pairs[:, 0], pairs[:, 1], w, directed=True, coords=xy)


def path_graph(weights, coords: bool = True) -> Graph:
    """Path ``0 - 1 - ... - k`` with the given consecutive edge weights."""
    k = len(weights) + 1
    edges = [(i, i + 1, w) for i, w in enumerate(weights)]
    xy = None
    if coords:
        xs = np.concatenate([[0.0], np.cumsum(weights)])
        xy = np.stack([xs, np.zeros(k)], axis=1)
    return Graph.from_edges(k, edges, coords=xy)
