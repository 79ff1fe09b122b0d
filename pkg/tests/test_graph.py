import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphprox.generators import grid_graph, path_graph, random_strongly_connected
from graphprox.graph import (DimacsParseError, Graph, GraphError, dijkstra, dijkstra_reverse,
                             largest_connected_component, nearest_by_dijkstra, parse_dimacs,
                             to_dimacs)


def bellman_ford(g: Graph, s: int) -> list:
    d = [math.inf] * g.n
    d[s] = 0.0
    for _ in range(g.n):
        changed = False
        for u, v, w in ((u, int(v), float(w)) for u in range(g.n)
                        for v, w in zip(g.indices[g.indptr[u]:g.indptr[u + 1]],
                                        g.weights[g.indptr[u]:g.indptr[u + 1]])):
            if d[u] + w < d[v]:
                d[v] = d[u] + w
                changed = True
        if not changed:
            break
    return d


@st.composite
def random_graphs(draw, max_n=40, directed=False):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, 3 * n))
    src = draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m))
    dst = draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m))
    # multiples of 1/8 keep every path sum exact
    w = draw(st.lists(st.integers(0, 80), min_size=m, max_size=m))
    edges = [(a, b, x / 8) for a, b, x in zip(src, dst, w)]
    return Graph.from_edges(n, edges, directed=directed)


def test_parse_smallest_file():
    g = parse_dimacs("p sp 2 1\na 1 2 5\n")
    assert g.n == 2
    assert g.edges() == [(0, 1, 5.0)]
    assert not g.directed


def test_parse_out_of_range_names_line():
    with pytest.raises(DimacsParseError) as exc:
        parse_dimacs("c comment\np sp 2 1\na 1 3 5\n")
    assert exc.value.lineno == 3
    assert "line 3" in str(exc.value)


@pytest.mark.parametrize("text, line", [
    ("p sp x 1\n", 1),
    ("a 1 2 3\n", 1),
    ("p sp 2 1\na 1 2 -1\n", 2),
    ("p sp 2 1\na 1 2\n", 2),
])
def test_parse_errors(text, line):
    with pytest.raises(DimacsParseError) as exc:
        parse_dimacs(text)
    assert exc.value.lineno == line


def test_parse_duplicates_keep_min():
    g = parse_dimacs("p sp 2 3\na 1 2 5\na 2 1 3\na 1 2 4\n")
    assert g.edges() == [(0, 1, 3.0)]


def test_parse_coords():
    g = parse_dimacs("p sp 2 1\na 1 2 5\n", "p aux sp co 2\nv 1 10 20\nv 2 -5 7\n")
    assert g.coords.tolist() == [[10, 20], [-5, 7]]


@given(random_graphs())
@settings(max_examples=40, deadline=None)
def test_dimacs_round_trip(g):
    gr, co = to_dimacs(g)
    g2 = parse_dimacs(gr, co)
    assert g2.n == g.n
    assert sorted(g2.edges()) == sorted(g.edges())


def test_lcc_tie_goes_to_smallest_id():
    g = Graph.from_edges(7, [(1, 2, 1), (2, 3, 1), (3, 1, 1), (4, 5, 1), (5, 6, 1), (6, 4, 1)])
    c = largest_connected_component(g)
    assert c.n == 3
    assert c.original_ids.tolist() == [1, 2, 3]


def test_lcc_connected_is_identity():
    g = grid_graph(4)
    c = largest_connected_component(g)
    assert c.n == g.n
    assert c.original_ids.tolist() == list(range(g.n))


def test_dijkstra_path():
    g = Graph.from_edges(3, [(0, 1, 2), (1, 2, 3)])
    assert dijkstra(g, 0) == [0, 2, 5]
    assert dijkstra(g, 0, restrict_to={0, 2})[2] == math.inf


def test_dijkstra_reverse():
    g = Graph.from_edges(2, [(0, 1, 4)], directed=True)
    assert dijkstra_reverse(g, 1) == [4, 0]
    cyc = Graph.from_edges(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)], directed=True)
    assert dijkstra_reverse(cyc, 0) == [0, 2, 1]


@given(random_graphs())
@settings(max_examples=60, deadline=None)
def test_dijkstra_matches_bellman_ford(g):
    for s in range(min(g.n, 4)):
        d = dijkstra(g, s)
        assert d == bellman_ford(g, s)
        assert d[s] == 0
        for u, v, w in g.edges():
            assert d[v] <= d[u] + w and d[u] <= d[v] + w


@given(random_graphs(directed=True))
@settings(max_examples=40, deadline=None)
def test_directed_dijkstra_matches_bellman_ford(g):
    assert dijkstra(g, 0) == bellman_ford(g, 0)


def test_undirected_reverse_equals_forward():
    g = grid_graph(5, rng=np.random.default_rng(2))
    assert dijkstra_reverse(g, 7) == dijkstra(g, 7)


def test_nearest_examples():
    g = path_graph([1, 1, 1])
    assert nearest_by_dijkstra(g, 1, {0, 3}) == (0, 1)
    assert nearest_by_dijkstra(g, 2, {2, 0}) == (2, 0)
    assert nearest_by_dijkstra(g, 2, set()) is None


@given(random_graphs(max_n=25), st.data())
@settings(max_examples=60, deadline=None)
def test_nearest_is_min_over_sites(g, data):
    sites = data.draw(st.sets(st.integers(0, g.n - 1), max_size=g.n))
    q = data.draw(st.integers(0, g.n - 1))
    d = dijkstra(g, q)
    ans = nearest_by_dijkstra(g, q, sites)
    reach = [(d[p], p) for p in sites if d[p] < math.inf]
    if not reach:
        assert ans is None
    else:
        best = min(reach)
        assert ans == (best[1], best[0])


def test_check_node():
    g = grid_graph(2)
    with pytest.raises(GraphError):
        g.check_node(4)
    with pytest.raises(GraphError):
        g.check_node(-1)


def test_directed_generator_strongly_connected():
    g = random_strongly_connected(30, np.random.default_rng(0))
    assert all(x < math.inf for x in dijkstra(g, 0))
    assert all(x < math.inf for x in dijkstra_reverse(g, 0))
