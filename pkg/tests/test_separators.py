import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphprox.generators import grid_graph, path_graph, random_tree
from graphprox.graph import Graph
from graphprox.separators import (Separation, SeparatorConfigError, StrategyError, SubgraphView,
                                  balance_limit, centroid_separator, get_strategy,
                                  median_line_separator, validate_separation)


def as_lists(s: Separation):
    return s.separator.tolist(), sorted(p.tolist() for p in s.parts)


def test_three_node_path():
    g = path_graph([1, 1])
    assert as_lists(median_line_separator(g)) == ([1], [[0], [2]])


def test_single_edge():
    g = Graph.from_edges(2, [(0, 1, 1)], coords=[[5, 0], [1, 0]])
    s = median_line_separator(g)
    assert as_lists(s) == ([1], [[0]])


def test_four_by_four_grid():
    g = grid_graph(4)
    s = median_line_separator(g)
    assert len(s.separator) <= 4
    assert all(len(p) <= 10 for p in s.parts)
    assert validate_separation(g, s) == []


@pytest.mark.parametrize("k", [2, 3, 5, 8, 13, 20])
def test_grid_separator_at_most_side(k):
    g = grid_graph(k)
    s = median_line_separator(g)
    assert len(s.separator) <= k
    assert validate_separation(g, s) == []


def test_missing_coords():
    g = Graph.from_edges(3, [(0, 1, 1), (1, 2, 1)])
    with pytest.raises(SeparatorConfigError):
        median_line_separator(g)


def test_disconnected_small_components_get_empty_separator():
    g = Graph.from_edges(6, [(0, 1, 1), (2, 3, 1), (4, 5, 1)],
                         coords=[[i, 0] for i in range(6)])
    s = median_line_separator(g)
    assert as_lists(s) == ([], [[0, 1], [2, 3], [4, 5]])


def test_disconnected_big_component_is_split():
    edges = [(i, i + 1, 1) for i in range(8)]
    g = Graph.from_edges(10, edges, coords=[[i, 0] for i in range(10)])
    s = median_line_separator(g)
    assert len(s.separator) == 1
    assert validate_separation(g, s) == []


def test_centroid_path_and_star():
    assert as_lists(centroid_separator(path_graph([1] * 4, coords=False))) == ([2], [[0, 1], [3, 4]])
    star = Graph.from_edges(7, [(0, i, 1) for i in range(1, 7)])
    sep, parts = as_lists(centroid_separator(star))
    assert sep == [0] and parts == [[i] for i in range(1, 7)]


def test_centroid_rejects_cycle():
    cyc = Graph.from_edges(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)])
    with pytest.raises(StrategyError):
        centroid_separator(cyc)


def test_centroid_random_tree_exhaustive():
    g = random_tree(100, np.random.default_rng(5))
    s = centroid_separator(g)
    assert max(len(p) for p in s.parts) <= 50
    # brute force: no other removal gives a smaller largest part
    view = SubgraphView.of(g)
    best = 100
    for v in range(100):
        removed = np.zeros(100, bool)
        removed[v] = True
        best = min(best, max(len(c) for c in view.components(removed)))
    assert max(len(p) for p in s.parts) == best


def test_planted_violations():
    g = path_graph([1, 1, 1])
    bad = Separation(np.array([], dtype=np.int64), [np.array([0, 1]), np.array([2, 3])])
    v = validate_separation(g, bad)
    assert [x.kind for x in v] == ["crossing edge"]
    assert v[0].witness == (1, 2)

    g5 = path_graph([1] * 5)
    unbalanced = Separation(np.array([5]), [np.array([0, 1, 2, 3, 4])])
    assert [x.kind for x in validate_separation(g5, unbalanced)] == ["balance"]

    overlap = Separation(np.array([1]), [np.array([0, 1]), np.array([2, 3])])
    kinds = [x.kind for x in validate_separation(g, overlap)]
    assert "overlap" in kinds

    missing = Separation(np.array([1]), [np.array([0])])
    assert {x.kind for x in validate_separation(g, missing)} == {"coverage"}


def test_balance_limit():
    assert balance_limit(3) == 2
    assert balance_limit(16) == 11
    assert balance_limit(1) == 1


@given(st.integers(2, 25), st.integers(2, 25), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_median_valid_and_deterministic(r, c, seed):
    g = grid_graph(r, c, rng=np.random.default_rng(seed))
    a = median_line_separator(g)
    assert validate_separation(g, a) == []
    assert as_lists(a) == as_lists(median_line_separator(g))


@given(st.integers(2, 300), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_centroid_valid(n, seed):
    g = random_tree(n, np.random.default_rng(seed))
    s = centroid_separator(g)
    assert validate_separation(g, s) == []
    assert max(len(p) for p in s.parts) <= n // 2


def test_subgraph_view_is_induced():
    g = grid_graph(4)
    view = SubgraphView.of(g, np.array([0, 1, 4, 5, 15]))
    s = median_line_separator(view)
    assert validate_separation(view, s) == []
    assert 15 in np.concatenate(s.parts).tolist() or 15 in s.separator.tolist()


def test_get_strategy():
    assert get_strategy("median").requires_coords
    assert not get_strategy("centroid").requires_coords
    with pytest.raises(SeparatorConfigError):
        get_strategy("planar")
