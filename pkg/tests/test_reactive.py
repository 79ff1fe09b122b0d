import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphprox.generators import grid_graph, path_graph, random_strongly_connected, random_tree
from graphprox.graph import Graph, GraphError, nearest_by_dijkstra
from graphprox.hierarchy import build
from graphprox.reactive import NNAnswer, ReactiveNN


@pytest.fixture(scope="module")
def grid():
    g = grid_graph(15, rng=np.random.default_rng(4))
    return g, build(g)


def oracle(g, q, sites):
    ans = nearest_by_dijkstra(g, q, sites)
    return None if ans is None else NNAnswer(*ans)


def test_empty_and_full(grid):
    g, h = grid
    r = ReactiveNN(h)
    assert all(len(q) == 0 for q in r.queues())
    assert r.nearest(0) is None
    full = ReactiveNN(h, range(g.n))
    for q in full.queues():
        assert len(q) == len(q.owner.nodes)
    assert full.nearest(17) == (17, 0.0)


def test_queue_contents_match_tables(grid):
    g, h = grid
    rng = np.random.default_rng(0)
    sites = set(rng.choice(g.n, 40, replace=False).tolist())
    r = ReactiveNN(h, sites)
    assert r.check_queues() == []
    for q in r.queues():
        hn = q.owner
        want = {int(v): float(hn.dist_from[q.sep][i])
                for i, v in enumerate(hn.nodes) if int(v) in sites}
        assert q.entries() == want
        if want:
            best = min(want.items(), key=lambda kv: (kv[1], kv[0]))
            assert q.find_min() == best


def test_enable_disable_flags(grid):
    g, h = grid
    r = ReactiveNN(h)
    assert r.enable(5)
    assert not r.enable(5)
    assert r.nearest(5) == (5, 0.0)
    assert r.disable(5)
    assert not r.disable(5)
    assert not r.disable(6)
    assert r.nearest(5) is None
    with pytest.raises(GraphError):
        r.enable(g.n)
    with pytest.raises(GraphError):
        r.nearest(-1)


def test_random_updates_keep_queues_consistent(grid):
    g, h = grid
    rng = np.random.default_rng(1)
    r = ReactiveNN(h, rng.choice(g.n, 20, replace=False))
    for _ in range(300):
        v = int(rng.integers(g.n))
        (r.disable if r.is_enabled(v) else r.enable)(v)
    assert r.check_queues() == []


def test_enable_then_disable_is_invisible():
    g = grid_graph(10, rng=np.random.default_rng(9))
    h = build(g)
    r = ReactiveNN(h, [3, 57, 88])
    before = [r.nearest(q) for q in range(g.n)]
    for p in range(g.n):
        if r.enable(p):
            r.disable(p)
    assert [r.nearest(q) for q in range(g.n)] == before
    r.disable(57)
    r.enable(57)
    assert [r.nearest(q) for q in range(g.n)] == before


def test_unique_site_disabled():
    g = grid_graph(6)
    r = ReactiveNN(build(g, base_case_size=4), [20])
    r.disable(20)
    assert all(r.nearest(q) is None for q in range(g.n))


def test_five_by_five_corner_tie():
    g = grid_graph(5)
    r = ReactiveNN(build(g, base_case_size=3), [0, 24])
    for opt in (True, False):
        assert r.nearest(12, optimized=opt) == (0, 4.0)


def test_nearest_other():
    g = Graph.from_edges(2, [(0, 1, 3)], coords=[[0, 0], [3, 0]])
    r = ReactiveNN(build(g, base_case_size=1), [0, 1])
    assert r.nearest_other(0) == (1, 3.0)
    assert r.sites() == {0, 1}
    r.disable(1)
    assert r.nearest_other(0) is None
    assert r.is_enabled(0)


def test_nearest_other_random(grid):
    g, h = grid
    rng = np.random.default_rng(3)
    sites = set(rng.choice(g.n, 25, replace=False).tolist())
    r = ReactiveNN(h, sites)
    for q in rng.choice(g.n, 60).tolist():
        assert r.nearest_other(q) == oracle(g, q, sites - {q})
    assert r.sites() == sites


@given(st.integers(3, 18), st.integers(3, 18), st.integers(0, 2**31), st.integers(0, 40))
@settings(max_examples=25, deadline=None)
def test_optimized_equals_unoptimized_equals_oracle(rows, cols, seed, nsites):
    rng = np.random.default_rng(seed)
    g = grid_graph(rows, cols, rng=rng)
    h = build(g, base_case_size=int(rng.integers(1, 25)))
    sites = set(rng.choice(g.n, min(nsites, g.n), replace=False).tolist())
    r = ReactiveNN(h, sites)
    for q in range(g.n):
        want = oracle(g, q, sites)
        assert r.nearest(q, optimized=True) == want
        assert r.nearest(q, optimized=False) == want


def test_trees_with_centroid():
    rng = np.random.default_rng(21)
    for n in (30, 200, 800):
        g = random_tree(n, rng)
        h = build(g, "centroid")
        sites = set(rng.choice(n, 7, replace=False).tolist())
        r = ReactiveNN(h, sites)
        for q in rng.choice(n, 100).tolist():
            assert r.nearest(q) == oracle(g, q, sites)


def test_directed_correctness():
    rng = np.random.default_rng(17)
    for n in (40, 150, 300):
        g = random_strongly_connected(n, rng)
        h = build(g, base_case_size=int(rng.integers(5, 25)))
        sites = set(rng.choice(n, 6, replace=False).tolist())
        r = ReactiveNN(h, sites)
        for q in range(n):
            assert r.nearest(q) == oracle(g, q, sites)
            assert r.nearest(q, optimized=False) == oracle(g, q, sites)


def test_apply_matches_single_ops(grid):
    g, h = grid
    rng = np.random.default_rng(12)
    init = rng.choice(g.n, 10, replace=False)
    codes = rng.integers(0, 3, 400)
    targets = rng.integers(0, g.n, 400)
    a, b = ReactiveNN(h, init), ReactiveNN(h, init)
    sites, dists = a.apply(codes, targets)
    want = []
    for c, v in zip(codes.tolist(), targets.tolist()):
        if c == 0:
            ans = b.nearest(v)
            want.append((-1, np.inf) if ans is None else tuple(ans))
        elif c == 1:
            b.enable(v)
        else:
            b.disable(v)
    assert list(zip(sites.tolist(), dists.tolist())) == want
    assert a.sites() == b.sites()
    assert a.check_queues() == []
    with pytest.raises(GraphError):
        a.apply([0], [g.n])


def test_zero_weight_ties():
    # equidistant sites through zero-weight edges resolve to the smallest id
    g = path_graph([0, 0, 1, 0])
    r = ReactiveNN(build(g, base_case_size=1), [2, 0, 4])
    for q in range(5):
        assert r.nearest(q) == oracle(g, q, {0, 2, 4})
