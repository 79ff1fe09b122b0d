import numpy as np
import pytest

from graphprox.generators import grid_graph, path_graph
from graphprox.graph import Graph
from graphprox.hierarchy import build
from graphprox.matching import (Matching, MatchingError, brute_force_greedy,
                                greedy_stable_matching, verify_stability)
from graphprox.reactive import ReactiveNN


def match(g, sites, base=1):
    r = ReactiveNN(build(g, base_case_size=base), sites)
    return greedy_stable_matching(r, sites), r


def test_two_sites():
    m, _ = match(path_graph([2]), [0, 1])
    assert m.pairs == [(0, 1)] and m.unmatched is None


def test_gapped_path():
    # sites at positions 0, 1, 3, 7
    g = path_graph([1, 2, 4])
    m, r = match(g, [0, 1, 2, 3])
    assert sorted(m.pairs) == [(0, 1), (2, 3)]
    assert r.site_count == 0
    assert verify_stability(g, m) == []


def test_swapped_pairs_block():
    g = path_graph([1, 2, 4])
    assert (0, 1) in verify_stability(g, Matching([(0, 2), (1, 3)]))


def test_single_pair_is_stable():
    assert verify_stability(path_graph([5]), Matching([(0, 1)])) == []


def test_three_sites_leave_one():
    g = path_graph([1, 5])
    m, r = match(g, [0, 1, 2])
    assert m.pairs == [(0, 1)]
    assert m.unmatched == 2
    assert r.sites() == {2}
    assert verify_stability(g, m) == []


def test_requires_enabled_set():
    g = path_graph([1, 1, 1])
    r = ReactiveNN(build(g, base_case_size=1), [0, 1, 2])
    with pytest.raises(MatchingError):
        greedy_stable_matching(r, [0, 1])
    assert r.sites() == {0, 1, 2}


def test_unreachable_pair_rejected_before_mutation():
    g = Graph.from_edges(4, [(0, 1, 1), (2, 3, 1)], coords=[[0, 0], [1, 0], [5, 0], [6, 0]])
    r = ReactiveNN(build(g, base_case_size=1), [0, 1, 2, 3])
    with pytest.raises(MatchingError):
        greedy_stable_matching(r, [0, 1, 2, 3])
    assert r.sites() == {0, 1, 2, 3}


@pytest.mark.parametrize("seed", range(8))
def test_random_grids_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    g = grid_graph(int(rng.integers(8, 20)), rng=rng)
    k = int(rng.integers(2, 61))
    sites = sorted(rng.choice(g.n, k, replace=False).tolist())
    m, _ = match(g, sites, base=20)
    assert verify_stability(g, m) == []
    bf = brute_force_greedy(g, sites)
    assert sorted(m.pairs) == sorted(bf.pairs)
    assert m.unmatched == bf.unmatched
    assert (m.unmatched is not None) == (k % 2 == 1)
    assert m.nn_queries <= 3 * k and m.disables <= 3 * k
