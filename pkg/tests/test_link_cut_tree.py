"""Tests for the link-cut tree"""
import networkx as nx
import numpy as np

from services.link_cut_tree import LinkCutTree


def test_path_queries_match_networkx():
    rng = np.random.default_rng(17)
    n = 30
    lct = LinkCutTree(n)
    forest = nx.Graph()
    forest.add_nodes_from(range(n))

    for _ in range(3000):
        u, v = (int(x) for x in rng.integers(n, size=2))
        if u == v:
            continue
        if forest.has_edge(u, v):
            lct.cut(u, v)
            forest.remove_edge(u, v)
        elif not nx.has_path(forest, u, v):
            lct.link(u, v)
            forest.add_edge(u, v)
        a, b = (int(x) for x in rng.integers(n, size=2))
        connected = nx.has_path(forest, a, b)
        assert lct.connected(a, b) == connected
        if connected:
            assert lct.path(a, b) == nx.shortest_path(forest, a, b)


def test_copy_is_independent():
    lct = LinkCutTree(4)
    lct.link(0, 1)
    lct.link(1, 2)
    clone = lct.copy()
    clone.cut(1, 2)
    assert lct.connected(0, 2)
    assert not clone.connected(0, 2)
    assert lct.find_root(2) == lct.find_root(0)
