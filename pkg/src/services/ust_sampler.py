"""
Uniform spanning trees of induced subgraphs.

Wilson's algorithm: loop-erased random walks rooted at the smallest vertex
of the subset, recorded as successor pointers so loops erase themselves.
"""
import logging
from typing import Dict, Iterable, List, Set

import numpy as np

from models.graph import Graph
from utils.errors import InvalidArgumentError, NoSpanningTreeError

logger = logging.getLogger(__name__)


def sample_ust(g: Graph, subset: Iterable[int], rng: np.random.Generator) -> Set[int]:
    """
    Draw a uniform spanning tree of G[subset]

    Args:
        g: Host graph
        subset: Vertex set inducing the subgraph
        rng: numpy Generator; the draw is a pure function of its state

    Returns:
        Edge indices of the tree (|subset| - 1 of them)

    Raises:
        NoSpanningTreeError: G[subset] is disconnected
    """
    members = sorted(set(subset))
    if not members:
        raise InvalidArgumentError("sample_ust needs a nonempty vertex set")
    if not g.is_connected(members):
        raise NoSpanningTreeError(f"Induced subgraph on {len(members)} vertices is disconnected")

    inside = set(members)
    # Neighbors restricted to the subset, as (neighbor, edge) lists
    local: Dict[int, List[tuple]] = {
        v: [(w, e) for w, e in g.adjacency[v] if w in inside] for v in members
    }

    root = members[0]
    in_tree = {root}
    successor: Dict[int, int] = {}
    via_edge: Dict[int, int] = {}
    tree: Set[int] = set()

    for start in members:
        if start in in_tree:
            continue
        u = start
        while u not in in_tree:
            nbrs = local[u]
            w, e = nbrs[int(rng.integers(len(nbrs)))]
            successor[u] = w
            via_edge[u] = e
            u = w
        u = start
        while u not in in_tree:
            in_tree.add(u)
            tree.add(via_edge[u])
            u = successor[u]

    return tree


def sample_ust_many(g: Graph, subset: Iterable[int], rng: np.random.Generator, draws: int) -> List[frozenset]:
    """Repeated independent draws, each returned as a frozenset of edge indices"""
    members = list(subset)
    trees = [frozenset(sample_ust(g, members, rng)) for _ in range(draws)]
    logger.debug(f"Drew {draws} uniform spanning trees on {len(members)} vertices")
    return trees
