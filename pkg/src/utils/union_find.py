"""Disjoint-set forest over vertices 0..n-1, and forest checks built on it"""
from collections import Counter
from typing import Iterable, List

from models.graph import Graph


class UnionFind:
    """Union by height with path halving"""

    def __init__(self, n: int):
        self.parents: List[int] = list(range(n))
        self.heights: List[int] = [1] * n

    def root(self, v: int) -> int:
        while self.parents[v] != v:
            self.parents[v] = self.parents[self.parents[v]]
            v = self.parents[v]
        return v

    def join(self, v1: int, v2: int) -> bool:
        """Merge the sets of v1 and v2; False if they were already one set"""
        r1, r2 = self.root(v1), self.root(v2)
        if r1 == r2:
            return False
        if self.heights[r1] > self.heights[r2]:
            r1, r2 = r2, r1
        self.parents[r1] = r2
        self.heights[r2] = max(self.heights[r2], self.heights[r1] + 1)
        return True

    def component_sizes(self) -> List[int]:
        return list(Counter(self.root(v) for v in range(len(self.parents))).values())


def is_forest(g: Graph, edges: Iterable[int]) -> bool:
    """True if the edge subset of g contains no cycle"""
    sets = UnionFind(g.n)
    return all(sets.join(*g.endpoints(e)) for e in edges)


def forest_component_sizes(g: Graph, edges: Iterable[int]) -> List[int]:
    """Component sizes of the spanning subgraph (V, edges)"""
    sets = UnionFind(g.n)
    for e in edges:
        sets.join(*g.endpoints(e))
    return sets.component_sizes()
