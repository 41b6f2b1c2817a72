"""
Dynamic spanning forests for the chains.

ForestState keeps component labels and sizes incrementally: a cut relabels
only the smaller side, found by two interleaved traversals; a link relabels
the smaller component. Tree paths come from a link-cut tree.
NaiveForestState recomputes everything by traversal after each update and
serves as the test oracle; both share the same interface.
"""
import logging
from collections import deque
from typing import Dict, Iterable, List, Optional, Set, Tuple

from models.graph import Graph
from models.partition import PartitionView
from services.link_cut_tree import LinkCutTree
from utils.errors import (
    CycleError,
    InvalidArgumentError,
    InvalidForestError,
    NotConnectedError,
    NotPresentError,
)
from utils.union_find import is_forest

logger = logging.getLogger(__name__)


class _ForestBase:
    """Shared queries over a forest stored as per-vertex tree adjacency"""

    graph: Graph
    _forest: Set[int]
    _tree_adj: List[Dict[int, int]]

    @property
    def forest_edges(self) -> Set[int]:
        return self._forest

    @property
    def k(self) -> int:
        raise NotImplementedError

    @property
    def comp_of(self) -> List[int]:
        raise NotImplementedError

    @property
    def comp_size(self) -> List[int]:
        raise NotImplementedError

    def component_of(self, v: int) -> int:
        raise NotImplementedError

    def tree_neighbors(self, v: int) -> Dict[int, int]:
        """Forest neighbors of v mapped to the connecting edge index"""
        return self._tree_adj[v]

    def component_vertices(self, comp: int) -> List[int]:
        """Vertices of a component in traversal order from its smallest-labelled member"""
        labels = self.comp_of
        start = labels.index(comp)
        return self._traverse(start)

    def component_vertices_of(self, v: int) -> List[int]:
        """Vertices of the component containing v"""
        return self._traverse(v)

    def component_edges(self, comp: int) -> List[int]:
        edges = []
        for v in self.component_vertices(comp):
            edges.extend(e for w, e in self._tree_adj[v].items() if v < w)
        return edges

    def _traverse(self, start: int) -> List[int]:
        seen = {start}
        order = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in self._tree_adj[u]:
                if w not in seen:
                    seen.add(w)
                    order.append(w)
                    queue.append(w)
        return order

    def subtree_split_sizes(self, comp: int, root: int) -> Dict[int, Tuple[int, int]]:
        """
        Side sizes for every tree edge of a component

        Args:
            comp: Component id
            root: Vertex of that component the sides are oriented from

        Returns:
            Map edge index -> (size of the side containing root, size of the far side)
        """
        if self.component_of(root) != comp:
            raise InvalidArgumentError(f"Vertex {root} is not in component {comp}")
        return tree_split_sizes(self._tree_adj, root)

    def partition(self) -> PartitionView:
        return PartitionView.from_assignment(self.comp_of)

    def serialize(self) -> str:
        """One line: host graph digest followed by sorted forest edge indices"""
        return ' '.join([self.graph.digest()] + [str(e) for e in sorted(self._forest)])

    def validate(self) -> None:
        """Check labels and sizes against a from-scratch traversal"""
        expected = _label_components(self.graph.n, self._tree_adj)
        if not is_forest(self.graph, self._forest):
            raise InvalidForestError("Forest edge set contains a cycle")
        labels = self.comp_of
        pairs = {}
        for v in range(self.graph.n):
            mapped = pairs.setdefault(labels[v], expected[v])
            if mapped != expected[v]:
                raise InvalidForestError(f"Component label of vertex {v} disagrees with traversal")
        if len(set(pairs.values())) != len(pairs) or len(pairs) != self.k:
            raise InvalidForestError("Component count disagrees with traversal")
        counts: Dict[int, int] = {}
        for label in labels:
            counts[label] = counts.get(label, 0) + 1
        sizes = self.comp_size
        for label, size in counts.items():
            if sizes[label] != size:
                raise InvalidForestError(f"Stored size of component {label} is {sizes[label]}, traversal finds {size}")
        if sum(sizes) != self.graph.n:
            raise InvalidForestError("Component sizes do not sum to n")

    def __eq__(self, other) -> bool:
        if not isinstance(other, _ForestBase):
            return NotImplemented
        return self.graph is other.graph and self._forest == other._forest

    def __hash__(self):
        return hash(frozenset(self._forest))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} k={self.k} edges={len(self._forest)}>"


class ForestState(_ForestBase):
    """
    Spanning forest of a host graph with incremental component bookkeeping.

    Components have dense ids 0..k-1 reached through a slot table, so
    compaction after a link is O(1). Each slot carries a version that is
    bumped whenever its vertex set or tree edges change.
    """

    def __init__(self, g: Graph, edges: Iterable[int] = ()):
        """
        Build the forest from an acyclic edge set

        Args:
            g: Host graph
            edges: Edge indices of the forest
        """
        self.graph = g
        self._forest: Set[int] = set()
        self._edge_list: List[int] = []
        self._edge_pos: Dict[int, int] = {}
        self._tree_adj: List[Dict[int, int]] = [dict() for _ in range(g.n)]
        self._lct = LinkCutTree(g.n)
        self._slot: List[int] = list(range(g.n))
        self._slot_size: Dict[int, int] = {v: 1 for v in range(g.n)}
        self._slot_dense: Dict[int, int] = {v: v for v in range(g.n)}
        self._dense_slot: List[int] = list(range(g.n))
        self._version: Dict[int, int] = {v: 0 for v in range(g.n)}
        self._next_slot = g.n

        for e in edges:
            if e < 0 or e >= g.num_edges:
                raise InvalidArgumentError(f"Edge index {e} outside 0..{g.num_edges - 1}")
            if e in self._forest:
                continue
            u, v = g.endpoints(e)
            if self._slot[u] == self._slot[v]:
                raise InvalidForestError(f"Edge {e} = ({u}, {v}) closes a cycle")
            self.link(e)
        self._relabel_canonically()

    def _relabel_canonically(self) -> None:
        """Renumber dense ids in order of each component's smallest vertex"""
        order: List[int] = []
        seen = set()
        for v in range(self.graph.n):
            slot = self._slot[v]
            if slot not in seen:
                seen.add(slot)
                order.append(slot)
        self._dense_slot = order
        self._slot_dense = {slot: idx for idx, slot in enumerate(order)}

    @property
    def k(self) -> int:
        return len(self._dense_slot)

    @property
    def comp_of(self) -> List[int]:
        dense = self._slot_dense
        return [dense[s] for s in self._slot]

    @property
    def comp_size(self) -> List[int]:
        return [self._slot_size[s] for s in self._dense_slot]

    def component_of(self, v: int) -> int:
        return self._slot_dense[self._slot[v]]

    def component_size_of(self, v: int) -> int:
        return self._slot_size[self._slot[v]]

    def component_token(self, comp: int) -> Tuple[int, int]:
        """(slot, version) pair that changes whenever the component changes"""
        slot = self._dense_slot[comp]
        return slot, self._version[slot]

    def connected(self, u: int, v: int) -> bool:
        return self._slot[u] == self._slot[v]

    def component_vertices(self, comp: int) -> List[int]:
        slot = self._dense_slot[comp]
        start = next(v for v in range(self.graph.n) if self._slot[v] == slot) if self._slot_size[slot] else 0
        return self._traverse(start)

    def link(self, e: int) -> None:
        """
        Add host edge e joining two components

        Raises:
            CycleError: Both endpoints already lie in one component
        """
        u, v = self.graph.endpoints(e)
        su, sv = self._slot[u], self._slot[v]
        if su == sv:
            raise CycleError(f"Edge {e} = ({u}, {v}) lies inside one component")

        if self._slot_size[su] < self._slot_size[sv]:
            big, small, small_root = sv, su, u
        else:
            big, small, small_root = su, sv, v
        for w in self._traverse(small_root):
            self._slot[w] = big
        self._slot_size[big] += self._slot_size.pop(small)

        # Move the last dense id into the freed one
        freed = self._slot_dense.pop(small)
        last_slot = self._dense_slot.pop()
        if last_slot != small:
            self._dense_slot[freed] = last_slot
            self._slot_dense[last_slot] = freed
        del self._version[small]
        self._version[big] += 1

        self._lct.link(u, v)
        self._tree_adj[u][v] = e
        self._tree_adj[v][u] = e
        self._add_forest_edge(e)

    def cut(self, e: int) -> None:
        """
        Remove forest edge e, splitting its component in two

        Raises:
            NotPresentError: e is not a forest edge
        """
        if e not in self._forest:
            raise NotPresentError(f"Edge {e} is not in the forest")
        u, v = self.graph.endpoints(e)
        self._drop_forest_edge(e)
        del self._tree_adj[u][v]
        del self._tree_adj[v][u]
        self._lct.cut(u, v)

        old = self._slot[u]
        side = self._smaller_side(u, v)
        new = self._next_slot
        self._next_slot += 1
        for w in side:
            self._slot[w] = new
        self._slot_size[new] = len(side)
        self._slot_size[old] -= len(side)
        self._slot_dense[new] = len(self._dense_slot)
        self._dense_slot.append(new)
        self._version[new] = 0
        self._version[old] += 1

    def exchange(self, add: int, remove: int) -> None:
        """
        Swap forest edge remove for host edge add inside one component

        The component partition is unchanged. add must close a cycle through
        remove.

        Raises:
            NotPresentError: remove is not a forest edge
            CycleError: add is already a forest edge, or remove is not on its cycle
        """
        if remove not in self._forest:
            raise NotPresentError(f"Edge {remove} is not in the forest")
        if add in self._forest:
            raise CycleError(f"Edge {add} is already in the forest")
        a, b = self.graph.endpoints(add)
        u, v = self.graph.endpoints(remove)
        if self._slot[a] != self._slot[u] or self._slot[b] != self._slot[u]:
            raise CycleError(f"Edge {add} does not close a cycle through edge {remove}")

        self._lct.cut(u, v)
        if self._lct.connected(a, b):
            self._lct.link(u, v)
            raise CycleError(f"Edge {remove} is not on the cycle closed by edge {add}")
        self._lct.link(a, b)

        self._drop_forest_edge(remove)
        del self._tree_adj[u][v]
        del self._tree_adj[v][u]
        self._add_forest_edge(add)
        self._tree_adj[a][b] = add
        self._tree_adj[b][a] = add
        self._version[self._slot[a]] += 1

    def _add_forest_edge(self, e: int) -> None:
        self._forest.add(e)
        self._edge_pos[e] = len(self._edge_list)
        self._edge_list.append(e)

    def _drop_forest_edge(self, e: int) -> None:
        self._forest.discard(e)
        idx = self._edge_pos.pop(e)
        last = self._edge_list.pop()
        if last != e:
            self._edge_list[idx] = last
            self._edge_pos[last] = idx

    def edge_at(self, idx: int) -> int:
        """Forest edge stored at position idx of the indexable edge list"""
        return self._edge_list[idx]

    def _smaller_side(self, a: int, b: int) -> Set[int]:
        """Vertex set of the smaller of the two trees containing a and b"""
        seen_a, seen_b = {a}, {b}
        queue_a, queue_b = deque([a]), deque([b])
        adj = self._tree_adj
        while True:
            if not queue_a:
                return seen_a
            x = queue_a.popleft()
            for w in adj[x]:
                if w not in seen_a:
                    seen_a.add(w)
                    queue_a.append(w)
            if not queue_b:
                return seen_b
            x = queue_b.popleft()
            for w in adj[x]:
                if w not in seen_b:
                    seen_b.add(w)
                    queue_b.append(w)

    def tree_path(self, u: int, v: int) -> List[int]:
        """
        Edge indices of the forest path from u to v

        Raises:
            NotConnectedError: u and v lie in different components
        """
        if self._slot[u] != self._slot[v]:
            raise NotConnectedError(f"Vertices {u} and {v} lie in different components")
        if u == v:
            return []
        vertices = self._lct.path(u, v)
        return [self._tree_adj[x][y] for x, y in zip(vertices, vertices[1:])]

    def copy(self) -> 'ForestState':
        clone = ForestState.__new__(ForestState)
        clone.graph = self.graph
        clone._forest = set(self._forest)
        clone._edge_list = list(self._edge_list)
        clone._edge_pos = dict(self._edge_pos)
        clone._tree_adj = [dict(nbrs) for nbrs in self._tree_adj]
        clone._lct = self._lct.copy()
        clone._slot = list(self._slot)
        clone._slot_size = dict(self._slot_size)
        clone._slot_dense = dict(self._slot_dense)
        clone._dense_slot = list(self._dense_slot)
        clone._version = dict(self._version)
        clone._next_slot = self._next_slot
        return clone


class NaiveForestState(_ForestBase):
    """Reference forest that recomputes components by traversal after every update"""

    def __init__(self, g: Graph, edges: Iterable[int] = ()):
        self.graph = g
        self._forest = set(edges)
        if not is_forest(g, self._forest):
            raise InvalidForestError("Edge set contains a cycle")
        self._tree_adj = [dict() for _ in range(g.n)]
        for e in self._forest:
            u, v = g.endpoints(e)
            self._tree_adj[u][v] = e
            self._tree_adj[v][u] = e
        self._recompute()

    def _recompute(self) -> None:
        self._labels = _label_components(self.graph.n, self._tree_adj)
        sizes = [0] * (max(self._labels) + 1 if self._labels else 0)
        for label in self._labels:
            sizes[label] += 1
        self._sizes = sizes

    @property
    def k(self) -> int:
        return len(self._sizes)

    @property
    def comp_of(self) -> List[int]:
        return list(self._labels)

    @property
    def comp_size(self) -> List[int]:
        return list(self._sizes)

    def component_of(self, v: int) -> int:
        return self._labels[v]

    def component_size_of(self, v: int) -> int:
        return self._sizes[self._labels[v]]

    def component_token(self, comp: int) -> Tuple[int, frozenset]:
        return comp, frozenset(self.component_edges(comp))

    def edge_at(self, idx: int) -> int:
        return sorted(self._forest)[idx]

    def connected(self, u: int, v: int) -> bool:
        return self._labels[u] == self._labels[v]

    def link(self, e: int) -> None:
        u, v = self.graph.endpoints(e)
        if self.connected(u, v):
            raise CycleError(f"Edge {e} = ({u}, {v}) lies inside one component")
        self._forest.add(e)
        self._tree_adj[u][v] = e
        self._tree_adj[v][u] = e
        self._recompute()

    def cut(self, e: int) -> None:
        if e not in self._forest:
            raise NotPresentError(f"Edge {e} is not in the forest")
        u, v = self.graph.endpoints(e)
        self._forest.discard(e)
        del self._tree_adj[u][v]
        del self._tree_adj[v][u]
        self._recompute()

    def exchange(self, add: int, remove: int) -> None:
        if remove not in self._forest:
            raise NotPresentError(f"Edge {remove} is not in the forest")
        a, b = self.graph.endpoints(add)
        if add in self._forest or not self.connected(a, b) or remove not in self.tree_path(a, b):
            raise CycleError(f"Edge {add} does not close a cycle through edge {remove}")
        self.cut(remove)
        self.link(add)

    def tree_path(self, u: int, v: int) -> List[int]:
        if not self.connected(u, v):
            raise NotConnectedError(f"Vertices {u} and {v} lie in different components")
        previous: Dict[int, Tuple[int, int]] = {u: (-1, -1)}
        queue = deque([u])
        while queue:
            x = queue.popleft()
            if x == v:
                break
            for w, e in self._tree_adj[x].items():
                if w not in previous:
                    previous[w] = (x, e)
                    queue.append(w)
        edges = []
        x = v
        while x != u:
            x, e = previous[x]
            edges.append(e)
        edges.reverse()
        return edges

    def copy(self) -> 'NaiveForestState':
        return NaiveForestState(self.graph, self._forest)


def _label_components(n: int, tree_adj: List[Dict[int, int]]) -> List[int]:
    """Component labels by traversal, numbered in order of smallest vertex"""
    labels = [-1] * n
    current = 0
    for start in range(n):
        if labels[start] != -1:
            continue
        labels[start] = current
        stack = [start]
        while stack:
            u = stack.pop()
            for w in tree_adj[u]:
                if labels[w] == -1:
                    labels[w] = current
                    stack.append(w)
        current += 1
    return labels


def tree_split_sizes(tree_adj, root: int) -> Dict[int, Tuple[int, int]]:
    """
    Side sizes of every edge of the tree containing root

    Args:
        tree_adj: Per-vertex mapping neighbor -> edge index (list or dict of dicts)
        root: Orientation vertex

    Returns:
        Map edge index -> (root side size, far side size)
    """
    parent_edge: Dict[int, int] = {root: -1}
    parent: Dict[int, int] = {root: -1}
    order = [root]
    stack = [root]
    while stack:
        u = stack.pop()
        for w, e in tree_adj[u].items():
            if w not in parent:
                parent[w] = u
                parent_edge[w] = e
                order.append(w)
                stack.append(w)
    size = {v: 1 for v in order}
    for v in reversed(order[1:]):
        size[parent[v]] += size[v]
    total = len(order)
    return {parent_edge[v]: (total - size[v], size[v]) for v in order[1:]}


def from_edges(g: Graph, edges: Iterable[int], naive: bool = False) -> _ForestBase:
    """
    Build a forest state from an acyclic edge set

    Args:
        g: Host graph
        edges: Forest edge indices
        naive: Return the traversal-based reference implementation

    Returns:
        ForestState (or NaiveForestState)
    """
    edges = list(edges)
    if not is_forest(g, edges):
        raise InvalidForestError("Edge set contains a cycle")
    state = NaiveForestState(g, edges) if naive else ForestState(g, edges)
    logger.debug(f"Built forest with {state.k} components on {g!r}")
    return state


def link(s: _ForestBase, e: int) -> _ForestBase:
    s.link(e)
    return s


def cut(s: _ForestBase, e: int) -> _ForestBase:
    s.cut(e)
    return s


def connected(s: _ForestBase, u: int, v: int) -> bool:
    return s.connected(u, v)


def component_size_of(s: _ForestBase, v: int) -> int:
    return s.component_size_of(v)


def tree_path(s: _ForestBase, u: int, v: int) -> List[int]:
    return s.tree_path(u, v)


def subtree_split_sizes(s: _ForestBase, comp: int, root: int) -> Dict[int, Tuple[int, int]]:
    return s.subtree_split_sizes(comp, root)


def serialize(s: _ForestBase) -> str:
    return s.serialize()


def deserialize(g: Graph, line: str, naive: bool = False) -> _ForestBase:
    """
    Parse the one-line forest format

    Raises:
        InvalidArgumentError: Digest does not match the host graph
    """
    tokens = line.split()
    if not tokens:
        raise InvalidArgumentError("Empty forest line")
    if tokens[0] != g.digest():
        raise InvalidArgumentError("Forest was serialized against a different host graph")
    try:
        edges = [int(t) for t in tokens[1:]]
    except ValueError:
        raise InvalidArgumentError("Forest edge indices must be integers")
    return from_edges(g, edges, naive=naive)


def validate(s: _ForestBase) -> None:
    s.validate()
