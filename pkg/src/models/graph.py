"""Graph model and edge-list text format"""
import hashlib
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from utils.errors import InvalidArgumentError


class EdgeClass(str, Enum):
    """Edge classes of double-cycle-like graphs"""

    LEFT_CYCLE = 'LEFT_CYCLE'
    RUNG = 'RUNG'
    RIGHT_CYCLE = 'RIGHT_CYCLE'
    NONE = 'NONE'


CYCLE_CLASSES = (EdgeClass.LEFT_CYCLE, EdgeClass.RIGHT_CYCLE)


@dataclass(frozen=True)
class EdgeClassLabel:
    """Class of an edge plus its position label on a cycle side"""

    edge_class: EdgeClass
    position: Optional[int] = None

    def __post_init__(self):
        on_cycle = self.edge_class in CYCLE_CLASSES
        if on_cycle and self.position is None:
            raise InvalidArgumentError(f"{self.edge_class.value} edge needs a position label")
        if not on_cycle and self.position is not None:
            raise InvalidArgumentError(f"{self.edge_class.value} edge cannot carry a position label")

    def to_text(self) -> str:
        if self.position is None:
            return self.edge_class.value
        return f"{self.edge_class.value} {self.position}"


class Graph:
    """
    Immutable undirected simple graph on vertices 0..n-1.

    Edges keep the index they were given at construction, so chains can
    cite them by index. Adjacency lists hold (neighbor, edge index) pairs.
    """

    def __init__(self,
                 n: int,
                 edges: Iterable[Tuple[int, int]],
                 coords: Optional[Sequence[Tuple[float, float]]] = None,
                 edge_tags: Optional[Sequence[EdgeClassLabel]] = None,
                 name: str = ''):
        """
        Initialize graph

        Args:
            n: Vertex count
            edges: Unordered vertex pairs; list order fixes edge indices
            coords: Optional planar position per vertex
            edge_tags: Optional class label per edge
            name: Human-readable generator description
        """
        if n < 0:
            raise InvalidArgumentError("Vertex count must be nonnegative")

        normalized: List[Tuple[int, int]] = []
        index: Dict[Tuple[int, int], int] = {}
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidArgumentError(f"Edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                raise InvalidArgumentError(f"Loop at vertex {u}")
            key = (u, v) if u < v else (v, u)
            if key in index:
                raise InvalidArgumentError(f"Parallel edge {key}")
            index[key] = len(normalized)
            normalized.append(key)

        if coords is not None and len(coords) != n:
            raise InvalidArgumentError("coords must have one entry per vertex")
        if edge_tags is not None and len(edge_tags) != len(normalized):
            raise InvalidArgumentError("edge_tags must have one entry per edge")

        self._n = n
        self._edges: Tuple[Tuple[int, int], ...] = tuple(normalized)
        self._index = index
        self._coords = tuple((float(x), float(y)) for x, y in coords) if coords is not None else None
        self._edge_tags = tuple(edge_tags) if edge_tags is not None else None
        self.name = name

        adjacency: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
        for e, (u, v) in enumerate(normalized):
            adjacency[u].append((v, e))
            adjacency[v].append((u, e))
        self._adjacency = tuple(tuple(nbrs) for nbrs in adjacency)
        self._digest: Optional[str] = None

    @property
    def n(self) -> int:
        return self._n

    @property
    def edges(self) -> Tuple[Tuple[int, int], ...]:
        return self._edges

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    @property
    def adjacency(self) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
        return self._adjacency

    @property
    def coords(self) -> Optional[Tuple[Tuple[float, float], ...]]:
        return self._coords

    @property
    def edge_tags(self) -> Optional[Tuple[EdgeClassLabel, ...]]:
        return self._edge_tags

    @property
    def has_cycle_tags(self) -> bool:
        """True if some edge carries a LEFT_CYCLE/RIGHT_CYCLE position label"""
        return self._edge_tags is not None and any(t.edge_class in CYCLE_CLASSES for t in self._edge_tags)

    def degree(self, v: int) -> int:
        return len(self._adjacency[v])

    def neighbors(self, v: int) -> List[int]:
        return [w for w, _ in self._adjacency[v]]

    def endpoints(self, e: int) -> Tuple[int, int]:
        return self._edges[e]

    def edge_between(self, u: int, v: int) -> Optional[int]:
        """Index of edge {u, v}, or None if absent"""
        return self._index.get((u, v) if u < v else (v, u))

    def tag(self, e: int) -> EdgeClassLabel:
        if self._edge_tags is None:
            return EdgeClassLabel(EdgeClass.NONE)
        return self._edge_tags[e]

    def is_connected(self, subset: Optional[Iterable[int]] = None) -> bool:
        """Connectivity of the graph, or of the subgraph induced on subset"""
        allowed = set(range(self._n)) if subset is None else set(subset)
        if not allowed:
            return True
        start = next(iter(allowed))
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w, _ in self._adjacency[u]:
                if w in allowed and w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(allowed)

    def digest(self) -> str:
        """SHA-256 of the canonical edge-list text"""
        if self._digest is None:
            self._digest = hashlib.sha256(write_edge_list(self).encode('utf-8')).hexdigest()
        return self._digest

    def to_dict(self) -> Dict:
        """Convert to dictionary for JSON responses"""
        return {
            'name': self.name,
            'n': self._n,
            'm': self.num_edges,
            'edges': [list(e) for e in self._edges],
            'has_coords': self._coords is not None,
            'has_tags': self._edge_tags is not None,
        }

    def __repr__(self) -> str:
        label = self.name or 'Graph'
        return f"<{label} n={self._n} m={self.num_edges}>"


def write_edge_list(g: Graph) -> str:
    """
    Serialize to the edge-list format.

    Header `n m`, then one `u v [class position]` line per edge in index order.
    Untagged graphs and NONE-tagged edges write just `u v`.
    """
    lines = [f"{g.n} {g.num_edges}"]
    for e, (u, v) in enumerate(g.edges):
        tag = g.tag(e)
        if tag.edge_class == EdgeClass.NONE:
            lines.append(f"{u} {v}")
        else:
            lines.append(f"{u} {v} {tag.to_text()}")
    return '\n'.join(lines) + '\n'


def read_edge_list(text: str, name: str = '') -> Graph:
    """
    Parse the edge-list format produced by write_edge_list

    Args:
        text: File contents
        name: Optional graph name

    Returns:
        Parsed graph (no coordinates; tags only if any line carries one)
    """
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith('#')]
    if not rows or len(rows[0]) != 2:
        raise InvalidArgumentError("Edge list must start with a 'n m' header line")

    try:
        n, m = int(rows[0][0]), int(rows[0][1])
    except ValueError:
        raise InvalidArgumentError("Header must contain two integers")

    body = rows[1:]
    if len(body) != m:
        raise InvalidArgumentError(f"Header announces {m} edges but {len(body)} edge lines follow")

    edges = []
    tags = []
    tagged = False
    for row in body:
        if len(row) not in (2, 3, 4):
            raise InvalidArgumentError(f"Malformed edge line: {' '.join(row)}")
        try:
            u, v = int(row[0]), int(row[1])
        except ValueError:
            raise InvalidArgumentError(f"Malformed edge line: {' '.join(row)}")
        edges.append((u, v))
        if len(row) == 2:
            tags.append(EdgeClassLabel(EdgeClass.NONE))
            continue
        tagged = True
        try:
            edge_class = EdgeClass(row[2])
        except ValueError:
            raise InvalidArgumentError(f"Unknown edge class '{row[2]}'")
        position = int(row[3]) if len(row) == 4 else None
        tags.append(EdgeClassLabel(edge_class, position))

    return Graph(n, edges, edge_tags=tags if tagged else None, name=name)
