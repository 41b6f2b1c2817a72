"""
Generators for the graph families the samplers run on.

All generators use dense integer ids and lattice coordinates, so every
family can be rendered cell-per-vertex. Double-cycle and grid-with-a-hole
graphs carry edge-position tags at construction.
"""
import math
from typing import Dict, Iterable, List, Optional, Set, Tuple

from models.graph import EdgeClass, EdgeClassLabel, Graph
from utils.errors import InvalidArgumentError, InvalidSizeError


def path(n: int) -> Graph:
    """Path graph P_n on vertices 0..n-1"""
    if n < 1:
        raise InvalidSizeError(f"path needs n >= 1, got {n}")
    edges = [(i, i + 1) for i in range(n - 1)]
    coords = [(i, 0) for i in range(n)]
    return Graph(n, edges, coords=coords, name=f'path({n})')


def cycle(n: int) -> Graph:
    """Cycle graph C_n; edge i joins i and i+1 (mod n)"""
    if n < 3:
        raise InvalidSizeError(f"cycle needs n >= 3, got {n}")
    edges = [(i, (i + 1) % n) for i in range(n)]
    coords = [(i, 0) for i in range(n)]
    return Graph(n, edges, coords=coords, name=f'cycle({n})')


def grid(m: int, n: int) -> Graph:
    """
    m x n grid graph G_{m,n}

    Vertex (i, j) (row i, column j, both 0-based) gets id i*n + j and
    coordinates (j, i).
    """
    if m < 1 or n < 1:
        raise InvalidSizeError(f"grid needs m, n >= 1, got ({m}, {n})")
    edges = []
    for i in range(m):
        for j in range(n):
            v = i * n + j
            if j + 1 < n:
                edges.append((v, v + 1))
            if i + 1 < m:
                edges.append((v, v + n))
    coords = [(j, i) for i in range(m) for j in range(n)]
    return Graph(m * n, edges, coords=coords, name=f'grid({m},{n})')


def double_cycle(length: int) -> Graph:
    """
    Double-cycle graph of the given length.

    l_i has id i and r_i has id length + i. The cycle edge
    {l_(j-1 mod length), l_j} is tagged LEFT_CYCLE with position j, and the
    same for the right side; rungs {l_i, r_i} are tagged RUNG. Edge order:
    left cycle by position, right cycle by position, rungs by i.
    """
    if length < 3:
        raise InvalidSizeError(f"double_cycle needs length >= 3, got {length}")
    edges = []
    tags = []
    for side, offset in ((EdgeClass.LEFT_CYCLE, 0), (EdgeClass.RIGHT_CYCLE, length)):
        for j in range(length):
            edges.append((offset + (j - 1) % length, offset + j))
            tags.append(EdgeClassLabel(side, j))
    for i in range(length):
        edges.append((i, length + i))
        tags.append(EdgeClassLabel(EdgeClass.RUNG))
    coords = [(i, 0) for i in range(length)] + [(i, 1) for i in range(length)]
    return Graph(2 * length, edges, coords=coords, edge_tags=tags, name=f'double_cycle({length})')


def grid_with_hole(m: int, n: int, ring_width: int = 1) -> Graph:
    """
    Grid-with-a-hole graph.

    ring_width=1 keeps the boundary ring of the m x n grid
    (2(m+n)-4 vertices). ring_width=2 keeps the two outermost rings, the
    inner/outer rectangle shape, and needs m, n >= 5.

    Position labels follow grid_with_hole_labels(); the outer ring is
    RIGHT_CYCLE, the inner ring LEFT_CYCLE, the edges between them RUNG.

    Args:
        m: Row count
        n: Column count
        ring_width: 1 or 2

    Returns:
        Tagged graph with vertices relabeled in row-major order
    """
    if ring_width not in (1, 2):
        raise InvalidArgumentError(f"ring_width must be 1 or 2, got {ring_width}")
    if m < 4 or n < 4:
        raise InvalidSizeError(f"grid_with_hole needs m, n >= 4, got ({m}, {n})")
    if ring_width == 2 and (m < 5 or n < 5):
        raise InvalidSizeError(f"grid_with_hole with ring_width=2 needs m, n >= 5, got ({m}, {n})")

    def ring_of(i: int, j: int) -> Optional[int]:
        depth = min(i, j, m - 1 - i, n - 1 - j)
        return depth if depth < ring_width else None

    kept = [(i, j) for i in range(m) for j in range(n) if ring_of(i, j) is not None]
    ids = {cell: idx for idx, cell in enumerate(kept)}
    outer_labels, inner_labels = grid_with_hole_labels(m, n)

    edges = []
    tags = []
    for i, j in kept:
        for di, dj in ((0, 1), (1, 0)):
            a, b = (i, j), (i + di, j + dj)
            if b not in ids:
                continue
            edges.append((ids[a], ids[b]))
            ra, rb = ring_of(*a), ring_of(*b)
            key = frozenset((a, b))
            if ra == 0 and rb == 0:
                tags.append(EdgeClassLabel(EdgeClass.RIGHT_CYCLE, outer_labels[key]))
            elif ra == 1 and rb == 1:
                tags.append(EdgeClassLabel(EdgeClass.LEFT_CYCLE, inner_labels[key]))
            else:
                tags.append(EdgeClassLabel(EdgeClass.RUNG))

    coords = [(j, i) for i, j in kept]
    return Graph(len(kept), edges, coords=coords, edge_tags=tags,
                 name=f'grid_with_hole({m},{n},{ring_width})')


def grid_with_hole_labels(m: int, n: int) -> Tuple[Dict[frozenset, int], Dict[frozenset, int]]:
    """
    Labeling table for the rings of an m x n grid-with-a-hole.

    The outer ring is walked clockwise from cell (0, 0). The label grows by
    one per edge, except that the two edges meeting at an outer corner share
    a label. Each inner-ring edge copies the label of the parallel outer edge,
    so inner corner neighbours differ by two. Labels are taken modulo
    2(m+n) - 8.

        top     ((0, j), (0, j+1))          j = 0..n-2      -> j
        right   ((i, n-1), (i+1, n-1))      i = 0..m-2      -> n-2 + i
        bottom  ((m-1, j), (m-1, j+1))      j = n-2..0      -> m+n-4 + (n-2-j)
        left    ((i, 0), (i+1, 0))          i = m-2..0      -> m+2n-6 + (m-2-i)

    Returns:
        Tuple of (outer labels, inner labels) keyed by frozenset of the two cells
    """
    period = 2 * (m + n) - 8
    outer: Dict[frozenset, int] = {}
    for j in range(n - 1):
        outer[frozenset(((0, j), (0, j + 1)))] = j % period
    for i in range(m - 1):
        outer[frozenset(((i, n - 1), (i + 1, n - 1)))] = (n - 2 + i) % period
    for j in range(n - 1):
        outer[frozenset(((m - 1, j), (m - 1, j + 1)))] = (m + n - 4 + (n - 2 - j)) % period
    for i in range(m - 1):
        outer[frozenset(((i, 0), (i + 1, 0)))] = (m + 2 * n - 6 + (m - 2 - i)) % period

    inner: Dict[frozenset, int] = {}
    if m >= 5 and n >= 5:
        for j in range(1, n - 2):
            inner[frozenset(((1, j), (1, j + 1)))] = outer[frozenset(((0, j), (0, j + 1)))]
            inner[frozenset(((m - 2, j), (m - 2, j + 1)))] = outer[frozenset(((m - 1, j), (m - 1, j + 1)))]
        for i in range(1, m - 2):
            inner[frozenset(((i, n - 2), (i + 1, n - 2)))] = outer[frozenset(((i, n - 1), (i + 1, n - 1)))]
            inner[frozenset(((i, 1), (i + 1, 1)))] = outer[frozenset(((i, 0), (i + 1, 0)))]
    return outer, inner


def cartesian_product(g: Graph, h: Graph) -> Graph:
    """
    Cartesian product G x H.

    Vertex (u, v) gets id u * |V(H)| + v. Edges are
    {((u, v), (u', v)) : (u, u') in E(G)} followed by
    {((u, v), (u, v')) : (v, v') in E(H)}. When both factors have
    coordinates, (u, v) sits at (x_H(v), x_G(u)).
    """
    if g.n < 1 or h.n < 1:
        raise InvalidSizeError("cartesian_product needs nonempty factors")
    size = h.n
    edges = []
    for a, b in g.edges:
        for v in range(h.n):
            edges.append((a * size + v, b * size + v))
    for u in range(g.n):
        for a, b in h.edges:
            edges.append((u * size + a, u * size + b))
    coords = None
    if g.coords is not None and h.coords is not None:
        coords = [(h.coords[v][0], g.coords[u][0]) for u in range(g.n) for v in range(h.n)]
    name = f'{g.name or "G"} x {h.name or "H"}'
    return Graph(g.n * h.n, edges, coords=coords, name=name)


def cylinder(m: int, n: int) -> Graph:
    """Cylindrical grid C_{m,n} = P_m x C_n"""
    if m < 1:
        raise InvalidSizeError(f"cylinder needs m >= 1, got {m}")
    g = cartesian_product(path(m), cycle(n))
    g.name = f'cylinder({m},{n})'
    return g


def induced_subgraph(g: Graph, subset: Iterable[int]) -> Tuple[Graph, Dict[int, int]]:
    """
    Subgraph G[subset] with vertices relabeled 0..|subset|-1 in increasing order

    Args:
        g: Host graph
        subset: Vertices to keep

    Returns:
        Tuple of (induced graph, map from host vertex id to new id)
    """
    keep = sorted(set(subset))
    if not keep:
        raise InvalidArgumentError("induced_subgraph needs a nonempty subset")
    if keep[0] < 0 or keep[-1] >= g.n:
        raise InvalidArgumentError("subset contains vertices outside the graph")

    relabel = {v: i for i, v in enumerate(keep)}
    edges = []
    tags: List[EdgeClassLabel] = []
    for e, (u, v) in enumerate(g.edges):
        if u in relabel and v in relabel:
            edges.append((relabel[u], relabel[v]))
            tags.append(g.tag(e))
    coords = [g.coords[v] for v in keep] if g.coords is not None else None
    sub = Graph(len(keep), edges, coords=coords,
                edge_tags=tags if g.edge_tags is not None else None,
                name=f'{g.name}[{len(keep)}]')
    return sub, relabel


def build_graph(generator: str, params: List[int]) -> Graph:
    """
    Build a graph from a generator name and integer parameters

    Args:
        generator: One of GENERATORS
        params: Positional integer parameters

    Returns:
        Generated graph
    """
    if generator not in GENERATORS:
        raise InvalidArgumentError(
            f"Unknown generator '{generator}'. Must be one of: {', '.join(sorted(GENERATORS))}")
    func, arity = GENERATORS[generator]
    if len(params) not in arity:
        raise InvalidArgumentError(f"Generator '{generator}' takes {' or '.join(map(str, arity))} parameters")
    return func(*params)


GENERATORS = {
    'path': (path, (1,)),
    'cycle': (cycle, (1,)),
    'grid': (grid, (2,)),
    'double_cycle': (double_cycle, (1,)),
    'grid_with_hole': (grid_with_hole, (2, 3)),
    'cylinder': (cylinder, (2,)),
}


def cycle_length(g: Graph) -> int:
    """Label period of a tagged graph: one more than the largest position label"""
    if not g.has_cycle_tags:
        raise InvalidArgumentError("graph has no cycle position labels")
    return 1 + max(t.position for t in g.edge_tags if t.position is not None)


def lattice_cells(g: Graph) -> Set[Tuple[int, int]]:
    """Integer lattice cells occupied by the vertices, when coordinates are integral"""
    if g.coords is None:
        return set()
    cells = set()
    for x, y in g.coords:
        if not (math.isclose(x, round(x)) and math.isclose(y, round(y))):
            return set()
        cells.add((int(round(x)), int(round(y))))
    return cells
