"""
Exact computations on small instances.

Enumerates connected k-partitions and spanning forests, builds the exact
partition distributions, the forest-walk kernel, gap statistics of
double-cycle-like graphs, bottleneck ratios and the ReCom reachability
graph. Everything is guarded by SamplerConfig.SIZE_GUARD unless the caller
passes allow_large.
"""
import itertools
import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

import networkx as nx
import numpy as np

from config.sampler_config import SamplerConfig
from models.graph import CYCLE_CLASSES, EdgeClass, Graph
from models.partition import ExactDistribution, GapProfile, PartitionView, Weight
from services.graph_generators import cycle_length
from services.spanning_count import SpanningTreeCounter, partition_weight
from utils.errors import (
    InvalidArgumentError,
    NumericalFailureError,
    SizeGuardError,
    UnsupportedGraphError,
)
from utils.union_find import forest_component_sizes, is_forest

logger = logging.getLogger(__name__)

Probability = Union[Fraction, float]


def _guard(g: Graph, allow_large: bool, what: str) -> None:
    if g.n > SamplerConfig.SIZE_GUARD and not allow_large:
        raise SizeGuardError(
            f"{what} refuses {g!r}: {g.n} vertices exceed the guard of {SamplerConfig.SIZE_GUARD}")


def _integral(c: float) -> bool:
    return isinstance(c, int) or float(c).is_integer()


def connected_subsets(g: Graph,
                      root: int,
                      allowed: FrozenSet[int],
                      min_size: int = 1,
                      max_size: Optional[int] = None) -> Iterator[FrozenSet[int]]:
    """
    Connected vertex sets containing root inside allowed, each yielded once

    Branches on the frontier in order: take frontier[i] and forbid
    frontier[:i]. The frontier is always N(S) minus S and the forbidden set.

    Args:
        g: Host graph
        root: Vertex every yielded set contains
        allowed: Vertices the sets may use
        min_size: Smallest size to yield
        max_size: Largest size to grow to (default |allowed|)
    """
    limit = len(allowed) if max_size is None else max_size
    members: Set[int] = {root}

    def extend(frontier: List[int], forbidden: FrozenSet[int]) -> Iterator[FrozenSet[int]]:
        if len(members) >= min_size:
            yield frozenset(members)
        if len(members) >= limit or not frontier:
            return
        for idx, w in enumerate(frontier):
            blocked = forbidden.union(frontier[:idx])
            rest = frontier[idx + 1:]
            pending = set(rest)
            additions = [x for x, _ in g.adjacency[w]
                         if x in allowed and x not in members and x not in blocked and x not in pending]
            members.add(w)
            yield from extend(rest + additions, blocked)
            members.discard(w)

    start = [x for x, _ in g.adjacency[root] if x in allowed and x != root]
    yield from extend(start, frozenset())


def enumerate_connected_partitions(g: Graph,
                                   k: int,
                                   sizes: Optional[Sequence[int]] = None,
                                   allow_large: bool = False) -> List[PartitionView]:
    """
    All partitions of V into k nonempty connected parts

    Args:
        g: Host graph
        k: Part count
        sizes: Optional multiset of part sizes to restrict to
        allow_large: Bypass the size guard

    Returns:
        Canonical partitions, sorted, duplicate-free
    """
    _guard(g, allow_large, 'enumerate_connected_partitions')
    if k < 1 or k > g.n:
        raise InvalidArgumentError(f"k must lie in 1..{g.n}, got {k}")
    pool: Optional[Tuple[int, ...]] = None
    if sizes is not None:
        pool = tuple(sorted(sizes))
        if len(pool) != k or sum(pool) != g.n or pool[0] < 1:
            raise InvalidArgumentError(f"sizes {list(sizes)} do not describe a {k}-partition of {g.n} vertices")

    @lru_cache(maxsize=None)
    def component_count(vertices: FrozenSet[int]) -> int:
        seen: Set[int] = set()
        count = 0
        for start in vertices:
            if start in seen:
                continue
            count += 1
            seen.add(start)
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for w, _ in g.adjacency[u]:
                    if w in vertices and w not in seen:
                        seen.add(w)
                        queue.append(w)
        return count

    results: List[PartitionView] = []

    def recurse(remaining: FrozenSet[int], parts_left: int, chosen: List[FrozenSet[int]],
                pool_left: Optional[Tuple[int, ...]]) -> None:
        if parts_left == 1:
            if pool_left is not None and len(remaining) != pool_left[0]:
                return
            if component_count(remaining) == 1:
                results.append(PartitionView.from_parts(chosen + [remaining]))
            return
        root = min(remaining)
        if pool_left is None:
            lo, hi = 1, len(remaining) - (parts_left - 1)
        else:
            lo, hi = pool_left[0], pool_left[-1]
        for part in connected_subsets(g, root, remaining, lo, hi):
            if pool_left is not None and len(part) not in pool_left:
                continue
            rest = remaining - part
            if component_count(rest) > parts_left - 1:
                continue
            next_pool = None
            if pool_left is not None:
                trimmed = list(pool_left)
                trimmed.remove(len(part))
                next_pool = tuple(trimmed)
            recurse(rest, parts_left - 1, chosen + [part], next_pool)

    recurse(frozenset(range(g.n)), k, [], pool)
    results.sort(key=lambda p: p.parts)
    logger.debug(f"Enumerated {len(results)} connected {k}-partitions of {g!r}")
    return results


def exact_distribution(g: Graph,
                       k: int,
                       c: float = 0,
                       balanced: bool = False,
                       allow_large: bool = False,
                       counter: Optional[SpanningTreeCounter] = None) -> ExactDistribution:
    """
    Exact c-biased spanning tree distribution over connected k-partitions

    Weight of P is prod T(G[P_i]) * |P_i|^c; integers for integer c,
    floats otherwise.

    Args:
        g: Host graph
        k: Part count
        c: Bias exponent
        balanced: Restrict the support to balanced partitions
        allow_large: Bypass the size guard
        counter: Optional shared spanning-tree count cache

    Returns:
        ExactDistribution
    """
    if c < 0:
        raise InvalidArgumentError(f"Bias exponent must be nonnegative, got {c}")
    sizes = None
    if balanced:
        if g.n % k != 0:
            raise InvalidArgumentError(f"Balanced partitions need k | n, got k={k}, n={g.n}")
        sizes = (g.n // k,) * k
    support = enumerate_connected_partitions(g, k, sizes=sizes, allow_large=allow_large)
    if not support:
        raise InvalidArgumentError(f"{g!r} has no connected {k}-partition{' that is balanced' if balanced else ''}")
    counter = counter or SpanningTreeCounter(g)

    if _integral(c):
        weights: List[Weight] = [partition_weight(g, p, int(c), counter) for p in support]
    else:
        weights = []
        for p in support:
            w = 1.0
            for part in p.parts:
                w *= float(counter.count(part)) * float(len(part)) ** c
            weights.append(w)

    name = 'mu_balanced' if balanced else ('mu_star' if c == 0 else f'mu_c{c}')
    return ExactDistribution(support, weights, k, c, label=f'{g.name} {name}')


def fraction_balanced(g: Graph, k: int, allow_large: bool = False) -> Fraction:
    """Z(balanced) / Z(mu*) as an exact rational"""
    if k < 1 or g.n % k != 0:
        raise InvalidArgumentError(f"fraction_balanced needs k | n, got k={k}, n={g.n}")
    dist = exact_distribution(g, k, 0, allow_large=allow_large)
    balanced = sum(w for p, w in zip(dist.support, dist.weights) if p.is_balanced())
    return Fraction(balanced, dist.total)


def _as_probabilities(d: Union[ExactDistribution, Mapping[PartitionView, Weight]]) -> Dict[PartitionView, Probability]:
    if isinstance(d, ExactDistribution):
        return d.probabilities()
    total = sum(d.values())
    if total <= 0:
        raise InvalidArgumentError("Histogram has no mass")
    if isinstance(total, int) and all(isinstance(v, int) for v in d.values()):
        return {p: Fraction(v, total) for p, v in d.items()}
    return {p: v / total for p, v in d.items()}


def tv_distance(p: Union[ExactDistribution, Mapping[PartitionView, Weight]],
                q: Union[ExactDistribution, Mapping[PartitionView, Weight]]) -> float:
    """
    Total variation distance, half the L1 distance of the two laws

    Either side may be an ExactDistribution or a histogram mapping
    partitions to counts. Exact inputs are summed as rationals.
    """
    prob_p = _as_probabilities(p)
    prob_q = _as_probabilities(q)
    total = sum(abs(prob_p.get(x, 0) - prob_q.get(x, 0)) for x in set(prob_p) | set(prob_q))
    return float(total / 2)


def gap_profile(g: Graph, p: PartitionView) -> GapProfile:
    """
    Gaps, phi and average gap position of a partition of a tagged graph

    Raises:
        UnsupportedGraphError: g has no cycle position labels
    """
    if not g.has_cycle_tags:
        raise UnsupportedGraphError(f"{g!r} carries no cycle position labels")
    labels = p.assignment()
    gaps: List[Tuple[EdgeClass, int]] = []
    phi = 0
    has_rung = [False] * p.k
    for e, (u, v) in enumerate(g.edges):
        tag = g.tag(e)
        same = labels[u] == labels[v]
        if tag.edge_class in CYCLE_CLASSES and not same:
            gaps.append((tag.edge_class, tag.position))
        elif tag.edge_class == EdgeClass.RUNG and same:
            phi += 1
            has_rung[labels[u]] = True
    gaps.sort(key=lambda gap: (gap[0].value, gap[1]))
    avg = Fraction(sum(pos for _, pos in gaps), len(gaps)) if gaps else Fraction(0)
    rungless = tuple(i for i, has in enumerate(has_rung) if not has)
    return GapProfile(
        gaps=tuple(gaps),
        phi=phi,
        avg_gap_position=avg,
        in_bottleneck=bool(rungless),
        cycle_length=cycle_length(g),
        rungless_parts=rungless,
    )


def _double_cycle_length(g: Graph) -> int:
    """Cycle length of a double-cycle graph, checking its rung structure"""
    if not g.has_cycle_tags or g.n % 2:
        raise UnsupportedGraphError(f"{g!r} is not a double-cycle graph")
    length = g.n // 2
    for i in range(length):
        e = g.edge_between(i, length + i)
        if e is None or g.tag(e).edge_class != EdgeClass.RUNG:
            raise UnsupportedGraphError(f"{g!r} lacks rung ({i}, {length + i})")
    return length


def double_cycle_state(g: Graph, j: int) -> PartitionView:
    """
    Three-part state of a double-cycle graph of length 3n with rung blocks shifted by j

    Part i holds l_t and r_t for t in [i*n + j, i*n + j + n) modulo 3n.
    """
    length = _double_cycle_length(g)
    if length % 3:
        raise UnsupportedGraphError(f"Double-cycle length {length} is not a multiple of 3")
    block = length // 3
    parts = []
    for i in range(3):
        indices = [(i * block + j + t) % length for t in range(block)]
        parts.append(indices + [length + t for t in indices])
    return PartitionView.from_parts(parts)


def bottleneck_ratio(g: Graph, k: int = 3, allow_large: bool = False) -> Fraction:
    """
    Weight of the rungless-part states divided by the weight of the all-rungs state

    Over balanced 3-partitions at c = 0. The rungless set is every state
    with some part containing no rung edge.
    """
    if k != 3:
        raise InvalidArgumentError("bottleneck_ratio is defined for k = 3")
    reference = double_cycle_state(g, 0)
    dist = exact_distribution(g, 3, 0, balanced=True, allow_large=allow_large)
    rungless = sum(w for p, w in zip(dist.support, dist.weights) if gap_profile(g, p).in_bottleneck)
    ratio = Fraction(rungless, dist.weight_of(reference))
    logger.info(f"Bottleneck ratio on {g!r}: {float(ratio):.6g} over {len(dist)} balanced states")
    return ratio


def _balanced_halves(g: Graph, region: FrozenSet[int]) -> List[FrozenSet[int]]:
    """Connected halves of region containing its smallest vertex, with connected complement"""
    target = len(region) // 2
    halves = []
    for half in connected_subsets(g, min(region), region, target, target):
        if g.is_connected(region - half):
            halves.append(half)
    return halves


def recom_reachability_graph(g: Graph, k: int, allow_large: bool = False) -> nx.DiGraph:
    """
    One-step ReCom transition graph over balanced connected k-partitions

    P -> P' whenever two adjacent parts of P can be re-split into the two
    connected halves of P' that differ from the current pair. Every such
    split is the balanced edge of some spanning tree of the merged region.
    Lazy self-transitions are not drawn.

    Returns:
        networkx DiGraph whose nodes are PartitionView objects
    """
    if k < 1 or g.n % k != 0:
        raise InvalidArgumentError(f"ReCom reachability needs k | n, got k={k}, n={g.n}")
    states = enumerate_connected_partitions(g, k, sizes=(g.n // k,) * k, allow_large=allow_large)
    graph = nx.DiGraph()
    graph.add_nodes_from(states)
    halves_cache: Dict[FrozenSet[int], List[FrozenSet[int]]] = {}

    for p in states:
        labels = p.assignment()
        pairs = sorted({(min(labels[u], labels[v]), max(labels[u], labels[v]))
                        for u, v in g.edges if labels[u] != labels[v]})
        for i, j in pairs:
            current = (frozenset(p.parts[i]), frozenset(p.parts[j]))
            region = current[0] | current[1]
            if region not in halves_cache:
                halves_cache[region] = _balanced_halves(g, region)
            for half in halves_cache[region]:
                if half in current:
                    continue
                others = [part for idx, part in enumerate(p.parts) if idx not in (i, j)]
                graph.add_edge(p, PartitionView.from_parts(others + [half, region - half]))

    logger.info(f"ReCom reachability on {g!r}: {graph.number_of_nodes()} states, {graph.number_of_edges()} moves")
    return graph


def forest_partition(g: Graph, edges: Sequence[int]) -> PartitionView:
    """Component partition of the spanning forest (V, edges)"""
    adjacency: Dict[int, List[int]] = {v: [] for v in range(g.n)}
    for e in edges:
        u, v = g.endpoints(e)
        adjacency[u].append(v)
        adjacency[v].append(u)
    labels = [-1] * g.n
    for start in range(g.n):
        if labels[start] != -1:
            continue
        labels[start] = start
        stack = [start]
        while stack:
            u = stack.pop()
            for w in adjacency[u]:
                if labels[w] == -1:
                    labels[w] = start
                    stack.append(w)
    return PartitionView.from_assignment(labels)


def _chi(sizes: Sequence[int], c: float) -> Weight:
    if _integral(c):
        weight = 1
        for size in sizes:
            weight *= size ** int(c)
        return weight
    weight = 1.0
    for size in sizes:
        weight *= float(size) ** c
    return weight


def enumerate_forests(g: Graph, k: int, allow_large: bool = False) -> List[FrozenSet[int]]:
    """All spanning forests with exactly k components (n - k edges)"""
    _guard(g, allow_large, 'enumerate_forests')
    if k < 1 or k > g.n:
        raise InvalidArgumentError(f"k must lie in 1..{g.n}, got {k}")
    return [frozenset(subset) for subset in itertools.combinations(range(g.num_edges), g.n - k)
            if is_forest(g, subset)]


def forest_distribution(g: Graph, k: int, c: float = 0,
                        allow_large: bool = False) -> Dict[FrozenSet[int], Weight]:
    """Unnormalized chi^c over k-component spanning forests: prod of component sizes to the c"""
    return {f: _chi(forest_component_sizes(g, sorted(f)), c) for f in enumerate_forests(g, k, allow_large)}


def project_forest_weights(g: Graph, forest_weights: Mapping[FrozenSet[int], Weight]) -> Dict[PartitionView, Weight]:
    """Sum forest weights over forests sharing a component partition"""
    projected: Dict[PartitionView, Weight] = {}
    for forest, weight in forest_weights.items():
        p = forest_partition(g, sorted(forest))
        projected[p] = projected.get(p, 0) + weight
    return projected


@dataclass
class ForestWalkKernel:
    """Exact one-step kernel of the forest walk over enumerated forests"""

    states: List[FrozenSet[int]]
    weights: List[Weight]
    matrix: List[List[Probability]]
    exact: bool

    def index(self, forest: FrozenSet[int]) -> int:
        return self.states.index(forest)

    def row_sums(self) -> List[Probability]:
        return [sum(row) for row in self.matrix]

    def as_array(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.matrix], dtype=float)


def forest_walk_kernel(g: Graph, k: int, c: float = 0, allow_large: bool = False) -> ForestWalkKernel:
    """
    Exact transition matrix of the forest walk

    From F: add a uniform non-forest edge x, then remove y from F + x with
    probability proportional to chi^c(F + x - y) among the y that leave a
    forest. Entries are Fractions for integer c, floats otherwise.
    """
    forest_weights = forest_distribution(g, k, c, allow_large)
    states = sorted(forest_weights, key=lambda f: sorted(f))
    index = {f: i for i, f in enumerate(states)}
    exact = _integral(c)
    zero: Probability = Fraction(0) if exact else 0.0
    size = len(states)
    outside = g.num_edges - (g.n - k)
    matrix = [[zero] * size for _ in range(size)]

    for i, forest in enumerate(states):
        if outside == 0:
            matrix[i][i] = Fraction(1) if exact else 1.0
            continue
        for x in range(g.num_edges):
            if x in forest:
                continue
            grown = forest | {x}
            options = [(y, grown - {y}) for y in sorted(grown) if grown - {y} in index]
            total = sum(forest_weights[target] for _, target in options)
            for _, target in options:
                w = forest_weights[target]
                if exact:
                    matrix[i][index[target]] += Fraction(w, total * outside)
                else:
                    matrix[i][index[target]] += w / (total * outside)

    logger.debug(f"Forest-walk kernel on {g!r}: {size} states, k={k}, c={c}")
    return ForestWalkKernel(states, [forest_weights[f] for f in states], matrix, exact)


def detailed_balance_violation(kernel: ForestWalkKernel) -> Probability:
    """Largest |pi_i P_ij - pi_j P_ji| with pi proportional to the kernel's chi weights"""
    total = sum(kernel.weights)
    worst: Probability = Fraction(0) if kernel.exact else 0.0
    for i, row in enumerate(kernel.matrix):
        for j in range(i + 1, len(row)):
            if kernel.exact:
                gap = abs(Fraction(kernel.weights[i], total) * row[j]
                          - Fraction(kernel.weights[j], total) * kernel.matrix[j][i])
            else:
                gap = abs(kernel.weights[i] / total * row[j] - kernel.weights[j] / total * kernel.matrix[j][i])
            worst = max(worst, gap)
    return worst


def stationary_distribution(matrix: Sequence[Sequence[Probability]]) -> List[Probability]:
    """
    Stationary law of a row-stochastic matrix

    Exact Gauss-Jordan elimination when every entry is a Fraction or int,
    numpy otherwise. The chain must be irreducible.
    """
    size = len(matrix)
    if size == 0:
        raise InvalidArgumentError("Empty transition matrix")
    if all(isinstance(x, (Fraction, int)) for row in matrix for x in row):
        return _stationary_exact(matrix)

    system = np.array(matrix, dtype=float).T - np.eye(size)
    system[-1, :] = 1.0
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    try:
        solution = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(f"Stationary system is singular: {e}")
    return [float(x) for x in solution]


def _stationary_exact(matrix: Sequence[Sequence[Probability]]) -> List[Fraction]:
    size = len(matrix)
    rows = []
    for i in range(size - 1):
        rows.append([Fraction(matrix[j][i]) - (1 if i == j else 0) for j in range(size)] + [Fraction(0)])
    rows.append([Fraction(1)] * size + [Fraction(1)])

    for col in range(size):
        pivot = next((r for r in range(col, size) if rows[r][col] != 0), None)
        if pivot is None:
            raise NumericalFailureError("Stationary system is singular; is the chain irreducible?")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        lead = rows[col][col]
        rows[col] = [x / lead for x in rows[col]]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    return [rows[i][size] for i in range(size)]


def set_conductance(matrix: Sequence[Sequence[Probability]],
                    stationary: Sequence[Probability],
                    subset: Sequence[int]) -> Probability:
    """Ergodic flow out of subset divided by its stationary mass"""
    inside = set(subset)
    mass = sum(stationary[i] for i in inside)
    if mass == 0:
        raise InvalidArgumentError("Subset has zero stationary mass")
    flow = sum(stationary[i] * matrix[i][j] for i in inside for j in range(len(matrix)) if j not in inside)
    return flow / mass


def mixing_time_lower_bound(phi: Probability) -> Probability:
    """1 / (4 * phi); infinite for a disconnected chain"""
    if phi < 0:
        raise InvalidArgumentError(f"Conductance must be nonnegative, got {phi}")
    if phi == 0:
        return float('inf')
    return 1 / (4 * phi)
