"""
Spanning-tree counting and partition weights.

Two backends share one interface: an exact big-integer cofactor of the
Laplacian (fraction-free Bareiss elimination) and a log-domain float
cofactor via Cholesky. The exact backend is authoritative.
"""
import itertools
import logging
import math
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence

import numpy as np
from scipy import linalg

from config.sampler_config import SamplerConfig
from models.graph import Graph
from utils.errors import InvalidArgumentError, NumericalFailureError, SizeGuardError
from utils.union_find import is_forest

logger = logging.getLogger(__name__)


def _reduced_laplacian_rows(g: Graph, vertices: Sequence[int]) -> List[List[int]]:
    """Laplacian of G[vertices] with the first vertex's row and column removed"""
    position = {v: i for i, v in enumerate(vertices)}
    size = len(vertices) - 1
    rows = [[0] * size for _ in range(size)]
    for v, i in position.items():
        for w, _ in g.adjacency[v]:
            j = position.get(w)
            if j is None:
                continue
            if i > 0:
                rows[i - 1][i - 1] += 1
                if j > 0:
                    rows[i - 1][j - 1] = -1
    return rows


def bareiss_determinant(matrix: List[List[int]]) -> int:
    """
    Exact determinant of an integer matrix by fraction-free elimination.

    The matrix is modified in place. Every division is exact.
    """
    n = len(matrix)
    if n == 0:
        return 1
    sign = 1
    previous = 1
    for k in range(n - 1):
        if matrix[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if matrix[r][k] != 0), None)
            if swap is None:
                return 0
            matrix[k], matrix[swap] = matrix[swap], matrix[k]
            sign = -sign
        pivot = matrix[k][k]
        row_k = matrix[k]
        for i in range(k + 1, n):
            row_i = matrix[i]
            factor = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - factor * row_k[j]) // previous
            row_i[k] = 0
        previous = pivot
    return sign * matrix[n - 1][n - 1]


def count_spanning_trees_of(g: Graph, vertices: Optional[Iterable[int]] = None) -> int:
    """
    Exact spanning-tree count of G[vertices] (all of G when omitted)

    Returns 0 for a disconnected or empty vertex set.
    """
    members = sorted(set(vertices)) if vertices is not None else list(range(g.n))
    if not members or not g.is_connected(members):
        return 0
    if len(members) <= 2:
        return 1
    return bareiss_determinant(_reduced_laplacian_rows(g, members))


def count_spanning_trees(g: Graph) -> int:
    """Exact number of spanning trees of g; 0 if disconnected"""
    return count_spanning_trees_of(g)


def log_count_spanning_trees_of(g: Graph, vertices: Optional[Iterable[int]] = None) -> float:
    """
    Natural log of the spanning-tree count of G[vertices] via Cholesky

    Returns -inf for a disconnected or empty vertex set.
    """
    members = sorted(set(vertices)) if vertices is not None else list(range(g.n))
    if not members or not g.is_connected(members):
        return -math.inf
    if len(members) <= 2:
        return 0.0
    reduced = np.array(_reduced_laplacian_rows(g, members), dtype=float)
    try:
        factor, _ = linalg.cho_factor(reduced, lower=True, check_finite=False)
    except linalg.LinAlgError as e:
        raise NumericalFailureError(f"Reduced Laplacian factorization failed on a connected graph: {e}")
    diagonal = np.diag(factor)
    if np.any(diagonal <= 0):
        raise NumericalFailureError("Non-positive pivot in reduced Laplacian factorization")
    return float(2.0 * np.sum(np.log(diagonal)))


def log_count_spanning_trees(g: Graph) -> float:
    """Log of the spanning-tree count of g; -inf if disconnected"""
    return log_count_spanning_trees_of(g)


class SpanningTreeCounter:
    """
    Memoised spanning-tree counts of vertex subsets of one host graph.

    Exact enumeration evaluates the same parts many times; caching by
    frozenset keeps that linear in the number of distinct parts.
    """

    def __init__(self, g: Graph):
        self.graph = g
        self._exact: Dict[FrozenSet[int], int] = {}
        self._log: Dict[FrozenSet[int], float] = {}

    def count(self, vertices: Iterable[int]) -> int:
        key = frozenset(vertices)
        value = self._exact.get(key)
        if value is None:
            value = count_spanning_trees_of(self.graph, key)
            self._exact[key] = value
        return value

    def log_count(self, vertices: Iterable[int]) -> float:
        key = frozenset(vertices)
        value = self._log.get(key)
        if value is None:
            exact = self._exact.get(key)
            if exact is not None:
                value = math.log(exact) if exact > 0 else -math.inf
            else:
                value = log_count_spanning_trees_of(self.graph, key)
            self._log[key] = value
        return value

    def cache_size(self) -> int:
        return len(self._exact) + len(self._log)


def partition_log_weight(g: Graph,
                         parts: Iterable[Iterable[int]],
                         c: float,
                         counter: Optional[SpanningTreeCounter] = None) -> float:
    """
    Log of the c-biased weight of a partition

    Sum over parts of log T(G[P_i]) + c * log |P_i|; -inf as soon as one
    part induces a disconnected subgraph.

    Args:
        g: Host graph
        parts: PartitionView parts or any iterable of vertex collections
        c: Bias exponent, c >= 0
        counter: Optional shared cache

    Returns:
        Log weight
    """
    if c < 0:
        raise InvalidArgumentError(f"Bias exponent must be nonnegative, got {c}")
    counter = counter or SpanningTreeCounter(g)
    total = 0.0
    for part in getattr(parts, 'parts', parts):
        members = list(part)
        if not members:
            raise InvalidArgumentError("Partition parts must be nonempty")
        log_t = counter.log_count(members)
        if log_t == -math.inf:
            return -math.inf
        total += log_t + c * math.log(len(members))
    return total


def partition_weight(g: Graph,
                     parts: Iterable[Iterable[int]],
                     c: int,
                     counter: Optional[SpanningTreeCounter] = None) -> int:
    """Exact c-biased weight prod T(G[P_i]) |P_i|^c for integer c"""
    if not isinstance(c, int) or c < 0:
        raise InvalidArgumentError(f"Exact weights need a nonnegative integer exponent, got {c}")
    counter = counter or SpanningTreeCounter(g)
    weight = 1
    for part in getattr(parts, 'parts', parts):
        members = list(part)
        weight *= counter.count(members) * len(members) ** c
        if weight == 0:
            return 0
    return weight


def partition_function_bound(g: Graph, k: int) -> int:
    """binom(n-1, k-1) * T(G), the upper bound on the spanning tree partition function"""
    if k < 1 or k > g.n:
        raise InvalidArgumentError(f"k must lie in 1..{g.n}, got {k}")
    return math.comb(g.n - 1, k - 1) * count_spanning_trees(g)


def count_forests(g: Graph, num_edges: int, allow_large: bool = False) -> int:
    """
    Brute-force count of acyclic edge subsets of the given size

    Args:
        g: Host graph
        num_edges: Subset size (n - k for k-component spanning forests)
        allow_large: Bypass the size guard

    Returns:
        Number of forests with exactly num_edges edges
    """
    if g.n > SamplerConfig.SIZE_GUARD and not allow_large:
        raise SizeGuardError(f"count_forests refuses {g.n} vertices (guard {SamplerConfig.SIZE_GUARD})")
    if num_edges < 0 or num_edges > g.num_edges:
        return 0

    total = 0
    for subset in itertools.combinations(range(g.num_edges), num_edges):
        if is_forest(g, subset):
            total += 1
    logger.debug(f"Counted {total} forests with {num_edges} edges on {g!r}")
    return total
