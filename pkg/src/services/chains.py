"""
ReCom and the c-biased forest walk.

Both chains mutate a ForestState in place. ReCom merges two adjacent
balanced parts through a uniform boundary edge and re-splits the merged
tree at a balanced edge, resampling a uniform spanning tree of the region
when the merged tree offers no other balanced edge. The forest walk adds a
uniform non-forest edge and removes one edge of the resulting graph with
probability proportional to the product of component sizes to the power c.
"""
import logging
import math
from functools import partial
from typing import Callable, Dict, IO, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.special import logsumexp

from config.sampler_config import SamplerConfig
from models.chain import ChainParams, ChainVariant, StepRecord
from models.graph import Graph
from models.partition import PartitionView, gap_transition
from services.dynamic_forest import ForestState, tree_split_sizes
from services.exact_oracle import gap_profile
from services.spanning_count import SpanningTreeCounter, partition_log_weight
from services.ust_sampler import sample_ust
from utils.errors import InitializationError, InvalidArgumentError, InvalidForestError, StepFailureError

logger = logging.getLogger(__name__)

# Draws before falling back to a scan when looking for a non-forest edge
_REJECTION_DRAWS = 64


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """PCG64 generator for one chain; distinct streams of one seed are independent"""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def _choice(seq: Sequence, rng: np.random.Generator):
    return seq[int(rng.integers(len(seq)))]


def _tree_adjacency(g: Graph, edges: Iterable[int]) -> Dict[int, Dict[int, int]]:
    adj: Dict[int, Dict[int, int]] = {}
    for e in edges:
        u, v = g.endpoints(e)
        adj.setdefault(u, {})[v] = e
        adj.setdefault(v, {})[u] = e
    return adj


def _side_vertices(adj: Dict[int, Dict[int, int]], start: int, blocked: int) -> Set[int]:
    """Vertices reachable from start in the tree without crossing edge blocked"""
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w, e in adj.get(u, {}).items():
            if e != blocked and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _balanced_split_edges(g: Graph, remaining: Set[int], target: int,
                          rng: np.random.Generator) -> Optional[Tuple[Set[int], Set[int]]]:
    """
    Carve one part of size target off a uniform spanning tree of remaining

    Returns:
        Tuple of (part vertices, part tree edges), or None if the drawn tree has no such edge
    """
    tree = sample_ust(g, remaining, rng)
    adj = _tree_adjacency(g, tree)
    root = min(remaining)
    splits = tree_split_sizes(adj, root)
    candidates = sorted(e for e, (near, far) in splits.items() if far == target or near == target)
    if not candidates:
        return None
    e = _choice(candidates, rng)
    u, v = g.endpoints(e)
    side_u = _side_vertices(adj, u, e)
    side = side_u if len(side_u) == target else _side_vertices(adj, v, e)
    part_edges = {f for f in tree if f != e and g.endpoints(f)[0] in side and g.endpoints(f)[1] in side}
    return side, part_edges


def initial_balanced_state(g: Graph, k: int, rng: np.random.Generator,
                           retries: Optional[int] = None) -> ForestState:
    """
    Balanced starting forest by recursive tree bisection

    Args:
        g: Host graph
        k: Part count, must divide n
        rng: Random generator
        retries: Attempt budget (default SamplerConfig.INIT_RETRIES)

    Returns:
        ForestState with k components of size n/k

    Raises:
        InitializationError: No balanced split found within the budget
    """
    if k < 1 or g.n % k != 0:
        raise InvalidArgumentError(f"Balanced start needs k | n, got k={k}, n={g.n}")
    if not g.is_connected():
        raise InitializationError(f"{g!r} is disconnected")
    budget = retries if retries is not None else SamplerConfig.INIT_RETRIES
    target = g.n // k

    for attempt in range(1, budget + 1):
        remaining = set(range(g.n))
        edges: Set[int] = set()
        ok = True
        for _ in range(k - 1):
            split = _balanced_split_edges(g, remaining, target, rng)
            if split is None:
                ok = False
                break
            side, part_edges = split
            edges |= part_edges
            remaining -= side
        if not ok:
            continue
        edges |= sample_ust(g, remaining, rng)
        logger.debug(f"Balanced start on {g!r} found after {attempt} attempt(s)")
        return ForestState(g, edges)

    raise InitializationError(f"No balanced {k}-partition of {g!r} found in {budget} attempts")


def initial_forest_state(g: Graph, k: int, rng: np.random.Generator) -> ForestState:
    """Uniform spanning tree of g with k-1 uniformly chosen edges removed"""
    if k < 1 or k > g.n:
        raise InvalidArgumentError(f"k must lie in 1..{g.n}, got {k}")
    tree = sorted(sample_ust(g, range(g.n), rng))
    drop = set(rng.choice(len(tree), size=k - 1, replace=False).tolist()) if k > 1 else set()
    return ForestState(g, [e for i, e in enumerate(tree) if i not in drop])


def state_from_partition(g: Graph, p: PartitionView, rng: np.random.Generator) -> ForestState:
    """ForestState whose components are the parts of p, with a uniform spanning tree per part"""
    if p.n != g.n:
        raise InvalidArgumentError(f"Partition covers {p.n} vertices, graph has {g.n}")
    edges: Set[int] = set()
    for part in p.parts:
        edges |= sample_ust(g, part, rng)
    return ForestState(g, edges)


def recom_step(s: ForestState, params: ChainParams, rng: np.random.Generator,
               step: int = 0) -> Tuple[ForestState, StepRecord]:
    """
    One ReCom move

    Args:
        s: Balanced forest state, modified in place
        params: Chain parameters (resample_cap is used)
        rng: Random generator
        step: Step index stored in the record

    Returns:
        Tuple of (s, record)

    Raises:
        StepFailureError: The merged region needed more than resample_cap resamples
    """
    g = s.graph
    sizes = s.comp_size
    if len(set(sizes)) != 1:
        raise InvalidArgumentError(f"ReCom needs equal component sizes, got {sizes}")

    boundary = [e for e, (u, v) in enumerate(g.edges) if not s.connected(u, v)]
    if not boundary:
        return s, StepRecord(step, ChainVariant.RECOM, lazy=True, sizes=tuple(sizes))

    e = _choice(boundary, rng)
    u, v = g.endpoints(e)
    parts = (s.component_of(u), s.component_of(v))
    region = s.component_vertices_of(u) + s.component_vertices_of(v)
    target = len(region) // 2

    old_edges = [f for x in region for w, f in s.tree_neighbors(x).items() if x < w]
    merged = {x: dict(s.tree_neighbors(x)) for x in region}
    merged[u][v] = e
    merged[v][u] = e
    splits = tree_split_sizes(merged, u)
    candidates = sorted(f for f, (_, far) in splits.items() if far == target and f != e)

    resamples = 0
    tree: Set[int] = set()
    while not candidates:
        resamples += 1
        if resamples > params.resample_cap:
            logger.error(f"ReCom step {step} exceeded {params.resample_cap} resamples on parts {parts}")
            raise StepFailureError(
                f"No balanced split of the merged region after {params.resample_cap} resamples",
                region=region, parts=parts)
        tree = sample_ust(g, region, rng)
        splits = tree_split_sizes(_tree_adjacency(g, tree), u)
        candidates = sorted(f for f, (_, far) in splits.items() if far == target)

    f = _choice(candidates, rng)
    new_region_edges = None
    if resamples == 0:
        s.link(e)
        s.cut(f)
    else:
        for old in old_edges:
            s.cut(old)
        new_region_edges = tuple(sorted(tree - {f}))
        for new in new_region_edges:
            s.link(new)

    logger.debug(f"ReCom step {step}: +{e} -{f} on parts {parts}, {resamples} resample(s)")
    record = StepRecord(step, ChainVariant.RECOM, added_edge=e, removed_edge=f,
                        merged_parts=parts, resamples=resamples,
                        new_region_edges=new_region_edges, sizes=tuple(s.comp_size))
    return s, record


class SplitWeightCache:
    """
    Per-component log split weights for the forest walk, keyed by component token.

    A cache belongs to one state lineage: tokens of a copied state collide
    with the original's once they diverge.
    """

    def __init__(self):
        self._entries: Dict = {}
        self.hits = 0
        self.misses = 0

    def get(self, s: ForestState, comp: int, c: float) -> Tuple[np.ndarray, np.ndarray]:
        """Edge indices of a component and c * log(a * (size - a)) per edge"""
        token = s.component_token(comp)
        slot = token[0]
        entry = self._entries.get(slot)
        if entry is not None and entry[0] == token and entry[1] == c:
            self.hits += 1
            return entry[2], entry[3]
        self.misses += 1
        root = s.component_vertices(comp)[0]
        splits = s.subtree_split_sizes(comp, root)
        edges = np.fromiter(splits.keys(), dtype=np.int64, count=len(splits))
        logw = np.array([c * math.log(a * b) for a, b in splits.values()], dtype=float)
        if len(self._entries) > 4 * max(s.k, 16):
            self._entries.clear()
        self._entries[slot] = (token, c, edges, logw)
        return edges, logw


def _draw_non_forest_edge(s: ForestState, rng: np.random.Generator) -> Optional[int]:
    g = s.graph
    forest = s.forest_edges
    if len(forest) >= g.num_edges:
        return None
    for _ in range(_REJECTION_DRAWS):
        e = int(rng.integers(g.num_edges))
        if e not in forest:
            return e
    outside = [e for e in range(g.num_edges) if e not in forest]
    return _choice(outside, rng)


def forest_walk_step(s: ForestState, params: ChainParams, rng: np.random.Generator,
                     step: int = 0, cache: Optional[SplitWeightCache] = None) -> Tuple[ForestState, StepRecord]:
    """
    One move of the c-biased forest walk

    Args:
        s: Forest state with k components, modified in place
        params: Chain parameters (c is used)
        rng: Random generator
        step: Step index stored in the record
        cache: Split-weight cache for c > 0; a private one is used when omitted

    Returns:
        Tuple of (s, record)
    """
    x = _draw_non_forest_edge(s, rng)
    if x is None:
        return s, StepRecord(step, ChainVariant.FOREST_WALK, lazy=True, sizes=tuple(s.comp_size))
    a, b = s.graph.endpoints(x)

    if s.connected(a, b):
        cycle = s.tree_path(a, b)
        pick = int(rng.integers(len(cycle) + 1))
        if pick == len(cycle):
            y = x
        else:
            y = cycle[pick]
            s.exchange(x, y)
    elif params.c == 0:
        forest_size = len(s.forest_edges)
        pick = int(rng.integers(forest_size + 1))
        if pick == forest_size:
            y = x
        else:
            y = s.edge_at(pick)
            s.link(x)
            s.cut(y)
    else:
        y = _draw_weighted_removal(s, x, params.c, rng, cache if cache is not None else SplitWeightCache())
        if y != x:
            s.link(x)
            s.cut(y)

    lazy = y == x
    logger.debug(f"Forest walk step {step}: +{x} -{y}{' (lazy)' if lazy else ''}")
    return s, StepRecord(step, ChainVariant.FOREST_WALK, added_edge=x, removed_edge=y,
                         lazy=lazy, sizes=tuple(s.comp_size))


def _draw_weighted_removal(s: ForestState, x: int, c: float,
                           rng: np.random.Generator, cache: SplitWeightCache) -> int:
    """Removal edge for a merging move, weighted by the size product of the resulting forest"""
    a, b = s.graph.endpoints(x)
    ca, cb = s.component_of(a), s.component_of(b)
    merged_vertices = s.component_vertices_of(a) + s.component_vertices_of(b)
    size_m = len(merged_vertices)

    merged = {v: s.tree_neighbors(v) for v in merged_vertices}
    merged[a] = dict(merged[a])
    merged[b] = dict(merged[b])
    merged[a][b] = x
    merged[b][a] = x
    splits = tree_split_sizes(merged, a)
    edge_blocks = [np.fromiter(splits.keys(), dtype=np.int64, count=len(splits))]
    weight_blocks = [np.array([c * math.log(p * q) for p, q in splits.values()], dtype=float)]

    log_size_m = c * math.log(size_m)
    sizes = s.comp_size
    for comp in range(s.k):
        if comp in (ca, cb) or sizes[comp] < 2:
            continue
        edges, logw = cache.get(s, comp, c)
        edge_blocks.append(edges)
        weight_blocks.append(logw + (log_size_m - c * math.log(sizes[comp])))

    edges = np.concatenate(edge_blocks)
    logw = np.concatenate(weight_blocks)
    probs = np.exp(logw - logsumexp(logw))
    cumulative = np.cumsum(probs)
    idx = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side='right'))
    return int(edges[min(idx, len(edges) - 1)])


STEP_FUNCTIONS: Dict[ChainVariant, Callable] = {
    ChainVariant.RECOM: recom_step,
    ChainVariant.FOREST_WALK: forest_walk_step,
}


def check_recom_state(s: ForestState) -> None:
    """Structural check of a ReCom state: equal sizes and connected parts"""
    s.validate()
    if len(set(s.comp_size)) != 1:
        raise InvalidForestError(f"Unbalanced ReCom state {s.comp_size}")
    for part in s.partition().parts:
        if not s.graph.is_connected(part):
            raise InvalidForestError(f"Part {part} induces a disconnected subgraph")


class ChainObserver:
    """Receives chain events; one observer serves one chain"""

    def on_start(self, state: ForestState) -> None:
        pass

    def on_step(self, step: int, state: ForestState, record: StepRecord) -> None:
        pass

    def on_finish(self, state: ForestState) -> None:
        pass


class StatisticsObserver(ChainObserver):
    """
    Streams `step<TAB>name<TAB>value` lines.

    Statistics: balance (component sizes), phi, avg_gap, gap_wrap and
    log_weight. phi/avg_gap/gap_wrap are emitted only on tagged graphs;
    log_weight only when requested.
    """

    DEFAULT_STATISTICS = ('balance', 'phi', 'avg_gap', 'gap_wrap')

    def __init__(self, stream: IO[str], interval: int = 1,
                 statistics: Sequence[str] = DEFAULT_STATISTICS):
        if interval < 1:
            raise InvalidArgumentError("Statistics interval must be positive")
        unknown = set(statistics) - {'balance', 'phi', 'avg_gap', 'gap_wrap', 'log_weight'}
        if unknown:
            raise InvalidArgumentError(f"Unknown statistics: {', '.join(sorted(unknown))}")
        self.stream = stream
        self.interval = interval
        self.statistics = tuple(statistics)
        self._previous_profile = None
        self._counter: Optional[SpanningTreeCounter] = None

    def _emit(self, step: int, state: ForestState) -> None:
        g = state.graph
        p = state.partition()
        if 'balance' in self.statistics:
            self._write(step, 'balance', ','.join(str(size) for size in p.sizes))
        if g.has_cycle_tags and {'phi', 'avg_gap', 'gap_wrap'} & set(self.statistics):
            profile = gap_profile(g, p)
            if 'phi' in self.statistics:
                self._write(step, 'phi', str(profile.phi))
            if 'avg_gap' in self.statistics:
                self._write(step, 'avg_gap', str(profile.avg_gap_position))
            if 'gap_wrap' in self.statistics and self._previous_profile is not None:
                wrapped = gap_transition(self._previous_profile, profile).wrapped
                self._write(step, 'gap_wrap', '1' if wrapped else '0')
            self._previous_profile = profile
        if 'log_weight' in self.statistics:
            if self._counter is None:
                self._counter = SpanningTreeCounter(g)
            self._write(step, 'log_weight', repr(partition_log_weight(g, p, 0, self._counter)))

    def _write(self, step: int, name: str, value: str) -> None:
        self.stream.write(f"{step}\t{name}\t{value}\n")

    def on_start(self, state: ForestState) -> None:
        self._emit(0, state)

    def on_step(self, step: int, state: ForestState, record: StepRecord) -> None:
        if step % self.interval == 0:
            self._emit(step, state)


class TrajectoryRecorder(ChainObserver):
    """Keeps the initial state and every StepRecord in memory"""

    def __init__(self):
        self.initial: Optional[ForestState] = None
        self.records: List[StepRecord] = []

    def on_start(self, state: ForestState) -> None:
        self.initial = state.copy()

    def on_step(self, step: int, state: ForestState, record: StepRecord) -> None:
        self.records.append(record)

    def replay(self) -> ForestState:
        if self.initial is None:
            raise InvalidArgumentError("Nothing recorded yet")
        return replay(self.initial, self.records)


class ChainRunner:
    """
    Advances one chain over a private copy of its state.

    Used by run_chain and by the ensemble tools, which advance in
    stretches between samples.
    """

    def __init__(self, g: Graph, params: ChainParams, initial: ForestState,
                 rng: Optional[np.random.Generator] = None,
                 observers: Sequence[ChainObserver] = (),
                 validate: bool = False):
        params.check_graph(g)
        if initial.graph is not g:
            raise InvalidArgumentError("Initial state belongs to a different graph")
        if initial.k != params.k:
            raise InvalidArgumentError(f"Initial state has {initial.k} components, expected {params.k}")
        if params.variant == ChainVariant.RECOM and len(set(initial.comp_size)) != 1:
            raise InvalidArgumentError("ReCom needs a balanced initial state")
        self.graph = g
        self.params = params
        self.state = initial.copy()
        self.rng = rng if rng is not None else make_rng(params.seed)
        self.observers = list(observers)
        self.validate = validate
        self.steps_taken = 0
        step_fn = STEP_FUNCTIONS[params.variant]
        if params.variant == ChainVariant.FOREST_WALK:
            step_fn = partial(step_fn, cache=SplitWeightCache())
        self._step_fn = step_fn
        for observer in self.observers:
            observer.on_start(self.state)

    def advance(self, steps: int) -> ForestState:
        for _ in range(steps):
            self.steps_taken += 1
            self.state, record = self._step_fn(self.state, self.params, self.rng, step=self.steps_taken)
            if self.validate:
                if self.params.variant == ChainVariant.RECOM:
                    check_recom_state(self.state)
                else:
                    self.state.validate()
            for observer in self.observers:
                observer.on_step(self.steps_taken, self.state, record)
        return self.state

    def finish(self) -> ForestState:
        for observer in self.observers:
            observer.on_finish(self.state)
        return self.state


def run_chain(g: Graph, params: ChainParams, initial: ForestState,
              observers: Sequence[ChainObserver] = (),
              validate: bool = False) -> ForestState:
    """
    Run params.steps steps from a copy of initial

    Args:
        g: Host graph
        params: Chain parameters; seed fixes the trajectory
        initial: Starting state (left untouched)
        observers: Receive every step
        validate: Structurally validate the state after every step

    Returns:
        Final state
    """
    logger.info(f"Running {params.variant.value} for {params.steps} steps on {g!r}")
    runner = ChainRunner(g, params, initial, observers=observers, validate=validate)
    runner.advance(params.steps)
    return runner.finish()


def replay(initial: ForestState, records: Iterable[StepRecord]) -> ForestState:
    """Re-apply recorded moves to a copy of initial"""
    s = initial.copy()
    for record in records:
        if record.lazy:
            continue
        if record.variant == ChainVariant.RECOM:
            if record.new_region_edges is None:
                s.link(record.added_edge)
                s.cut(record.removed_edge)
            else:
                u, v = s.graph.endpoints(record.added_edge)
                region = s.component_vertices_of(u) + s.component_vertices_of(v)
                for old in [f for x in region for w, f in s.tree_neighbors(x).items() if x < w]:
                    s.cut(old)
                for new in record.new_region_edges:
                    s.link(new)
        else:
            a, b = s.graph.endpoints(record.added_edge)
            if s.connected(a, b):
                s.exchange(record.added_edge, record.removed_edge)
            else:
                s.link(record.added_edge)
                s.cut(record.removed_edge)
    return s
