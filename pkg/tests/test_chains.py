"""Tests for ReCom, the forest walk and the chain runner"""
import io

import numpy as np
import pytest

from models.chain import ChainParams, ChainVariant, StepRecord
from models.graph import Graph
from models.partition import PartitionView, empirical_distribution, gap_transition
from services.chains import (
    ChainRunner,
    SplitWeightCache,
    StatisticsObserver,
    TrajectoryRecorder,
    check_recom_state,
    forest_walk_step,
    initial_balanced_state,
    initial_forest_state,
    make_rng,
    recom_step,
    replay,
    run_chain,
    state_from_partition,
)
from services.dynamic_forest import ForestState
from services.exact_oracle import double_cycle_state, exact_distribution, gap_profile, tv_distance
from services.graph_generators import double_cycle, grid, path
from utils.errors import InvalidArgumentError, StepFailureError


def test_rng_streams():
    a = make_rng(42, 0).integers(1 << 30, size=4)
    b = make_rng(42, 0).integers(1 << 30, size=4)
    c = make_rng(42, 1).integers(1 << 30, size=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_initial_balanced_state():
    g = grid(4, 4)
    s = initial_balanced_state(g, 4, make_rng(1))
    assert s.comp_size == [4, 4, 4, 4]
    check_recom_state(s)
    with pytest.raises(InvalidArgumentError):
        initial_balanced_state(g, 3, make_rng(1))


def test_initial_forest_state_has_k_components():
    g = grid(3, 3)
    s = initial_forest_state(g, 3, make_rng(2))
    assert s.k == 3
    assert len(s.forest_edges) == g.n - 3
    s.validate()


def test_state_from_partition():
    g = grid(2, 3)
    p = PartitionView.from_parts([[0, 1, 2], [3, 4, 5]])
    s = state_from_partition(g, p, make_rng(0))
    assert s.partition() == p


def test_recom_preserves_balance_and_connectivity():
    g = grid(4, 4)
    params = ChainParams(4, ChainVariant.RECOM, seed=3)
    rng = make_rng(3)
    s = initial_balanced_state(g, 4, rng)
    for step in range(1, 301):
        s, record = recom_step(s, params, rng, step=step)
        assert record.sizes == (4, 4, 4, 4)
        check_recom_state(s)


def test_recom_resample_cap():
    """A cap of zero fails as soon as the merged tree offers no balanced edge"""
    g = path(4)
    params = ChainParams(2, ChainVariant.RECOM, resample_cap=0)
    # parts {0, 1} and {2, 3}; the merged path only splits at its middle edge, which is e
    s = ForestState(g, [0, 2])
    with pytest.raises(StepFailureError) as info:
        recom_step(s, params, make_rng(0))
    assert info.value.region == (0, 1, 2, 3)


def test_recom_on_path_is_frozen():
    """The only balanced 2-partition of a path is its own neighbour"""
    g = path(4)
    params = ChainParams(2, ChainVariant.RECOM)
    s = ForestState(g, [0, 2])
    s, record = recom_step(s, params, make_rng(0))
    assert s.partition() == PartitionView.from_parts([[0, 1], [2, 3]])
    assert record.resamples >= 1


def test_forest_walk_keeps_k_components():
    g = grid(3, 4)
    for c in (0, 1, 2.5):
        params = ChainParams(3, ChainVariant.FOREST_WALK, c=c, seed=5)
        rng = make_rng(5)
        s = initial_forest_state(g, 3, rng)
        cache = SplitWeightCache()
        for step in range(1, 201):
            s, record = forest_walk_step(s, params, rng, step=step, cache=cache)
            assert s.k == 3
            assert len(record.sizes) == 3
        s.validate()


def test_forest_walk_without_free_edges_is_lazy():
    g = Graph(4, [(0, 1), (2, 3)])
    params = ChainParams(2, ChainVariant.FOREST_WALK)
    s = ForestState(g, [0, 1])
    s, record = forest_walk_step(s, params, make_rng(0))
    assert record.lazy


def test_forest_walk_needs_two_parts():
    with pytest.raises(InvalidArgumentError):
        ChainParams(1, ChainVariant.FOREST_WALK)
    assert ChainParams(1, ChainVariant.RECOM).k == 1


def test_runner_is_deterministic_and_leaves_initial_untouched():
    g = grid(3, 3)
    params = ChainParams(3, ChainVariant.FOREST_WALK, c=1, seed=9, steps=500)
    initial = initial_forest_state(g, 3, make_rng(9))
    snapshot = set(initial.forest_edges)
    first = run_chain(g, params, initial)
    second = run_chain(g, params, initial)
    assert first.forest_edges == second.forest_edges
    assert initial.forest_edges == snapshot


def test_runner_checks_initial_state():
    g = grid(2, 2)
    with pytest.raises(InvalidArgumentError):
        ChainRunner(g, ChainParams(2), ForestState(g, [0]))
    with pytest.raises(InvalidArgumentError):
        ChainRunner(g, ChainParams(2, ChainVariant.RECOM), ForestState(g, [0, 1]))


@pytest.mark.parametrize('variant', [ChainVariant.RECOM, ChainVariant.FOREST_WALK])
def test_replay_reproduces_final_state(variant):
    g = grid(4, 4)
    params = ChainParams(2, variant, c=1, seed=21, steps=300)
    initial = initial_balanced_state(g, 2, make_rng(21))
    recorder = TrajectoryRecorder()
    final = run_chain(g, params, initial, observers=[recorder], validate=True)
    assert len(recorder.records) == 300
    assert recorder.replay().forest_edges == final.forest_edges
    records = [StepRecord.from_dict(r.to_dict()) for r in recorder.records]
    assert replay(initial, records).forest_edges == final.forest_edges


def test_statistics_observer_lines():
    g = double_cycle(6)
    params = ChainParams(3, ChainVariant.RECOM, seed=4, steps=10)
    initial = state_from_partition(g, double_cycle_state(g, 0), make_rng(4))
    stream = io.StringIO()
    run_chain(g, params, initial, observers=[StatisticsObserver(stream, interval=5)])
    lines = [line.split('\t') for line in stream.getvalue().splitlines()]
    steps = sorted({int(step) for step, _, _ in lines})
    assert steps == [0, 5, 10]
    names = {name for _, name, _ in lines}
    assert {'balance', 'phi', 'avg_gap', 'gap_wrap'} == names
    assert ['0', 'balance', '4,4,4'] in lines
    with pytest.raises(InvalidArgumentError):
        StatisticsObserver(stream, statistics=('entropy',))


def test_split_weight_cache_hits():
    g = grid(3, 4)
    s = initial_forest_state(g, 3, make_rng(1))
    cache = SplitWeightCache()
    comp = max(range(s.k), key=lambda i: s.comp_size[i])
    first = cache.get(s, comp, 2)
    second = cache.get(s, comp, 2)
    assert cache.hits == 1
    assert np.array_equal(first[0], second[0])


def test_forest_walk_converges_to_spanning_tree_distribution():
    """Thinned forest-walk samples on grid(2,3), k=2, c=0 are close to exact"""
    g = grid(2, 3)
    params = ChainParams(2, ChainVariant.FOREST_WALK, c=0, seed=12)
    rng = make_rng(12)
    runner = ChainRunner(g, params, initial_forest_state(g, 2, rng), rng=rng)
    runner.advance(200)
    samples = []
    for _ in range(4000):
        runner.advance(g.num_edges)
        samples.append(runner.state.partition())
    assert tv_distance(empirical_distribution(samples, 2), exact_distribution(g, 2, 0)) < 0.05


def _biased_forest_walk_tv(g, k, c, seed, samples=20000):
    params = ChainParams(k, ChainVariant.FOREST_WALK, c=c, seed=seed)
    rng = make_rng(seed)
    runner = ChainRunner(g, params, initial_forest_state(g, k, rng), rng=rng)
    runner.advance(200)
    drawn = []
    for _ in range(samples):
        runner.advance(g.num_edges)
        drawn.append(runner.state.partition())
    return tv_distance(empirical_distribution(drawn, k), exact_distribution(g, k, c))


def test_biased_forest_walk_matches_size_weighted_law():
    """Weighted removals project onto T(P) * prod |P|^c"""
    assert _biased_forest_walk_tv(grid(2, 3), 3, 1, seed=21) < 0.03


@pytest.mark.slow
@pytest.mark.parametrize('graph,k,c,seed', [
    (grid(2, 3), 2, 2, 22),
    (grid(2, 3), 3, 2.5, 23),
    (double_cycle(3), 3, 2, 24),
])
def test_biased_forest_walk_matches_size_weighted_law_more_cases(graph, k, c, seed):
    assert _biased_forest_walk_tv(graph, k, c, seed) < 0.03


@pytest.mark.slow
def test_forest_walk_tv_below_two_percent():
    g = grid(2, 3)
    params = ChainParams(2, ChainVariant.FOREST_WALK, c=0, seed=2)
    rng = make_rng(2)
    runner = ChainRunner(g, params, initial_forest_state(g, 2, rng), rng=rng)
    runner.advance(500)
    samples = []
    for _ in range(5 * 10 ** 4):
        runner.advance(10)
        samples.append(runner.state.partition())
    assert tv_distance(empirical_distribution(samples, 2), exact_distribution(g, 2, 0)) < 0.02


@pytest.mark.slow
def test_recom_average_gap_is_invariant_outside_bottleneck():
    """ReCom moves between non-bottleneck states keep the gap sum modulo the cycle length"""
    g = double_cycle(30)
    params = ChainParams(3, ChainVariant.RECOM, seed=30)
    rng = make_rng(30)
    s = state_from_partition(g, double_cycle_state(g, 0), rng)
    previous = gap_profile(g, s.partition())
    assert not previous.in_bottleneck
    checked = 0
    for step in range(1, 10 ** 4 + 1):
        s, _ = recom_step(s, params, rng, step=step)
        profile = gap_profile(g, s.partition())
        transition = gap_transition(previous, profile)
        if transition.both_outside_bottleneck:
            assert transition.modular_sum_preserved
            if not transition.wrapped:
                assert transition.preserves_average
            checked += 1
        previous = profile
    assert checked > 0
