"""Tests for the exact small-instance oracles"""
import math
from fractions import Fraction

import networkx as nx
import pytest

from models.graph import EdgeClass
from models.partition import PartitionView
from services.exact_oracle import (
    bottleneck_ratio,
    detailed_balance_violation,
    double_cycle_state,
    enumerate_connected_partitions,
    exact_distribution,
    forest_distribution,
    forest_partition,
    forest_walk_kernel,
    fraction_balanced,
    gap_profile,
    mixing_time_lower_bound,
    project_forest_weights,
    recom_reachability_graph,
    set_conductance,
    stationary_distribution,
    tv_distance,
)
from services.graph_generators import cycle, double_cycle, grid, path
from services.spanning_count import count_forests, partition_function_bound
from utils.errors import InvalidArgumentError, SizeGuardError, UnsupportedGraphError

KERNEL_GRAPHS = [
    cycle(3),
    cycle(4),
    grid(2, 3),
    pytest.param(double_cycle(3), marks=pytest.mark.slow),
]


def test_cycle4_partition_function():
    dist = exact_distribution(cycle(4), 2, 0)
    assert len(dist) == 6
    assert set(dist.weights) == {1}
    assert dist.total == 6
    assert dist.total <= partition_function_bound(cycle(4), 2) == 12


def test_cycle3_biased_weights():
    dist = exact_distribution(cycle(3), 2, 1)
    assert dist.weights == [2, 2, 2]
    assert dist.total == 6
    assert dist.is_exact


def test_fractional_bias_gives_float_weights():
    dist = exact_distribution(grid(2, 2), 2, 0.5)
    assert not dist.is_exact
    assert math.isclose(sum(dist.probabilities().values()), 1.0)


@pytest.mark.parametrize('g', [cycle(4), grid(2, 2), path(4)])
def test_fraction_balanced_one_third(g):
    assert fraction_balanced(g, 2) == Fraction(1, 3)


@pytest.mark.parametrize('n,expected', [
    (2, Fraction(1, 3)),
    (3, Fraction(1, 11)),
    (4, Fraction(19, 163)),
    (5, Fraction(35, 757)),
    (6, Fraction(1, 13)),
])
def test_fraction_balanced_ladder_decays_like_one_over_n(n, expected):
    fraction = fraction_balanced(grid(2, n), 2)
    assert fraction == expected
    # even n stays above 3/10; odd n dips lower
    assert fraction * n >= Fraction(1, 5)
    if n % 2 == 0:
        assert fraction * n >= Fraction(3, 10)


def test_fraction_balanced_needs_divisibility():
    with pytest.raises(InvalidArgumentError):
        fraction_balanced(cycle(5), 2)


@pytest.mark.parametrize('g,k', [(cycle(4), 2), (cycle(5), 3), (grid(2, 3), 2), (grid(2, 3), 3), (grid(3, 3), 3)])
def test_partition_function_counts_forests(g, k):
    """Z at c = 0 equals the number of (n - k)-edge forests and respects the binomial bound"""
    z = exact_distribution(g, k, 0).total
    assert z == count_forests(g, g.n - k)
    assert z <= partition_function_bound(g, k)


def test_balanced_restriction():
    dist = exact_distribution(grid(2, 4), 2, 0, balanced=True)
    assert all(p.sizes == (4, 4) for p in dist.support)
    with pytest.raises(InvalidArgumentError):
        exact_distribution(grid(2, 4), 3, 0, balanced=True)


def test_enumeration_parts_are_connected():
    g = grid(3, 3)
    for p in enumerate_connected_partitions(g, 3):
        assert all(g.is_connected(part) for part in p.parts)


def test_size_guard():
    g = grid(5, 5)
    with pytest.raises(SizeGuardError):
        exact_distribution(g, 2)
    with pytest.raises(SizeGuardError):
        count_forests(g, 23)


def test_distribution_table_is_sorted():
    table = exact_distribution(cycle(4), 2).to_table().splitlines()
    assert table[0].startswith('#')
    rows = [line.split('\t')[0] for line in table[1:]]
    assert rows == sorted(rows)
    assert table[1].split('\t')[2] == f"{1 / 6:.12f}"


def test_tv_distance():
    a = PartitionView.from_string('0|1,2')
    b = PartitionView.from_string('0,1|2')
    c = PartitionView.from_string('0,2|1')
    assert tv_distance({a: 1, b: 1, c: 1}, {a: 1, b: 1, c: 1}) == 0
    assert tv_distance({a: 1}, {b: 5}) == 1
    assert tv_distance({a: 1, b: 1, c: 1}, {a: 1}) == pytest.approx(2 / 3)
    dist = exact_distribution(cycle(3), 2)
    assert tv_distance(dist, {a: 1, b: 1, c: 1}) == 0


@pytest.mark.parametrize('c', [0, 1, 2])
@pytest.mark.parametrize('k', [2, 3])
@pytest.mark.parametrize('g', KERNEL_GRAPHS)
def test_forest_walk_detailed_balance(g, k, c):
    kernel = forest_walk_kernel(g, k, c)
    assert kernel.exact
    assert all(total == 1 for total in kernel.row_sums())
    assert detailed_balance_violation(kernel) <= 1e-12


@pytest.mark.parametrize('c', [0, 1, 2])
@pytest.mark.parametrize('k', [2, 3])
@pytest.mark.parametrize('g', KERNEL_GRAPHS)
def test_forest_weights_project_to_biased_distribution(g, k, c):
    projected = project_forest_weights(g, forest_distribution(g, k, c))
    dist = exact_distribution(g, k, c)
    assert projected == dict(zip(dist.support, dist.weights))


@pytest.mark.parametrize('g,k,c', [(cycle(4), 2, 0), (cycle(4), 2, 1), (grid(2, 3), 2, 2)])
def test_kernel_stationary_law_projects_to_exact_distribution(g, k, c):
    kernel = forest_walk_kernel(g, k, c)
    stationary = stationary_distribution(kernel.matrix)
    projected = {}
    for forest, mass in zip(kernel.states, stationary):
        p = forest_partition(g, sorted(forest))
        projected[p] = projected.get(p, 0) + mass
    assert projected == exact_distribution(g, k, c).probabilities()


def test_fractional_bias_kernel_is_reversible():
    kernel = forest_walk_kernel(grid(2, 3), 2, 1.5)
    assert not kernel.exact
    assert detailed_balance_violation(kernel) <= 1e-12
    assert kernel.as_array().sum(axis=1) == pytest.approx(1.0)


def test_conductance_and_mixing_bound():
    matrix = [[Fraction(1, 2), Fraction(1, 2)], [Fraction(1, 4), Fraction(3, 4)]]
    stationary = stationary_distribution(matrix)
    assert stationary == [Fraction(1, 3), Fraction(2, 3)]
    phi = set_conductance(matrix, stationary, [0])
    assert phi == Fraction(1, 2)
    assert mixing_time_lower_bound(phi) == Fraction(1, 2)
    assert mixing_time_lower_bound(0) == float('inf')
    with pytest.raises(InvalidArgumentError):
        mixing_time_lower_bound(-1)


@pytest.mark.parametrize('j', [0, 1])
def test_gap_profile_of_rung_block_states(j):
    g = double_cycle(6)
    profile = gap_profile(g, double_cycle_state(g, j))
    assert profile.avg_gap_position == 2 + j
    assert profile.phi == 6
    assert not profile.in_bottleneck
    assert sorted(pos for side, pos in profile.gaps if side == EdgeClass.LEFT_CYCLE) == [j, 2 + j, 4 + j]
    assert profile.cycle_length == 6


def test_gap_profile_detects_rungless_part():
    g = double_cycle(6)
    # left cycle split in two halves, right cycle is the third part
    p = PartitionView.from_parts([[0, 1, 2], [3, 4, 5], [6, 7, 8, 9, 10, 11]])
    profile = gap_profile(g, p)
    assert profile.in_bottleneck
    assert profile.phi == 0


def test_gap_profile_needs_tags():
    with pytest.raises(UnsupportedGraphError):
        gap_profile(grid(2, 3), PartitionView.from_string('0,1,2|3,4,5'))


def test_bottleneck_ratio_decreases():
    r2 = bottleneck_ratio(double_cycle(6))
    r3 = bottleneck_ratio(double_cycle(9))
    assert 0 < r3 < r2


@pytest.mark.slow
def test_bottleneck_ratio_decays_geometrically():
    r2 = bottleneck_ratio(double_cycle(6))
    r3 = bottleneck_ratio(double_cycle(9))
    r4 = bottleneck_ratio(double_cycle(12), allow_large=True)
    assert r4 < r3 < r2
    assert r4 / r3 <= r3 / r2 * Fraction(3, 2)


def test_bottleneck_ratio_needs_three_parts():
    with pytest.raises(InvalidArgumentError):
        bottleneck_ratio(double_cycle(6), k=2)


def test_recom_irreducible_on_double_cycle():
    moves = recom_reachability_graph(double_cycle(3), 3)
    assert moves.number_of_nodes() > 1
    assert nx.is_strongly_connected(moves)


def test_recom_frozen_on_single_cycle():
    moves = recom_reachability_graph(cycle(6), 3)
    assert moves.number_of_nodes() == 2
    assert moves.number_of_edges() == 0


def test_recom_single_state_on_path():
    moves = recom_reachability_graph(path(4), 2)
    assert moves.number_of_nodes() == 1
    assert nx.is_strongly_connected(moves)
