"""Tests for ensemble runs, rejection sampling and mixing reports"""
import json
import math
import os

import pytest
from openpyxl import load_workbook
from scipy import stats

from config.sampler_config import SamplerConfig
from models.chain import ChainParams, ChainVariant
from models.ensemble import EnsembleRecord, RunConfig
from models.graph import Graph
from models.partition import gap_transition, histogram
from services.chains import make_rng, recom_step, state_from_partition
from services.ensemble_service import (
    balance_profile,
    initial_state,
    mixing_report,
    rejection_sample_balanced,
    sample_ensemble,
    stats_file_name,
    write_ensemble,
)
from services.exact_oracle import double_cycle_state, exact_distribution, fraction_balanced, gap_profile, tv_distance
from services.export_service import read_jsonl
from services.graph_generators import double_cycle, grid
from utils.errors import BudgetExhaustedError, InvalidArgumentError


def _config(generator='grid', params=(2, 4), k=2, variant=ChainVariant.FOREST_WALK, c=0, seed=7, **kwargs):
    return RunConfig(ChainParams(k, variant, c, seed), generator=generator, params=list(params), **kwargs)


def test_single_sample_without_burn_in_is_initial_state():
    config = _config(samples=1, burn_in=0)
    g = grid(2, 4)
    records = list(sample_ensemble(config, g))
    expected = initial_state(g, config.chain, make_rng(7, 0)).partition()
    assert len(records) == 1
    assert records[0].assignment == expected.assignment()
    assert records[0].step == 0


def test_samples_are_thinned():
    config = _config(samples=4, burn_in=5, thinning=3)
    steps = [r.step for r in sample_ensemble(config)]
    assert steps == [5, 8, 11, 14]


def test_default_thinning_follows_variant():
    g = grid(2, 4)
    assert _config().thinning_for(g) == g.num_edges
    assert _config(variant=ChainVariant.RECOM).thinning_for(g) == 1
    assert _config(thinning=4).thinning_for(g) == 4


def test_records_of_tagged_graphs_carry_gap_statistics():
    config = _config('double_cycle', (6,), k=3, variant=ChainVariant.RECOM, samples=2)
    records = list(sample_ensemble(config))
    assert all(r.phi is not None and r.avg_gap is not None for r in records)
    assert all(r.sizes == [4, 4, 4] for r in records)


def test_multiple_chains_merge_in_order():
    config = _config(samples=4, burn_in=2, chains=3, workers=3)
    records = list(sample_ensemble(config))
    assert [(r.sample_index, r.chain) for r in records] == [(i, c) for i in range(4) for c in range(3)]

    single = list(sample_ensemble(_config(samples=4, burn_in=2)))
    chain0 = [r for r in records if r.chain == 0]
    assert [r.assignment for r in chain0] == [r.assignment for r in single]


def test_write_ensemble_is_deterministic(tmp_path):
    for name in ('first', 'second'):
        _, error = write_ensemble(_config(samples=5, burn_in=10, run_name=name, output_dir=str(tmp_path)))
        assert error is None
    first = (tmp_path / 'first' / SamplerConfig.ENSEMBLE_FILE).read_bytes()
    second = (tmp_path / 'second' / SamplerConfig.ENSEMBLE_FILE).read_bytes()
    assert first == second


def test_write_ensemble_outputs(output_dir):
    config = _config(samples=3, burn_in=4, chains=2, workers=2, run_name='full',
                     xlsx=True, stats_interval=2, render=True)
    run_dir, error = write_ensemble(config)
    assert error is None
    assert run_dir == os.path.join(str(output_dir), 'full')

    records = read_jsonl(os.path.join(run_dir, SamplerConfig.ENSEMBLE_FILE))
    assert [(r.sample_index, r.chain) for r in records] == [(i, c) for i in range(3) for c in range(2)]
    with open(os.path.join(run_dir, SamplerConfig.ENSEMBLE_FILE), encoding='utf-8') as handle:
        first = json.loads(handle.readline())
    assert list(first) == ['sample', 'chain', 'step', 'sizes', 'log_weight', 'assignment']

    with open(os.path.join(run_dir, SamplerConfig.BALANCE_FILE), encoding='utf-8') as handle:
        assert handle.readline().strip() == 'Imbalance Ratio,Count,Fraction'

    for chain in range(2):
        with open(os.path.join(run_dir, stats_file_name(chain, 2)), encoding='utf-8') as handle:
            lines = handle.read().splitlines()
        assert lines[0].startswith('0\tbalance\t')
        assert {int(line.split('\t')[0]) % 2 for line in lines} == {0}

    workbook = load_workbook(os.path.join(run_dir, SamplerConfig.WORKBOOK_FILE))
    assert workbook.sheetnames == ['Samples', 'Balance']
    assert workbook['Samples'].max_row == len(records) + 1

    images = sorted(name for name in os.listdir(run_dir) if name.endswith('.svg'))
    assert len(images) == 6
    assert 'sample_1_2.svg' in images


def test_stats_file_names():
    assert stats_file_name(0, 1) == 'stats.tsv'
    assert stats_file_name(2, 4) == 'stats_2.tsv'


def test_rejection_rate_matches_exact_fraction():
    g = grid(2, 4)
    config = _config(samples=10 ** 6, burn_in=100, thinning=3 * g.num_edges, max_tries=2000)
    records, report = rejection_sample_balanced(config, g)
    exact = float(fraction_balanced(g, 2))
    standard_error = math.sqrt(exact * (1 - exact) / report.tries)
    assert report.tries == 2000
    assert abs(report.rate - exact) <= 3 * standard_error
    assert report.ci_low <= report.rate <= report.ci_high
    assert all(r.sizes == [4, 4] for r in records)
    assert [r.sample_index for r in records] == list(range(len(records)))


def test_rejection_stops_at_sample_count():
    _, report = rejection_sample_balanced(_config(samples=3, max_tries=10 ** 5))
    assert report.accepted == 3
    assert report.to_table()[0] == ['Tries', 'Accepted', 'Rate', 'CI Low', 'CI High']


def test_rejection_preconditions():
    with pytest.raises(InvalidArgumentError):
        rejection_sample_balanced(_config(params=(2, 3), k=4))
    with pytest.raises(InvalidArgumentError):
        rejection_sample_balanced(_config(variant=ChainVariant.RECOM))


def test_rejection_budget_exhausted():
    """A star has no balanced 2-partition into connected parts"""
    star = Graph(4, [(0, 1), (0, 2), (0, 3)], name='star')
    config = RunConfig(ChainParams(2, seed=1), samples=5, max_tries=50)
    with pytest.raises(BudgetExhaustedError) as info:
        rejection_sample_balanced(config, star)
    assert info.value.tries == 50
    assert 0 < info.value.rate_upper_bound < 0.2


def test_balance_profile():
    records = [
        EnsembleRecord(0, [0, 0, 1, 1], [2, 2], 0.0, 0),
        EnsembleRecord(1, [0, 1, 1, 1], [1, 3], 0.0, 1),
    ]
    profile = balance_profile(records)
    assert profile.count == 2
    assert profile.fraction_balanced == 0.5
    assert profile.mean_ratio == 2.0
    assert profile.max_ratio == 3.0
    assert profile.ratio_counts == {1.0: 1, 3.0: 1}
    assert profile.to_table()[1] == [[1.0, 1, 0.5], [3.0, 1, 0.5]]
    with pytest.raises(InvalidArgumentError):
        balance_profile([])


def test_mixing_report_starts_at_initial_state():
    g = grid(2, 3)
    start = initial_state(g, ChainParams(2), make_rng(3, 0))
    report = mixing_report(g, 2, 0, [10, 0, 10], trials=4, seed=3, initial=start)
    assert [row.steps for row in report.rows] == [0, 10]
    direct = tv_distance(histogram([start.partition()] * 4), exact_distribution(g, 2, 0))
    assert report.rows[0].tv == pytest.approx(direct)
    assert report.rows[0].distinct_states == 1
    assert report.conductance_bound is None
    headers, rows = report.to_table()
    assert headers == ['Steps', 'TV', 'Distinct States', 'Avg Gap Positions']
    assert len(rows) == 2


def test_mixing_report_recom_on_double_cycle():
    g = double_cycle(6)
    report = mixing_report(g, 3, 0, [0, 5], trials=3, variant=ChainVariant.RECOM, seed=1)
    assert report.conductance_bound is not None and report.conductance_bound > 0
    assert all(row.avg_gap_positions for row in report.rows)
    assert report.to_table()[1][-1][0] == 'conductance_bound'


def test_mixing_report_rejects_bad_grid():
    with pytest.raises(InvalidArgumentError):
        mixing_report(grid(2, 3), 2, 0, [], trials=1)
    with pytest.raises(InvalidArgumentError):
        mixing_report(grid(2, 3), 2, 0, [5], trials=0)


@pytest.mark.slow
def test_recom_tv_plateau_from_highest_weight_state():
    """ReCom started in the all-rungs-internal state stays far from its law while the gap average holds"""
    g = double_cycle(9)
    start = state_from_partition(g, double_cycle_state(g, 0), make_rng(5))
    report = mixing_report(g, 3, 0, [0, 100, 1000, 10000], trials=20,
                           variant=ChainVariant.RECOM, seed=5, initial=start)
    assert report.rows[0].avg_gap_positions == (gap_profile(g, start.partition()).avg_gap_position,)
    assert all(row.tv > 0.25 for row in report.rows)

    params = ChainParams(3, ChainVariant.RECOM, seed=5)
    rng = make_rng(5, 1)
    s = start.copy()
    previous = gap_profile(g, s.partition())
    for step in range(1, 10 ** 4 + 1):
        s, _ = recom_step(s, params, rng, step=step)
        profile = gap_profile(g, s.partition())
        transition = gap_transition(previous, profile)
        if transition.both_outside_bottleneck:
            assert transition.modular_sum_preserved
            if not transition.wrapped:
                assert transition.preserves_average
        previous = profile


def _acceptance_rate(g, c, **kwargs):
    try:
        _, report = rejection_sample_balanced(_config(c=c, samples=10 ** 6, **kwargs), g)
    except BudgetExhaustedError:
        return 0.0
    return report.rate


@pytest.mark.slow
def test_acceptance_grows_with_bias():
    g = grid(2, 4)
    kwargs = {'burn_in': 100, 'max_tries': 1000}
    assert _acceptance_rate(g, 20, **kwargs) > _acceptance_rate(g, 0, **kwargs)


@pytest.mark.slow
def test_acceptance_grows_with_bias_on_square_grid():
    g = grid(6, 6)
    kwargs = {'params': (6, 6), 'burn_in': 500, 'max_tries': 1000}
    assert _acceptance_rate(g, 20, **kwargs) > _acceptance_rate(g, 0, **kwargs)


@pytest.mark.slow
def test_strong_bias_tightens_balance_on_large_grid():
    """Imbalance ratios at c = 20 are stochastically smaller than at c = 2"""
    ratios = {}
    for c in (2, 20):
        config = _config(params=(30, 30), k=4, c=c, seed=11, samples=500, burn_in=20000, thinning=200)
        ratios[c] = [r.imbalance_ratio() for r in sample_ensemble(config)]
    result = stats.mannwhitneyu(ratios[20], ratios[2], alternative='less')
    assert result.pvalue < 0.01
