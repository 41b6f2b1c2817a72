"""Tests for run configuration validation and parsing"""
import pytest

from models.chain import ChainVariant
from models.ensemble import RunConfig
from utils.validators import validate_exact_request, validate_run_config


@pytest.fixture
def run_config():
    return {
        'graph': {'generator': 'grid', 'params': [4, 4]},
        'chain': {'variant': 'RECOM', 'k': 4, 'seed': 9},
        'ensemble': {'burn_in': 100, 'thinning': 2, 'samples': 50, 'chains': 2, 'workers': 2},
        'output': {'run_name': 'grid4', 'xlsx': True, 'stats_interval': 10},
        'render': {'enabled': True, 'format': 'ppm', 'cell_size': 4},
    }


def test_valid_run_config(run_config):
    assert validate_run_config(run_config) == (True, "")
    config = RunConfig.from_dict(run_config)
    assert config.chain.variant == ChainVariant.RECOM
    assert config.chains == 2
    assert config.stats_interval == 10
    assert config.render_format == 'ppm'
    assert RunConfig.from_dict(config.to_dict()).to_dict() == config.to_dict()


@pytest.mark.parametrize('path,value,message', [
    (('chain', 'k'), 0, "chain.k"),
    (('chain', 'variant'), 'METROPOLIS', 'Invalid variant'),
    (('chain', 'c'), -0.5, 'chain.c'),
    (('chain', 'seed'), 2 ** 64, 'chain.seed'),
    (('ensemble', 'samples'), 0, 'ensemble.samples'),
    (('ensemble', 'burn_in'), -1, 'ensemble.burn_in'),
    (('output', 'run_name'), 'a/b', 'output.run_name'),
    (('output', 'stats_interval'), 0, 'output.stats_interval'),
    (('render', 'format'), 'png', 'Invalid render format'),
    (('graph', 'params'), [4], 'takes 2 parameters'),
])
def test_invalid_run_config(run_config, path, value, message):
    section, field = path
    run_config[section][field] = value
    is_valid, error = validate_run_config(run_config)
    assert not is_valid
    assert message in error


def test_missing_sections(run_config):
    del run_config['graph']
    assert validate_run_config(run_config) == (False, 'Missing required section: graph')
    assert validate_run_config([]) == (False, 'Run configuration must be a JSON object')


def test_edge_list_graph_section(run_config):
    run_config['graph'] = {'edge_list': 'ring.txt'}
    assert validate_run_config(run_config)[0]
    run_config['graph'] = {'edge_list': ''}
    assert not validate_run_config(run_config)[0]


def test_exact_request():
    assert validate_exact_request({'graph': {'generator': 'cycle', 'params': [4]}, 'k': 2}) == (True, "")
    assert not validate_exact_request({'graph': {'generator': 'cycle', 'params': [4]}, 'allow_large': 'yes'})[0]
    assert not validate_exact_request({'graph': {'generator': 'cycle', 'params': [4]}, 'k': True})[0]


def test_forest_walk_needs_two_parts(run_config):
    run_config['chain'] = {'variant': 'FOREST_WALK', 'k': 1}
    is_valid, error = validate_run_config(run_config)
    assert not is_valid
    assert 'at least 2' in error
    run_config['chain'] = {'variant': 'RECOM', 'k': 1}
    assert validate_run_config(run_config) == (True, "")
