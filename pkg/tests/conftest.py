"""Shared fixtures for the partition sampler tests"""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

import pytest

from services.graph_generators import cycle, double_cycle, grid


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long-running acceptance experiment')


@pytest.fixture
def app():
    """Flask app for pytest-flask's client fixture"""
    from main import app as flask_app
    flask_app.config['TESTING'] = True
    return flask_app


@pytest.fixture
def cycle4():
    return cycle(4)


@pytest.fixture
def grid23():
    return grid(2, 3)


@pytest.fixture
def double_cycle3():
    return double_cycle(3)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Run outputs go to a per-test directory"""
    from config.sampler_config import SamplerConfig
    monkeypatch.setattr(SamplerConfig, 'OUTPUT_DIR', str(tmp_path))
    return tmp_path
