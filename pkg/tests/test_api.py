"""Tests for the HTTP endpoints"""
import json

import pytest


def test_health(client):
    response = client.get('/health')
    assert response.status_code == 200
    assert response.json == {'status': 'healthy'}


def test_count_endpoint(client):
    response = client.post('/count', json={'graph': {'generator': 'grid', 'params': [3, 3]}, 'k': 2})
    assert response.status_code == 200
    assert response.json['spanning_trees'] == '192'
    assert response.json['partition_function_bound'] == str(8 * 192)
    assert response.json['log_spanning_trees'] == pytest.approx(5.257495372027781)


def test_exact_endpoint(client):
    response = client.post('/exact', json={'graph': {'generator': 'cycle', 'params': [4]}, 'k': 2})
    assert response.status_code == 200
    body = response.json
    assert body['total'] == '6'
    assert len(body['support']) == 6
    assert body['support'][0]['probability'] == pytest.approx(1 / 6)


def test_exact_endpoint_needs_k(client):
    response = client.post('/exact', json={'graph': {'generator': 'cycle', 'params': [4]}})
    assert response.status_code == 400
    assert response.json['message'] == 'Missing required field: k'


def test_fraction_balanced_endpoint(client):
    response = client.post('/fraction-balanced', json={'graph': {'generator': 'path', 'params': [4]}, 'k': 2})
    assert response.status_code == 200
    assert response.json['fraction'] == '1/3'
    assert response.json['value'] == pytest.approx(1 / 3)


def test_fraction_balanced_needs_divisibility(client):
    response = client.post('/fraction-balanced', json={'graph': {'generator': 'cycle', 'params': [5]}, 'k': 2})
    assert response.status_code == 400
    assert response.json['error'] == 'InvalidArgumentError'


def test_size_guard_maps_to_413(client):
    response = client.post('/exact', json={'graph': {'generator': 'grid', 'params': [5, 5]}, 'k': 2})
    assert response.status_code == 413
    assert response.json['error'] == 'SizeGuardError'


@pytest.mark.parametrize('body,message', [
    ({'k': 2}, 'Missing required field: graph'),
    ({'graph': {'generator': 'torus', 'params': [3]}}, 'Invalid generator'),
    ({'graph': {'generator': 'grid', 'params': [3]}}, "takes 2 parameters"),
    ({'graph': {'generator': 'cycle', 'params': [4]}, 'k': 0}, "Field 'k'"),
    ({'graph': {'generator': 'cycle', 'params': [4]}, 'c': -1}, "Field 'c'"),
    ({'graph': {'edge_list': 'graph.txt'}}, 'Edge-list files are not accepted'),
])
def test_exact_validation(client, body, message):
    response = client.post('/count', json=body)
    assert response.status_code == 400
    assert message in response.json['message']


def test_invalid_generator_size(client):
    response = client.post('/count', json={'graph': {'generator': 'cycle', 'params': [2]}})
    assert response.status_code == 400
    assert response.json['error'] == 'InvalidSizeError'


def test_non_json_body(client):
    response = client.post('/count', data='not json', content_type='text/plain')
    assert response.status_code == 400
    assert response.json['error'] == 'Invalid request'


def test_sample_endpoint(client):
    body = {
        'graph': {'generator': 'double_cycle', 'params': [6]},
        'chain': {'variant': 'RECOM', 'k': 3, 'seed': 2},
        'ensemble': {'burn_in': 3, 'samples': 5},
    }
    response = client.post('/sample', json=body)
    assert response.status_code == 200
    assert response.mimetype == 'application/x-ndjson'
    lines = [json.loads(line) for line in response.get_data(as_text=True).splitlines()]
    assert [line['sample'] for line in lines] == [0, 1, 2, 3, 4]
    assert all(line['sizes'] == [4, 4, 4] for line in lines)
    assert all('avg_gap' in line for line in lines)

    again = client.post('/sample', json=body)
    assert again.get_data() == response.get_data()


def test_sample_endpoint_rejects_unbalanced_recom(client):
    body = {
        'graph': {'generator': 'grid', 'params': [2, 3]},
        'chain': {'variant': 'RECOM', 'k': 4},
    }
    response = client.post('/sample', json=body)
    assert response.status_code == 400
    assert 'k | n' in response.json['message']


def test_sample_endpoint_rejects_edge_lists(client):
    body = {'graph': {'edge_list': '/etc/hosts'}, 'chain': {'k': 2}}
    response = client.post('/sample', json=body)
    assert response.status_code == 400


def test_sample_endpoint_too_large(client):
    body = {
        'graph': {'generator': 'grid', 'params': [2, 3]},
        'chain': {'k': 2},
        'ensemble': {'samples': 10001},
    }
    response = client.post('/sample', json=body)
    assert response.status_code == 413
