"""Exact counting and distribution endpoints"""
import logging

from flask import Blueprint, jsonify

from middleware.request_handling import map_sampler_errors, require_json_body
from services.exact_oracle import exact_distribution, fraction_balanced
from services.graph_generators import build_graph
from services.spanning_count import count_spanning_trees, log_count_spanning_trees, partition_function_bound
from utils.validators import validate_exact_request

logger = logging.getLogger(__name__)

exact_bp = Blueprint('exact', __name__)


def _graph_from(data):
    section = data['graph']
    return build_graph(section['generator'], section.get('params', []))


def _missing_k(data):
    if 'k' not in data:
        return jsonify({'error': 'Invalid request', 'message': 'Missing required field: k'}), 400
    return None


@exact_bp.route('/count', methods=['POST'])
@require_json_body(validate_exact_request)
@map_sampler_errors
def count(data):
    """
    Spanning tree count of a generated graph

    Request format:
    {"graph": {"generator": "grid", "params": [2, 3]}}

    With "k" present, also returns binom(n-1, k-1) * T(G).
    """
    g = _graph_from(data)
    trees = count_spanning_trees(g)
    logger.info(f"Counted {trees} spanning trees of {g!r}")
    body = {
        'graph': g.to_dict(),
        'spanning_trees': str(trees),
        'log_spanning_trees': log_count_spanning_trees(g) if trees else None,
    }
    if 'k' in data:
        body['partition_function_bound'] = str(partition_function_bound(g, data['k']))
    return jsonify(body), 200


@exact_bp.route('/exact', methods=['POST'])
@require_json_body(validate_exact_request)
@map_sampler_errors
def exact(data):
    """
    Exact distribution over connected k-partitions

    Request format:
    {"graph": {...}, "k": 2, "c": 0, "balanced": false, "allow_large": false}

    Weights are returned as strings so big integers survive JSON.
    """
    missing = _missing_k(data)
    if missing:
        return missing
    g = _graph_from(data)
    dist = exact_distribution(g, data['k'], data.get('c', 0),
                              balanced=bool(data.get('balanced', False)),
                              allow_large=data.get('allow_large', False))
    logger.info(f"Exact distribution {dist.label}: {len(dist)} partitions")
    return jsonify(dist.to_dict()), 200


@exact_bp.route('/fraction-balanced', methods=['POST'])
@require_json_body(validate_exact_request)
@map_sampler_errors
def balanced_fraction(data):
    """
    Fraction of spanning-tree weight on balanced partitions

    Request format:
    {"graph": {...}, "k": 2}
    """
    missing = _missing_k(data)
    if missing:
        return missing
    g = _graph_from(data)
    fraction = fraction_balanced(g, data['k'], allow_large=data.get('allow_large', False))
    return jsonify({
        'graph': g.to_dict(),
        'k': data['k'],
        'fraction': str(fraction),
        'value': float(fraction),
    }), 200
