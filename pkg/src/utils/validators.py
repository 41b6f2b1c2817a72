"""Data validation utilities"""
from typing import Any, Dict, Tuple

from models.chain import ChainVariant
from services.graph_generators import GENERATORS

RENDER_FORMATS = ('svg', 'ppm')


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def validate_graph_section(graph: Any) -> Tuple[bool, str]:
    """
    Validate the graph section

    Expected format:
    {"generator": "grid", "params": [2, 3]}  or  {"edge_list": "graph.txt"}

    Returns:
        Tuple of (is_valid: bool, error_message: str)
    """
    if not isinstance(graph, dict):
        return False, "Section 'graph' must be an object"

    if 'edge_list' in graph:
        if not isinstance(graph['edge_list'], str) or not graph['edge_list']:
            return False, "Field 'graph.edge_list' must be a non-empty string"
        return True, ""

    if 'generator' not in graph:
        return False, "Missing required field: graph.generator (or graph.edge_list)"
    if graph['generator'] not in GENERATORS:
        return False, f"Invalid generator. Must be one of: {', '.join(sorted(GENERATORS))}"

    params = graph.get('params', [])
    if not isinstance(params, list) or not all(_is_int(p) for p in params):
        return False, "Field 'graph.params' must be a list of integers"
    arity = GENERATORS[graph['generator']][1]
    if len(params) not in arity:
        return False, f"Generator '{graph['generator']}' takes {' or '.join(map(str, arity))} parameters"

    return True, ""


def validate_chain_section(chain: Any) -> Tuple[bool, str]:
    """
    Validate the chain section

    Expected format:
    {"variant": "FOREST_WALK", "k": 2, "c": 0, "seed": 1, "resample_cap": 10000}
    """
    if not isinstance(chain, dict):
        return False, "Section 'chain' must be an object"

    if 'k' not in chain:
        return False, "Missing required field: chain.k"
    if not _is_int(chain['k']) or chain['k'] < 1:
        return False, "Field 'chain.k' must be a positive integer"

    variant = chain.get('variant', ChainVariant.FOREST_WALK.value)
    if variant not in {v.value for v in ChainVariant}:
        return False, f"Invalid variant. Must be one of: {', '.join(v.value for v in ChainVariant)}"
    if variant == ChainVariant.FOREST_WALK.value and chain['k'] < 2:
        return False, "Field 'chain.k' must be at least 2 for the forest walk"

    c = chain.get('c', 0)
    if isinstance(c, bool) or not isinstance(c, (int, float)) or c < 0:
        return False, "Field 'chain.c' must be a nonnegative number"

    seed = chain.get('seed', 0)
    if not _is_int(seed) or not (0 <= seed < 2 ** 64):
        return False, "Field 'chain.seed' must be an integer in 0..2^64-1"

    for field in ('steps', 'resample_cap'):
        if field in chain and chain[field] is not None:
            if not _is_int(chain[field]) or chain[field] < 0:
                return False, f"Field 'chain.{field}' must be a nonnegative integer"

    return True, ""


def validate_run_config(data: Dict[str, Any]) -> Tuple[bool, str]:
    """
    Validate a run configuration file

    Required sections: graph, chain. Optional: ensemble, output, render.

    Args:
        data: Parsed JSON document

    Returns:
        Tuple of (is_valid: bool, error_message: str)
    """
    if not isinstance(data, dict):
        return False, "Run configuration must be a JSON object"

    for section in ('graph', 'chain'):
        if section not in data:
            return False, f"Missing required section: {section}"

    ok, message = validate_graph_section(data['graph'])
    if not ok:
        return ok, message
    ok, message = validate_chain_section(data['chain'])
    if not ok:
        return ok, message

    ensemble = data.get('ensemble', {})
    if not isinstance(ensemble, dict):
        return False, "Section 'ensemble' must be an object"
    for field in ('burn_in', 'thinning'):
        value = ensemble.get(field)
        if value is not None and (not _is_int(value) or value < 0):
            return False, f"Field 'ensemble.{field}' must be a nonnegative integer"
    for field in ('samples', 'chains', 'workers', 'max_tries'):
        value = ensemble.get(field, 1)
        if not _is_int(value) or value < 1:
            return False, f"Field 'ensemble.{field}' must be a positive integer"

    output = data.get('output', {})
    if not isinstance(output, dict):
        return False, "Section 'output' must be an object"
    run_name = output.get('run_name', 'run')
    if not isinstance(run_name, str) or not run_name or '/' in run_name:
        return False, "Field 'output.run_name' must be a non-empty name without '/'"
    stats_interval = output.get('stats_interval')
    if stats_interval is not None and (not _is_int(stats_interval) or stats_interval < 1):
        return False, "Field 'output.stats_interval' must be a positive integer"

    render = data.get('render', {})
    if not isinstance(render, dict):
        return False, "Section 'render' must be an object"
    if render.get('format', 'svg') not in RENDER_FORMATS:
        return False, f"Invalid render format. Must be one of: {', '.join(RENDER_FORMATS)}"
    cell_size = render.get('cell_size', 10)
    if not _is_int(cell_size) or cell_size < 1:
        return False, "Field 'render.cell_size' must be a positive integer"

    return True, ""


def validate_exact_request(data: Dict[str, Any]) -> Tuple[bool, str]:
    """
    Validate a request body for the exact endpoints

    Expected format:
    {"graph": {...}, "k": 2, "c": 0, "allow_large": false}
    """
    if not isinstance(data, dict):
        return False, "Request body must be a JSON object"
    if 'graph' not in data:
        return False, "Missing required field: graph"
    ok, message = validate_graph_section(data['graph'])
    if not ok:
        return ok, message
    if 'edge_list' in data['graph']:
        return False, "Edge-list files are not accepted over HTTP; use a generator"
    if 'k' in data and (not _is_int(data['k']) or data['k'] < 1):
        return False, "Field 'k' must be a positive integer"
    c = data.get('c', 0)
    if isinstance(c, bool) or not isinstance(c, (int, float)) or c < 0:
        return False, "Field 'c' must be a nonnegative number"
    if not isinstance(data.get('allow_large', False), bool):
        return False, "Field 'allow_large' must be a boolean"
    return True, ""
