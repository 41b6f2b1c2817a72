"""Command-line entry point for the partition sampler"""
import json
import logging
import os
import sys
from functools import wraps
from typing import Any, Dict, List, Optional

import click

from config.sampler_config import SamplerConfig
from models.chain import ChainVariant
from models.ensemble import RunConfig
from models.graph import Graph, read_edge_list, write_edge_list
from models.partition import PartitionView
from services.ensemble_service import (
    mixing_report,
    rejection_sample_balanced,
    run_dir_for,
    write_ensemble,
)
from services.exact_oracle import exact_distribution, fraction_balanced
from services.export_service import ExportService, JsonlWriter, read_jsonl
from services.graph_generators import GENERATORS, build_graph
from services.render_service import render_partition
from services.spanning_count import count_spanning_trees, partition_function_bound
from utils.errors import ConfigError, InvalidArgumentError, PartitionSamplerError
from utils.validators import validate_run_config

logger = logging.getLogger(__name__)


def _parse_params(text: Optional[str]) -> List[int]:
    if not text:
        return []
    try:
        return [int(p) for p in text.replace(',', ' ').split()]
    except ValueError:
        raise InvalidArgumentError(f"Generator parameters must be integers, got '{text}'")


def _load_graph(generator: Optional[str], params: Optional[str], edge_list: Optional[str]) -> Graph:
    if edge_list:
        with open(edge_list, 'r', encoding='utf-8') as handle:
            return read_edge_list(handle.read(), name=os.path.basename(edge_list))
    if not generator:
        raise InvalidArgumentError("Give --generator (with --params) or --edge-list")
    return build_graph(generator, _parse_params(params))


def _set_path(data: Dict[str, Any], section: str, key: str, value: Any) -> None:
    if value is not None:
        data.setdefault(section, {})[key] = value


def _load_run_config(config_path: Optional[str], overrides: Dict[str, Any]) -> RunConfig:
    """
    Read the JSON run configuration, apply flag overrides and validate

    Raises:
        ConfigError: Unreadable or invalid configuration
    """
    data: Dict[str, Any] = {}
    if config_path:
        try:
            with open(config_path, 'r', encoding='utf-8') as handle:
                data = json.load(handle)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read configuration {config_path}: {e}")
        if not isinstance(data, dict):
            raise ConfigError("Run configuration must be a JSON object")

    if overrides.get('edge_list'):
        data['graph'] = {'edge_list': overrides['edge_list']}
    elif overrides.get('generator'):
        data['graph'] = {'generator': overrides['generator'], 'params': _parse_params(overrides.get('params'))}
    for key in ('k', 'variant', 'c', 'seed', 'resample_cap'):
        _set_path(data, 'chain', key, overrides.get(key))
    for key in ('burn_in', 'thinning', 'samples', 'chains', 'workers', 'max_tries'):
        _set_path(data, 'ensemble', key, overrides.get(key))
    _set_path(data, 'output', 'run_name', overrides.get('run_name'))
    _set_path(data, 'output', 'directory', overrides.get('output_dir'))
    _set_path(data, 'output', 'stats_interval', overrides.get('stats_interval'))
    if overrides.get('xlsx'):
        _set_path(data, 'output', 'xlsx', True)
    if overrides.get('render'):
        _set_path(data, 'render', 'enabled', True)

    is_valid, message = validate_run_config(data)
    if not is_valid:
        raise ConfigError(message)
    return RunConfig.from_dict(data)


def exits_with_error_codes(f):
    """Map library exceptions to the documented exit codes"""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except PartitionSamplerError as e:
            logger.error(f"{type(e).__name__}: {e}", exc_info=logger.isEnabledFor(logging.DEBUG))
            click.echo(f"error: {e}", err=True)
            sys.exit(e.exit_code)
        except OSError as e:
            logger.error("I/O failure", exc_info=True)
            click.echo(f"error: {e}", err=True)
            sys.exit(1)
    return decorated_function


def graph_options(f):
    f = click.option('--edge-list', type=click.Path(exists=True, dir_okay=False), help='Edge-list file')(f)
    f = click.option('--params', help='Generator parameters, e.g. "2,3"')(f)
    f = click.option('--generator', type=click.Choice(sorted(GENERATORS)), help='Graph family')(f)
    return f


@click.group()
@click.option('--log-level', default=None, help='Overrides PARTITION_SAMPLER_LOG_LEVEL')
def cli(log_level: Optional[str]):
    """Sample and analyze connected graph partitions."""
    logging.basicConfig(
        level=(log_level or SamplerConfig.LOG_LEVEL).upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


@cli.command()
@click.argument('generator', type=click.Choice(sorted(GENERATORS)))
@click.argument('params', nargs=-1, type=int)
@click.option('--out', type=click.Path(dir_okay=False), help='Write here instead of stdout')
@exits_with_error_codes
def gen(generator: str, params, out: Optional[str]):
    """Write a generated graph as an edge list."""
    text = write_edge_list(build_graph(generator, list(params)))
    if out:
        with open(out, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(text)
        logger.info(f"Wrote {generator}{tuple(params)} to {out}")
    else:
        click.echo(text, nl=False)


@cli.command()
@graph_options
@click.option('--k', type=int, help='Also print the bound binom(n-1,k-1)*T(G)')
@exits_with_error_codes
def count(generator, params, edge_list, k: Optional[int]):
    """Print the exact spanning tree count."""
    g = _load_graph(generator, params, edge_list)
    click.echo(str(count_spanning_trees(g)))
    if k is not None:
        click.echo(str(partition_function_bound(g, k)))


@cli.command()
@graph_options
@click.option('--k', type=int, required=True)
@click.option('--c', type=float, default=0.0, show_default=True)
@click.option('--balanced', is_flag=True, help='Restrict to balanced partitions')
@click.option('--fraction', is_flag=True, help='Print only the balanced fraction')
@click.option('--allow-large', is_flag=True, help='Bypass the size guard')
@click.option('--out', type=click.Path(dir_okay=False))
@exits_with_error_codes
def exact(generator, params, edge_list, k: int, c: float, balanced: bool, fraction: bool,
          allow_large: bool, out: Optional[str]):
    """Print the exact distribution over connected k-partitions."""
    g = _load_graph(generator, params, edge_list)
    if fraction:
        click.echo(str(fraction_balanced(g, k, allow_large=allow_large)))
        return
    bias = int(c) if c == int(c) else c
    text = exact_distribution(g, k, bias, balanced=balanced, allow_large=allow_large).to_table()
    if out:
        with open(out, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)


def run_options(f):
    options = [
        click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
                     help='JSON run configuration'),
        click.option('--k', type=int),
        click.option('--variant', type=click.Choice([v.value for v in ChainVariant])),
        click.option('--c', type=float),
        click.option('--seed', type=int, help='Single seed for all randomness'),
        click.option('--burn-in', type=int),
        click.option('--thinning', type=int),
        click.option('--samples', type=int),
        click.option('--run-name'),
        click.option('--output-dir', type=click.Path(file_okay=False)),
    ]
    for option in reversed(options):
        f = option(f)
    return graph_options(f)


def _overrides(kwargs: Dict[str, Any]) -> Dict[str, Any]:
    c = kwargs.get('c')
    if c is not None and c == int(c):
        kwargs['c'] = int(c)
    return kwargs


@cli.command()
@run_options
@click.option('--chains', type=int)
@click.option('--workers', type=int)
@click.option('--stats-interval', type=int, help='Stream chain statistics every N steps')
@click.option('--xlsx', is_flag=True, help='Also write an XLSX workbook')
@click.option('--render', is_flag=True, help='Render every sample')
@exits_with_error_codes
def sample(config_path, **kwargs):
    """Draw an ensemble into a run directory."""
    config = _load_run_config(config_path, _overrides(kwargs))
    run_dir, error = write_ensemble(config)
    if error:
        click.echo(f"error: {error}", err=True)
        sys.exit(1)
    click.echo(run_dir)


@cli.command()
@run_options
@click.option('--max-tries', type=int)
@click.option('--confidence', type=float, default=0.95, show_default=True)
@exits_with_error_codes
def reject(config_path, confidence: float, **kwargs):
    """Rejection-sample balanced partitions from the forest walk."""
    config = _load_run_config(config_path, _overrides(kwargs))
    records, report = rejection_sample_balanced(config, confidence=confidence)

    run_dir = run_dir_for(config)
    with JsonlWriter(os.path.join(run_dir, SamplerConfig.ENSEMBLE_FILE)) as writer:
        writer.write_batch(records)
    _, error = ExportService().write_csv(report.to_table(), os.path.join(run_dir, SamplerConfig.ACCEPTANCE_FILE))
    if error:
        click.echo(f"error: {error}", err=True)
        sys.exit(1)
    click.echo(json.dumps(report.to_dict()))


@cli.command('mix-report')
@graph_options
@click.option('--k', type=int, required=True)
@click.option('--c', type=float, default=0.0, show_default=True)
@click.option('--variant', type=click.Choice([v.value for v in ChainVariant]),
              default=ChainVariant.FOREST_WALK.value, show_default=True)
@click.option('--steps', 'step_grid', required=True, help='Step grid, e.g. "0,10,100,1000"')
@click.option('--trials', type=int, default=20, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--allow-large', is_flag=True)
@click.option('--out', type=click.Path(dir_okay=False), help=f'CSV destination (e.g. {SamplerConfig.MIXING_FILE})')
@exits_with_error_codes
def mix_report(generator, params, edge_list, k: int, c: float, variant: str, step_grid: str,
               trials: int, seed: int, allow_large: bool, out: Optional[str]):
    """Empirical TV to the exact law along a step grid."""
    g = _load_graph(generator, params, edge_list)
    bias = int(c) if c == int(c) else c
    report = mixing_report(g, k, bias, _parse_params(step_grid), trials, ChainVariant(variant),
                           seed=seed, allow_large=allow_large)
    headers, rows = report.to_table()
    click.echo('\t'.join(headers))
    for row in rows:
        click.echo('\t'.join(str(v) for v in row))
    if out:
        _, error = ExportService().write_csv((headers, rows), out)
        if error:
            click.echo(f"error: {error}", err=True)
            sys.exit(1)


@cli.command()
@graph_options
@click.option('--partition', help='Canonical partition, e.g. "0,1|2,3"')
@click.option('--from-jsonl', type=click.Path(exists=True, dir_okay=False), help='Ensemble file')
@click.option('--sample', 'sample_index', type=int, default=0, show_default=True)
@click.option('--chain', type=int, default=0, show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), required=True, help='.svg or .ppm')
@click.option('--cell-size', type=int, default=10, show_default=True)
@exits_with_error_codes
def render(generator, params, edge_list, partition: Optional[str], from_jsonl: Optional[str],
           sample_index: int, chain: int, out: str, cell_size: int):
    """Render one partition as SVG or PPM."""
    g = _load_graph(generator, params, edge_list)
    if partition:
        p = PartitionView.from_string(partition)
    elif from_jsonl:
        matches = [r for r in read_jsonl(from_jsonl) if r.sample_index == sample_index and r.chain == chain]
        if not matches:
            raise InvalidArgumentError(f"No sample {sample_index} of chain {chain} in {from_jsonl}")
        p = PartitionView.from_assignment(matches[0].assignment)
    else:
        raise InvalidArgumentError("Give --partition or --from-jsonl")
    click.echo(render_partition(g, p, out, cell_size))


if __name__ == '__main__':
    cli()
