"""
Ensemble generation and diagnostics.

sample_ensemble runs the configured chain (optionally several chains in a
thread pool, each on its own RNG stream) and emits thinned post-burn-in
samples. rejection_sample_balanced keeps only balanced forest-walk
samples. balance_profile and mixing_report summarize runs.
"""
import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import ExitStack
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from config.sampler_config import SamplerConfig
from models.chain import ChainParams, ChainVariant
from models.ensemble import EnsembleRecord, RunConfig
from models.graph import Graph, read_edge_list
from models.partition import PartitionView, histogram
from services.chains import (
    ChainObserver,
    ChainRunner,
    StatisticsObserver,
    initial_balanced_state,
    initial_forest_state,
    make_rng,
)
from services.dynamic_forest import ForestState
from services.exact_oracle import (
    bottleneck_ratio,
    exact_distribution,
    gap_profile,
    mixing_time_lower_bound,
    tv_distance,
)
from services.export_service import ExportService, JsonlWriter
from services.graph_generators import build_graph
from services.record_buffer import RecordBuffer
from services.render_service import render_partition
from services.spanning_count import SpanningTreeCounter, partition_log_weight
from utils.errors import (
    BudgetExhaustedError,
    InvalidArgumentError,
    InvalidForestError,
    PartitionSamplerError,
    SizeGuardError,
    StepFailureError,
    UnsupportedGraphError,
)

logger = logging.getLogger(__name__)


def load_graph(config: RunConfig) -> Graph:
    """Graph named by the run configuration: generator or edge-list file"""
    if config.edge_list:
        try:
            with open(config.edge_list, 'r', encoding='utf-8') as handle:
                text = handle.read()
        except OSError as e:
            raise InvalidArgumentError(f"Cannot read edge list {config.edge_list}: {e}")
        return read_edge_list(text, name=os.path.basename(config.edge_list))
    if not config.generator:
        raise InvalidArgumentError("Run configuration names neither a generator nor an edge list")
    return build_graph(config.generator, config.params)


def make_record(g: Graph, state: ForestState, sample_index: int, step: int, chain: int = 0,
                counter: Optional[SpanningTreeCounter] = None) -> EnsembleRecord:
    """
    Snapshot a chain state as a validated ensemble record

    Raises:
        InvalidForestError: Some part induces a disconnected subgraph
    """
    p = state.partition()
    for part in p.parts:
        if not g.is_connected(part):
            raise InvalidForestError(f"Sample {sample_index} has a disconnected part")
    phi = avg_gap = None
    if g.has_cycle_tags:
        profile = gap_profile(g, p)
        phi, avg_gap = profile.phi, str(profile.avg_gap_position)
    return EnsembleRecord(
        sample_index=sample_index,
        assignment=p.assignment(),
        sizes=list(p.sizes),
        log_weight=partition_log_weight(g, p, 0, counter),
        step=step,
        chain=chain,
        phi=phi,
        avg_gap=avg_gap,
    )


def initial_state(g: Graph, params: ChainParams, rng: np.random.Generator) -> ForestState:
    """Balanced start for ReCom, a cut uniform spanning tree for the forest walk"""
    if params.variant == ChainVariant.RECOM:
        return initial_balanced_state(g, params.k, rng)
    return initial_forest_state(g, params.k, rng)


def _chain_samples(g: Graph, config: RunConfig, chain: int,
                   observers: Sequence[ChainObserver] = ()) -> Iterator[EnsembleRecord]:
    params = config.chain
    params.check_graph(g)
    rng = make_rng(params.seed, stream=chain)
    runner = ChainRunner(g, params, initial_state(g, params, rng), rng=rng, observers=observers)
    thinning = config.thinning_for(g)
    counter = SpanningTreeCounter(g)

    for index in range(config.samples):
        try:
            runner.advance(config.burn_in if index == 0 else thinning)
        except StepFailureError as e:
            e.sample_index = index
            logger.error(f"Chain {chain} failed while drawing sample {index}", exc_info=True)
            raise
        except PartitionSamplerError:
            logger.error(f"Chain {chain} failed while drawing sample {index}", exc_info=True)
            raise
        yield make_record(g, runner.state, index, runner.steps_taken, chain, counter)
    runner.finish()


def sample_ensemble(config: RunConfig, graph: Optional[Graph] = None,
                    observer_factory: Optional[Callable[[int], Sequence[ChainObserver]]] = None
                    ) -> Iterator[EnsembleRecord]:
    """
    Emit thinned post-burn-in samples of the configured chain

    With config.chains > 1 the chains run in a thread pool of
    config.workers threads, chain c on RNG stream c, and records come out
    in (sample index, chain) order.

    Args:
        config: Run configuration
        graph: Prebuilt graph (loaded from the configuration otherwise)
        observer_factory: Chain number -> observers attached to that chain

    Returns:
        Iterator of EnsembleRecord
    """
    g = graph if graph is not None else load_graph(config)
    logger.info(f"Sampling {config.samples} record(s) x {config.chains} chain(s) on {g!r} with {config.chain!r}")

    def observers(chain: int) -> Sequence[ChainObserver]:
        return observer_factory(chain) if observer_factory is not None else ()

    if config.chains == 1:
        yield from _chain_samples(g, config, 0, observers(0))
        return

    buffer = RecordBuffer(config.chains)
    released: List[EnsembleRecord] = []
    released_lock = threading.Lock()

    def run(chain: int) -> None:
        try:
            for record in _chain_samples(g, config, chain, observers(chain)):
                should_flush, batch = buffer.add_record(record)
                if should_flush:
                    with released_lock:
                        released.extend(batch)
        finally:
            buffer.mark_finished(chain)

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        futures = [pool.submit(run, chain) for chain in range(config.chains)]
        for future in futures:
            future.result()

    released.sort(key=lambda r: (r.sample_index, r.chain))
    yield from released
    yield from buffer.flush_all()


def run_dir_for(config: RunConfig) -> str:
    """Directory a run writes into"""
    if config.output_dir:
        return os.path.join(config.output_dir, config.run_name)
    return SamplerConfig.get_run_dir(config.run_name)


def stats_file_name(chain: int, chains: int) -> str:
    if chains == 1:
        return SamplerConfig.STATS_FILE
    stem, extension = os.path.splitext(SamplerConfig.STATS_FILE)
    return f"{stem}_{chain}{extension}"


def write_ensemble(config: RunConfig, graph: Optional[Graph] = None) -> Tuple[Optional[str], Optional[str]]:
    """
    Run sample_ensemble and write the run directory

    Files: the JSONL ensemble and the balance table as CSV; optionally an
    XLSX workbook, per-chain statistics streams and one image per sample.

    Returns:
        Tuple of (run directory: str, error: str)
    """
    g = graph if graph is not None else load_graph(config)
    run_dir = run_dir_for(config)
    os.makedirs(run_dir, exist_ok=True)
    records: List[EnsembleRecord] = []

    with ExitStack() as stack:
        writer = stack.enter_context(JsonlWriter(os.path.join(run_dir, SamplerConfig.ENSEMBLE_FILE)))
        observer_factory = None
        if config.stats_interval:
            streams = {
                chain: stack.enter_context(open(os.path.join(run_dir, stats_file_name(chain, config.chains)),
                                                'w', encoding='utf-8', newline='\n'))
                for chain in range(config.chains)
            }

            def observer_factory(chain: int) -> Sequence[ChainObserver]:
                return [StatisticsObserver(streams[chain], interval=config.stats_interval)]

        pending: List[EnsembleRecord] = []
        for record in sample_ensemble(config, g, observer_factory=observer_factory):
            records.append(record)
            pending.append(record)
            if len(pending) >= SamplerConfig.FLUSH_SIZE:
                writer.write_batch(pending)
                pending = []
        writer.write_batch(pending)

    profile = balance_profile(records)
    exporter = ExportService()
    _, error = exporter.write_csv(profile.to_table(), os.path.join(run_dir, SamplerConfig.BALANCE_FILE))
    if error:
        return None, error
    if config.xlsx:
        _, error = exporter.generate_xlsx(
            {'Samples': exporter.records_table(records), 'Balance': profile.to_table()},
            os.path.join(run_dir, SamplerConfig.WORKBOOK_FILE))
        if error:
            return None, error
    if config.render:
        for record in records:
            name = f"sample_{record.chain}_{record.sample_index}.{config.render_format}"
            render_partition(g, PartitionView.from_assignment(record.assignment),
                             os.path.join(run_dir, name), config.cell_size)
    logger.info(f"Ensemble run {config.run_name} written to {run_dir}")
    return run_dir, None


@dataclass
class AcceptanceReport:
    """Outcome of rejection sampling"""

    tries: int
    accepted: int
    confidence: float
    ci_low: float
    ci_high: float

    @property
    def rate(self) -> float:
        return self.accepted / self.tries if self.tries else 0.0

    def to_dict(self) -> Dict:
        return {
            'tries': self.tries,
            'accepted': self.accepted,
            'rate': self.rate,
            'confidence': self.confidence,
            'ci_low': self.ci_low,
            'ci_high': self.ci_high,
        }

    def to_table(self) -> Tuple[List[str], List[List]]:
        return ['Tries', 'Accepted', 'Rate', 'CI Low', 'CI High'], \
            [[self.tries, self.accepted, self.rate, self.ci_low, self.ci_high]]


def rejection_sample_balanced(config: RunConfig, graph: Optional[Graph] = None,
                              confidence: float = 0.95) -> Tuple[List[EnsembleRecord], AcceptanceReport]:
    """
    Keep only balanced forest-walk samples

    Each thinned forest-walk sample is one proposal. Sampling stops after
    config.samples acceptances or config.max_tries proposals.

    Returns:
        Tuple of (accepted records, acceptance report with a Wilson interval)

    Raises:
        InvalidArgumentError: k does not divide n, or the variant is not the forest walk
        BudgetExhaustedError: No proposal was balanced
    """
    g = graph if graph is not None else load_graph(config)
    params = config.chain
    if params.variant != ChainVariant.FOREST_WALK:
        raise InvalidArgumentError("Rejection sampling draws from the forest walk")
    if g.n % params.k != 0:
        raise InvalidArgumentError(f"Balanced partitions need k | n, got k={params.k}, n={g.n}")

    rng = make_rng(params.seed, stream=0)
    runner = ChainRunner(g, params, initial_forest_state(g, params.k, rng), rng=rng)
    thinning = config.thinning_for(g)
    counter = SpanningTreeCounter(g)
    runner.advance(config.burn_in)

    accepted: List[EnsembleRecord] = []
    tries = 0
    while len(accepted) < config.samples and tries < config.max_tries:
        if tries:
            runner.advance(thinning)
        tries += 1
        if len(set(runner.state.comp_size)) == 1:
            accepted.append(make_record(g, runner.state, len(accepted), runner.steps_taken, 0, counter))

    interval = stats.binomtest(len(accepted), tries).proportion_ci(confidence_level=confidence, method='wilson')
    report = AcceptanceReport(tries, len(accepted), confidence, float(interval.low), float(interval.high))
    logger.info(f"Rejection sampling on {g!r}: {report.accepted}/{report.tries} accepted")
    if not accepted:
        raise BudgetExhaustedError(
            f"No balanced sample in {tries} proposals (rate < {report.ci_high:.3g} at {confidence:.0%})",
            tries=tries, rate_upper_bound=report.ci_high)
    return accepted, report


@dataclass
class BalanceProfile:
    """Summary of max/min part-size ratios over records"""

    count: int
    fraction_balanced: float
    mean_ratio: float
    median_ratio: float
    max_ratio: float
    ratio_counts: Dict[float, int] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            'count': self.count,
            'fraction_balanced': self.fraction_balanced,
            'mean_ratio': self.mean_ratio,
            'median_ratio': self.median_ratio,
            'max_ratio': self.max_ratio,
            'ratio_counts': {str(r): c for r, c in sorted(self.ratio_counts.items())},
        }

    def to_table(self) -> Tuple[List[str], List[List]]:
        return ['Imbalance Ratio', 'Count', 'Fraction'], \
            [[ratio, n, n / self.count] for ratio, n in sorted(self.ratio_counts.items())]


def balance_profile(records: Sequence[EnsembleRecord]) -> BalanceProfile:
    """
    Distribution of max/min part-size ratios

    Raises:
        InvalidArgumentError: No records
    """
    if not records:
        raise InvalidArgumentError("balance_profile needs at least one record")
    ratios = np.array([r.imbalance_ratio() for r in records], dtype=float)
    values, counts = np.unique(ratios, return_counts=True)
    return BalanceProfile(
        count=len(records),
        fraction_balanced=float(np.mean(ratios == 1.0)),
        mean_ratio=float(np.mean(ratios)),
        median_ratio=float(np.median(ratios)),
        max_ratio=float(np.max(ratios)),
        ratio_counts={float(v): int(c) for v, c in zip(values, counts)},
    )


@dataclass
class MixingRow:
    """TV to the exact law after a number of steps, across trials"""

    steps: int
    tv: float
    distinct_states: int
    avg_gap_positions: Tuple[Fraction, ...] = ()


@dataclass
class MixingReport:
    """TV decay table plus an optional conductance-based mixing time bound"""

    label: str
    rows: List[MixingRow]
    trials: int
    conductance_bound: Optional[float] = None

    def to_table(self) -> Tuple[List[str], List[List]]:
        rows = [[row.steps, row.tv, row.distinct_states, ' '.join(str(x) for x in row.avg_gap_positions)]
                for row in self.rows]
        if self.conductance_bound is not None:
            rows.append(['conductance_bound', self.conductance_bound, '', ''])
        return ['Steps', 'TV', 'Distinct States', 'Avg Gap Positions'], rows

    def to_dict(self) -> Dict:
        return {
            'label': self.label,
            'trials': self.trials,
            'rows': [
                {'steps': r.steps, 'tv': r.tv, 'distinct_states': r.distinct_states,
                 'avg_gap_positions': [str(x) for x in r.avg_gap_positions]}
                for r in self.rows
            ],
            'conductance_bound': self.conductance_bound,
        }


def mixing_report(g: Graph,
                  k: int,
                  c: float,
                  step_grid: Sequence[int],
                  trials: int,
                  variant: ChainVariant = ChainVariant.FOREST_WALK,
                  seed: int = 0,
                  initial: Optional[ForestState] = None,
                  allow_large: bool = False) -> MixingReport:
    """
    Empirical TV to the exact law along a step grid

    Every trial starts from the same initial state (drawn from stream 0 of
    seed unless given) and runs on its own stream. The forest walk is
    compared with the c-biased law, ReCom with the balanced spanning tree law.

    Args:
        g: Enumeration-feasible graph
        k: Part count
        c: Bias exponent (forest walk)
        step_grid: Step counts to report at
        trials: Independent runs
        variant: Chain to run
        seed: Base seed
        initial: Optional common starting state
        allow_large: Bypass the size guard for the exact law

    Returns:
        MixingReport
    """
    if trials < 1:
        raise InvalidArgumentError("mixing_report needs at least one trial")
    grid = sorted(set(int(s) for s in step_grid))
    if not grid or grid[0] < 0:
        raise InvalidArgumentError("Step grid must be a nonempty set of nonnegative integers")

    params = ChainParams(k, variant, c if variant == ChainVariant.FOREST_WALK else 0, seed)
    params.check_graph(g)
    recom = variant == ChainVariant.RECOM
    exact = exact_distribution(g, k, params.c, balanced=recom, allow_large=allow_large)
    start = initial if initial is not None else initial_state(g, params, make_rng(seed, 0))

    snapshots: Dict[int, List[PartitionView]] = {s: [] for s in grid}
    for trial in range(trials):
        runner = ChainRunner(g, params, start, rng=make_rng(seed, trial + 1))
        for s in grid:
            runner.advance(s - runner.steps_taken)
            snapshots[s].append(runner.state.partition())
    logger.info(f"Mixing report on {g!r}: {trials} trial(s) up to {grid[-1]} steps")

    rows = []
    for s in grid:
        seen = snapshots[s]
        gaps: Tuple[Fraction, ...] = ()
        if g.has_cycle_tags:
            gaps = tuple(sorted({gap_profile(g, p).avg_gap_position for p in seen}))
        rows.append(MixingRow(s, tv_distance(histogram(seen), exact), len(set(seen)), gaps))

    bound = None
    if k == 3 and g.has_cycle_tags:
        try:
            bound = float(mixing_time_lower_bound(bottleneck_ratio(g, allow_large=allow_large)))
        except (UnsupportedGraphError, SizeGuardError) as e:
            logger.info(f"No conductance bound for {g!r}: {e}")

    return MixingReport(exact.label, rows, trials, bound)
