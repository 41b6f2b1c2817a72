"""Ensemble record and run configuration models"""
from typing import Any, Dict, List, Optional

from models.chain import ChainParams, ChainVariant
from models.graph import Graph


class EnsembleRecord:
    """One emitted sample of an ensemble run"""

    def __init__(self,
                 sample_index: int,
                 assignment: List[int],
                 sizes: List[int],
                 log_weight: float,
                 step: int,
                 chain: int = 0,
                 phi: Optional[int] = None,
                 avg_gap: Optional[str] = None):
        """
        Initialize record

        Args:
            sample_index: Index of the sample within its chain
            assignment: Canonical part label per vertex
            sizes: Part sizes in canonical part order
            log_weight: Log spanning-tree weight of the partition (c = 0)
            step: Chain step the sample was drawn at
            chain: Chain number (RNG stream)
            phi: Internal rung count, tagged graphs only
            avg_gap: Average gap position as an exact rational string, tagged graphs only
        """
        self.sample_index = sample_index
        self.assignment = assignment
        self.sizes = sizes
        self.log_weight = log_weight
        self.step = step
        self.chain = chain
        self.phi = phi
        self.avg_gap = avg_gap

    @property
    def k(self) -> int:
        return len(self.sizes)

    def is_balanced(self) -> bool:
        return len(set(self.sizes)) == 1

    def imbalance_ratio(self) -> float:
        return max(self.sizes) / min(self.sizes)

    def to_dict(self) -> Dict[str, Any]:
        """Fixed key order, used for the JSONL output"""
        data = {
            'sample': self.sample_index,
            'chain': self.chain,
            'step': self.step,
            'sizes': list(self.sizes),
            'log_weight': self.log_weight,
            'assignment': list(self.assignment),
        }
        if self.phi is not None:
            data['phi'] = self.phi
            data['avg_gap'] = self.avg_gap
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EnsembleRecord':
        return cls(
            sample_index=data.get('sample', 0),
            assignment=list(data.get('assignment', [])),
            sizes=list(data.get('sizes', [])),
            log_weight=data.get('log_weight', 0.0),
            step=data.get('step', 0),
            chain=data.get('chain', 0),
            phi=data.get('phi'),
            avg_gap=data.get('avg_gap'),
        )


class RunConfig:
    """
    Parsed run configuration.

    Sections: graph (generator + params, or edge_list path), chain
    (ChainParams fields), ensemble (burn_in, thinning, samples, chains,
    workers, max_tries), output (run_name, directory, xlsx, stats_interval) and render
    (enabled, format, cell_size).
    """

    def __init__(self,
                 chain: ChainParams,
                 generator: Optional[str] = None,
                 params: Optional[List[int]] = None,
                 edge_list: Optional[str] = None,
                 burn_in: int = 0,
                 thinning: Optional[int] = None,
                 samples: int = 1,
                 chains: int = 1,
                 workers: int = 1,
                 max_tries: int = 10000,
                 run_name: str = 'run',
                 output_dir: Optional[str] = None,
                 xlsx: bool = False,
                 stats_interval: Optional[int] = None,
                 render: bool = False,
                 render_format: str = 'svg',
                 cell_size: int = 10):
        self.chain = chain
        self.generator = generator
        self.params = list(params or [])
        self.edge_list = edge_list
        self.burn_in = burn_in
        self.thinning = thinning
        self.samples = samples
        self.chains = chains
        self.workers = workers
        self.max_tries = max_tries
        self.run_name = run_name
        self.output_dir = output_dir
        self.xlsx = xlsx
        self.stats_interval = stats_interval
        self.render = render
        self.render_format = render_format
        self.cell_size = cell_size

    def thinning_for(self, g: Graph) -> int:
        """Configured thinning, else m for the forest walk and 1 for ReCom"""
        if self.thinning is not None:
            return self.thinning
        return g.num_edges if self.chain.variant == ChainVariant.FOREST_WALK else 1

    def to_dict(self) -> Dict[str, Any]:
        graph: Dict[str, Any] = {'edge_list': self.edge_list} if self.edge_list else {
            'generator': self.generator, 'params': self.params}
        return {
            'graph': graph,
            'chain': self.chain.to_dict(),
            'ensemble': {
                'burn_in': self.burn_in,
                'thinning': self.thinning,
                'samples': self.samples,
                'chains': self.chains,
                'workers': self.workers,
                'max_tries': self.max_tries,
            },
            'output': {'run_name': self.run_name, 'directory': self.output_dir, 'xlsx': self.xlsx,
                       'stats_interval': self.stats_interval},
            'render': {'enabled': self.render, 'format': self.render_format, 'cell_size': self.cell_size},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        """Create instance from an already validated dictionary"""
        graph = data.get('graph', {})
        ensemble = data.get('ensemble', {})
        output = data.get('output', {})
        render = data.get('render', {})
        return cls(
            chain=ChainParams.from_dict(data.get('chain', {})),
            generator=graph.get('generator'),
            params=graph.get('params'),
            edge_list=graph.get('edge_list'),
            burn_in=ensemble.get('burn_in', 0),
            thinning=ensemble.get('thinning'),
            samples=ensemble.get('samples', 1),
            chains=ensemble.get('chains', 1),
            workers=ensemble.get('workers', 1),
            max_tries=ensemble.get('max_tries', 10000),
            run_name=output.get('run_name', 'run'),
            output_dir=output.get('directory'),
            xlsx=output.get('xlsx', False),
            stats_interval=output.get('stats_interval'),
            render=render.get('enabled', False),
            render_format=render.get('format', 'svg'),
            cell_size=render.get('cell_size', 10),
        )
