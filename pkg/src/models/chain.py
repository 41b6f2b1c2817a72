"""Chain parameter and step record models"""
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from config.sampler_config import SamplerConfig
from models.graph import Graph
from utils.errors import InvalidArgumentError


class ChainVariant(str, Enum):
    """Markov chain kinds"""

    RECOM = 'RECOM'
    FOREST_WALK = 'FOREST_WALK'


class ChainParams:
    """Parameters shared by both chains"""

    def __init__(self,
                 k: int,
                 variant: ChainVariant = ChainVariant.FOREST_WALK,
                 c: float = 0,
                 seed: int = 0,
                 steps: int = 0,
                 resample_cap: Optional[int] = None):
        """
        Initialize chain parameters

        Args:
            k: Part count
            variant: RECOM or FOREST_WALK
            c: Bias exponent (forest walk only, ignored by ReCom)
            seed: 64-bit seed
            steps: Step budget for run_chain
            resample_cap: Max UST resamples per ReCom step (default from SamplerConfig)
        """
        if k < 1:
            raise InvalidArgumentError(f"k must be positive, got {k}")
        if k < 2 and ChainVariant(variant) == ChainVariant.FOREST_WALK:
            raise InvalidArgumentError("The forest walk needs k >= 2")
        if c < 0:
            raise InvalidArgumentError(f"Bias exponent must be nonnegative, got {c}")
        if steps < 0:
            raise InvalidArgumentError(f"Step budget must be nonnegative, got {steps}")
        if seed < 0 or seed >= 2 ** 64:
            raise InvalidArgumentError("Seed must fit in 64 unsigned bits")
        self.k = k
        self.variant = ChainVariant(variant)
        self.c = c
        self.seed = seed
        self.steps = steps
        self.resample_cap = resample_cap if resample_cap is not None else SamplerConfig.RESAMPLE_CAP

    def check_graph(self, g: Graph) -> None:
        """Raise if the parameters cannot run on g"""
        if self.k > g.n:
            raise InvalidArgumentError(f"k={self.k} exceeds the vertex count {g.n}")
        if self.variant == ChainVariant.RECOM and g.n % self.k != 0:
            raise InvalidArgumentError(f"ReCom needs k | n, got k={self.k}, n={g.n}")

    def with_steps(self, steps: int) -> 'ChainParams':
        return ChainParams(self.k, self.variant, self.c, self.seed, steps, self.resample_cap)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'k': self.k,
            'variant': self.variant.value,
            'c': self.c,
            'seed': self.seed,
            'steps': self.steps,
            'resample_cap': self.resample_cap,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ChainParams':
        return cls(
            k=int(data.get('k', 2)),
            variant=ChainVariant(data.get('variant', ChainVariant.FOREST_WALK.value)),
            c=data.get('c', 0),
            seed=int(data.get('seed', 0)),
            steps=int(data.get('steps', 0)),
            resample_cap=data.get('resample_cap'),
        )

    def __repr__(self) -> str:
        return f"<ChainParams {self.variant.value} k={self.k} c={self.c} seed={self.seed}>"


class StepRecord:
    """
    One chain move, enough to replay it.

    ReCom moves fill merged_parts, added_edge, removed_edge and resamples;
    after a resample new_region_edges holds the merged region's final tree
    edges. Forest-walk moves fill added_edge, removed_edge and lazy.
    """

    def __init__(self,
                 step: int,
                 variant: ChainVariant,
                 added_edge: int = -1,
                 removed_edge: int = -1,
                 lazy: bool = False,
                 merged_parts: Tuple[int, int] = (-1, -1),
                 resamples: int = 0,
                 new_region_edges: Optional[Tuple[int, ...]] = None,
                 sizes: Tuple[int, ...] = ()):
        self.step = step
        self.variant = variant
        self.added_edge = added_edge
        self.removed_edge = removed_edge
        self.lazy = lazy
        self.merged_parts = merged_parts
        self.resamples = resamples
        self.new_region_edges = new_region_edges
        self.sizes = sizes

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'step': self.step,
            'variant': self.variant.value,
            'added_edge': self.added_edge,
            'removed_edge': self.removed_edge,
            'lazy': self.lazy,
            'sizes': list(self.sizes),
        }
        if self.variant == ChainVariant.RECOM:
            data['merged_parts'] = list(self.merged_parts)
            data['resamples'] = self.resamples
            if self.new_region_edges is not None:
                data['new_region_edges'] = list(self.new_region_edges)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'StepRecord':
        region = data.get('new_region_edges')
        return cls(
            step=data.get('step', 0),
            variant=ChainVariant(data.get('variant', ChainVariant.FOREST_WALK.value)),
            added_edge=data.get('added_edge', -1),
            removed_edge=data.get('removed_edge', -1),
            lazy=data.get('lazy', False),
            merged_parts=tuple(data.get('merged_parts', (-1, -1))),
            resamples=data.get('resamples', 0),
            new_region_edges=tuple(region) if region is not None else None,
            sizes=tuple(data.get('sizes', ())),
        )

    def __repr__(self) -> str:
        if self.lazy:
            return f"<StepRecord {self.step} lazy>"
        return f"<StepRecord {self.step} +{self.added_edge} -{self.removed_edge}>"
