"""Partition, exact distribution and gap-profile models"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from models.graph import EdgeClass
from utils.errors import InvalidArgumentError

Weight = Union[int, float]


@dataclass(frozen=True)
class PartitionView:
    """
    Canonical unordered partition of 0..n-1.

    Parts are sorted by their minimum vertex and vertices are sorted
    within parts, so equal set partitions compare and hash equal.
    """

    parts: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_parts(cls, parts: Iterable[Iterable[int]]) -> 'PartitionView':
        """Canonicalize an iterable of vertex collections"""
        canonical = []
        seen = set()
        for part in parts:
            members = tuple(sorted(set(part)))
            if not members:
                raise InvalidArgumentError("Partition parts must be nonempty")
            if seen.intersection(members):
                raise InvalidArgumentError("Partition parts must be disjoint")
            seen.update(members)
            canonical.append(members)
        if seen != set(range(len(seen))):
            raise InvalidArgumentError("Partition must cover vertices 0..n-1")
        canonical.sort(key=lambda p: p[0])
        return cls(tuple(canonical))

    @classmethod
    def from_assignment(cls, assignment: Sequence[int]) -> 'PartitionView':
        """Build from a per-vertex part label vector"""
        groups: Dict[int, List[int]] = {}
        for v, label in enumerate(assignment):
            groups.setdefault(label, []).append(v)
        return cls.from_parts(groups.values())

    @classmethod
    def from_string(cls, text: str) -> 'PartitionView':
        """Parse the canonical string form, e.g. '0,1|2,3'"""
        try:
            return cls.from_parts([int(v) for v in chunk.split(',')] for chunk in text.strip().split('|'))
        except ValueError:
            raise InvalidArgumentError(f"Malformed partition string '{text}'")

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def n(self) -> int:
        return sum(len(p) for p in self.parts)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(p) for p in self.parts)

    def assignment(self) -> List[int]:
        """Canonical label per vertex: the index of its part"""
        labels = [0] * self.n
        for idx, part in enumerate(self.parts):
            for v in part:
                labels[v] = idx
        return labels

    def is_balanced(self) -> bool:
        return len(set(self.sizes)) == 1

    def imbalance_ratio(self) -> float:
        """Largest part size divided by smallest"""
        sizes = self.sizes
        return max(sizes) / min(sizes)

    def __str__(self) -> str:
        return '|'.join(','.join(str(v) for v in part) for part in self.parts)


class ExactDistribution:
    """
    Finite distribution over canonical partitions with exact weights.

    Weights are Python ints when the bias exponent is an integer, floats
    otherwise; the partition function is their sum.
    """

    def __init__(self,
                 support: Sequence[PartitionView],
                 weights: Sequence[Weight],
                 k: int,
                 c: float = 0,
                 label: str = ''):
        """
        Initialize distribution

        Args:
            support: Partitions with positive weight
            weights: Weight per partition, aligned with support
            k: Part count
            c: Bias exponent the weights were computed with
            label: Description (graph and distribution name)
        """
        if len(support) != len(weights):
            raise InvalidArgumentError("support and weights must have equal length")
        if any(w <= 0 for w in weights):
            raise InvalidArgumentError("All weights on the support must be positive")
        self.support = list(support)
        self.weights = list(weights)
        self.k = k
        self.c = c
        self.label = label
        self.total = sum(self.weights)
        self._index = {p: i for i, p in enumerate(self.support)}

    @property
    def is_exact(self) -> bool:
        return all(isinstance(w, int) for w in self.weights)

    def __len__(self) -> int:
        return len(self.support)

    def __contains__(self, p: PartitionView) -> bool:
        return p in self._index

    def weight_of(self, p: PartitionView) -> Weight:
        idx = self._index.get(p)
        return 0 if idx is None else self.weights[idx]

    def probability(self, p: PartitionView) -> Union[Fraction, float]:
        """Fraction for exact weights, float otherwise"""
        w = self.weight_of(p)
        if self.is_exact:
            return Fraction(w, self.total)
        return w / self.total

    def probabilities(self) -> Dict[PartitionView, Union[Fraction, float]]:
        return {p: self.probability(p) for p in self.support}

    def to_table(self) -> str:
        """
        Sorted text table: canonical partition, exact weight, probability

        Rows are sorted by canonical partition string.
        """
        rows = sorted(zip(self.support, self.weights), key=lambda pw: str(pw[0]))
        lines = [f"# {self.label} k={self.k} c={self.c} Z={self.total}"]
        for p, w in rows:
            lines.append(f"{p}\t{w}\t{float(w) / float(self.total):.12f}")
        return '\n'.join(lines) + '\n'

    def to_dict(self) -> Dict:
        return {
            'label': self.label,
            'k': self.k,
            'c': self.c,
            'total': str(self.total),
            'support': [
                {'partition': str(p), 'weight': str(w), 'probability': float(w) / float(self.total)}
                for p, w in sorted(zip(self.support, self.weights), key=lambda pw: str(pw[0]))
            ],
        }


@dataclass(frozen=True)
class GapProfile:
    """
    Gap statistics of a 3-partition of a tagged double-cycle-like graph.

    A gap is a cycle edge whose endpoints lie in different parts. phi counts
    rung edges internal to parts; the average gap position is the plain
    integer mean of gap labels.
    """

    gaps: Tuple[Tuple[EdgeClass, int], ...]
    phi: int
    avg_gap_position: Fraction
    in_bottleneck: bool
    cycle_length: int
    rungless_parts: Tuple[int, ...] = field(default=())

    @property
    def gap_sum(self) -> int:
        return sum(pos for _, pos in self.gaps)

    def to_dict(self) -> Dict:
        return {
            'gaps': [[side.value, pos] for side, pos in self.gaps],
            'phi': self.phi,
            'avg_gap_position': str(self.avg_gap_position),
            'in_bottleneck': self.in_bottleneck,
        }


@dataclass(frozen=True)
class GapTransition:
    """Comparison of gap profiles before and after one chain move"""

    delta_avg: Fraction
    modular_sum_preserved: bool
    wrapped: bool
    both_outside_bottleneck: bool

    @property
    def preserves_average(self) -> bool:
        return self.delta_avg == 0


def gap_transition(before: GapProfile, after: GapProfile) -> GapTransition:
    """
    Compare two gap profiles.

    The modular gap sum (sum of labels modulo the cycle length) is what a
    move between non-bottleneck states preserves; a change of the raw
    average together with a preserved modular sum means a gap crossed the
    label-0 edge.
    """
    length = before.cycle_length
    modular = (before.gap_sum - after.gap_sum) % length == 0 and len(before.gaps) == len(after.gaps)
    delta = after.avg_gap_position - before.avg_gap_position
    return GapTransition(
        delta_avg=delta,
        modular_sum_preserved=modular,
        wrapped=modular and delta != 0,
        both_outside_bottleneck=not before.in_bottleneck and not after.in_bottleneck,
    )


def histogram(samples: Iterable[PartitionView]) -> Dict[PartitionView, int]:
    """Count occurrences of each partition"""
    counts: Dict[PartitionView, int] = {}
    for p in samples:
        counts[p] = counts.get(p, 0) + 1
    return counts


def empirical_distribution(samples: Iterable[PartitionView],
                           k: Optional[int] = None,
                           label: str = 'empirical') -> ExactDistribution:
    """Histogram of samples as an ExactDistribution with integer counts"""
    counts = histogram(samples)
    if not counts:
        raise InvalidArgumentError("Empirical distribution needs at least one sample")
    support = list(counts)
    return ExactDistribution(support, [counts[p] for p in support],
                             k if k is not None else support[0].k, 0, label)
