"""Exception types raised by the partition sampler library"""
from typing import Optional, Sequence, Tuple


class PartitionSamplerError(Exception):
    """Base class for every library error; carries the CLI exit code"""

    exit_code = 1
    http_status = 500


class InvalidSizeError(PartitionSamplerError):
    """Generator called with a size outside its valid range"""

    exit_code = 2
    http_status = 400


class InvalidArgumentError(PartitionSamplerError):
    """Operation called with an argument it cannot accept"""

    exit_code = 2
    http_status = 400


class ConfigError(InvalidArgumentError):
    """Run configuration failed validation"""


class InvalidForestError(PartitionSamplerError):
    """Edge set handed to a forest constructor contains a cycle"""

    exit_code = 2
    http_status = 400


class CycleError(PartitionSamplerError):
    """Link would join two vertices already in the same component"""

    exit_code = 3
    http_status = 422


class NotPresentError(PartitionSamplerError):
    """Cut or exchange of an edge that is not in the forest"""

    exit_code = 3
    http_status = 422


class NotConnectedError(PartitionSamplerError):
    """Path query across two different components"""

    exit_code = 3
    http_status = 422


class NoSpanningTreeError(PartitionSamplerError):
    """Induced subgraph is disconnected, so it has no spanning tree"""

    exit_code = 3
    http_status = 422


class NumericalFailureError(PartitionSamplerError):
    """Floating factorization of a reduced Laplacian broke down"""

    exit_code = 3
    http_status = 422


class UnsupportedGraphError(PartitionSamplerError):
    """Graph lacks the tags or coordinates an operation needs"""

    exit_code = 2
    http_status = 400


class InitializationError(PartitionSamplerError):
    """No balanced starting state found within the retry budget"""

    exit_code = 3
    http_status = 422


class StepFailureError(PartitionSamplerError):
    """
    ReCom exceeded its resample cap on a merged region.

    Attributes:
        region: Vertices of the merged region P_i ∪ P_j
        parts: The component ids that were merged
        sample_index: Ensemble sample index, when raised inside an ensemble run
    """

    exit_code = 3
    http_status = 422

    def __init__(self, message: str,
                 region: Sequence[int] = (),
                 parts: Tuple[int, int] = (-1, -1),
                 sample_index: Optional[int] = None):
        super().__init__(message)
        self.region = tuple(sorted(region))
        self.parts = parts
        self.sample_index = sample_index


class BudgetExhaustedError(PartitionSamplerError):
    """
    Rejection sampler ran out of tries without an acceptance.

    Attributes:
        tries: Number of proposals drawn
        rate_upper_bound: Upper confidence bound on the acceptance rate
    """

    exit_code = 3
    http_status = 422

    def __init__(self, message: str, tries: int = 0, rate_upper_bound: float = 1.0):
        super().__init__(message)
        self.tries = tries
        self.rate_upper_bound = rate_upper_bound


class SizeGuardError(PartitionSamplerError):
    """Exact enumeration refused because the graph exceeds the size guard"""

    exit_code = 4
    http_status = 413
