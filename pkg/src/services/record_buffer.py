"""
Buffering of ensemble records between chains and the output writer.

Chains running in worker threads add records as they are drawn; the
buffer releases them in (sample index, chain) order in batches, so the
written file does not depend on thread timing.
"""
import logging
import threading
from collections import deque
from typing import Any, Callable, Deque, Dict, List, Optional, Tuple

from config.sampler_config import SamplerConfig
from models.ensemble import EnsembleRecord
from utils.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


class RecordBuffer:
    """
    Per-chain record queues merged by sample index.

    A record with sample index i is releasable once every chain has
    delivered its record i (or finished).
    """

    def __init__(self, chains: int = 1, flush_size: Optional[int] = None,
                 on_flush: Optional[Callable[[List[EnsembleRecord]], None]] = None):
        """
        Initialize the record buffer

        Args:
            chains: Number of chains feeding the buffer
            flush_size: Releasable records per batch (default SamplerConfig.FLUSH_SIZE)
            on_flush: Called with each released batch while the lock is held, so batches arrive in order
        """
        if chains < 1:
            raise InvalidArgumentError("RecordBuffer needs at least one chain")
        self.chains = chains
        self.flush_size = flush_size if flush_size is not None else SamplerConfig.FLUSH_SIZE
        self.queues: Dict[int, Deque[EnsembleRecord]] = {c: deque() for c in range(chains)}
        self.finished: Dict[int, bool] = {c: False for c in range(chains)}
        self.delivered: Dict[int, int] = {c: 0 for c in range(chains)}
        self.on_flush = on_flush
        self.released = 0
        self.lock = threading.Lock()

    def add_record(self, record: EnsembleRecord) -> Tuple[bool, List[EnsembleRecord]]:
        """
        Add a record and return a batch if enough records are releasable.

        Returns:
            Tuple of (should_flush: bool, records_to_write: List[EnsembleRecord])
        """
        if record.chain not in self.queues:
            raise InvalidArgumentError(f"Record from unknown chain {record.chain}")
        with self.lock:
            self.queues[record.chain].append(record)
            if self._releasable_count() >= self.flush_size:
                batch = self._release()
                if self.on_flush is not None:
                    self.on_flush(batch)
                return True, batch
            return False, []

    def mark_finished(self, chain: int) -> None:
        with self.lock:
            self.finished[chain] = True

    def flush_ready(self) -> List[EnsembleRecord]:
        """Release every record that is already in merge order"""
        with self.lock:
            return self._release()

    def flush_all(self) -> List[EnsembleRecord]:
        """Release everything, in merge order, regardless of pending chains"""
        with self.lock:
            remaining = [r for queue in self.queues.values() for r in queue]
            for queue in self.queues.values():
                queue.clear()
            remaining.sort(key=lambda r: (r.sample_index, r.chain))
            self.released += len(remaining)
            return remaining

    def get_buffer_stats(self) -> Dict[str, Any]:
        with self.lock:
            return {
                'chains': self.chains,
                'released': self.released,
                'pending': {c: len(q) for c, q in self.queues.items()},
                'finished': [c for c, done in self.finished.items() if done],
            }

    def _frontier(self) -> float:
        """Smallest sample index some unfinished chain has not delivered yet"""
        frontier = float('inf')
        for chain, queue in self.queues.items():
            if self.finished[chain]:
                continue
            next_index = queue[-1].sample_index + 1 if queue else self.delivered[chain]
            frontier = min(frontier, next_index)
        return frontier

    def _releasable_count(self) -> int:
        frontier = self._frontier()
        return sum(1 for queue in self.queues.values() for r in queue if r.sample_index < frontier)

    def _release(self) -> List[EnsembleRecord]:
        frontier = self._frontier()
        batch: List[EnsembleRecord] = []
        for chain, queue in self.queues.items():
            while queue and queue[0].sample_index < frontier:
                record = queue.popleft()
                self.delivered[chain] = record.sample_index + 1
                batch.append(record)
        batch.sort(key=lambda r: (r.sample_index, r.chain))
        self.released += len(batch)
        if batch:
            logger.debug(f"Releasing {len(batch)} records up to sample {batch[-1].sample_index}")
        return batch
