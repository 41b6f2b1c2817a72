"""
Tests for the ensemble record buffer.

This script tests:
1. Merge order across chains
2. Batch release at flush_size
3. Finished chains no longer hold back the frontier
4. Buffer stats
"""
import json

import pytest

from models.ensemble import EnsembleRecord
from services.record_buffer import RecordBuffer
from utils.errors import InvalidArgumentError


def _record(sample_index: int, chain: int) -> EnsembleRecord:
    return EnsembleRecord(sample_index, [0, 0, 1, 1], [2, 2], 0.0, step=sample_index * 10, chain=chain)


def test_merge_order():
    """Records come out ordered by (sample index, chain) whatever the arrival order"""
    buffer = RecordBuffer(chains=3, flush_size=100)
    arrivals = [(0, 2), (1, 2), (0, 0), (2, 2), (1, 0), (0, 1), (1, 1)]
    for sample_index, chain in arrivals:
        buffer.add_record(_record(sample_index, chain))

    released = buffer.flush_ready()
    assert [(r.sample_index, r.chain) for r in released] == [
        (0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2),
    ]
    remaining = buffer.flush_all()
    assert [(r.sample_index, r.chain) for r in remaining] == [(2, 2)]


def test_flush_at_batch_size():
    buffer = RecordBuffer(chains=1, flush_size=5)
    flushes = []
    for i in range(12):
        should_flush, batch = buffer.add_record(_record(i, 0))
        if should_flush:
            flushes.append([r.sample_index for r in batch])

    assert flushes == [[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]]
    assert [r.sample_index for r in buffer.flush_all()] == [10, 11]
    assert buffer.released == 12


def test_slow_chain_holds_back_release():
    buffer = RecordBuffer(chains=2, flush_size=2)
    for i in range(4):
        should_flush, batch = buffer.add_record(_record(i, 0))
        assert not should_flush
        assert batch == []

    should_flush, batch = buffer.add_record(_record(0, 1))
    assert should_flush
    assert [(r.sample_index, r.chain) for r in batch] == [(0, 0), (0, 1)]


def test_finished_chain_releases_frontier():
    buffer = RecordBuffer(chains=2, flush_size=100)
    buffer.add_record(_record(0, 1))
    for i in range(3):
        buffer.add_record(_record(i, 0))
    assert [(r.sample_index, r.chain) for r in buffer.flush_ready()] == [(0, 0), (0, 1)]

    buffer.mark_finished(1)
    assert [r.sample_index for r in buffer.flush_ready()] == [1, 2]


def test_on_flush_callback_sees_each_batch():
    seen = []
    buffer = RecordBuffer(chains=1, flush_size=3, on_flush=lambda batch: seen.append(len(batch)))
    for i in range(7):
        buffer.add_record(_record(i, 0))
    assert seen == [3, 3]


def test_buffer_stats():
    buffer = RecordBuffer(chains=2, flush_size=100)
    buffer.add_record(_record(0, 0))
    buffer.add_record(_record(1, 0))
    buffer.mark_finished(1)

    stats = buffer.get_buffer_stats()
    print(json.dumps(stats, indent=2, default=str))
    assert stats['chains'] == 2
    assert stats['pending'] == {0: 2, 1: 0}
    assert stats['finished'] == [1]
    assert stats['released'] == 0


def test_invalid_chain():
    with pytest.raises(InvalidArgumentError):
        RecordBuffer(chains=0)
    buffer = RecordBuffer(chains=1)
    with pytest.raises(InvalidArgumentError):
        buffer.add_record(_record(0, 4))
