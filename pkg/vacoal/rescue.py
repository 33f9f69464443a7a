"""
Exogenous collision rescue.

Four stages: samples are accumulated at write time, sorted per block by
address at finalisation, located by binary search at read time, and
confirmed by an exact byte match of the query's segment. A confirmed match
puts the block's vote back into the ballot; anything else stays Don't Care.

The rescue rate ``rr`` subsamples the accumulated samples: 1 keeps all of
them, 0 disables the pipeline.
"""

import logging
import threading
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .blockmem import BlockMemory, VoteResult, majority_vote

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RescueRate:
    rr: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.rr <= 1.0:
            raise ValueError(f"Rescue rate must lie in [0, 1], got {self.rr}")

    @property
    def disabled(self) -> bool:
        return self.rr == 0.0


class RescueBuffer:
    """Append-only (addresses, segments, tid) samples gathered while learning."""

    def __init__(self, blocks: int, segment_bytes: int):
        self.blocks = blocks
        self.segment_bytes = segment_bytes
        self._addresses: List[np.ndarray] = []
        self._segments: List[np.ndarray] = []
        self._tids: List[int] = []

    @classmethod
    def for_memory(cls, memory: BlockMemory) -> "RescueBuffer":
        return cls(memory.blocks, memory.segment_bytes)

    def append(self, addresses: np.ndarray, segments: np.ndarray, tid: int) -> None:
        self._addresses.append(np.asarray(addresses, dtype=np.int64).copy())
        self._segments.append(np.asarray(segments, dtype=np.uint8).copy())
        self._tids.append(tid)

    def arrays(self):
        """Samples as (K, B) addresses, (K, B, n_bytes) segments and (K,) tids."""
        if not self._tids:
            return (
                np.zeros((0, self.blocks), dtype=np.int64),
                np.zeros((0, self.blocks, self.segment_bytes), dtype=np.uint8),
                np.zeros(0, dtype=np.int32),
            )
        return np.stack(self._addresses), np.stack(self._segments), np.array(self._tids, dtype=np.int32)

    def __len__(self):
        return len(self._tids)


@dataclass
class ResolveStats:
    """Work counters; ``comparisons`` counts address and segment comparisons."""

    lookups: int = 0
    comparisons: int = 0
    hits: int = 0
    misses: int = 0

    def __post_init__(self):
        self._lock = threading.Lock()

    def record(self, comparisons: int, hit: bool):
        with self._lock:
            self.lookups += 1
            self.comparisons += comparisons
            if hit:
                self.hits += 1
            else:
                self.misses += 1


def _search_cost(n: int) -> int:
    """Comparisons of one binary search over n sorted keys."""
    return int(n).bit_length()


class RescueTable:
    """
    Per-block address-sorted arrays of (address, segment, tid).

    ``sample_ids`` index each entry's sample in the original buffer, out of
    ``samples`` accumulated in total, so a full table can be subsampled later.
    """

    def __init__(
        self,
        addresses: List[np.ndarray],
        segments: List[np.ndarray],
        tids: List[np.ndarray],
        segment_bytes: int,
        sample_ids: Optional[List[np.ndarray]] = None,
        samples: Optional[int] = None,
    ):
        self.addresses = addresses
        self.segments = segments
        self.tids = tids
        self.blocks = len(addresses)
        self.segment_bytes = segment_bytes
        if sample_ids is None:
            sample_ids = [np.arange(a.shape[0], dtype=np.int64) for a in addresses]
        self.sample_ids = sample_ids
        self.samples = samples if samples is not None else max((a.shape[0] for a in addresses), default=0)

    @classmethod
    def empty(cls, blocks: int, segment_bytes: int, samples: int = 0) -> "RescueTable":
        return cls(
            [np.zeros(0, dtype=np.int64) for _ in range(blocks)],
            [np.zeros((0, segment_bytes), dtype=np.uint8) for _ in range(blocks)],
            [np.zeros(0, dtype=np.int32) for _ in range(blocks)],
            segment_bytes,
            [np.zeros(0, dtype=np.int64) for _ in range(blocks)],
            samples,
        )

    def block_size(self, block: int) -> int:
        return int(self.addresses[block].shape[0])

    def __len__(self):
        return sum(self.block_size(b) for b in range(self.blocks))

    def subsample(self, rr: RescueRate, seed: int = 0) -> "RescueTable":
        """
        Keep each original sample with probability rr. Uses the same draws
        as ``finalize`` so subsampling a full table equals finalising at rr.
        """
        if rr.disabled:
            return RescueTable.empty(self.blocks, self.segment_bytes, self.samples)
        if rr.rr >= 1.0:
            return self
        keep = np.random.default_rng(seed).random(self.samples) < rr.rr
        masks = [keep[ids] for ids in self.sample_ids]
        return RescueTable(
            [a[m] for a, m in zip(self.addresses, masks)],
            [s[m] for s, m in zip(self.segments, masks)],
            [t[m] for t, m in zip(self.tids, masks)],
            self.segment_bytes,
            [ids[m] for ids, m in zip(self.sample_ids, masks)],
            self.samples,
        )

    def resolve(self, block: int, addr: int, query_segment, stats: Optional[ResolveStats] = None) -> Optional[int]:
        """
        Tid of the first stored entry at ``addr`` whose segment equals
        ``query_segment`` byte for byte, or None for a genuine Don't Care.
        """
        keys = self.addresses[block]
        lo = int(np.searchsorted(keys, addr, side="left"))
        hi = int(np.searchsorted(keys, addr, side="right"))
        comparisons = 2 * _search_cost(keys.shape[0])
        query = np.asarray(query_segment, dtype=np.uint8).reshape(-1)
        found = None
        for i in range(lo, hi):
            comparisons += 1
            if np.array_equal(self.segments[block][i], query):
                found = int(self.tids[block][i])
                break
        if stats is not None:
            stats.record(comparisons, found is not None)
        return found

    def resolve_cells(self, cells: np.ndarray, addresses: np.ndarray, segments: np.ndarray, stats: Optional[ResolveStats] = None) -> np.ndarray:
        """
        Replace every negative cell of a (Q, B) read with its rescued tid.

        Unresolved cells keep their sentinel, so they remain Don't Care.
        """
        out = np.array(cells, copy=True)
        for q, b in zip(*np.nonzero(out < 0)):
            tid = self.resolve(int(b), int(addresses[q, b]), segments[q, b], stats)
            if tid is not None:
                out[q, b] = tid
        return out


def finalize(buffer: RescueBuffer, rr: RescueRate, seed: int = 0) -> RescueTable:
    """
    Build the rescue table from the accumulated samples.

    For 0 < rr < 1 every sample is kept independently with probability rr
    using a generator seeded by ``seed``. Equal addresses keep insertion
    order.
    """
    if rr.disabled:
        return RescueTable.empty(buffer.blocks, buffer.segment_bytes, len(buffer))
    addresses, segments, tids = buffer.arrays()
    ids = np.arange(tids.shape[0], dtype=np.int64)
    if rr.rr < 1.0:
        keep = np.random.default_rng(seed).random(tids.shape[0]) < rr.rr
        addresses, segments, tids, ids = addresses[keep], segments[keep], tids[keep], ids[keep]
    per_addr, per_seg, per_tid, per_ids = [], [], [], []
    for b in range(buffer.blocks):
        order = np.argsort(addresses[:, b], kind="stable")
        per_addr.append(addresses[order, b])
        per_seg.append(segments[order, b])
        per_tid.append(tids[order])
        per_ids.append(ids[order])
    logger.info(f"Rescue table finalized: {tids.shape[0]} of {len(buffer)} samples kept at rr={rr.rr}")
    return RescueTable(per_addr, per_seg, per_tid, buffer.segment_bytes, per_ids, len(buffer))


def vote_many_with_rescue(memory: BlockMemory, table: Optional[RescueTable], hvs, stats: Optional[ResolveStats] = None) -> List[VoteResult]:
    """Batch read of all queries, rescue of negative cells, then one vote per row."""
    segments = memory.segments(hvs)
    addresses = memory.bank.addresses(segments)
    cells = memory.read_addresses(addresses)
    if table is not None and len(table):
        cells = table.resolve_cells(cells, addresses, segments, stats)
    return [majority_vote(row) for row in cells]


def vote_with_rescue(memory: BlockMemory, table: Optional[RescueTable], hv, stats: Optional[ResolveStats] = None) -> VoteResult:
    return vote_many_with_rescue(memory, table, [hv], stats)[0]
