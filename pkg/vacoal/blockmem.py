"""
Block-partitioned associative memory.

B blocks of 2^m signed 32-bit cells simulate the content-addressable store.
Learning writes a label id (tid) at the diffused address of every block;
reading returns the raw cells and ``majority_vote`` counts each block once.

Cell values:
    EMPTY           never written
    tid >= 0        single occupant
    -1              legacy collision flag
    -(k + 2)        reference to collision bucket k (bucket policy only)

Small configurations use one dense (B, 2^m) array. Large ones keep a dict
per block while learning and freeze it into sorted key/value arrays at
``finalize()``; reads then go through ``np.searchsorted``.
"""

import hashlib
import logging
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import config
from .exceptions import CapacityError, DimensionError, FrozenMemoryError
from .galois import DiffuserBank
from .hypervector import Hypervector, segment_rows

logger = logging.getLogger(__name__)

EMPTY = config.EMPTY
COLLISION = config.COLLISION

COLLISION_POLICIES = ("flag", "bucket")


class LabelTable:
    """Bijective label <-> tid map; tids are dense from 0 in insertion order."""

    def __init__(self, labels: Iterable[str] = ()):
        self._labels: List[str] = []
        self._tids: Dict[str, int] = {}
        for label in labels:
            self.assign(label)

    def assign(self, label: str) -> int:
        tid = self._tids.get(label)
        if tid is None:
            tid = len(self._labels)
            if tid > config.MAX_TID:
                raise CapacityError(f"Label space exhausted at {tid} labels")
            self._labels.append(label)
            self._tids[label] = tid
        return tid

    def tid(self, label: str) -> Optional[int]:
        return self._tids.get(label)

    def label(self, tid: int) -> str:
        return self._labels[tid]

    def labels(self) -> List[str]:
        return list(self._labels)

    def __contains__(self, label):
        return label in self._tids

    def __len__(self):
        return len(self._labels)


@dataclass
class CollisionStats:
    """
    Write-path counters behind the two collision rates.

    ``location_rate`` is flagged cells over all cells; ``count_rate`` is
    colliding write attempts over all write attempts.
    """

    total_cells: int
    write_attempts: int = 0
    collision_attempts: int = 0
    flagged_cells: int = 0

    @property
    def location_rate(self) -> float:
        return self.flagged_cells / self.total_cells if self.total_cells else 0.0

    @property
    def count_rate(self) -> float:
        return self.collision_attempts / self.write_attempts if self.write_attempts else 0.0

    def as_dict(self) -> dict:
        data = asdict(self)
        data["location_rate"] = self.location_rate
        data["count_rate"] = self.count_rate
        return data


@dataclass(frozen=True)
class VoteResult:
    winner_tid: Optional[int]
    winner_votes: int
    cr1: float
    dont_care_blocks: int
    blocks: int

    @property
    def losing_votes(self) -> int:
        return self.blocks - self.winner_votes - self.dont_care_blocks

    @property
    def fires(self) -> bool:
        """Majority-threshold output: more than half of all blocks agree."""
        return 2 * self.winner_votes > self.blocks


def majority_vote(votes) -> VoteResult:
    """
    Ballot count over one row of per-block cell values.

    Negative cells (EMPTY, collision flag, bucket reference) are Don't Care.
    Ties go to the lowest tid; the CR1 denominator is B.
    """
    votes = np.asarray(votes).reshape(-1)
    blocks = votes.shape[0]
    valid = votes[votes >= 0]
    if not valid.size:
        return VoteResult(None, 0, 0.0, blocks, blocks)
    tids, counts = np.unique(valid, return_counts=True)
    best = int(np.argmax(counts))
    winner_votes = int(counts[best])
    return VoteResult(int(tids[best]), winner_votes, winner_votes / blocks, blocks - int(valid.size), blocks)


def majority_vote_rows(votes: np.ndarray) -> List[VoteResult]:
    """Independent vote per row of a (Q, B) array."""
    return [majority_vote(row) for row in np.asarray(votes)]


def expected_collision_rate(k: int, depth_exp: int) -> float:
    """
    Birthday-bound prediction of the count-based collision rate.

    Averages the probability that the i-th of ``k`` uniform writes lands on an
    already occupied cell, ``1 - (1 - 2^-m)^i``, over i = 0..k-1.
    """
    if k <= 0:
        return 0.0
    p = 2.0 ** -depth_exp
    free_all = np.exp(k * np.log1p(-p))
    return float(1.0 - (1.0 - free_all) / (k * p))


class BlockMemory:
    """
    The simulated CAM: B blocks, 2^m cells each, plus its diffuser bank.

    Learning is single-writer. After ``finalize()`` the memory is read-only
    apart from explicit fault injection and safe for concurrent readers.
    """

    def __init__(
        self,
        blocks: int = config.default_blocks,
        depth_exp: int = config.default_depth_exp,
        length: int = config.default_length,
        master_seed: int = 0,
        collision_policy: str = "flag",
        dense_cell_limit: Optional[int] = None,
    ):
        if blocks <= 0 or length <= 0 or length % blocks:
            raise DimensionError(f"Length {length} is not a positive multiple of block count {blocks}")
        if collision_policy not in COLLISION_POLICIES:
            raise ValueError(f"Unknown collision policy: {collision_policy}")
        self.blocks = blocks
        self.depth_exp = depth_exp
        self.length = length
        self.segment_bits = length // blocks
        self.segment_bytes = (self.segment_bits + 7) // 8
        self.master_seed = master_seed & ((1 << 64) - 1)
        self.collision_policy = collision_policy
        self.bank = DiffuserBank(master_seed, blocks, depth_exp, self.segment_bytes)
        self.labels = LabelTable()
        self.buckets: List[List[int]] = []
        self.stats = CollisionStats(total_cells=blocks * (1 << depth_exp))
        # (tid, digest of the packed key) already written; repeats are no-ops
        self._learned: set = set()
        self.finalized = False

        limit = config.dense_cell_limit if dense_cell_limit is None else dense_cell_limit
        self.storage = "dense" if blocks * (1 << depth_exp) <= limit else "sparse"
        self._block_index = np.arange(blocks)
        if self.storage == "dense":
            self._cells = np.full((blocks, 1 << depth_exp), EMPTY, dtype=np.int32)
        else:
            self._maps: List[Dict[int, int]] = [dict() for _ in range(blocks)]
            self._keys: List[np.ndarray] = []
            self._vals: List[np.ndarray] = []
        logger.debug(
            f"BlockMemory B={blocks} m={depth_exp} L={length} storage={self.storage} policy={collision_policy}"
        )

    # -- addressing -------------------------------------------------------

    def _rows(self, hvs) -> np.ndarray:
        if isinstance(hvs, Hypervector):
            hvs = [hvs]
        if isinstance(hvs, np.ndarray):
            rows = np.atleast_2d(hvs).astype(np.uint8, copy=False)
            if rows.shape[-1] != (self.length + 7) // 8:
                raise DimensionError(f"Packed rows of width {rows.shape[-1]} do not match length {self.length}")
            return rows
        for hv in hvs:
            if hv.length != self.length:
                raise DimensionError(f"Hypervector length {hv.length} does not match memory length {self.length}")
        return np.stack([hv.data for hv in hvs])

    def segments(self, hvs) -> np.ndarray:
        """Packed segments of shape (Q, B, ceil(q/8))."""
        return segment_rows(self._rows(hvs), self.length, self.blocks)

    def addresses(self, hvs) -> np.ndarray:
        """Diffused addresses of shape (Q, B)."""
        return self.bank.addresses(self.segments(hvs))

    # -- write path -------------------------------------------------------

    def learn(self, hv: Hypervector, label: str, rescue=None) -> int:
        """
        Store ``label`` under ``hv`` in every block.

        Raises:
            DimensionError: If hv length differs from L
            CapacityError: If the label space is exhausted
            FrozenMemoryError: If the memory is finalized
        """
        return self.learn_many([hv], [label], rescue)[0]

    def learn_many(self, hvs, labels: Sequence[str], rescue=None) -> List[int]:
        if self.finalized:
            raise FrozenMemoryError("Cannot learn into a finalized memory")
        rows = self._rows(hvs)
        if rows.shape[0] != len(labels):
            raise ValueError("Number of vectors and labels differ")
        segments = segment_rows(rows, self.length, self.blocks)
        addresses = self.bank.addresses(segments)
        tids = []
        for i, label in enumerate(labels):
            tid = self.labels.assign(label)
            seen = (tid, hashlib.blake2b(rows[i].tobytes(), digest_size=16).digest())
            if seen in self._learned:
                tids.append(tid)
                continue
            self._learned.add(seen)
            self._write(addresses[i], tid)
            if rescue is not None:
                rescue.append(addresses[i], segments[i], tid)
            tids.append(tid)
        return tids

    def _merge(self, current: int, tid: int) -> Optional[int]:
        """
        New value for an occupied cell hit by ``tid``, or None for an
        idempotent rewrite. Updates counters.
        """
        if current == tid:
            return None
        if current <= -2:
            bucket = self.buckets[-current - 2]
            if tid in bucket:
                return None
            self.stats.write_attempts += 1
            self.stats.collision_attempts += 1
            bucket.append(tid)
            return current
        self.stats.write_attempts += 1
        self.stats.collision_attempts += 1
        if current == COLLISION:
            return COLLISION
        self.stats.flagged_cells += 1
        if self.collision_policy == "bucket":
            self.buckets.append([current, tid])
            return -(len(self.buckets) - 1 + 2)
        return COLLISION

    def _write(self, addresses: np.ndarray, tid: int):
        if self.storage == "dense":
            current = self._cells[self._block_index, addresses]
            empty = current == EMPTY
            self._cells[self._block_index[empty], addresses[empty]] = tid
            self.stats.write_attempts += int(empty.sum())
            for b in np.flatnonzero(~empty & (current != tid)):
                merged = self._merge(int(current[b]), tid)
                if merged is not None:
                    self._cells[b, addresses[b]] = merged
            return
        for b, addr in enumerate(addresses.tolist()):
            cells = self._maps[b]
            current = cells.get(addr, EMPTY)
            if current == EMPTY:
                cells[addr] = tid
                self.stats.write_attempts += 1
                continue
            merged = self._merge(current, tid)
            if merged is not None:
                cells[addr] = merged

    def finalize(self) -> "BlockMemory":
        """Freeze sparse storage into sorted arrays; idempotent."""
        if self.finalized:
            return self
        if self.storage == "sparse":
            for cells in self._maps:
                keys = np.fromiter(cells.keys(), dtype=np.int64, count=len(cells))
                vals = np.fromiter(cells.values(), dtype=np.int32, count=len(cells))
                order = np.argsort(keys, kind="stable")
                self._keys.append(keys[order])
                self._vals.append(vals[order])
            self._maps = []
        self._learned = set()
        self.finalized = True
        logger.info(
            f"Memory finalized: {len(self.labels)} labels, location rate {self.stats.location_rate:.6%}, "
            f"count rate {self.stats.count_rate:.6%}"
        )
        return self

    def force_dont_care(self, hv: Hypervector, blocks: Iterable[int]) -> None:
        """Overwrite the cells ``hv`` addresses in ``blocks`` with the collision flag."""
        addresses = self.addresses(hv)[0]
        for b in blocks:
            addr = int(addresses[b])
            if self.storage == "dense":
                self._cells[b, addr] = COLLISION
            elif not self.finalized:
                self._maps[b][addr] = COLLISION
            else:
                keys = self._keys[b]
                idx = int(np.searchsorted(keys, addr))
                if idx < keys.shape[0] and keys[idx] == addr:
                    self._vals[b][idx] = COLLISION
                else:
                    self._keys[b] = np.insert(keys, idx, addr)
                    self._vals[b] = np.insert(self._vals[b], idx, COLLISION)

    # -- read path --------------------------------------------------------

    def read_addresses(self, addresses: np.ndarray) -> np.ndarray:
        """Raw cells at a (Q, B) address array."""
        addresses = np.atleast_2d(addresses)
        if self.storage == "dense":
            return self._cells[self._block_index, addresses]
        out = np.full(addresses.shape, EMPTY, dtype=np.int32)
        if not self.finalized:
            for b in range(self.blocks):
                cells = self._maps[b]
                out[:, b] = [cells.get(a, EMPTY) for a in addresses[:, b].tolist()]
            return out
        for b in range(self.blocks):
            keys = self._keys[b]
            if not keys.shape[0]:
                continue
            column = addresses[:, b]
            idx = np.minimum(np.searchsorted(keys, column), keys.shape[0] - 1)
            hit = keys[idx] == column
            out[:, b] = np.where(hit, self._vals[b][idx], EMPTY)
        return out

    def read_votes(self, hv: Hypervector) -> np.ndarray:
        """Raw per-block cells (length B) at the addresses of ``hv``."""
        return self.read_addresses(self.addresses(hv))[0]

    def read_many(self, hvs) -> np.ndarray:
        return self.read_addresses(self.addresses(hvs))

    def vote(self, hv: Hypervector) -> VoteResult:
        return majority_vote(self.read_votes(hv))

    def bucket(self, cell: int) -> List[int]:
        """Tids stored behind a bucket reference cell value."""
        if cell > -2:
            raise ValueError(f"Cell value {cell} is not a bucket reference")
        return list(self.buckets[-cell - 2])

    # -- storage export for snapshots ------------------------------------

    def dense_cells(self) -> np.ndarray:
        return self._cells

    def sparse_block(self, block: int):
        """(keys, values) of one finalized sparse block."""
        return self._keys[block], self._vals[block]

    def restore_cells(self, dense: Optional[np.ndarray] = None, sparse=None) -> None:
        """Install cell storage read from a snapshot and mark the memory final."""
        if self.storage == "dense":
            if dense is None or dense.shape != self._cells.shape:
                raise DimensionError("Dense cell array does not match memory layout")
            self._cells = dense.astype(np.int32, copy=False)
        else:
            if sparse is None or len(sparse) != self.blocks:
                raise DimensionError("Sparse cell blocks do not match memory layout")
            self._maps = []
            self._keys = [np.asarray(k, dtype=np.int64) for k, _ in sparse]
            self._vals = [np.asarray(v, dtype=np.int32) for _, v in sparse]
        self.finalized = True

    def __repr__(self):
        return (
            f"BlockMemory(blocks={self.blocks}, depth_exp={self.depth_exp}, length={self.length}, "
            f"labels={len(self.labels)}, storage={self.storage!r})"
        )
