"""
Binary snapshot of a learned memory and its rescue table.

Layout (little endian):
    header   magic, version, B, m, L, master_seed, label count,
             storage kind (0 dense, 1 sparse), policy (0 flag, 1 bucket)
    stats    write attempts, collision attempts, flagged cells
    labels   (byte length, utf-8) per label
    cells    dense: B * 2^m int32
             sparse: per block (count, int64 addresses, int32 values)
    buckets  count, then per bucket (count, int32 tids)
    rescue   present flag, sample total, then per block (count, int64
             addresses, count * ceil(q/8) segment bytes, int32 tids,
             int64 sample ids)

The diffuser bank is re-derived from (master_seed, B, m).
"""

import logging
import struct
from typing import BinaryIO, Optional, Tuple

import numpy as np

from . import config
from .blockmem import BlockMemory
from .exceptions import ArtifactIOError, SnapshotFormatError
from .rescue import RescueTable

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<4sHIIIQIBB")
_STATS = struct.Struct("<QQQ")
_COUNT = struct.Struct("<Q")


def _read_exact(fh: BinaryIO, size: int) -> bytes:
    raw = fh.read(size)
    if len(raw) != size:
        raise SnapshotFormatError("Snapshot is truncated")
    return raw


def _read_array(fh: BinaryIO, dtype, count: int) -> np.ndarray:
    dtype = np.dtype(dtype)
    return np.frombuffer(_read_exact(fh, dtype.itemsize * count), dtype=dtype).copy()


def _read_count(fh: BinaryIO) -> int:
    return _COUNT.unpack(_read_exact(fh, _COUNT.size))[0]


def save_snapshot(path, memory: BlockMemory, table: Optional[RescueTable] = None) -> None:
    memory.finalize()
    try:
        with open(path, "wb") as fh:
            fh.write(
                _HEADER.pack(
                    config.snapshot_magic,
                    config.snapshot_version,
                    memory.blocks,
                    memory.depth_exp,
                    memory.length,
                    memory.master_seed,
                    len(memory.labels),
                    0 if memory.storage == "dense" else 1,
                    0 if memory.collision_policy == "flag" else 1,
                )
            )
            s = memory.stats
            fh.write(_STATS.pack(s.write_attempts, s.collision_attempts, s.flagged_cells))
            for label in memory.labels.labels():
                raw = label.encode("utf-8")
                fh.write(struct.pack("<I", len(raw)))
                fh.write(raw)
            if memory.storage == "dense":
                fh.write(memory.dense_cells().astype("<i4").tobytes())
            else:
                for b in range(memory.blocks):
                    keys, vals = memory.sparse_block(b)
                    fh.write(_COUNT.pack(keys.shape[0]))
                    fh.write(keys.astype("<i8").tobytes())
                    fh.write(vals.astype("<i4").tobytes())
            fh.write(_COUNT.pack(len(memory.buckets)))
            for bucket in memory.buckets:
                fh.write(_COUNT.pack(len(bucket)))
                fh.write(np.asarray(bucket, dtype="<i4").tobytes())
            fh.write(struct.pack("<B", 0 if table is None else 1))
            if table is not None:
                fh.write(_COUNT.pack(table.samples))
                for b in range(table.blocks):
                    fh.write(_COUNT.pack(table.block_size(b)))
                    fh.write(table.addresses[b].astype("<i8").tobytes())
                    fh.write(np.ascontiguousarray(table.segments[b], dtype=np.uint8).tobytes())
                    fh.write(table.tids[b].astype("<i4").tobytes())
                    fh.write(table.sample_ids[b].astype("<i8").tobytes())
    except OSError as e:
        raise ArtifactIOError(f"Cannot write snapshot {path}: {e}") from e
    logger.info(f"Saved snapshot of {len(memory.labels)} labels to {path}")


def load_snapshot(path) -> Tuple[BlockMemory, Optional[RescueTable]]:
    try:
        fh = open(path, "rb")
    except OSError as e:
        raise ArtifactIOError(f"Cannot open snapshot {path}: {e}") from e
    with fh:
        magic, version, blocks, depth_exp, length, seed, n_labels, kind, policy = _HEADER.unpack(
            _read_exact(fh, _HEADER.size)
        )
        if magic != config.snapshot_magic:
            raise SnapshotFormatError(f"{path} is not a memory snapshot")
        if version != config.snapshot_version:
            raise SnapshotFormatError(f"Unsupported snapshot version {version}")
        memory = BlockMemory(
            blocks,
            depth_exp,
            length,
            master_seed=seed,
            collision_policy="flag" if policy == 0 else "bucket",
            dense_cell_limit=blocks * (1 << depth_exp) if kind == 0 else 0,
        )
        writes, collisions, flagged = _STATS.unpack(_read_exact(fh, _STATS.size))
        memory.stats.write_attempts = writes
        memory.stats.collision_attempts = collisions
        memory.stats.flagged_cells = flagged
        for _ in range(n_labels):
            (size,) = struct.unpack("<I", _read_exact(fh, 4))
            memory.labels.assign(_read_exact(fh, size).decode("utf-8"))
        if kind == 0:
            cells = _read_array(fh, "<i4", blocks << depth_exp).reshape(blocks, 1 << depth_exp)
            memory.restore_cells(dense=cells.astype(np.int32))
        else:
            sparse = []
            for _ in range(blocks):
                count = _read_count(fh)
                sparse.append((_read_array(fh, "<i8", count), _read_array(fh, "<i4", count)))
            memory.restore_cells(sparse=sparse)
        for _ in range(_read_count(fh)):
            memory.buckets.append(_read_array(fh, "<i4", _read_count(fh)).tolist())
        (has_table,) = struct.unpack("<B", _read_exact(fh, 1))
        table = None
        if has_table:
            nb = memory.segment_bytes
            samples = _read_count(fh)
            addresses, segments, tids, ids = [], [], [], []
            for _ in range(blocks):
                count = _read_count(fh)
                addresses.append(_read_array(fh, "<i8", count).astype(np.int64))
                segments.append(_read_array(fh, np.uint8, count * nb).reshape(count, nb))
                tids.append(_read_array(fh, "<i4", count).astype(np.int32))
                ids.append(_read_array(fh, "<i8", count).astype(np.int64))
            table = RescueTable(addresses, segments, tids, nb, ids, samples)
    logger.info(f"Loaded snapshot {path}: B={blocks} m={depth_exp} L={length}, {n_labels} labels")
    return memory, table
