"""
Pipeline artifact formats.

Every artifact is deterministic: CSV floats use a fixed number of decimal
places and JSON is written with sorted keys. Bench reports are the one
exception; their timing columns hold wall-clock seconds.

Functions:
    write_records / read_records: PathRecord CSV ``start,generation,node,parent,cr1,cr2``
    write_edges / write_predicates / write_starts / read_starts: graph fixtures
    write_json / read_json: reports
    write_sweep_table: per-configuration collision rates
    write_bench_table: trace timings per frontier size and configuration
    write_giant_table: ``node,s,s_hat,t_hat,g,paths``
    write_bars: hourglass bar data
"""

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from vacoal import config
from vacoal.analysis import GiantScoreRow, TrafficProfile
from vacoal.exceptions import ArtifactIOError, CsvFormatError, CsvParseError
from vacoal.search import PathRecord

logger = logging.getLogger(__name__)

RECORD_HEADER = ["start", "generation", "node", "parent", "cr1", "cr2"]
GIANT_HEADER = ["node", "s", "s_hat", "t_hat", "g", "paths"]


def fmt(value: float) -> str:
    return f"{value:.{config.float_places}f}"


def _open(path, mode: str):
    try:
        if "w" in mode:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
        return open(path, mode, newline="", encoding="utf-8")
    except OSError as e:
        raise ArtifactIOError(f"Cannot open {path}: {e}") from e


def write_records(path, records: Iterable[PathRecord]) -> int:
    count = 0
    with _open(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_HEADER)
        for r in records:
            writer.writerow([r.start, r.generation, r.node, r.parent, fmt(r.cr1), fmt(r.cr2)])
            count += 1
    logger.info(f"Wrote {count} path records to {path}")
    return count


def read_records(path) -> List[PathRecord]:
    records = []
    with _open(path, "r") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RECORD_HEADER:
            raise CsvFormatError(f"{path}: expected header {','.join(RECORD_HEADER)}")
        for row in reader:
            if not row:
                continue
            try:
                start, gen, node, parent, cr1, cr2 = row
                records.append(PathRecord(start, int(gen), node, parent, float(cr1), float(cr2)))
            except ValueError as e:
                raise CsvParseError(str(e), reader.line_num) from e
    return records


def write_edges(path, edges: Iterable[Tuple[str, str]]) -> None:
    with _open(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["student", "mentor"])
        writer.writerows(edges)


def write_predicates(path, rows: Iterable[Tuple[str, str, str]]) -> None:
    with _open(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node", "predicate", "value"])
        writer.writerows(rows)


def write_starts(path, starts: Sequence[str]) -> None:
    with _open(path, "w") as fh:
        fh.writelines(f"{s}\n" for s in starts)


def read_starts(path) -> List[str]:
    """One node id per line; blank lines and ``#`` comments are skipped."""
    with _open(path, "r") as fh:
        return [line.strip() for line in fh if line.strip() and not line.lstrip().startswith("#")]


def _plain(value):
    """Make report values JSON-safe and stable."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return round(float(value), config.float_places)
    return value


def write_json(path, data: dict) -> None:
    with _open(path, "w") as fh:
        json.dump(_plain(data), fh, indent=2, sort_keys=True)
        fh.write("\n")
    logger.info(f"Wrote report {path}")


def read_json(path) -> dict:
    with _open(path, "r") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as e:
            raise CsvFormatError(f"{path} is not valid JSON: {e}") from e


def write_giant_table(path, rows: Iterable[GiantScoreRow]) -> None:
    with _open(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GIANT_HEADER)
        for row in rows:
            writer.writerow([row.node, fmt(row.s), fmt(row.s_hat), fmt(row.t_hat), fmt(row.g), row.paths])


def write_bars(path, profile: TrafficProfile) -> None:
    """Plain-text ``direction generation count`` lines."""
    with _open(path, "w") as fh:
        for direction, generation, count in profile.bars():
            fh.write(f"{direction} {generation} {count}\n")


SWEEP_HEADER = ["blocks", "depth_exp", "length", "location_rate", "count_rate", "expected_count_rate", "records"]


def write_sweep_table(path, rows: Iterable[dict]) -> None:
    with _open(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for row in rows:
            writer.writerow(
                [row["blocks"], row["depth_exp"], row["length"], fmt(row["location_rate"]),
                 fmt(row["count_rate"]), fmt(row["expected_count_rate"]), row["records"]]
            )


BENCH_HEADER = ["fs", "backend", "blocks", "depth_exp", "learn_seconds", "seconds", "vs_dict", "records", "identical_to_dict"]


def write_bench_table(path, rows: Iterable[dict]) -> None:
    """The dict oracle rows leave ``blocks`` and ``depth_exp`` empty."""
    with _open(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BENCH_HEADER)
        for row in rows:
            writer.writerow(
                [row["fs"], row["backend"], "" if row["blocks"] is None else row["blocks"],
                 "" if row["depth_exp"] is None else row["depth_exp"], fmt(row["learn_seconds"]),
                 fmt(row["seconds"]), fmt(row["vs_dict"]), row["records"], int(row["identical_to_dict"])]
            )
