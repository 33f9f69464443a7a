"""
Service layer for the genealogy pipeline.

This module holds the business logic behind the management commands. Each
service reads its inputs, calls into the ``vacoal`` engine and returns
plain results; commands only parse options and write artifacts.

Classes:
    GraphService: Edge/predicate ingestion and DAG purification
    MemoryService: Learning a graph into the block memory and snapshots
    TraceService: Memory traces, oracle traces and their comparison
    AnalysisService: Giant Score, traffic, era-window and entropy indicators
    SweepService: Multi-configuration collision and divergence sweep
    BenchService: Wall-clock timing of memory traces against the oracle
    FixtureService: Synthetic DAG generation
"""

import logging
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from vacoal import analysis, config as engine
from vacoal.blockmem import BlockMemory, expected_collision_rate
from vacoal.exceptions import ArtifactIOError, SnapshotFormatError
from vacoal.fixtures import SyntheticGraph, generate_dag
from vacoal.graph import AdjacencyIndex, EdgeList, PredicateTable, PurificationReport, ingest_edges, ingest_predicates, purify_dag
from vacoal.hypervector import TokenCodebook
from vacoal.rescue import RescueBuffer, RescueRate, RescueTable, finalize
from vacoal.search import (
    PathRecord,
    SearchMode,
    TraceResult,
    compare_traces,
    learn_graph,
    oracle_trace,
    top_k,
    trace,
    vote_tally,
)
from vacoal.snapshot import load_snapshot, save_snapshot

from .artifacts import read_starts
from .run_config import RunConfig

logger = logging.getLogger(__name__)


class GraphService:
    """Reading and cleaning the knowledge graph."""

    @staticmethod
    def ingest(edges_path, predicates_path=None) -> Tuple[EdgeList, Optional[PredicateTable], dict]:
        """
        Parse the edge file and, if given, the predicate file.

        Returns:
            tuple: (edges, predicates or None, summary report)

        Raises:
            CsvFormatError, CsvParseError, ArtifactIOError
        """
        try:
            edges = ingest_edges(edges_path)
            predicates = ingest_predicates(predicates_path) if predicates_path else None
            report = {
                "edges": len(edges),
                "duplicates": edges.duplicates,
                "nodes": len(edges.nodes()),
            }
            if predicates is not None:
                report.update(
                    predicate_rows=predicates.rows,
                    predicate_nodes=len(predicates),
                    unknown_predicates=sorted(predicates.unknown_predicates),
                )
            return edges, predicates, report
        except Exception as e:
            logger.error(f"Error ingesting graph from {edges_path}: {str(e)}")
            raise

    @staticmethod
    def predicates(path) -> PredicateTable:
        """
        Parse a predicate file on its own.

        Args:
            path: Predicate CSV (node,predicate,value)

        Returns:
            PredicateTable: Predicates grouped by node
        """
        try:
            return ingest_predicates(path)
        except Exception as e:
            logger.error(f"Error ingesting predicates from {path}: {str(e)}")
            raise

    @staticmethod
    def purify(edges: EdgeList) -> Tuple[EdgeList, PurificationReport]:
        """
        Drop mutual pairs and self-loops from ``edges``.

        Args:
            edges: Ingested edge list

        Returns:
            tuple: (retained edges, purification report)
        """
        try:
            return purify_dag(edges)
        except Exception as e:
            logger.error(f"Error purifying graph: {str(e)}")
            raise

    @staticmethod
    def load_adjacency(edges_path, purify: bool = False) -> AdjacencyIndex:
        """
        Read an edge file straight into an adjacency index.

        Args:
            edges_path: Edge CSV (student,mentor)
            purify: Purify the edges before indexing

        Returns:
            AdjacencyIndex: Mentor and student lists per node
        """
        try:
            edges = ingest_edges(edges_path)
            if purify:
                edges, _ = purify_dag(edges)
            return AdjacencyIndex(edges)
        except Exception as e:
            logger.error(f"Error loading adjacency from {edges_path}: {str(e)}")
            raise


class MemoryService:
    """Building, learning and persisting the block memory."""

    @staticmethod
    def build_memory(config: RunConfig, blocks: Optional[int] = None, depth_exp: Optional[int] = None, length: Optional[int] = None) -> BlockMemory:
        return BlockMemory(
            blocks=blocks or config.blocks,
            depth_exp=depth_exp or config.depth_exp,
            length=length or config.length,
            master_seed=config.seed,
            collision_policy=config.collision_policy,
            dense_cell_limit=config.dense_cell_limit,
        )

    @staticmethod
    def learn(config: RunConfig, adjacency: AdjacencyIndex, memory: Optional[BlockMemory] = None) -> Tuple[BlockMemory, TokenCodebook, RescueTable, dict]:
        """
        Learn every edge of ``adjacency`` and build the full rescue table.

        The table always keeps every sample; the rescue rate is applied when
        a trace consults it.

        Returns:
            tuple: (memory, codebook, rescue table, learn report)
        """
        try:
            memory = memory or MemoryService.build_memory(config)
            codebook = TokenCodebook(memory.master_seed, memory.length)
            buffer = RescueBuffer.for_memory(memory)
            learned = learn_graph(memory, adjacency, codebook, buffer)
            memory.finalize()
            table = finalize(buffer, RescueRate(1.0), config.seed)
            report = {
                "blocks": memory.blocks,
                "depth_exp": memory.depth_exp,
                "length": memory.length,
                "storage": memory.storage,
                "collision_policy": memory.collision_policy,
                "edges_learned": learned,
                "labels": len(memory.labels),
                "rescue_samples": table.samples,
                "expected_count_rate": expected_collision_rate(learned, memory.depth_exp),
                **memory.stats.as_dict(),
            }
            logger.info(f"Learned {learned} edges into {memory!r}")
            return memory, codebook, table, report
        except Exception as e:
            logger.error(f"Error learning graph: {str(e)}")
            raise

    @staticmethod
    def save(config: RunConfig, memory: BlockMemory, table: RescueTable, codebook: TokenCodebook) -> Tuple[Path, Path]:
        snapshot = Path(config.snapshot) if config.snapshot else config.output_path("memory.vcms")
        codebook_path = snapshot.with_suffix(".vcbk")
        save_snapshot(snapshot, memory, table)
        try:
            codebook.save(codebook_path)
        except OSError as e:
            raise ArtifactIOError(f"Cannot write codebook {codebook_path}: {e}") from e
        return snapshot, codebook_path

    @staticmethod
    def load(path) -> Tuple[BlockMemory, Optional[RescueTable], TokenCodebook]:
        """
        Load a snapshot and the codebook saved beside it.

        Without a ``.vcbk`` file the codebook is regenerated from the
        memory's seed, which yields the same tokens.

        Raises:
            SnapshotFormatError: If the codebook belongs to another memory
        """
        memory, table = load_snapshot(path)
        codebook_path = Path(path).with_suffix(".vcbk")
        if not codebook_path.exists():
            return memory, table, TokenCodebook(memory.master_seed, memory.length)
        codebook = TokenCodebook.load(codebook_path)
        if (codebook.seed, codebook.length) != (memory.master_seed, memory.length):
            raise SnapshotFormatError(
                f"Codebook {codebook_path} (seed {codebook.seed}, L={codebook.length}) does not match snapshot {path}"
            )
        logger.info(f"Loaded {len(codebook)} codebook tokens from {codebook_path}")
        return memory, table, codebook


class TraceService:
    """Memory-backed traces, oracle traces and divergence reports."""

    @staticmethod
    def starts(config: RunConfig, adjacency: AdjacencyIndex) -> List[str]:
        """Start nodes from the starts file, else every node without students."""
        if config.starts:
            return read_starts(config.starts)
        return [n for n in adjacency.nodes() if not adjacency.students(n) and adjacency.out_degree(n)]

    @staticmethod
    def trace(config: RunConfig, memory: BlockMemory, table: Optional[RescueTable], codebook: TokenCodebook, adjacency: AdjacencyIndex, starts: List[str]) -> TraceResult:
        """
        Raises:
            UnknownNodeError: If a start node is not in the graph
        """
        try:
            search = config.search_config()
            if search.mode is SearchMode.RESCUE and table is not None:
                table = table.subsample(RescueRate(config.rr), config.seed)
            result = trace(
                memory,
                codebook,
                starts,
                search,
                adjacency.out_degrees(),
                rescue_table=table,
                known_nodes=adjacency.nodes(),
                threads=config.threads,
            )
            logger.info(f"Trace produced {len(result.records)} records from {len(starts)} starts")
            return result
        except Exception as e:
            logger.error(f"Error tracing genealogy: {str(e)}")
            raise

    @staticmethod
    def oracle(config: RunConfig, adjacency: AdjacencyIndex, starts: List[str]) -> TraceResult:
        try:
            return oracle_trace(adjacency, starts, config.search_config(), threads=config.threads)
        except Exception as e:
            logger.error(f"Error running oracle trace: {str(e)}")
            raise

    @staticmethod
    def compare(a: List[PathRecord], b: List[PathRecord], k: int = 20):
        """
        Divergence between two record sets.

        Args:
            a: Records of the first trace
            b: Records of the second trace
            k: Depth of the Top-k comparison

        Returns:
            DivergenceReport: Record differences, node Jaccard and Top-k vote tables
        """
        try:
            return compare_traces(a, b, k)
        except Exception as e:
            logger.error(f"Error comparing traces: {str(e)}")
            raise


@dataclass
class AnalysisResult:
    report: dict
    giant_tables: Dict[str, List[analysis.GiantScoreRow]]
    profile: Optional[analysis.TrafficProfile]


class AnalysisService:
    """Semantic and structural indicators over a completed trace."""

    @staticmethod
    def analyze(config: RunConfig, records: List[PathRecord], predicates: Optional[PredicateTable]) -> AnalysisResult:
        try:
            codebook = TokenCodebook(config.seed, config.length)
            predicates = predicates or PredicateTable()
            counts = analysis.path_counts(records)
            report: dict = {
                "records": len(records),
                "path_counts": {
                    "max_paths": max(counts.values(), default=0),
                    "histogram": analysis.path_count_histogram(counts),
                },
            }

            field_role = codebook.token("FIELD")
            nodes = sorted(set(counts) | set(predicates.nodes()))
            vectors = analysis.build_node_vectors(nodes, predicates, codebook)
            concepts = {
                name: analysis.build_concept(name, members, codebook) for name, members in sorted(config.concepts.items())
            }

            giant_tables = {}
            for name, concept in concepts.items():
                affinities = {n: analysis.field_affinity(vectors[n], concept, field_role) for n in sorted(counts)}
                giant_tables[name] = analysis.giant_table(affinities, counts) if counts else []

            profile = None
            if config.hub:
                profile = analysis.traffic_profile(records, config.hub, config.up_gens, config.down_gens)
                report["traffic"] = profile.as_dict()
                report["influence_entropy"] = analysis.influence_entropy(records, config.hub, predicates)

            years = analysis.era_years(predicates)
            if years:
                lo = config.era_start if config.era_start is not None else min(years.values())
                hi = config.era_end if config.era_end is not None else max(years.values()) + 1
                windows = analysis.era_windows(lo, hi, config.era_window)
                report["window_signals"] = {
                    name: [
                        vars(s)
                        for s in analysis.window_signal(vectors, years, windows, concept.member_hvs, field_role, codebook)
                    ]
                    for name, concept in concepts.items()
                }
                report["language_entropy"] = [
                    {"start": a, "end": b, "entropy": h}
                    for a, b, h in analysis.language_entropy_by_era(predicates, years, windows)
                ]
                if config.pivot_start is not None and config.pivot_end is not None:
                    table = analysis.era_society_table(predicates, years, config.pivot_start, config.pivot_end)
                    report["eras"] = {
                        "society": table,
                        "society_explosion": analysis.society_explosion(table),
                        "hub_diversification": analysis.hub_diversification(
                            predicates, years, config.pivot_start, config.pivot_end
                        ),
                        "field_continuity": analysis.predicate_continuity(
                            vectors, years, config.pivot_start, config.pivot_end, field_role, codebook
                        ),
                    }
            logger.info(f"Analysed {len(records)} records over {len(nodes)} nodes")
            return AnalysisResult(report, giant_tables, profile)
        except Exception as e:
            logger.error(f"Error analysing trace: {str(e)}")
            raise


class SweepService:
    """
    Learn and trace the same graph under several (B, m) configurations.

    The segment width q = L/B of the run is kept, so each configuration uses
    L = B * q.
    """

    @staticmethod
    def run(config: RunConfig, adjacency: AdjacencyIndex, starts: List[str]) -> List[dict]:
        pairs = config.sweep or list(engine.standard_sweep)
        q = config.segment_bits
        if len({blocks << depth_exp for blocks, depth_exp in pairs}) > 1:
            logger.warning("Sweep configurations do not share one total capacity B * 2^m")
        rows = []
        for blocks, depth_exp in pairs:
            try:
                memory = MemoryService.build_memory(config, blocks, depth_exp, blocks * q)
                memory, codebook, table, report = MemoryService.learn(config, adjacency, memory)
                result = TraceService.trace(config, memory, table, codebook, adjacency, starts)
            except Exception as e:
                logger.error(f"Sweep configuration B={blocks} m={depth_exp} failed: {str(e)}")
                raise
            rows.append(
                {
                    "blocks": blocks,
                    "depth_exp": depth_exp,
                    "length": blocks * q,
                    "location_rate": report["location_rate"],
                    "count_rate": report["count_rate"],
                    "expected_count_rate": report["expected_count_rate"],
                    "records": len(result.records),
                    "top_k": [list(item) for item in top_k(vote_tally(result.records), config.top_k)],
                    "trajectory": result.summary.as_dict()["generations"],
                }
            )
            logger.info(f"Sweep B={blocks} m={depth_exp}: count rate {report['count_rate']:.6%}")
        return rows


def _timed(fn, *args):
    started = time.perf_counter()
    result = fn(*args)
    return result, time.perf_counter() - started


class BenchService:
    """
    Wall-clock cost of memory traces against the dict-backed oracle.

    Each (B, m) configuration is learned once at L = B * q and then traced at
    every frontier size. The oracle row of each frontier size is the
    baseline for ``vs_dict``.
    """

    @staticmethod
    def run(config: RunConfig, adjacency: AdjacencyIndex, starts: List[str], fs_values: List[int]) -> List[dict]:
        """
        Time the oracle and every configuration at each frontier size.

        Args:
            config: Run configuration; ``sweep`` selects the configurations
            adjacency: Graph to learn and trace
            starts: Start nodes
            fs_values: Frontier sizes to time

        Returns:
            list: One row per (frontier size, backend)
        """
        pairs = config.sweep or [(config.blocks, config.depth_exp)]
        q = config.segment_bits
        try:
            learned = []
            for blocks, depth_exp in pairs:
                memory = MemoryService.build_memory(config, blocks, depth_exp, blocks * q)
                (memory, codebook, table, _), seconds = _timed(MemoryService.learn, config, adjacency, memory)
                learned.append((memory, codebook, table, seconds))

            rows = []
            for fs in fs_values:
                run_config = replace(config, fs=fs)
                baseline, dict_seconds = _timed(TraceService.oracle, run_config, adjacency, starts)
                rows.append(
                    {
                        "fs": fs,
                        "backend": "dict",
                        "blocks": None,
                        "depth_exp": None,
                        "learn_seconds": 0.0,
                        "seconds": dict_seconds,
                        "vs_dict": 0.0,
                        "records": len(baseline.records),
                        "identical_to_dict": True,
                    }
                )
                for memory, codebook, table, learn_seconds in learned:
                    result, seconds = _timed(
                        TraceService.trace, run_config, memory, table, codebook, adjacency, starts
                    )
                    identical = compare_traces(baseline.records, result.records, config.top_k).identical
                    rows.append(
                        {
                            "fs": fs,
                            "backend": "memory",
                            "blocks": memory.blocks,
                            "depth_exp": memory.depth_exp,
                            "learn_seconds": learn_seconds,
                            "seconds": seconds,
                            "vs_dict": (seconds - dict_seconds) / dict_seconds if dict_seconds > 0 else 0.0,
                            "records": len(result.records),
                            "identical_to_dict": identical,
                        }
                    )
                    logger.info(
                        f"Bench FS={fs} B={memory.blocks} m={memory.depth_exp}: {seconds:.3f}s vs dict {dict_seconds:.3f}s"
                    )
            return rows
        except Exception as e:
            logger.error(f"Error benchmarking traces: {str(e)}")
            raise


class FixtureService:
    """Synthetic graphs for tests and benchmarks."""

    @staticmethod
    def generate(nodes: int, max_out_degree: int, depth: int, seed: int, mutual_pairs: int) -> SyntheticGraph:
        """
        Generate a layered synthetic DAG.

        Args:
            nodes: Node count
            max_out_degree: Mentor count ceiling per student
            depth: Layer count
            seed: Generator seed
            mutual_pairs: Mutual edge pairs to plant for purification tests

        Returns:
            SyntheticGraph: Edges, predicates and start nodes
        """
        try:
            return generate_dag(nodes, max_out_degree, depth, seed, mutual_pairs)
        except Exception as e:
            logger.error(f"Error generating synthetic graph: {str(e)}")
            raise
