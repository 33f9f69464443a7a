"""
Frontier-bounded genealogy search over the learned memory.

Every student S with lexicographically ordered mentors M_0..M_{k-1} is
stored as k keys ``bind(token(S), token("__ord__j"))`` labelled M_j. A trace
walks mentor links backwards from each start node, one generation at a
time, multiplying per-query CR1 into the path confidence CR2 and keeping at
most ``fs`` paths per start after each generation.

The same traversal engine drives the map-based oracle; only the resolver
that answers "who is mentor j of node n" differs.
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import config
from .blockmem import BlockMemory
from .exceptions import ConfigError, DimensionError, UnknownNodeError
from .graph import AdjacencyIndex
from .hypervector import Hypervector, TokenCodebook, rotate_rows
from .rescue import RescueBuffer, RescueTable, ResolveStats, vote_many_with_rescue

logger = logging.getLogger(__name__)


class SearchMode(str, Enum):
    RESCUE = "rescue"
    DONT_CARE = "dont_care"


class PruneOrder(str, Enum):
    DESCENDING_CR2 = "descending_cr2"
    LEXICOGRAPHIC = "lexicographic"


@dataclass(frozen=True)
class SearchConfig:
    fs: int = config.default_fs
    max_depth: int = config.default_max_depth
    cr2_halt: float = config.default_cr2_halt
    mode: SearchMode = SearchMode.DONT_CARE
    prune_order: Optional[PruneOrder] = None

    def __post_init__(self):
        try:
            mode = SearchMode(self.mode)
            order = PruneOrder(self.prune_order) if self.prune_order is not None else None
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if mode is SearchMode.RESCUE:
            order = PruneOrder.LEXICOGRAPHIC
        elif order is None:
            order = PruneOrder.DESCENDING_CR2
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "prune_order", order)
        if self.fs < 1:
            raise ConfigError(f"Frontier size must be at least 1, got {self.fs}")
        if self.max_depth < 0:
            raise ConfigError(f"max_depth must be non-negative, got {self.max_depth}")
        if not 0.0 <= self.cr2_halt < 1.0:
            raise ConfigError(f"cr2_halt must lie in [0, 1), got {self.cr2_halt}")


@dataclass(frozen=True)
class FrontierEntry:
    node: str
    generation: int
    cr2: float
    parent: Optional["FrontierEntry"]
    ancestors: frozenset

    @classmethod
    def root(cls, node: str) -> "FrontierEntry":
        return cls(node, 0, 1.0, None, frozenset((node,)))

    def child(self, node: str, cr1: float) -> "FrontierEntry":
        return FrontierEntry(node, self.generation + 1, self.cr2 * cr1, self, self.ancestors | {node})

    def path(self) -> List[str]:
        """Node ids from the start node to this entry."""
        nodes = []
        entry = self
        while entry is not None:
            nodes.append(entry.node)
            entry = entry.parent
        return nodes[::-1]


class PathRecord(NamedTuple):
    start: str
    generation: int
    node: str
    parent: str
    cr1: float
    cr2: float


class Resolution(NamedTuple):
    mentor: Optional[str]
    cr1: float
    dont_care: int = 0


@dataclass
class GenerationSummary:
    generation: int
    records: int = 0
    frontier: int = 0
    max_frontier: int = 0
    pruned: int = 0
    halted: int = 0
    failed: int = 0
    cycles: int = 0
    dont_care_blocks: int = 0
    queries: int = 0
    cr1_sum: float = 0.0
    cr2_sum: float = 0.0
    min_cr2: Optional[float] = None

    def merge(self, other: "GenerationSummary"):
        for name in ("records", "frontier", "pruned", "halted", "failed", "cycles", "dont_care_blocks", "queries"):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.max_frontier = max(self.max_frontier, other.max_frontier)
        self.cr1_sum += other.cr1_sum
        self.cr2_sum += other.cr2_sum
        if other.min_cr2 is not None:
            self.min_cr2 = other.min_cr2 if self.min_cr2 is None else min(self.min_cr2, other.min_cr2)

    def as_dict(self) -> dict:
        return {
            "generation": self.generation,
            "records": self.records,
            "frontier": self.frontier,
            "max_frontier": self.max_frontier,
            "pruned": self.pruned,
            "halted": self.halted,
            "failed": self.failed,
            "cycles": self.cycles,
            "dont_care_blocks": self.dont_care_blocks,
            "queries": self.queries,
            "mean_cr1": self.cr1_sum / self.records if self.records else None,
            "mean_cr2": self.cr2_sum / self.records if self.records else None,
            "min_cr2": self.min_cr2,
        }


@dataclass
class TraceSummary:
    """Per-generation CR1/CR2 trajectory and frontier accounting."""

    generations: Dict[int, GenerationSummary] = field(default_factory=dict)

    def at(self, generation: int) -> GenerationSummary:
        if generation not in self.generations:
            self.generations[generation] = GenerationSummary(generation)
        return self.generations[generation]

    def merge(self, other: "TraceSummary"):
        for gen, item in other.generations.items():
            self.at(gen).merge(item)

    @property
    def total_records(self) -> int:
        return sum(g.records for g in self.generations.values())

    def as_dict(self) -> dict:
        return {
            "total_records": self.total_records,
            "generations": [self.generations[g].as_dict() for g in sorted(self.generations)],
        }


@dataclass
class TraceResult:
    records: List[PathRecord]
    summary: TraceSummary


def edge_keys(codebook: TokenCodebook, queries: Sequence[Tuple[str, int]]) -> np.ndarray:
    """Packed ``bind(token(node), ordinal(j))`` rows for (node, j) queries."""
    if not queries:
        return np.zeros((0, codebook.length // 8), dtype=np.uint8)
    nodes = codebook.tokens(node for node, _ in queries)
    ordinals = codebook.tokens(f"{config.ordinal_prefix}{j}" for _, j in queries)
    return np.bitwise_xor(nodes, rotate_rows(ordinals, codebook.length, 1))


def edge_key(codebook: TokenCodebook, node: str, j: int) -> Hypervector:
    return Hypervector(edge_keys(codebook, [(node, j)])[0], codebook.length)


def learn_graph(
    memory: BlockMemory,
    adjacency: AdjacencyIndex,
    codebook: TokenCodebook,
    rescue_buffer: Optional[RescueBuffer] = None,
    chunk: int = 4096,
) -> int:
    """Learn every (student, ordinal) key with its mentor label; returns the edge count."""
    if codebook.length != memory.length:
        raise DimensionError(f"Codebook length {codebook.length} does not match memory length {memory.length}")
    queries, labels = [], []
    for student in adjacency.students_with_mentors():
        for j, mentor in enumerate(adjacency.mentors(student)):
            queries.append((student, j))
            labels.append(mentor)
    for lo in range(0, len(queries), chunk):
        rows = edge_keys(codebook, queries[lo : lo + chunk])
        memory.learn_many(rows, labels[lo : lo + chunk], rescue_buffer)
    logger.info(
        f"Learned {len(queries)} edges; collision rates location={memory.stats.location_rate:.6%} "
        f"count={memory.stats.count_rate:.6%}"
    )
    return len(queries)


class MemoryResolver:
    """
    Answers (node, j) queries by voting in the memory.

    In rescue mode negative cells go through the rescue table. Answers are
    cached; the memory must not change while a resolver is in use.
    """

    def __init__(self, memory: BlockMemory, codebook: TokenCodebook, table: Optional[RescueTable] = None):
        self.memory = memory
        self.codebook = codebook
        self.table = table
        self.stats = ResolveStats()
        self._cache: Dict[Tuple[str, int], Resolution] = {}
        self._lock = threading.Lock()

    def resolve(self, queries: Sequence[Tuple[str, int]]) -> Dict[Tuple[str, int], Resolution]:
        missing = [q for q in dict.fromkeys(queries) if q not in self._cache]
        if missing:
            rows = edge_keys(self.codebook, missing)
            results = vote_many_with_rescue(self.memory, self.table, rows, self.stats)
            labels = self.memory.labels
            with self._lock:
                for query, vote in zip(missing, results):
                    mentor = None if vote.winner_tid is None else labels.label(vote.winner_tid)
                    self._cache[query] = Resolution(mentor, vote.cr1, vote.dont_care_blocks)
        return {q: self._cache[q] for q in queries}


class AdjacencyResolver:
    """Map lookup with CR1 fixed at 1.0."""

    def __init__(self, adjacency: AdjacencyIndex):
        self.adjacency = adjacency

    def resolve(self, queries: Sequence[Tuple[str, int]]) -> Dict[Tuple[str, int], Resolution]:
        return {(node, j): Resolution(self.adjacency.mentors(node)[j], 1.0) for node, j in queries}


def _prune_key(order: PruneOrder):
    if order is PruneOrder.DESCENDING_CR2:
        return lambda item: (-item[0].cr2, item[0].node, item[0].parent.node)
    return lambda item: (item[0].node, item[0].parent.node)


class GenealogyTracer:
    """
    Generation loop shared by memory traces and the oracle.

    Each start node keeps its own frontier. Starts are independent and run on
    up to ``threads`` workers; output keeps start order.
    """

    def __init__(self, resolver, search: SearchConfig, out_degrees: Mapping[str, int], known_nodes: Optional[Iterable[str]] = None, threads: int = 1):
        self.resolver = resolver
        self.search = search
        self.out_degrees = out_degrees
        self.known = set(known_nodes) if known_nodes is not None else set(out_degrees)
        self.threads = max(1, threads)
        self._sort_key = _prune_key(search.prune_order)

    def run(self, start_nodes: Sequence[str]) -> TraceResult:
        unknown = {s for s in start_nodes if s not in self.known}
        if unknown:
            raise UnknownNodeError(unknown)
        if self.threads > 1 and len(start_nodes) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                parts = list(pool.map(self._trace_one, start_nodes))
        else:
            parts = [self._trace_one(s) for s in start_nodes]
        records: List[PathRecord] = []
        summary = TraceSummary()
        for part_records, part_summary in parts:
            records.extend(part_records)
            summary.merge(part_summary)
        logger.info(
            f"Traced {len(start_nodes)} starts in {self.search.mode.value} mode: {len(records)} records"
        )
        return TraceResult(records, summary)

    def _trace_one(self, start: str) -> Tuple[List[PathRecord], TraceSummary]:
        search = self.search
        summary = TraceSummary()
        records: List[PathRecord] = []
        frontier = [FrontierEntry.root(start)]
        generation = 0
        while frontier and generation < search.max_depth:
            queries = [(e.node, j) for e in frontier for j in range(self.out_degrees.get(e.node, 0))]
            answers = self.resolver.resolve(queries) if queries else {}
            stats = summary.at(generation + 1)
            stats.queries += len(queries)
            children = []
            for entry in frontier:
                for j in range(self.out_degrees.get(entry.node, 0)):
                    answer = answers[(entry.node, j)]
                    stats.dont_care_blocks += answer.dont_care
                    if answer.mentor is None:
                        stats.failed += 1
                        continue
                    if answer.mentor in entry.ancestors:
                        stats.cycles += 1
                        continue
                    if entry.cr2 * answer.cr1 < search.cr2_halt:
                        stats.halted += 1
                        continue
                    children.append((entry.child(answer.mentor, answer.cr1), answer.cr1))
            children.sort(key=self._sort_key)
            if len(children) > search.fs:
                stats.pruned += len(children) - search.fs
                children = children[: search.fs]
            for child, cr1 in children:
                records.append(PathRecord(start, child.generation, child.node, child.parent.node, cr1, child.cr2))
                stats.cr1_sum += cr1
                stats.cr2_sum += child.cr2
                stats.min_cr2 = child.cr2 if stats.min_cr2 is None else min(stats.min_cr2, child.cr2)
            stats.records += len(children)
            stats.frontier += len(children)
            stats.max_frontier = max(stats.max_frontier, len(children))
            logger.debug(f"{start}: generation {generation + 1} keeps {len(children)} paths")
            frontier = [child for child, _ in children]
            generation += 1
        return records, summary


def trace(
    memory: BlockMemory,
    codebook: TokenCodebook,
    start_nodes: Sequence[str],
    search: SearchConfig,
    out_degrees: Mapping[str, int],
    rescue_table: Optional[RescueTable] = None,
    known_nodes: Optional[Iterable[str]] = None,
    threads: int = 1,
) -> TraceResult:
    """
    Memory-backed trace. The rescue table is consulted only in rescue mode.

    Raises:
        UnknownNodeError: If any start node is not in the graph
    """
    table = rescue_table if search.mode is SearchMode.RESCUE else None
    resolver = MemoryResolver(memory, codebook, table)
    return GenealogyTracer(resolver, search, out_degrees, known_nodes, threads).run(start_nodes)


def oracle_trace(adjacency: AdjacencyIndex, start_nodes: Sequence[str], search: SearchConfig, threads: int = 1) -> TraceResult:
    """Plain map traversal: CR1 = CR2 = 1.0 and lexicographic pruning."""
    search = replace(search, mode=SearchMode.RESCUE, prune_order=None)
    tracer = GenealogyTracer(AdjacencyResolver(adjacency), search, adjacency.out_degrees(), adjacency.nodes(), threads)
    return tracer.run(start_nodes)


def vote_tally(records: Iterable[PathRecord]) -> Counter:
    """Traversing-path count per node."""
    return Counter(r.node for r in records)


def top_k(tally: Mapping[str, int], k: int) -> List[Tuple[str, int]]:
    return sorted(tally.items(), key=lambda item: (-item[1], item[0]))[:k]


@dataclass
class DivergenceReport:
    only_a: int
    only_b: int
    jaccard: float
    votes_a: Dict[str, int]
    votes_b: Dict[str, int]
    top_a: List[Tuple[str, int]]
    top_b: List[Tuple[str, int]]

    @property
    def identical(self) -> bool:
        return self.only_a == 0 and self.only_b == 0

    def as_dict(self) -> dict:
        return {
            "identical": self.identical,
            "only_a": self.only_a,
            "only_b": self.only_b,
            "symmetric_difference": self.only_a + self.only_b,
            "jaccard": self.jaccard,
            "top_a": [list(item) for item in self.top_a],
            "top_b": [list(item) for item in self.top_b],
        }


def compare_traces(a: Sequence[PathRecord], b: Sequence[PathRecord], k: int = 20) -> DivergenceReport:
    """Multiset record difference, node-set Jaccard and Top-k vote tables."""
    count_a, count_b = Counter(a), Counter(b)
    nodes_a, nodes_b = {r.node for r in a}, {r.node for r in b}
    union = nodes_a | nodes_b
    jaccard = len(nodes_a & nodes_b) / len(union) if union else 1.0
    votes_a, votes_b = vote_tally(a), vote_tally(b)
    return DivergenceReport(
        only_a=sum((count_a - count_b).values()),
        only_b=sum((count_b - count_a).values()),
        jaccard=jaccard,
        votes_a=dict(votes_a),
        votes_b=dict(votes_b),
        top_a=top_k(votes_a, k),
        top_b=top_k(votes_b, k),
    )
