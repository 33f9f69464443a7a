"""
Knowledge-graph ingestion and purification.

Edge files are CSV with header ``student,mentor``; predicate files are CSV
with header ``node,predicate,value``. Node ids are opaque text.

Functions:
    ingest_edges: Parse an edge CSV, dropping exact duplicates
    purify_dag: Remove both edges of every mutual pair
    ingest_predicates: Group predicate rows by node and predicate name
"""

import csv
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Set, Tuple

import networkx as nx

from . import config
from .exceptions import ArtifactIOError, CsvFormatError, CsvParseError

logger = logging.getLogger(__name__)

Edge = Tuple[str, str]

EDGE_HEADER = ["student", "mentor"]
PREDICATE_HEADER = ["node", "predicate", "value"]


@dataclass(frozen=True)
class EdgeList:
    """(student, mentor) pairs in first-seen order, no exact duplicates."""

    edges: Tuple[Edge, ...]
    duplicates: int = 0

    @classmethod
    def from_pairs(cls, pairs) -> "EdgeList":
        seen = {}
        duplicates = 0
        for edge in pairs:
            edge = (str(edge[0]), str(edge[1]))
            if edge in seen:
                duplicates += 1
            else:
                seen[edge] = None
        return cls(tuple(seen), duplicates)

    def nodes(self) -> Set[str]:
        return {n for edge in self.edges for n in edge}

    def __iter__(self):
        return iter(self.edges)

    def __len__(self):
        return len(self.edges)

    def __contains__(self, edge):
        return edge in set(self.edges)


def _rows(path, header: List[str]) -> Iterator[Tuple[int, List[str]]]:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise ArtifactIOError(f"Cannot open {path}: {e}") from e
    with fh:
        reader = csv.reader(fh)
        try:
            first = next(reader, None)
        except csv.Error as e:
            raise CsvParseError(str(e), reader.line_num) from e
        if first is None or [c.strip().lower() for c in first] != header:
            raise CsvFormatError(f"{path}: expected header {','.join(header)}")
        while True:
            try:
                row = next(reader)
            except StopIteration:
                return
            except csv.Error as e:
                raise CsvParseError(str(e), reader.line_num) from e
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CsvParseError(f"expected {len(header)} fields, got {len(row)}", reader.line_num)
            cells = [c.strip() for c in row]
            if not all(cells):
                raise CsvParseError("empty field", reader.line_num)
            yield reader.line_num, cells


def ingest_edges(path) -> EdgeList:
    """
    Read a ``student,mentor`` CSV.

    Raises:
        CsvFormatError: Header missing or wrong
        CsvParseError: Malformed row (carries the line number)
    """
    edges = EdgeList.from_pairs((student, mentor) for _, (student, mentor) in _rows(path, EDGE_HEADER))
    logger.info(f"Ingested {len(edges)} edges from {path} ({edges.duplicates} duplicates dropped)")
    return edges


@dataclass
class PurificationReport:
    removed_pairs: int
    removed_edges: List[Edge]
    retained_edges: int
    self_loops: List[Edge] = field(default_factory=list)
    is_acyclic: bool = True

    def as_dict(self) -> dict:
        return {
            "removed_pairs": self.removed_pairs,
            "removed_edges": [list(e) for e in self.removed_edges],
            "retained_edges": self.retained_edges,
            "self_loops": [list(e) for e in self.self_loops],
            "is_acyclic": self.is_acyclic,
        }


def purify_dag(edges: EdgeList) -> Tuple[EdgeList, PurificationReport]:
    """
    Drop both directions of every mutual (A, B)/(B, A) pair.

    Self-loops count as degenerate mutual pairs: they are removed and
    listed in both ``removed_edges`` and ``self_loops``, so retained plus
    removed edges always partition the input. Longer cycles survive;
    search neutralises them with per-path ancestor sets.
    """
    present = set(edges.edges)
    mutual = {e for e in present if e[0] != e[1] and (e[1], e[0]) in present}
    loops = [e for e in edges.edges if e[0] == e[1]]
    retained = tuple(e for e in edges.edges if e not in mutual and e[0] != e[1])
    removed = sorted(mutual) + loops

    graph = nx.DiGraph()
    graph.add_edges_from(retained)
    report = PurificationReport(
        removed_pairs=len(mutual) // 2,
        removed_edges=removed,
        retained_edges=len(retained),
        self_loops=loops,
        is_acyclic=nx.is_directed_acyclic_graph(graph),
    )
    for student, mentor in removed:
        logger.debug(f"Removed mutual edge {student} -> {mentor}")
    logger.info(f"Purified edge list: {report.removed_pairs} mutual pairs removed, {report.retained_edges} edges kept")
    if not report.is_acyclic:
        logger.warning("Purified graph still contains cycles of length >= 3")
    return EdgeList(retained, edges.duplicates), report


class AdjacencyIndex:
    """student -> mentors (lexicographic) and the reverse map."""

    def __init__(self, edges: EdgeList):
        mentors: Dict[str, Set[str]] = defaultdict(set)
        students: Dict[str, Set[str]] = defaultdict(set)
        for student, mentor in edges:
            mentors[student].add(mentor)
            students[mentor].add(student)
        self._mentors = {s: tuple(sorted(ms)) for s, ms in mentors.items()}
        self._students = {m: tuple(sorted(ss)) for m, ss in students.items()}
        self._nodes = frozenset(edges.nodes())
        self.edge_count = len(edges)

    def mentors(self, node: str) -> Tuple[str, ...]:
        return self._mentors.get(node, ())

    def students(self, node: str) -> Tuple[str, ...]:
        return self._students.get(node, ())

    def out_degree(self, node: str) -> int:
        return len(self._mentors.get(node, ()))

    def out_degrees(self) -> Dict[str, int]:
        return {n: len(ms) for n, ms in self._mentors.items()}

    def nodes(self) -> List[str]:
        return sorted(self._nodes)

    def students_with_mentors(self) -> List[str]:
        return sorted(self._mentors)

    def __contains__(self, node):
        return node in self._nodes

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self._nodes)
        graph.add_edges_from((s, m) for s, ms in self._mentors.items() for m in ms)
        return graph


class PredicateTable:
    """node -> predicate name -> value tokens in file order."""

    def __init__(self):
        self._table: Dict[str, Dict[str, List[str]]] = {}
        self.unknown_predicates: Set[str] = set()
        self.rows = 0

    def add(self, node: str, predicate: str, value: str) -> None:
        if predicate not in config.predicate_schema and predicate not in self.unknown_predicates:
            logger.warning(f"Predicate {predicate!r} is not in the declared schema")
            self.unknown_predicates.add(predicate)
        self._table.setdefault(node, {}).setdefault(predicate, []).append(value)
        self.rows += 1

    def get(self, node: str) -> Dict[str, List[str]]:
        return self._table.get(node, {})

    def values(self, node: str, predicate: str) -> List[str]:
        return self._table.get(node, {}).get(predicate, [])

    def pairs(self, node: str) -> List[Tuple[str, str]]:
        """(predicate, value) pairs of a node, predicates in name order."""
        return [(p, v) for p, vs in sorted(self.get(node).items()) for v in vs]

    def nodes(self) -> List[str]:
        return sorted(self._table)

    def value_count(self) -> int:
        return sum(len(vs) for preds in self._table.values() for vs in preds.values())

    def __contains__(self, node):
        return node in self._table

    def __len__(self):
        return len(self._table)


def ingest_predicates(path) -> PredicateTable:
    """
    Read a ``node,predicate,value`` CSV. Unknown predicate names are kept
    and listed in ``unknown_predicates``.
    """
    table = PredicateTable()
    for _, (node, predicate, value) in _rows(path, PREDICATE_HEADER):
        table.add(node, predicate, value)
    logger.info(f"Ingested {table.rows} predicate rows for {len(table)} nodes from {path}")
    return table
