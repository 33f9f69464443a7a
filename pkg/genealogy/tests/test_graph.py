"""
Tests for edge/predicate ingestion, DAG purification and the adjacency
index.
"""

import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from genealogy.services import GraphService
from vacoal.exceptions import ArtifactIOError, CsvFormatError, CsvParseError
from vacoal.graph import AdjacencyIndex, EdgeList, ingest_edges, ingest_predicates, purify_dag


class TempFileMixin:

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write(self, name, text):
        path = self.tmp / name
        path.write_text(text, encoding="utf-8")
        return path


class EdgeIngestionTestCase(TempFileMixin, SimpleTestCase):

    def test_duplicates_are_dropped_in_first_seen_order(self):
        """Test that duplicate edges are dropped and counted."""
        path = self.write("edges.csv", "student,mentor\nB,A\nC,A\nB,A\nC,B\n")
        edges = ingest_edges(path)
        self.assertEqual(edges.edges, (("B", "A"), ("C", "A"), ("C", "B")))
        self.assertEqual(edges.duplicates, 1)
        self.assertEqual(edges.nodes(), {"A", "B", "C"})

    def test_wrong_header_raises_format_error(self):
        path = self.write("edges.csv", "from,to\nB,A\n")
        with self.assertRaises(CsvFormatError):
            ingest_edges(path)

    def test_malformed_row_reports_its_line(self):
        """Test that CsvParseError carries the offending line."""
        path = self.write("edges.csv", "student,mentor\nB,A\nC\n")
        with self.assertRaises(CsvParseError) as ctx:
            ingest_edges(path)
        self.assertEqual(ctx.exception.line, 3)
        self.assertEqual(ctx.exception.details(), {"line": 3})

    def test_empty_field_is_rejected(self):
        path = self.write("edges.csv", "student,mentor\nB,\n")
        with self.assertRaises(CsvParseError):
            ingest_edges(path)

    def test_missing_file_is_an_io_error(self):
        """Test that a missing edge file raises ArtifactIOError."""
        with self.assertRaises(ArtifactIOError):
            ingest_edges(self.tmp / "absent.csv")


class PurificationTestCase(SimpleTestCase):

    def setUp(self):
        chain = [(f"N{i:02d}", f"N{i + 1:02d}") for i in range(20)]
        planted = [(f"N{i + 1:02d}", f"N{i:02d}") for i in (0, 4, 8, 12, 16)]
        self.edges = EdgeList.from_pairs(chain + planted)

    def test_planted_mutual_pairs_are_removed(self):
        """Test that both directions of each mutual pair are removed."""
        purified, report = purify_dag(self.edges)
        self.assertEqual(report.removed_pairs, 5)
        self.assertEqual(len(report.removed_edges), 10)
        self.assertEqual(report.retained_edges, 15)
        self.assertEqual(len(purified), 15)
        self.assertTrue(report.is_acyclic)

    def test_purification_is_idempotent(self):
        """Test that purifying a purified graph changes nothing."""
        once, _ = purify_dag(self.edges)
        twice, report = purify_dag(once)
        self.assertEqual(report.removed_pairs, 0)
        self.assertEqual(twice.edges, once.edges)

    def test_self_loops_are_listed_and_removed(self):
        """Test that a self-loop is dropped and reported as a removed edge"""
        purified, report = purify_dag(EdgeList.from_pairs([("A", "A"), ("A", "B")]))
        self.assertEqual(report.self_loops, [("A", "A")])
        self.assertEqual(report.removed_edges, [("A", "A")])
        self.assertEqual(report.removed_pairs, 0)
        self.assertEqual(purified.edges, (("A", "B"),))

    def test_retained_and_removed_partition_the_input(self):
        """Test that every input edge is either retained or removed, never both"""
        edges = EdgeList.from_pairs(list(self.edges) + [("Q", "Q"), ("N03", "N03")])
        purified, report = purify_dag(edges)
        retained, removed = list(purified), list(report.removed_edges)
        self.assertEqual(sorted(retained + removed), sorted(edges))
        self.assertFalse(set(retained) & set(removed))
        self.assertEqual(len(removed), 12)

    def test_longer_cycles_survive(self):
        """Test that cycles longer than two edges are left in place."""
        purified, report = purify_dag(EdgeList.from_pairs([("A", "B"), ("B", "C"), ("C", "A")]))
        self.assertEqual(len(purified), 3)
        self.assertFalse(report.is_acyclic)


class AdjacencyIndexTestCase(SimpleTestCase):

    def test_mentors_are_lexicographic(self):
        index = AdjacencyIndex(EdgeList.from_pairs([("S", "Z"), ("S", "B"), ("S", "M"), ("B", "A")]))
        self.assertEqual(index.mentors("S"), ("B", "M", "Z"))
        self.assertEqual(index.students("B"), ("S",))
        self.assertEqual(index.out_degrees(), {"S": 3, "B": 1})
        self.assertEqual(index.out_degree("A"), 0)
        self.assertEqual(index.nodes(), ["A", "B", "M", "S", "Z"])
        self.assertEqual(index.to_networkx().number_of_edges(), 4)


class PredicateIngestionTestCase(TempFileMixin, SimpleTestCase):

    def test_predicates_group_by_node(self):
        """Test that values group by node and predicate in file order."""
        path = self.write(
            "predicates.csv",
            "node,predicate,value\nA,FIELD,calculus\nA,LANGUAGE,latin\nA,FIELD,optics\nB,HOBBY,chess\n",
        )
        with self.assertLogs("vacoal.graph", level="WARNING"):
            table = ingest_predicates(path)
        self.assertEqual(table.values("A", "FIELD"), ["calculus", "optics"])
        self.assertEqual(table.pairs("A"), [("FIELD", "calculus"), ("FIELD", "optics"), ("LANGUAGE", "latin")])
        self.assertEqual(table.unknown_predicates, {"HOBBY"})
        self.assertEqual(table.rows, 4)
        self.assertEqual(len(table), 2)


class GraphServiceTestCase(TempFileMixin, SimpleTestCase):

    def test_adjacency_load_failure_is_logged_and_raised(self):
        """Test that a missing edge file is logged by the service before propagating."""
        with self.assertLogs("genealogy.services", level="ERROR") as logs, self.assertRaises(ArtifactIOError):
            GraphService.load_adjacency(self.tmp / "absent.csv")
        self.assertIn("Error loading adjacency", logs.output[0])

    def test_purified_adjacency_drops_mutual_pairs(self):
        path = self.write("edges.csv", "student,mentor\nB,A\nA,B\nC,B\n")
        adjacency = GraphService.load_adjacency(path, purify=True)
        self.assertEqual(adjacency.mentors("C"), ("B",))
        self.assertEqual(adjacency.mentors("B"), ())

    def test_predicate_parse_failure_is_logged(self):
        """Test that a bad predicate header is logged by the service."""
        path = self.write("predicates.csv", "node,value\nA,x\n")
        with self.assertLogs("genealogy.services", level="ERROR"), self.assertRaises(CsvFormatError):
            GraphService.predicates(path)
