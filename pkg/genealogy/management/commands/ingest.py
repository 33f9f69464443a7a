"""Parse the edge and predicate files and write a normalised edge list."""

from genealogy.artifacts import write_edges, write_json
from genealogy.services import GraphService

from ..base import VacoalCommand


class Command(VacoalCommand):
    help = "Ingest a student,mentor edge CSV (and optional predicate CSV)"

    def run(self, config, options):
        config.require("edges")
        edges, _, report = GraphService.ingest(config.edges, config.predicates)
        write_edges(config.output_path("edges.ingested.csv"), edges)
        write_json(config.output_path("ingest_report.json"), report)
        self.done(f"Ingested {report['edges']} edges over {report['nodes']} nodes")
