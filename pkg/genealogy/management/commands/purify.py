"""Remove mutual-pair edges so the genealogy is (nearly) acyclic."""

from genealogy.artifacts import write_edges, write_json
from genealogy.services import GraphService

from ..base import VacoalCommand


class Command(VacoalCommand):
    help = "Drop both edges of every mutual pair and report what was removed"

    def run(self, config, options):
        config.require("edges")
        edges, _, _ = GraphService.ingest(config.edges)
        purified, report = GraphService.purify(edges)
        write_edges(config.output_path("edges.purified.csv"), purified)
        write_json(config.output_path("purify_report.json"), report.as_dict())
        self.done(f"Removed {report.removed_pairs} mutual pairs; {report.retained_edges} edges kept")
