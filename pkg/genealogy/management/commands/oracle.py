"""Map-based reference trace: same traversal, exact adjacency lookups."""

from pathlib import Path

from genealogy.artifacts import write_json, write_records
from genealogy.services import GraphService, TraceService

from ..base import VacoalCommand


class Command(VacoalCommand):
    help = "Trace start nodes over the plain adjacency map (CR1 = 1)"

    def add_command_arguments(self, parser):
        parser.add_argument("--output", help="Record CSV (default <out-dir>/oracle.csv)")

    def run(self, config, options):
        config.require("edges")
        adjacency = GraphService.load_adjacency(config.edges)
        starts = TraceService.starts(config, adjacency)
        result = TraceService.oracle(config, adjacency, starts)
        output = Path(options.get("output") or config.output_path("oracle.csv"))
        write_records(output, result.records)
        write_json(output.with_name(output.stem + "_summary.json"), result.summary.as_dict())
        self.done(f"Wrote {len(result.records)} oracle records to {output}")
