"""Trace genealogies from start nodes through the learned memory."""

from pathlib import Path

from genealogy.artifacts import write_json, write_records
from genealogy.services import GraphService, MemoryService, TraceService

from ..base import VacoalCommand


class Command(VacoalCommand):
    help = "Frontier-bounded mentor search over a memory snapshot"

    def add_command_arguments(self, parser):
        parser.add_argument("--output", help="Record CSV (default <out-dir>/trace.csv)")

    def run(self, config, options):
        config.require("edges")
        snapshot = config.snapshot or config.output_path("memory.vcms")
        memory, table, codebook = MemoryService.load(snapshot)
        adjacency = GraphService.load_adjacency(config.edges)
        starts = TraceService.starts(config, adjacency)
        result = TraceService.trace(config, memory, table, codebook, adjacency, starts)
        output = Path(options.get("output") or config.output_path("trace.csv"))
        write_records(output, result.records)
        write_json(output.with_name(output.stem + "_summary.json"), result.summary.as_dict())
        self.done(f"Wrote {len(result.records)} records to {output}")
