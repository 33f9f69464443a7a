"""Learn and trace one graph under several (B, m) configurations."""

from genealogy.artifacts import write_json, write_sweep_table
from genealogy.services import GraphService, SweepService, TraceService

from ..base import VacoalCommand


class Command(VacoalCommand):
    help = "Collision rates, Top-k tables and CR trajectories per (B, m) configuration"

    def add_command_arguments(self, parser):
        parser.add_argument("--sweep", help='Configurations as "B:m;B:m" (default: the standard five)')
        parser.add_argument("--top-k", dest="top_k", type=int)

    def run(self, config, options):
        config.require("edges")
        adjacency = GraphService.load_adjacency(config.edges)
        starts = TraceService.starts(config, adjacency)
        rows = SweepService.run(config, adjacency, starts)
        write_json(config.output_path("sweep.json"), {"mode": config.mode, "configs": rows})
        write_sweep_table(config.output_path("sweep.csv"), rows)
        self.done(f"Swept {len(rows)} configurations")
