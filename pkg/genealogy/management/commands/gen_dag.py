"""Synthetic layered genealogy with predicates and start nodes."""

from genealogy.artifacts import write_edges, write_predicates, write_starts
from genealogy.services import FixtureService

from ..base import VacoalCommand


class Command(VacoalCommand):
    help = "Generate a deterministic synthetic DAG fixture"

    def add_command_arguments(self, parser):
        parser.add_argument("--nodes", type=int, default=1000)
        parser.add_argument("--max-out-degree", dest="max_out_degree", type=int, default=3)
        parser.add_argument("--depth", type=int, default=20)
        parser.add_argument("--mutual-pairs", dest="mutual_pairs", type=int, default=0)

    def run(self, config, options):
        graph = FixtureService.generate(
            options["nodes"], options["max_out_degree"], options["depth"], config.seed, options["mutual_pairs"]
        )
        write_edges(config.output_path("edges.csv"), graph.edges)
        write_predicates(config.output_path("predicates.csv"), graph.predicates)
        write_starts(config.output_path("starts.txt"), graph.starts)
        self.done(f"Generated {len(graph.edges)} edges over {options['nodes']} nodes in {config.out_dir}")
