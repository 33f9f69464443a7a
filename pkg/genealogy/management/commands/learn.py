"""Learn a purified edge list into the block memory and save a snapshot."""

from genealogy.artifacts import write_json
from genealogy.services import GraphService, MemoryService

from ..base import VacoalCommand


class Command(VacoalCommand):
    help = "Learn every (student, mentor ordinal) key into the block memory"

    def add_command_arguments(self, parser):
        parser.add_argument(
            "--check-diffusers",
            dest="check_diffusers",
            type=int,
            default=0,
            metavar="TRIALS",
            help="Measure per-block avalanche over TRIALS flips and list weak blocks",
        )

    def run(self, config, options):
        config.require("edges")
        adjacency = GraphService.load_adjacency(config.edges)
        memory, codebook, table, report = MemoryService.learn(config, adjacency)
        if options.get("check_diffusers"):
            weak = memory.bank.weak_blocks(options["check_diffusers"], config.segment_bits, config.seed)
            report["weak_blocks"] = [[block, fraction] for block, fraction in weak]
        snapshot, codebook_path = MemoryService.save(config, memory, table, codebook)
        report["snapshot"] = snapshot.name
        report["codebook"] = codebook_path.name
        write_json(config.output_path("learn_report.json"), report)
        self.done(f"Learned {report['edges_learned']} edges; snapshot {snapshot}")
