"""Semantic and structural indicators over a completed trace."""

from genealogy.artifacts import read_records, write_bars, write_giant_table, write_json
from genealogy.services import AnalysisService, GraphService

from ..base import VacoalCommand


class Command(VacoalCommand):
    help = "Giant Score, path counts, hourglass traffic, era windows and entropy"

    def add_command_arguments(self, parser):
        parser.add_argument("--records", help="Record CSV (default <out-dir>/trace.csv)")
        parser.add_argument("--hub", help="Node for the hourglass traffic profile")
        parser.add_argument("--up-gens", dest="up_gens", type=int)
        parser.add_argument("--down-gens", dest="down_gens", type=int)
        parser.add_argument("--era-window", dest="era_window", type=int)
        parser.add_argument("--era-start", dest="era_start", type=int)
        parser.add_argument("--era-end", dest="era_end", type=int)
        parser.add_argument("--pivot-start", dest="pivot_start", type=int)
        parser.add_argument("--pivot-end", dest="pivot_end", type=int)

    def run(self, config, options):
        records = read_records(options.get("records") or config.output_path("trace.csv"))
        predicates = GraphService.predicates(config.predicates) if config.predicates else None
        result = AnalysisService.analyze(config, records, predicates)
        for name, rows in result.giant_tables.items():
            write_giant_table(config.output_path(f"giant_{name}.csv"), rows)
        if result.profile is not None:
            write_bars(config.output_path("traffic_bars.txt"), result.profile)
        write_json(config.output_path("analysis.json"), result.report)
        self.done(f"Analysed {len(records)} records")
