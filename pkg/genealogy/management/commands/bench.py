"""Time memory traces against the dict oracle over several frontier sizes."""

from django.core.management.base import CommandError

from genealogy.artifacts import write_bench_table, write_json
from genealogy.services import BenchService, GraphService, TraceService

from ..base import VacoalCommand


def parse_fs_values(text: str):
    try:
        values = [int(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise CommandError(f"Invalid --fs-values {text!r}; expected comma-separated integers") from e
    if not values or min(values) < 1:
        raise CommandError(f"Invalid --fs-values {text!r}; frontier sizes must be positive")
    return values


class Command(VacoalCommand):
    help = "Wall-clock trace timings per frontier size against the dict-backed oracle"

    def add_command_arguments(self, parser):
        parser.add_argument("--fs-values", dest="fs_values", help='Frontier sizes as "2000,10000,20000" (default: --fs)')
        parser.add_argument("--sweep", help='Configurations as "B:m;B:m" (default: the run configuration)')

    def run(self, config, options):
        config.require("edges")
        fs_values = parse_fs_values(options["fs_values"]) if options.get("fs_values") else [config.fs]
        adjacency = GraphService.load_adjacency(config.edges)
        starts = TraceService.starts(config, adjacency)
        rows = BenchService.run(config, adjacency, starts, fs_values)
        write_json(config.output_path("bench.json"), {"mode": config.mode, "starts": len(starts), "rows": rows})
        write_bench_table(config.output_path("bench.csv"), rows)
        self.done(f"Timed {len(rows)} traces over {len(fs_values)} frontier sizes")
