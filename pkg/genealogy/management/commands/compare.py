"""Divergence report between two record files."""

from genealogy.artifacts import read_records, write_json
from genealogy.services import TraceService

from ..base import VacoalCommand


class Command(VacoalCommand):
    help = "Compare two trace record files (multiset difference, Jaccard, Top-k)"

    def add_command_arguments(self, parser):
        parser.add_argument("--a", required=True, help="First record CSV")
        parser.add_argument("--b", required=True, help="Second record CSV")
        parser.add_argument("--top-k", dest="top_k", type=int)

    def run(self, config, options):
        report = TraceService.compare(read_records(options["a"]), read_records(options["b"]), config.top_k)
        write_json(config.output_path("compare.json"), report.as_dict())
        if report.identical:
            self.done("Traces are identical")
        else:
            self.stdout.write(
                f"Traces diverge: {report.only_a} records only in A, {report.only_b} only in B, "
                f"node Jaccard {report.jaccard:.6f}"
            )
