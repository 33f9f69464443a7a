"""Chernoff bound on a wrong majority and the CR2 decay prediction."""

import json

from genealogy.artifacts import write_json
from vacoal.analysis import bounds

from ..base import VacoalCommand


class Command(VacoalCommand):
    help = "Theoretical error bound of the voting memory"

    def add_command_arguments(self, parser):
        parser.add_argument("--votes", type=int, help="Voting blocks N (default: --blocks)")
        parser.add_argument("--address-space", dest="address_space", type=int, help="Addresses M per block (default 2^m - 1)")
        parser.add_argument("--cr1", type=float, default=0.997)
        parser.add_argument("--gens", type=int, default=56)

    def run(self, config, options):
        report = bounds(
            options.get("votes") or config.blocks,
            config.depth_exp,
            options["cr1"],
            options["gens"],
            address_space=options.get("address_space"),
        )
        data = report.as_dict()
        write_json(config.output_path("bounds.json"), data)
        self.stdout.write(
            json.dumps(
                {k: data[k] for k in ("blocks", "address_space", "mu", "ln_p_error", "cr2_prediction")},
                sort_keys=True,
            )
        )
