"""
Shared plumbing for the pipeline management commands.

Every command accepts the same run-configuration flags, resolves them into a
``RunConfig`` and reports failures as one JSON object on stderr:

    {"error": "ConfigError", "message": "...", "exit_code": 1}

Exit codes: 1 configuration error, 2 artifact I/O error, 3 any other domain
error (dimension, capacity, empty input, unknown node, parse or format).
"""

import json
import logging

from django.core.management.base import BaseCommand, CommandError

from vacoal.exceptions import ArtifactIOError, ConfigError, VacoalError

from ..run_config import RunConfig

logger = logging.getLogger(__name__)

EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_DOMAIN = 3


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (ConfigError, CommandError)):
        return EXIT_CONFIG
    if isinstance(error, (ArtifactIOError, OSError)):
        return EXIT_IO
    return EXIT_DOMAIN


def error_report(error: BaseException) -> dict:
    code = exit_code_for(error)
    report = {"error": type(error).__name__, "message": str(error), "exit_code": code}
    if isinstance(error, VacoalError):
        report.update(error.details())
    return report


class VacoalCommand(BaseCommand):
    """
    Base class for the pipeline commands.

    Subclasses implement ``run(config, options)`` instead of ``handle``.
    Flags default to None so that manifest and settings values show through.
    """

    # Flags a command needs on top of the shared set
    def add_command_arguments(self, parser):
        pass

    def add_arguments(self, parser):
        parser.add_argument("--config", help="Run manifest (key=value file)")
        parser.add_argument("--seed", type=int)
        parser.add_argument("--length", type=int, help="Hypervector length L in bits")
        parser.add_argument("--blocks", type=int, help="Block count B")
        parser.add_argument("--depth-exp", dest="depth_exp", type=int, help="Address bits m per block")
        parser.add_argument("--fs", type=int, help="Frontier size per start node")
        parser.add_argument("--max-depth", dest="max_depth", type=int)
        parser.add_argument("--cr2-halt", dest="cr2_halt", type=float)
        parser.add_argument("--mode", choices=["rescue", "dont_care"])
        parser.add_argument("--prune-order", dest="prune_order", choices=["descending_cr2", "lexicographic"])
        parser.add_argument("--rr", type=float, help="Rescue rate in [0, 1]")
        parser.add_argument("--threads", type=int)
        parser.add_argument("--collision-policy", dest="collision_policy", choices=["flag", "bucket"])
        parser.add_argument("--out-dir", dest="out_dir")
        parser.add_argument("--edges", help="Edge CSV (student,mentor)")
        parser.add_argument("--predicates", help="Predicate CSV (node,predicate,value)")
        parser.add_argument("--starts", help="Start node list, one id per line")
        parser.add_argument("--snapshot", help="Memory snapshot path")
        parser.add_argument("--concept", action="append", help="name=token,token (repeatable)")
        self.add_command_arguments(parser)

    def _apply_verbosity(self, verbosity: int):
        if verbosity == 1:
            return
        level = logging.WARNING if verbosity == 0 else logging.DEBUG
        for name in ("vacoal", "genealogy"):
            logging.getLogger(name).setLevel(level)

    def handle(self, *args, **options):
        self._apply_verbosity(options.get("verbosity", 1))
        try:
            config = RunConfig.resolve(options)
            self.run(config, options)
        except (VacoalError, CommandError, OSError, ValueError, KeyError) as e:
            report = error_report(e)
            logger.error(f"{self.__module__.rsplit('.', 1)[-1]} failed: {report['message']}")
            self.stderr.write(json.dumps(report, sort_keys=True))
            raise SystemExit(report["exit_code"])

    def run(self, config: RunConfig, options: dict):
        raise NotImplementedError

    def done(self, message: str):
        self.stdout.write(self.style.SUCCESS(message))
