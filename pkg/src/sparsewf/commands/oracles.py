"""
Oracles command: Monte-Carlo checks of the moment identities.
"""

from argparse import ArgumentParser, Namespace

from ..command import Command
from ..errors import ConfigError
from ..oracles import oracle_checks


class OraclesCommand(Command):
    """
    One verdict line per check; exit 1 if any check fails.
    """

    @property
    def name(self) -> str:
        return "oracles"

    @property
    def help(self) -> str:
        return "Check the moment identities behind the initialization"

    def add_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("--seed", type=int, default=0, help="Master seed (default: 0)")
        parser.add_argument(
            "--m",
            type=int,
            default=100_000,
            help="Measurements per replicate (default: 100000)",
        )
        parser.add_argument(
            "--replicates",
            type=int,
            default=10,
            help="Independent replicates averaged (default: 10)",
        )

    def execute(self, args: Namespace) -> int:
        if args.m < 2 or args.replicates < 1:
            raise ConfigError("m must be at least 2 and replicates at least 1")
        report = oracle_checks(args.seed, m=args.m, replicates=args.replicates)
        for check in report.checks:
            verdict = "PASS" if check.passed else "FAIL"
            print(
                f"{verdict}\t{check.name}\t{check.measured:.4g} "
                f"(tolerance {check.tolerance:.4g})\t{check.detail}"
            )
        return 0 if report.passed else 1
