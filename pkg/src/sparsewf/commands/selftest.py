"""
Selftest command: run the exact property suites and print one verdict per
suite.
"""

import argparse
from argparse import ArgumentParser, Namespace

from ..command import Command
from ..log import log
from ..selftest import FAULTS, SUITES, run_suites


class SelftestCommand(Command):
    """
    Exit 0 iff every selected suite passes; otherwise exit 1 naming the first
    failing suite.
    """

    @property
    def name(self) -> str:
        return "selftest"

    @property
    def help(self) -> str:
        return "Run the built-in property suites"

    def add_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument(
            "--suite",
            action="append",
            choices=list(SUITES),
            help="Run only this suite (repeatable, default: all)",
        )
        parser.add_argument(
            "--seed",
            type=int,
            default=0,
            help="Master seed of the randomized suites (default: 0)",
        )
        parser.add_argument(
            "--inject-fault",
            choices=list(FAULTS),
            default=None,
            help=argparse.SUPPRESS,
        )

    def execute(self, args: Namespace) -> int:
        results = run_suites(args.suite, seed=args.seed, fault=args.inject_fault)
        for result in results:
            verdict = "PASS" if result.passed else "FAIL"
            print(f"{verdict}\t{result.name}\t{result.detail}")
        failed = [result.name for result in results if not result.passed]
        if failed:
            log.error(f"Suite '{failed[0]}' failed")
            return 1
        return 0
