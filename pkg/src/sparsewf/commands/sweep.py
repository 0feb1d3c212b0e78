"""
Sweep command: Monte-Carlo trials along one parameter axis.
"""

from argparse import ArgumentParser, Namespace
from pathlib import Path

from ..command import Command
from ..config import add_config_arguments, config_from_args
from ..errors import ConfigError, InvalidArgumentError
from ..experiments import SweepSpec, run_sweep
from ..log import log
from ..results import write_sweep

DEFAULT_TRIALS = 10

KEYS = (
    "axis",
    "grid",
    "trials",
    "p",
    "m",
    "k",
    "nsr",
    "noise",
    "alpha",
    "beta",
    "mu",
    "iters",
    "operator",
    "seed",
    "workers",
    "preset",
    "out",
    "timings",
    "eig_tol",
    "eig_max_iter",
)


class SweepCommand(Command):
    """
    Run a one-axis sweep and write JSON, CSV and SVG results.
    """

    @property
    def name(self) -> str:
        return "sweep"

    @property
    def help(self) -> str:
        return "Average relative error over trials along one parameter axis"

    def add_arguments(self, parser: ArgumentParser) -> None:
        add_config_arguments(parser, KEYS)

    def execute(self, args: Namespace) -> int:
        config = config_from_args(args, KEYS)
        if config.axis is None or not config.grid:
            raise ConfigError("a sweep needs both an axis and a grid")

        fixed = {
            key: value
            for key, value in config.trial_params().as_json().items()
            if key != config.axis
        }
        try:
            spec = SweepSpec(
                axis=config.axis,
                grid=config.grid,
                trials=config.trials or DEFAULT_TRIALS,
                master_seed=config.seed,
                fixed=fixed,
            )
        except InvalidArgumentError as e:
            raise ConfigError(str(e)) from e
        result = run_sweep(spec, workers=config.workers, timings=config.timings)
        for path in write_sweep(result, Path(config.out), config.as_json()):
            log.info(f"Wrote {path}")

        for point in result.points:
            mean = point.mean_error
            print(
                f"{spec.axis}={point.axis_value:g}\t"
                + (f"{mean:.4f}" if mean is not None else "n/a")
                + ("" if point.valid else "\tinvalid")
            )
        return 0
