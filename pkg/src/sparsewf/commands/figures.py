"""
Figures command: the four simulation studies (error against beta, noise
level, sample size and sparsity), each as JSON, CSV and an SVG chart.
"""

import math
from argparse import ArgumentParser, Namespace
from pathlib import Path

from ..command import Command
from ..config import add_config_arguments, config_from_args
from ..errors import ConfigError, InvalidArgumentError
from ..experiments import FIGURE_NOTES, FIGURES, figure_sweep, run_sweep
from ..log import log
from ..results import write_sweep

KEYS = (
    "preset",
    "seed",
    "trials",
    "workers",
    "out",
    "timings",
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
    "eig_tol",
    "eig_max_iter",
)


class FiguresCommand(Command):
    """
    Reproduce the simulation studies at the paper or the quick preset.
    Problem parameters given explicitly override the preset and the values a
    study holds fixed; the swept parameter itself always follows the grid.
    """

    @property
    def name(self) -> str:
        return "figures"

    @property
    def help(self) -> str:
        return "Run the simulation studies and plot average relative error"

    def add_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument(
            "--which",
            choices=[*FIGURES, "all"],
            default="all",
            help="Which study to run (default: all)",
        )
        parser.add_argument(
            "--compare-alpha",
            type=float,
            metavar="A",
            default=None,
            help="Overlay a second beta curve computed at alpha = A",
        )
        add_config_arguments(parser, KEYS)

    def execute(self, args: Namespace) -> int:
        config = config_from_args(args, KEYS)
        preset = config.preset or "quick"
        out_dir = Path(config.out)
        overrides = config.explicit_trial_overrides()
        which = list(FIGURES) if args.which == "all" else [args.which]
        if args.compare_alpha is not None and not (math.isfinite(args.compare_alpha) and args.compare_alpha >= 0):
            raise ConfigError("compare-alpha must be >= 0")

        for figure in which:
            try:
                spec = figure_sweep(figure, preset, config.seed, overrides, config.trials)
                extra_specs = []
                if figure == "beta" and args.compare_alpha is not None:
                    extra_specs.append(
                        figure_sweep(
                            figure,
                            preset,
                            config.seed,
                            {**overrides, "alpha": args.compare_alpha},
                            config.trials,
                            name=f"beta_alpha{args.compare_alpha:g}",
                        )
                    )
            except InvalidArgumentError as e:
                raise ConfigError(str(e)) from e

            notes = FIGURE_NOTES if preset == "paper" and figure != "m" else ()
            result = run_sweep(spec, workers=config.workers, timings=config.timings, notes=notes)
            extras = [
                run_sweep(extra, workers=config.workers, timings=config.timings, notes=notes)
                for extra in extra_specs
            ]
            for extra in extras:
                write_sweep(extra, out_dir, config.as_json())
            for path in write_sweep(result, out_dir, config.as_json(), extra_series=extras):
                log.info(f"Wrote {path}")

            for series in [result, *extras]:
                curve = ", ".join(
                    f"{x:g}: " + (f"{y:.4f}" if y is not None else "n/a") for x, y in series.curve()
                )
                print(f"{series.spec.name}\t{curve}")
        return 0
