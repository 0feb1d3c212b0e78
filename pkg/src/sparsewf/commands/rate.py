"""
Rate command: does the mean error fall like m^(-1/2)?
"""

from argparse import ArgumentParser, Namespace
from pathlib import Path

from ..command import Command
from ..config import add_config_arguments, config_from_args
from ..errors import ConfigError, InvalidArgumentError
from ..experiments import rate_scaling_study
from ..log import log
from ..results import write_rate_study

DEFAULT_M_GRID = (2000, 8000)
DEFAULT_TRIALS = 20

KEYS = (
    "p",
    "k",
    "nsr",
    "noise",
    "alpha",
    "beta",
    "mu",
    "iters",
    "operator",
    "seed",
    "trials",
    "workers",
    "preset",
    "out",
    "eig_tol",
    "eig_max_iter",
)


class RateCommand(Command):
    """
    Mean error on a grid of sample sizes, compared with the predicted
    m^(-1/2) decay.
    """

    @property
    def name(self) -> str:
        return "rate"

    @property
    def help(self) -> str:
        return "Check the m^(-1/2) decay of the estimation error"

    def add_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument(
            "--m-grid",
            type=int,
            nargs="+",
            metavar="M",
            default=list(DEFAULT_M_GRID),
            help=f"Sample sizes, increasing (default: {' '.join(map(str, DEFAULT_M_GRID))})",
        )
        parser.add_argument(
            "--k-side",
            action="store_true",
            help="Also compare k and 2k at the largest m",
        )
        add_config_arguments(parser, KEYS)

    def execute(self, args: Namespace) -> int:
        config = config_from_args(args, KEYS)
        try:
            study = rate_scaling_study(
                config.trial_params(),
                tuple(args.m_grid),
                trials=config.trials or DEFAULT_TRIALS,
                master_seed=config.seed,
                workers=config.workers,
                k_side=args.k_side,
            )
        except InvalidArgumentError as e:
            raise ConfigError(str(e)) from e
        for path in write_rate_study(study, Path(config.out), config.as_json()):
            log.info(f"Wrote {path}")

        print("m\tmean_error\terror*sqrt(m)\tpredicted_rate")
        for row in study.rows:
            mean = f"{row.mean_error:.4f}" if row.mean_error is not None else "n/a"
            scaled = f"{row.scaled_error:.3f}" if row.scaled_error is not None else "n/a"
            print(f"{row.m}\t{mean}\t{scaled}\t{row.theoretical:.4f}")
        for m_from, m_to, ratio, ok in study.ratios:
            print(f"ratio {m_to}/{m_from}: {ratio:.3f} ({'within' if ok else 'outside'} band)")
        if study.fitted_exponent is not None:
            print(f"fitted exponent {study.fitted_exponent:.3f} (predicted -0.5)")
        for k, scaled in study.k_table:
            print(f"k={k}\terror*sqrt(m)=" + (f"{scaled:.3f}" if scaled is not None else "n/a"))
        if study.k_growth is not None:
            print(f"growth from k to 2k: {study.k_growth:.3f} (predicted 1.414)")
        if study.passed is None:
            print(f"verdict: skipped ({study.note})")
            return 0
        print(f"verdict: {'PASS' if study.passed else 'FAIL'}")
        return 0 if study.passed else 1
