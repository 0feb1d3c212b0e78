"""
Recover command: one end-to-end recovery on a synthesized or loaded instance.
"""

from argparse import ArgumentParser, Namespace
from pathlib import Path

import numpy as np

from ..command import Command
from ..config import add_config_arguments, config_from_args
from ..errors import ConfigError, DivergenceError, InvalidArgumentError
from ..experiments import synthesize_instance
from ..initialization import initialize
from ..log import log, stopwatch
from ..model import SeedRecord, relative_error
from ..results import write_json, write_trace_csv
from ..storage import load_instance, save_instance
from ..thresholding import ThresholdOperator
from ..twf import TwfConfig, empirical_risk, required_sample_size, run

KEYS = (
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
    "preset",
    "out",
    "trace",
    "instance",
    "save_instance",
    "eig_tol",
    "eig_max_iter",
)


class RecoverCommand(Command):
    """
    Initialize, run thresholded Wirtinger flow and write the estimate.
    """

    @property
    def name(self) -> str:
        return "recover"

    @property
    def help(self) -> str:
        return "Recover one sparse signal from quadratic measurements"

    def add_arguments(self, parser: ArgumentParser) -> None:
        add_config_arguments(parser, KEYS)

    def execute(self, args: Namespace) -> int:
        config = config_from_args(args, KEYS)
        out_dir = Path(config.out)
        seed = SeedRecord(config.seed)
        rng = seed.generator()

        if config.instance:
            try:
                instance = load_instance(config.instance)
            except (InvalidArgumentError, OSError, ValueError, KeyError) as e:
                raise ConfigError(f"cannot load instance: {e}", config.instance) from e
            log.info(
                f"Loaded instance with m={instance.m}, p={instance.p} from {config.instance}; "
                f"p, m, k, nsr and noise settings are ignored"
            )
        else:
            instance = synthesize_instance(config.trial_params(), seed, rng)
        truth = instance.signal
        if config.save_instance:
            save_instance(instance, config.save_instance)
            log.info(f"Instance saved to {config.save_instance}")

        advisory = None
        if truth is not None:
            # A loaded instance carries its own noise level.
            nsr = instance.noise_scale / truth.two_norm**2 if config.instance else config.nsr
            advisory = required_sample_size(truth.k, instance.p, instance.m, nsr)
        if advisory is not None and instance.m < advisory:
            log.warning(
                f"m={instance.m} is below the advisory sample size "
                f"(1 + nsr^2) k^2 log(mp) = {advisory:.0f}"
            )

        with stopwatch("Initialization"):
            init = initialize(instance, config.alpha, config.eig_tol, config.eig_max_iter, rng)
        twf_config = TwfConfig(
            phi_sq=init.phi_sq,
            mu=config.mu,
            beta=config.beta,
            iterations=config.iters,
            operator=ThresholdOperator.parse(config.operator),
            record_trajectory=config.trace,
        )
        try:
            with stopwatch("Thresholded Wirtinger flow"):
                trace = run(init.x0, instance, twf_config, truth)
        except DivergenceError as e:
            if config.trace and e.trace is not None:
                path = write_trace_csv(e.trace, out_dir / "trace.csv")
                log.info(f"Partial trace written to {path}")
            raise

        estimate = trace.final
        risk = empirical_risk(estimate, instance)
        error = relative_error(estimate, truth) if truth is not None else None
        payload = {
            "estimate": {
                "x_hat": [float(v) for v in estimate],
                "support": [int(i) + 1 for i in np.flatnonzero(estimate)],
                "relative_error": error,
                "init_relative_error": relative_error(init.x0, truth) if truth is not None else None,
                "final_risk": risk,
                "advisory_m": advisory,
                "seed": seed.as_json(),
                "init": init.as_json(),
                "twf": twf_config.as_json(),
            }
        }
        path = write_json(out_dir / "estimate.json", payload, config.as_json())
        log.info(f"Estimate written to {path}")
        if config.trace:
            path = write_trace_csv(trace, out_dir / "trace.csv")
            log.info(f"Trace written to {path}")

        support = int(np.count_nonzero(estimate))
        if error is not None:
            print(f"relative error {error:.6e} (support {support}, final risk {risk:.6e})")
        else:
            print(f"final risk {risk:.6e} (support {support})")
        return 0
