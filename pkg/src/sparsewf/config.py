"""
Run configuration shared by all commands.

Values are resolved with the precedence: built-in defaults (some taken from
the environment) < preset < config file < command-line flags. Config files
are flat `key = value` text in dotenv syntax; comments start with `#`.
"""

from __future__ import annotations

import math
import os
from argparse import ArgumentParser, Namespace
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

from dotenv.parser import parse_stream

from .errors import ConfigError
from .experiments import PRESETS, SWEEPABLE_AXES, TrialParams
from .initialization import DEFAULT_EIG_MAX_ITER, DEFAULT_EIG_TOL
from .model import NOISE_FAMILIES
from .thresholding import ThresholdOperator


def _parse_bool(value: str) -> bool:
    """
    >>> _parse_bool("yes"), _parse_bool("0")
    (True, False)
    """
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got '{value}'")


def _parse_grid(value: str) -> tuple[float, ...]:
    """
    >>> _parse_grid("0, 0.5 1")
    (0.0, 0.5, 1.0)
    """
    return tuple(float(v) for v in value.replace(",", " ").split())


def _optional_str(value: str) -> str | None:
    return value or None


def _optional_int(value: str) -> int | None:
    return int(value) if value else None


@dataclass(frozen=True)
class RunConfig:
    """
    Every parameter a command may need. `explicit` records which keys were
    set by a config file or a flag rather than by defaults or a preset.
    """

    p: int = 1000
    m: int = 7000
    k: int = 100
    nsr: float = 1.0
    noise: str = "gaussian"
    alpha: float = 0.1
    beta: float = 1.0
    mu: float = 0.01
    iters: int = 1000
    operator: str = "soft"
    seed: int = 0
    workers: int = 1
    trials: int | None = None
    axis: str | None = None
    grid: tuple[float, ...] = ()
    preset: str | None = None
    out: str = "results"
    trace: bool = False
    instance: str | None = None
    save_instance: str | None = None
    eig_tol: float = DEFAULT_EIG_TOL
    eig_max_iter: int = DEFAULT_EIG_MAX_ITER
    timings: bool = False
    explicit: frozenset[str] = field(default_factory=frozenset)

    def validate(self) -> RunConfig:
        """
        Check every range before anything is computed. Returns self.
        """
        if self.p < 1 or self.m < 1 or self.k < 1:
            raise ConfigError("p, m and k must be at least 1")
        if self.k > self.p:
            raise ConfigError(f"k must not exceed p, got k={self.k}, p={self.p}")
        for name in ("nsr", "alpha", "beta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be a finite number >= 0, got {value}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ConfigError("mu must be positive and finite")
        if self.iters < 0:
            raise ConfigError("iters must be >= 0")
        if self.trials is not None and self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if not (math.isfinite(self.eig_tol) and self.eig_tol > 0):
            raise ConfigError("eig_tol must be positive and finite")
        if self.eig_max_iter < 1:
            raise ConfigError("eig_max_iter must be at least 1")
        if self.operator not in [op.value for op in ThresholdOperator]:
            raise ConfigError(f"Unknown operator '{self.operator}', choose from soft, hard")
        if self.noise not in NOISE_FAMILIES:
            raise ConfigError(
                f"Unknown noise family '{self.noise}', choose from {', '.join(NOISE_FAMILIES)}"
            )
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigError(f"Unknown preset '{self.preset}', choose from {', '.join(PRESETS)}")
        if self.axis is not None and self.axis not in SWEEPABLE_AXES:
            raise ConfigError(f"Cannot sweep '{self.axis}', choose from {', '.join(SWEEPABLE_AXES)}")
        return self

    def trial_params(self) -> TrialParams:
        return TrialParams(
            p=self.p,
            m=self.m,
            k=self.k,
            nsr=self.nsr,
            alpha=self.alpha,
            beta=self.beta,
            mu=self.mu,
            iterations=self.iters,
            operator=self.operator,
            noise=self.noise,
            eig_tol=self.eig_tol,
            eig_max_iter=self.eig_max_iter,
        )

    def explicit_trial_overrides(self) -> dict[str, Any]:
        """
        Explicitly set parameters under their TrialParams names.
        """
        params = self.trial_params().as_json()
        renamed = {"iters": "iterations"}
        return {
            renamed.get(key, key): params[renamed.get(key, key)]
            for key in sorted(self.explicit)
            if renamed.get(key, key) in params
        }

    def as_json(self) -> dict[str, Any]:
        """
        The resolved configuration as embedded in artifacts. The worker count
        is left out since it does not affect any result.
        """
        data = asdict(self)
        data["grid"] = list(self.grid)
        del data["explicit"], data["workers"]
        return data


# How to read each key from a config file or the environment.
_CONVERTERS: dict[str, Callable[[str], Any]] = {
    "p": int,
    "m": int,
    "k": int,
    "nsr": float,
    "noise": str,
    "alpha": float,
    "beta": float,
    "mu": float,
    "iters": int,
    "operator": str,
    "seed": int,
    "workers": int,
    "trials": _optional_int,
    "axis": _optional_str,
    "grid": _parse_grid,
    "preset": _optional_str,
    "out": str,
    "trace": _parse_bool,
    "instance": _optional_str,
    "save_instance": _optional_str,
    "eig_tol": float,
    "eig_max_iter": int,
    "timings": _parse_bool,
}

CONFIG_KEYS = tuple(_CONVERTERS)

_CHOICES: dict[str, list[str]] = {
    "operator": [op.value for op in ThresholdOperator],
    "noise": list(NOISE_FAMILIES),
    "preset": list(PRESETS),
    "axis": list(SWEEPABLE_AXES),
}


def _binding_line(binding) -> int:
    # A binding starts at the first blank line before its key.
    text = binding.original.string
    return binding.original.line + text[: len(text) - len(text.lstrip())].count("\n")


def read_config_file(path: str | Path) -> dict[str, Any]:
    """
    Parse a `key = value` file. Unknown keys, unparsable lines and bad values
    raise a ConfigError naming the file and line.
    """
    path = str(path)
    if not Path(path).is_file():
        raise ConfigError("config file not found", path)
    values: dict[str, Any] = {}
    with open(path) as f:
        for binding in parse_stream(f):
            line = _binding_line(binding)
            if binding.error:
                raise ConfigError("cannot parse line, expected 'key = value'", path, line)
            if binding.key is None:
                continue
            key = binding.key.replace("-", "_").lower()
            if key not in _CONVERTERS:
                raise ConfigError(f"unknown key '{binding.key}'", path, line)
            if binding.value is None:
                raise ConfigError(f"missing value for '{key}'", path, line)
            try:
                values[key] = _CONVERTERS[key](binding.value)
            except ValueError as e:
                raise ConfigError(f"invalid value for '{key}': {e}", path, line) from e
    return values


def environment_defaults() -> dict[str, Any]:
    """
    Defaults taken from $SPARSEWF_OUT_DIR and $SPARSEWF_WORKERS.
    """
    defaults: dict[str, Any] = {}
    if os.environ.get("SPARSEWF_OUT_DIR"):
        defaults["out"] = os.environ["SPARSEWF_OUT_DIR"]
    if os.environ.get("SPARSEWF_WORKERS"):
        try:
            defaults["workers"] = int(os.environ["SPARSEWF_WORKERS"])
        except ValueError as e:
            raise ConfigError(f"SPARSEWF_WORKERS must be an integer: {e}") from e
    return defaults


def resolve_config(
    flags: dict[str, Any], config_path: str | Path | None = None
) -> RunConfig:
    """
    Merge defaults, preset, config file and flags (None-valued flags count
    as not given) into a validated RunConfig.
    """
    unknown = set(flags) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown options: {', '.join(sorted(unknown))}")
    given = {key: value for key, value in flags.items() if value is not None}
    from_file = read_config_file(config_path) if config_path is not None else {}

    preset_name = given.get("preset", from_file.get("preset"))
    from_preset: dict[str, Any] = {}
    if preset_name is not None:
        if preset_name not in PRESETS:
            raise ConfigError(f"Unknown preset '{preset_name}', choose from {', '.join(PRESETS)}")
        from_preset = dict(PRESETS[preset_name].base)

    merged = {**environment_defaults(), **from_preset, **from_file, **given}
    if "grid" in merged:
        merged["grid"] = tuple(merged["grid"])
    explicit = frozenset(from_file) | frozenset(given)
    return replace(RunConfig(), **merged, explicit=explicit).validate()


def add_config_arguments(parser: ArgumentParser, keys: tuple[str, ...]) -> None:
    """
    Add `--config` and one flag per configuration key in `keys`. Every flag
    defaults to None so unset flags never override the file or preset.
    """
    parser.add_argument("--config", metavar="PATH", help="Flat key = value configuration file")
    helps = {
        "p": "Signal dimension",
        "m": "Number of measurements",
        "k": "Sparsity",
        "nsr": "Noise-to-signal ratio sigma/||x||^2",
        "noise": "Noise family",
        "alpha": "Screening parameter of the initialization",
        "beta": "Thresholding parameter",
        "mu": "Step size",
        "iters": "Number of iterations T",
        "operator": "Threshold operator",
        "seed": "Master seed",
        "workers": "Worker processes (default: $SPARSEWF_WORKERS or 1)",
        "trials": "Trials per grid point",
        "preset": "Problem-size preset",
        "out": "Output directory (default: $SPARSEWF_OUT_DIR or 'results')",
        "timings": "Record per-trial wall-clock time",
        "eig_tol": "Residual tolerance of the eigensolver",
        "eig_max_iter": "Iteration cap of the eigensolver",
        "axis": "Parameter to sweep",
        "grid": "Grid values of the swept parameter, increasing",
        "trace": "Write the per-iteration trace CSV",
        "instance": "Load the problem instance from this file instead of drawing one",
        "save_instance": "Save the problem instance to this file",
    }
    types = {
        "p": int,
        "m": int,
        "k": int,
        "nsr": float,
        "alpha": float,
        "beta": float,
        "mu": float,
        "iters": int,
        "seed": int,
        "workers": int,
        "trials": int,
        "eig_tol": float,
        "eig_max_iter": int,
    }
    for key in keys:
        flag = "--" + key.replace("_", "-")
        if key in ("trace", "timings"):
            parser.add_argument(flag, dest=key, action="store_true", default=None, help=helps.get(key))
        elif key == "grid":
            parser.add_argument(
                flag, dest=key, type=float, nargs="+", metavar="V", default=None, help=helps[key]
            )
        elif key in _CHOICES:
            parser.add_argument(flag, dest=key, choices=_CHOICES[key], default=None, help=helps[key])
        else:
            parser.add_argument(flag, dest=key, type=types.get(key, str), default=None, help=helps.get(key))


def config_from_args(args: Namespace, keys: tuple[str, ...]) -> RunConfig:
    flags = {key: getattr(args, key, None) for key in keys}
    return resolve_config(flags, getattr(args, "config", None))
