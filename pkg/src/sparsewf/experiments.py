"""
Monte-Carlo harness: single trials, one-axis parameter sweeps, the presets
behind the four simulation studies, and the rate-scaling study.

Every trial draws its signal, design and noise from its own Philox substream
keyed by (master seed, grid point, trial), so results do not depend on the
order or the process in which trials run.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any

import numpy as np

from .errors import DegenerateInstanceError, DivergenceError, InvalidArgumentError
from .initialization import DEFAULT_EIG_MAX_ITER, DEFAULT_EIG_TOL, initialize
from .log import log, mute_log, stopwatch
from .model import (
    NOISE_FAMILIES,
    NoiseSpec,
    ProblemInstance,
    SeedRecord,
    generate_instance,
    generate_signal,
    relative_error,
)
from .thresholding import ThresholdOperator
from .twf import TwfConfig, required_sample_size, run, theoretical_rate

# A grid point with more failed trials than this fraction is flagged invalid.
MAX_FAILURE_FRACTION = 0.2
INTEGER_AXES = ("p", "m", "k", "iterations")
SWEEPABLE_AXES = ("beta", "nsr", "m", "k", "alpha", "mu", "iterations", "p")


@dataclass(frozen=True)
class TrialParams:
    """
    Problem and algorithm parameters of one trial. The noise scale is
    sigma = nsr * ||x||^2, fixed after the signal is drawn.
    """

    p: int = 1000
    m: int = 7000
    k: int = 100
    nsr: float = 1.0
    alpha: float = 0.1
    beta: float = 1.0
    mu: float = 0.01
    iterations: int = 1000
    operator: str = "soft"
    noise: str = "gaussian"
    eig_tol: float = DEFAULT_EIG_TOL
    eig_max_iter: int = DEFAULT_EIG_MAX_ITER

    def __post_init__(self):
        if self.p < 1 or self.m < 1:
            raise InvalidArgumentError("p and m must be at least 1")
        if not 1 <= self.k <= self.p:
            raise InvalidArgumentError(f"k must satisfy 1 <= k <= p, got k={self.k}, p={self.p}")
        for name in ("nsr", "alpha", "beta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidArgumentError(f"{name} must be a finite number >= 0, got {value}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise InvalidArgumentError("mu must be positive and finite")
        if not (math.isfinite(self.eig_tol) and self.eig_tol > 0):
            raise InvalidArgumentError("eig_tol must be positive and finite")
        if self.iterations < 0:
            raise InvalidArgumentError("iterations must be >= 0")
        if self.noise not in NOISE_FAMILIES:
            raise InvalidArgumentError(f"Unknown noise family '{self.noise}'")
        ThresholdOperator.parse(self.operator)

    def as_json(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class TrialOutcome:
    point: int
    trial: int
    axis_value: float
    seed: SeedRecord
    error: float | None
    init_error: float | None = None
    failure: str | None = None
    selected: int = 0
    fallback: bool = False
    advisory_m: float = 0.0
    wallclock_ms: float | None = None

    @property
    def failed(self) -> bool:
        return self.error is None

    def as_json(self) -> dict[str, Any]:
        data = asdict(self)
        data["seed"] = self.seed.as_json()
        return data


def synthesize_instance(
    params: TrialParams, seed: SeedRecord, rng: np.random.Generator
) -> ProblemInstance:
    """
    Draw the signal, then the design and noise, from `rng`. The noise scale
    is nsr * ||x||^2 of the drawn signal.
    """
    signal = generate_signal(params.p, params.k, rng)
    sigma = params.nsr * signal.two_norm**2
    noise = NoiseSpec(params.noise, sigma) if sigma > 0 and params.noise != "none" else NoiseSpec()
    return generate_instance(signal, params.m, noise, rng, seed=seed)


def run_trial(
    params: TrialParams,
    seed: SeedRecord,
    point: int = 0,
    axis_value: float = math.nan,
    timings: bool = False,
) -> TrialOutcome:
    """
    Signal, instance, initialization and the full iteration for one trial.
    Degenerate instances and divergent runs come back as failed outcomes.
    """
    trial = seed.spawn_key[-1] if seed.spawn_key else 0
    with stopwatch() as watch:
        rng = seed.generator()
        instance = synthesize_instance(params, seed, rng)
        signal = instance.signal
        advisory = required_sample_size(params.k, params.p, params.m, params.nsr)

        error = init_error = failure = None
        selected, fallback = 0, False
        try:
            init = initialize(instance, params.alpha, params.eig_tol, params.eig_max_iter, rng)
            selected, fallback = int(init.selected.size), init.fallback
            init_error = relative_error(init.x0, signal)
            config = TwfConfig(
                phi_sq=init.phi_sq,
                mu=params.mu,
                beta=params.beta,
                iterations=params.iterations,
                operator=ThresholdOperator.parse(params.operator),
            )
            error = relative_error(run(init.x0, instance, config).final, signal)
        except (DegenerateInstanceError, DivergenceError) as e:
            failure = f"{type(e).__name__}: {e}"
            log.debug(f"Trial {seed.label()} failed: {failure}")

    return TrialOutcome(
        point=point,
        trial=trial,
        axis_value=axis_value,
        seed=seed,
        error=error,
        init_error=init_error,
        failure=failure,
        selected=selected,
        fallback=fallback,
        advisory_m=advisory,
        wallclock_ms=watch.elapsed_ms if timings else None,
    )


@dataclass(frozen=True)
class SweepSpec:
    """
    A one-axis sweep. `fixed` overrides TrialParams defaults and must not
    name the swept axis; `grid` is strictly increasing.
    """

    axis: str
    grid: tuple[float, ...]
    trials: int
    master_seed: int = 0
    fixed: dict[str, Any] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.axis not in SWEEPABLE_AXES:
            raise InvalidArgumentError(
                f"Cannot sweep '{self.axis}', choose from {', '.join(SWEEPABLE_AXES)}"
            )
        grid = tuple(int(v) if self.axis in INTEGER_AXES else float(v) for v in self.grid)
        if not grid:
            raise InvalidArgumentError("sweep grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidArgumentError("sweep grid must be strictly increasing")
        if self.trials < 1:
            raise InvalidArgumentError("trials must be at least 1")
        if self.axis in self.fixed:
            raise InvalidArgumentError(f"swept parameter '{self.axis}' must not be fixed")
        known = {f.name for f in fields(TrialParams)}
        unknown = set(self.fixed) - known
        if unknown:
            raise InvalidArgumentError(f"Unknown fixed parameters: {', '.join(sorted(unknown))}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "fixed", dict(self.fixed))
        if not self.name:
            object.__setattr__(self, "name", self.axis)
        # Validate every grid point up front.
        for value in grid:
            self.params_at(value)

    def params_at(self, value: float) -> TrialParams:
        return TrialParams(**{**self.fixed, self.axis: value})

    def as_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "axis": self.axis,
            "grid": list(self.grid),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "fixed": dict(self.fixed),
        }


@dataclass(frozen=True)
class SweepPoint:
    axis_value: float
    outcomes: tuple[TrialOutcome, ...]

    @property
    def errors(self) -> list[float]:
        return [o.error for o in self.outcomes if o.error is not None]

    @property
    def failures(self) -> int:
        return sum(1 for o in self.outcomes if o.failed)

    @property
    def mean_error(self) -> float | None:
        errors = self.errors
        return float(np.mean(errors)) if errors else None

    @property
    def valid(self) -> bool:
        return self.failures <= MAX_FAILURE_FRACTION * len(self.outcomes)

    def as_json(self) -> dict[str, Any]:
        return {
            "axis_value": self.axis_value,
            "mean_error": self.mean_error,
            "failures": self.failures,
            "valid": self.valid,
            "errors": [o.error for o in self.outcomes],
            "seeds": [o.seed.label() for o in self.outcomes],
            "wallclock_ms": [o.wallclock_ms for o in self.outcomes],
            "trials": [o.as_json() for o in self.outcomes],
        }


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    points: tuple[SweepPoint, ...]
    notes: tuple[str, ...] = ()

    def curve(self) -> list[tuple[float, float | None]]:
        return [(point.axis_value, point.mean_error) for point in self.points]

    def as_json(self) -> dict[str, Any]:
        return {
            "spec": self.spec.as_json(),
            "resolved": [self.spec.params_at(v).as_json() for v in self.spec.grid],
            "notes": list(self.notes),
            "points": [point.as_json() for point in self.points],
        }


def _run_task(task: tuple[TrialParams, SeedRecord, int, float, bool]) -> TrialOutcome:
    params, seed, point, value, timings = task
    with mute_log(logging.WARNING):
        return run_trial(params, seed, point=point, axis_value=value, timings=timings)


def run_sweep(
    spec: SweepSpec, workers: int = 1, timings: bool = False, notes: tuple[str, ...] = ()
) -> SweepResult:
    """
    Run spec.trials trials at every grid point, serially or on a process
    pool, and aggregate after sorting by (point, trial).
    """
    if workers < 1:
        raise InvalidArgumentError("workers must be at least 1")
    master = SeedRecord(spec.master_seed)
    tasks = [
        (spec.params_at(value), master.child(point, trial), point, value, timings)
        for point, value in enumerate(spec.grid)
        for trial in range(spec.trials)
    ]
    log.info(
        f"Sweep '{spec.name}': {len(spec.grid)} points x {spec.trials} trials "
        f"on {workers} worker(s)"
    )

    if workers == 1:
        outcomes = [_run_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_task, tasks))
    outcomes.sort(key=lambda o: (o.point, o.trial))

    points = []
    for index, value in enumerate(spec.grid):
        point = SweepPoint(value, tuple(o for o in outcomes if o.point == index))
        mean = point.mean_error
        log.info(
            f"  {spec.axis}={value}: mean relative error "
            + (f"{mean:.4f}" if mean is not None else "n/a")
            + (f" ({point.failures} failed)" if point.failures else "")
        )
        if not point.valid:
            log.warning(f"  {spec.axis}={value}: more than 20% of trials failed, point is invalid")
        points.append(point)
    return SweepResult(spec=spec, points=tuple(points), notes=notes)


@dataclass(frozen=True)
class Preset:
    """
    Base problem size plus the grid and trial count of each figure sweep.
    """

    name: str
    base: dict[str, Any]
    grids: dict[str, tuple[float, ...]]
    trials: dict[str, int]


def _arange(start: float, stop: float, step: float) -> tuple[float, ...]:
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 10) for i in range(count))


_BETA_GRID = _arange(0.0, 3.0, 0.25)
_NSR_GRID = _arange(0.0, 1.0, 0.1)

PRESETS = {
    "paper": Preset(
        name="paper",
        base={"p": 1000, "m": 7000, "k": 100},
        grids={
            "beta": _BETA_GRID,
            "nsr": _NSR_GRID,
            "m": tuple(range(2000, 11001, 1000)),
            "k": tuple(range(25, 201, 25)),
        },
        trials={"beta": 10, "nsr": 5, "m": 5, "k": 10},
    ),
    "quick": Preset(
        name="quick",
        base={"p": 200, "m": 2000, "k": 20},
        grids={
            "beta": _BETA_GRID,
            "nsr": _NSR_GRID,
            "m": tuple(range(400, 2201, 200)),
            "k": tuple(range(5, 41, 5)),
        },
        trials={"beta": 5, "nsr": 5, "m": 5, "k": 5},
    ),
}

FIGURES = ("beta", "nsr", "m", "k")

# Parameters each study holds fixed on top of the preset's problem size.
_FIGURE_FIXED = {
    "beta": {"nsr": 1.0, "alpha": 0.1},
    "nsr": {"beta": 1.0, "alpha": 0.1},
    "m": {"nsr": 1.0, "beta": 1.0, "alpha": 0.1},
    "k": {"nsr": 1.0, "beta": 1.0, "alpha": 0.1},
}

FIGURE_NOTES = (
    "m = 7000 is held fixed in the beta, nsr and k studies; at m = 1000 the "
    "sample-size study shows recovery breaks down.",
)


def figure_sweep(
    which: str,
    preset: str = "quick",
    master_seed: int = 0,
    overrides: dict[str, Any] | None = None,
    trials: int | None = None,
    name: str | None = None,
) -> SweepSpec:
    """
    The sweep behind one of the four simulation studies at the given preset.
    `overrides` replaces fixed parameters (e.g. alpha for the second beta
    curve); `name` defaults to the swept axis.
    """
    if which not in FIGURES:
        raise InvalidArgumentError(f"Unknown figure '{which}', choose from {', '.join(FIGURES)}")
    if preset not in PRESETS:
        raise InvalidArgumentError(f"Unknown preset '{preset}', choose from {', '.join(PRESETS)}")
    chosen = PRESETS[preset]
    fixed = {**chosen.base, **_FIGURE_FIXED[which], **(overrides or {})}
    fixed.pop(which, None)
    return SweepSpec(
        axis=which,
        grid=chosen.grids[which],
        trials=trials or chosen.trials[which],
        master_seed=master_seed,
        fixed=fixed,
        name=name or which,
    )


@dataclass(frozen=True)
class RateRow:
    m: int
    mean_error: float | None
    scaled_error: float | None
    theoretical: float


@dataclass(frozen=True)
class RateStudy:
    """
    Mean error against m, consecutive error ratios against the m^(-1/2)
    prediction, the fitted log-log slope and the optional doubling-k table.
    `passed` is None when the check does not apply (noiseless regime).
    """

    params: TrialParams
    rows: tuple[RateRow, ...]
    ratios: tuple[tuple[float, float, float, bool], ...]
    fitted_exponent: float | None
    passed: bool | None
    note: str = ""
    k_table: tuple[tuple[int, float | None], ...] = ()
    k_growth: float | None = None

    def as_json(self) -> dict[str, Any]:
        return {
            "params": self.params.as_json(),
            "rows": [asdict(row) for row in self.rows],
            "ratios": [
                {"m_from": a, "m_to": b, "ratio": r, "within_band": ok}
                for a, b, r, ok in self.ratios
            ],
            "fitted_exponent": self.fitted_exponent,
            "passed": self.passed,
            "note": self.note,
            "k_table": [{"k": k, "scaled_error": s} for k, s in self.k_table],
            "k_growth": self.k_growth,
        }


# Accepted ratio band around the predicted (m_to/m_from)^(-1/2).
RATE_BAND = 0.3


def rate_scaling_study(
    params: TrialParams,
    m_grid: tuple[int, ...],
    trials: int,
    master_seed: int = 0,
    workers: int = 1,
    k_side: bool = False,
) -> RateStudy:
    """
    Check that the mean error falls like m^(-1/2). With `k_side`, also run k
    and 2k at the largest m and report how error * sqrt(m) grows (sqrt(2)
    expected).
    """
    fixed = {key: value for key, value in params.as_json().items() if key != "m"}
    grid = tuple(int(m) for m in m_grid)
    ratios_m = [b / a for a, b in zip(grid, grid[1:])]
    if ratios_m and not np.allclose(ratios_m, ratios_m[0]):
        log.warning("m grid is not geometric, ratios are compared point by point")
    sweep = run_sweep(
        SweepSpec(axis="m", grid=grid, trials=trials, master_seed=master_seed, fixed=fixed, name="rate_m"),
        workers=workers,
    )

    rows = []
    for point in sweep.points:
        mean = point.mean_error
        m = int(point.axis_value)
        rows.append(
            RateRow(
                m=m,
                mean_error=mean,
                scaled_error=mean * math.sqrt(m) if mean is not None else None,
                theoretical=theoretical_rate(params.nsr, params.k, params.p, m),
            )
        )

    ratios = []
    for a, b in zip(rows, rows[1:]):
        if a.mean_error and b.mean_error is not None:
            ratio = b.mean_error / a.mean_error
            expected = math.sqrt(a.m / b.m)
            ok = (1 - RATE_BAND) * expected <= ratio <= (1 + RATE_BAND) * expected
            ratios.append((a.m, b.m, ratio, ok))

    usable = [(r.m, r.mean_error) for r in rows if r.mean_error and r.mean_error > 0]
    exponent = None
    if len(usable) >= 2:
        exponent = float(np.polyfit(np.log([m for m, _ in usable]), np.log([e for _, e in usable]), 1)[0])

    note = ""
    if params.nsr == 0:
        passed = None
        note = "noiseless regime, rate check skipped"
    else:
        passed = bool(ratios) and len(ratios) == len(rows) - 1 and all(ok for *_, ok in ratios)

    k_table: tuple[tuple[int, float | None], ...] = ()
    k_growth = None
    if k_side and 2 * params.k <= params.p:
        m_top = grid[-1]
        k_fixed = {key: value for key, value in fixed.items() if key != "k"}
        k_fixed["m"] = m_top
        k_sweep = run_sweep(
            SweepSpec(
                axis="k",
                grid=(params.k, 2 * params.k),
                trials=trials,
                master_seed=master_seed,
                fixed=k_fixed,
                name="rate_k",
            ),
            workers=workers,
        )
        k_table = tuple(
            (int(point.axis_value), point.mean_error * math.sqrt(m_top) if point.mean_error is not None else None)
            for point in k_sweep.points
        )
        if k_table[0][1] and k_table[1][1] is not None:
            k_growth = k_table[1][1] / k_table[0][1]

    return RateStudy(
        params=params,
        rows=tuple(rows),
        ratios=tuple(ratios),
        fitted_exponent=exponent,
        passed=passed,
        note=note,
        k_table=k_table,
        k_growth=k_growth,
    )
