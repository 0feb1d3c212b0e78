"""
Thresholded Wirtinger flow: gradient descent on the quartic empirical risk

    f(z) = (1/4m) sum_j ((a_j'z)^2 - y_j)^2

where every gradient step of size mu/phi^2 is followed by a coordinatewise
threshold at the data-driven level (mu/phi^2) tau(z), with

    tau(z)^2 = (beta log(mp) / m^2) sum_j ((a_j'z)^2 - y_j)^2 (a_j'z)^2.

phi^2 is the norm estimate from initialization and stays fixed for the whole
run.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .errors import DivergenceError, InvalidArgumentError
from .model import ProblemInstance, SparseSignal, relative_error
from .thresholding import ThresholdOperator

DEFAULT_MU = 0.01
DEFAULT_BETA = 1.0
DEFAULT_ITERATIONS = 1000
# An iterate longer than this multiple of phi counts as diverged.
DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class TwfConfig:
    """
    Tuning of the iteration. `phi_sq` is the norm estimate carried over from
    initialization.
    """

    phi_sq: float
    mu: float = DEFAULT_MU
    beta: float = DEFAULT_BETA
    iterations: int = DEFAULT_ITERATIONS
    operator: ThresholdOperator = ThresholdOperator.SOFT
    record_trajectory: bool = False

    def __post_init__(self):
        if not math.isfinite(self.mu) or self.mu <= 0:
            raise InvalidArgumentError("mu must be positive")
        if not math.isfinite(self.beta) or self.beta < 0:
            raise InvalidArgumentError("beta must be >= 0")
        if self.iterations < 0:
            raise InvalidArgumentError("iterations must be >= 0")
        if not math.isfinite(self.phi_sq) or self.phi_sq <= 0:
            raise InvalidArgumentError("phi_sq must be positive")
        object.__setattr__(self, "operator", ThresholdOperator.parse(self.operator))

    @property
    def step_scale(self) -> float:
        return self.mu / self.phi_sq

    def as_json(self) -> dict[str, Any]:
        return {
            "phi_sq": self.phi_sq,
            "mu": self.mu,
            "beta": self.beta,
            "iterations": self.iterations,
            "operator": self.operator.value,
        }


@dataclass(frozen=True)
class IterationRecord:
    """
    Diagnostics of iterate number `iteration`. `step_norm` is the length of
    the step that produced it (0 for the initial iterate).
    """

    iteration: int
    risk: float
    tau: float
    step_norm: float
    support_size: int
    relative_error: float | None = None


@dataclass
class TwfTrace:
    final: np.ndarray
    iterations: int
    records: list[IterationRecord] = field(default_factory=list)

    def as_json(self) -> dict[str, Any]:
        return {
            "iterations": self.iterations,
            "final": [float(v) for v in self.final],
            "records": [asdict(record) for record in self.records],
        }


def _check_point(z: np.ndarray, instance: ProblemInstance) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (instance.p,):
        raise InvalidArgumentError(f"expected a vector of length {instance.p}, got shape {z.shape}")
    return z


def _residuals(z: np.ndarray, instance: ProblemInstance) -> tuple[np.ndarray, np.ndarray]:
    """
    w = Az and r = w^2 - y, the two quantities every other formula needs.
    """
    w = instance.design @ z
    return w, w**2 - instance.measurements


def _risk(r: np.ndarray, m: int) -> float:
    return float(r @ r) / (4 * m)


def _tau(w: np.ndarray, r: np.ndarray, m: int, p: int, beta: float) -> float:
    return math.sqrt(beta * math.log(m * p) / m**2 * float(np.sum((r * w) ** 2)))


def empirical_risk(z: np.ndarray, instance: ProblemInstance) -> float:
    z = _check_point(z, instance)
    _, r = _residuals(z, instance)
    return _risk(r, instance.m)


def gradient(z: np.ndarray, instance: ProblemInstance) -> np.ndarray:
    """
    (1/m) sum_j ((a_j'z)^2 - y_j)(a_j'z) a_j.
    """
    z = _check_point(z, instance)
    w, r = _residuals(z, instance)
    return instance.design.T @ (r * w) / instance.m


def threshold_level(z: np.ndarray, instance: ProblemInstance, beta: float) -> float:
    if not math.isfinite(beta) or beta < 0:
        raise InvalidArgumentError(f"beta must be >= 0, got {beta}")
    z = _check_point(z, instance)
    w, r = _residuals(z, instance)
    return _tau(w, r, instance.m, instance.p, beta)


def _advance(
    z: np.ndarray, instance: ProblemInstance, config: TwfConfig
) -> tuple[np.ndarray, float, float]:
    """
    One update from z. Returns the next iterate together with the risk and
    threshold level at z, all from a single residual pass.
    """
    m = instance.m
    with np.errstate(over="ignore", invalid="ignore"):
        w, r = _residuals(z, instance)
        grad = instance.design.T @ (r * w) / m
        tau = _tau(w, r, m, instance.p, config.beta)
        scale = config.step_scale
        candidate = z - scale * grad
    if not (math.isfinite(tau) and np.all(np.isfinite(candidate))):
        return np.full_like(candidate, np.nan), _risk(r, m), tau
    return config.operator.apply(candidate, scale * tau), _risk(r, m), tau


def twf_step(
    z: np.ndarray, instance: ProblemInstance, config: TwfConfig, iteration: int = 0
) -> np.ndarray:
    """
    T_{(mu/phi^2) tau(z)}(z - (mu/phi^2) grad f(z)). Raises DivergenceError
    tagged with `iteration` if the result is not finite.
    """
    z = _check_point(z, instance)
    z_next, _, _ = _advance(z, instance, config)
    if not np.all(np.isfinite(z_next)):
        raise DivergenceError(f"non-finite iterate at iteration {iteration}", iteration)
    return z_next


def _record(
    iteration: int,
    z: np.ndarray,
    risk: float,
    tau: float,
    step_norm: float,
    truth: SparseSignal | None,
) -> IterationRecord:
    return IterationRecord(
        iteration=iteration,
        risk=risk,
        tau=tau,
        step_norm=step_norm,
        support_size=int(np.count_nonzero(z)),
        relative_error=relative_error(z, truth) if truth is not None else None,
    )


def run(
    init: np.ndarray,
    instance: ProblemInstance,
    config: TwfConfig,
    truth: SparseSignal | None = None,
) -> TwfTrace:
    """
    Iterate `twf_step` config.iterations times from `init`. With
    record_trajectory set, the trace holds one record per iterate including
    the initial one; `truth` adds the relative error to each record.
    """
    z = _check_point(init, instance).copy()
    if not np.all(np.isfinite(z)):
        raise InvalidArgumentError("initial estimate must be finite")
    limit = DIVERGENCE_FACTOR * math.sqrt(config.phi_sq)
    records: list[IterationRecord] = []
    step_norm = 0.0

    for t in range(config.iterations):
        z_next, risk, tau = _advance(z, instance, config)
        if config.record_trajectory:
            records.append(_record(t, z, risk, tau, step_norm, truth))
        if not np.all(np.isfinite(z_next)) or np.linalg.norm(z_next) > limit:
            raise DivergenceError(
                f"iterate {t + 1} diverged (non-finite or longer than {limit:.3g})",
                iteration=t + 1,
                trace=TwfTrace(final=z, iterations=t, records=records),
            )
        step_norm = float(np.linalg.norm(z_next - z))
        z = z_next

    if config.record_trajectory:
        w, r = _residuals(z, instance)
        tau = _tau(w, r, instance.m, instance.p, config.beta)
        records.append(_record(config.iterations, z, _risk(r, instance.m), tau, step_norm, truth))
    return TwfTrace(final=z, iterations=config.iterations, records=records)


def required_sample_size(k: int, p: int, m: int, nsr: float, constant: float = 1.0) -> float:
    """
    C (1 + NSR^2) k^2 log(mp), the sample size under which the convergence
    guarantee is stated (sigma^2/||x||^4 = NSR^2). The absolute constant is
    unknown, so this is an advisory figure only.
    """
    return constant * (1.0 + nsr**2) * k**2 * math.log(m * p)


def theoretical_rate(nsr: float, k: int, p: int, m: int) -> float:
    """
    Relative error rate NSR sqrt(k log p / m), i.e. (sigma/||x||) sqrt(k log p / m)
    divided by ||x||. It is also the minimax lower-bound rate.
    """
    return nsr * math.sqrt(k * math.log(p) / m)
