"""
Monte-Carlo checks of the moment identities the method rests on, for
noiseless Gaussian measurements y_j = (a_j'x)^2:

    E[y_j a_j a_j'] = ||x||^2 I + 2 x x'
    E[y_j a_jl^2]   = ||x||^2 + 2 x_l^2
    E[y_j]          = ||x||^2

plus the spectral-norm bound ||A_S|| <= sqrt(m) + sqrt(k) + t for the
support-restricted design and the zero-signal guard.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from .errors import InvalidArgumentError
from .initialization import marginal_signals, norm_estimate, restricted_second_moment
from .log import log
from .model import NoiseSpec, SeedRecord, SparseSignal, generate_instance

SPECTRAL_TOLERANCE = 0.05
STANDARD_ERRORS = 3.0
DESIGN_T = 6.0
DESIGN_FRACTION = 0.99


@dataclass(frozen=True)
class OracleCheck:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


@dataclass(frozen=True)
class OracleReport:
    seed: int
    checks: tuple[OracleCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def as_json(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "checks": [asdict(check) for check in self.checks],
        }


def flat_signal(p: int, k: int, rng: np.random.Generator, norm: float = 1.0) -> SparseSignal:
    """
    k-sparse signal with random support and entries +-norm/sqrt(k). The
    moment checks draw from it: the sampling variance of W grows with the
    sixth moment of a_l, which is worst when all of ||x|| sits on one
    coordinate.
    """
    support = rng.choice(p, size=k, replace=False)
    signs = rng.choice([-1.0, 1.0], size=k)
    return SparseSignal(p=p, support=support, values=signs * norm / math.sqrt(k))


@dataclass(frozen=True)
class MomentEstimate:
    """
    Replicate-averaged W, plus mean and standard error of the marginals I_l
    and of the measurements pooled over all replicates.
    """

    W: np.ndarray
    marginal_mean: np.ndarray
    marginal_se: np.ndarray
    measurement_mean: float
    measurement_se: float


def _mean_and_se(total: np.ndarray, total_sq: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    mean = total / n
    variance = np.maximum(total_sq - n * mean**2, 0.0) / (n - 1)
    return mean, np.sqrt(variance / n)


def moment_samples(
    signal: SparseSignal, m: int, replicates: int, seed: SeedRecord
) -> MomentEstimate:
    """
    Average W, the marginals and mean(y) over independent noiseless
    replicates of size m.
    """
    p = signal.p
    everything = np.arange(p)
    W = np.zeros((p, p))
    marginal_sum, marginal_sq = np.zeros(p), np.zeros(p)
    y_sum = y_sq = 0.0
    for r in range(replicates):
        instance = generate_instance(signal, m, NoiseSpec(), seed.child(r).generator())
        y = instance.measurements
        W += restricted_second_moment(instance, everything).matrix
        marginal_sum += m * marginal_signals(instance)
        marginal_sq += np.einsum("j,jl->l", y**2, instance.design**4)
        y_sum += m * norm_estimate(instance)
        y_sq += float(y @ y)
    n = m * replicates
    marginal_mean, marginal_se = _mean_and_se(marginal_sum, marginal_sq, n)
    y_mean, y_se = _mean_and_se(np.array(y_sum), np.array(y_sq), n)
    return MomentEstimate(W / replicates, marginal_mean, marginal_se, float(y_mean), float(y_se))


def _within_standard_errors(mean: float, se: float, expected: float) -> tuple[bool, float]:
    deviation = abs(float(mean) - float(expected))
    z = deviation / float(se) if se > 0 else math.inf
    return bool(deviation <= STANDARD_ERRORS * se), z


def check_second_moment(signal: SparseSignal, W: np.ndarray) -> OracleCheck:
    x = signal.dense()
    norm_sq = signal.two_norm**2
    expected = norm_sq * np.eye(signal.p) + 2.0 * np.outer(x, x)
    deviation = float(np.linalg.norm(W - expected, 2))
    tolerance = SPECTRAL_TOLERANCE * norm_sq
    return OracleCheck(
        name="second-moment",
        passed=deviation <= tolerance,
        measured=deviation,
        tolerance=tolerance,
        detail="||mean W - (||x||^2 I + 2xx')||_2",
    )


def check_marginals(signal: SparseSignal, estimate: MomentEstimate) -> list[OracleCheck]:
    x = signal.dense()
    norm_sq = signal.two_norm**2
    checks = []
    for l in range(signal.p):
        ok, z = _within_standard_errors(
            float(estimate.marginal_mean[l]),
            float(estimate.marginal_se[l]),
            norm_sq + 2.0 * float(x[l]) ** 2,
        )
        where = "on" if x[l] != 0 else "off"
        checks.append(
            OracleCheck(
                name=f"marginal-{l + 1}",
                passed=ok,
                measured=z,
                tolerance=STANDARD_ERRORS,
                detail=f"|I_l - (||x||^2 + 2x_l^2)| in standard errors, {where} support",
            )
        )
    return checks


def check_measurement_mean(signal: SparseSignal, estimate: MomentEstimate) -> OracleCheck:
    ok, z = _within_standard_errors(
        estimate.measurement_mean, estimate.measurement_se, signal.two_norm**2
    )
    return OracleCheck(
        name="measurement-mean",
        passed=ok,
        measured=z,
        tolerance=STANDARD_ERRORS,
        detail="|mean y - ||x||^2| in standard errors",
    )


def check_design_norm(
    seed: SeedRecord, m: int = 1000, k: int = 50, draws: int = 1000, t: float = DESIGN_T
) -> OracleCheck:
    """
    Fraction of Gaussian m x k designs with ||A_S||_2 <= sqrt(m) + sqrt(k) + t.
    """
    rng = seed.generator()
    bound = math.sqrt(m) + math.sqrt(k) + t
    hits = 0
    for _ in range(draws):
        A_S = rng.standard_normal((m, k))
        hits += int(np.linalg.norm(A_S, 2) <= bound)
    fraction = hits / draws
    return OracleCheck(
        name="design-spectral-norm",
        passed=fraction >= DESIGN_FRACTION,
        measured=fraction,
        tolerance=DESIGN_FRACTION,
        detail=f"share of draws with ||A_S|| <= sqrt({m}) + sqrt({k}) + {t:g}",
    )


def check_zero_signal_guard() -> OracleCheck:
    try:
        SparseSignal(p=3, support=np.array([0]), values=np.array([0.0]))
    except InvalidArgumentError:
        return OracleCheck("zero-signal-guard", True, 1.0, 1.0, "zero signal rejected")
    return OracleCheck("zero-signal-guard", False, 0.0, 1.0, "zero signal was accepted")


def oracle_checks(
    seed: int = 0,
    m: int = 100_000,
    p: int = 10,
    k: int = 3,
    replicates: int = 10,
    design_draws: int = 1000,
) -> OracleReport:
    """
    Run every check and return the report; nothing is raised for failing
    checks.
    """
    root = SeedRecord(seed)
    signal = flat_signal(p, k, root.child(0).generator())
    estimate = moment_samples(signal, m, replicates, root.child(1))

    checks = [
        check_second_moment(signal, estimate.W),
        *check_marginals(signal, estimate),
        check_measurement_mean(signal, estimate),
        check_design_norm(root.child(2), draws=design_draws),
        check_zero_signal_guard(),
    ]
    for check in checks:
        log.debug(f"{check.name}: measured {check.measured:.4g} (tolerance {check.tolerance:.4g})")
    return OracleReport(seed=seed, checks=tuple(checks))
