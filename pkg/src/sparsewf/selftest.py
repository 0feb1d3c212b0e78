"""
Exact property suites that an installed copy can run without pytest. Each
suite returns a SuiteResult; none of them raises on a failed property.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .experiments import SweepSpec, run_sweep
from .initialization import leading_eigenvector
from .log import log, mute_log
from .model import NoiseSpec, SeedRecord, generate_instance, generate_signal
from .oracles import oracle_checks
from .thresholding import ThresholdOperator, hard_threshold
from .twf import TwfConfig, empirical_risk, gradient, run, twf_step

ThresholdFn = Callable[[np.ndarray, float], np.ndarray]

FAULTS = ("threshold",)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


def _corrupted_threshold(v: np.ndarray, tau: float) -> np.ndarray:
    # Keeps entries with tau/2 < |v| <= tau, which the contract forbids.
    return hard_threshold(v, tau / 2)


def threshold_contract(seed: int, fault: str | None = None, pairs: int = 1_000_000) -> SuiteResult:
    """
    T(v) = 0 for |v| <= tau and |T(v) - v| <= tau, for both operators over
    `pairs` random (v, tau) pairs, including values exactly at the level.
    """
    operators: dict[str, ThresholdFn] = {op.value: op.apply for op in ThresholdOperator}
    if fault == "threshold":
        operators = {name: _corrupted_threshold for name in operators}
    rng = SeedRecord(seed, (1,)).generator()
    batch = 1000
    violations = 0
    for _ in range(pairs // batch):
        tau = float(rng.uniform(0.0, 2.0))
        v = rng.normal(0.0, 2.0, size=batch)
        v[:10] = np.array([tau, -tau, 0.0, tau / 2, -tau / 2, 2 * tau, -2 * tau, 1e-300, tau + 1e-12, -tau])
        for apply in operators.values():
            out = apply(v, tau)
            violations += int(np.count_nonzero(out[np.abs(v) <= tau]))
            violations += int(np.count_nonzero(np.abs(out - v) > tau))
    return SuiteResult(
        "threshold-contract",
        violations == 0,
        f"{violations} violations over {pairs} pairs and {len(operators)} operators",
    )


def gradient_check(seed: int, fault: str | None = None, instances: int = 100) -> SuiteResult:
    """
    Analytic gradient against central differences of the empirical risk.
    """
    root = SeedRecord(seed, (2,))
    worst = 0.0
    h = 1e-6
    for i in range(instances):
        rng = root.child(i).generator()
        p = int(rng.integers(2, 21))
        m = int(rng.integers(5, 51))
        signal = generate_signal(p, int(rng.integers(1, p + 1)), rng)
        instance = generate_instance(signal, m, NoiseSpec("gaussian", 0.1), rng)
        z = rng.standard_normal(p)
        analytic = gradient(z, instance)
        numeric = np.empty(p)
        for l in range(p):
            e = np.zeros(p)
            e[l] = h
            numeric[l] = (empirical_risk(z + e, instance) - empirical_risk(z - e, instance)) / (2 * h)
        error = float(np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), 1e-12))
        worst = max(worst, error)
    return SuiteResult("gradient", worst <= 1e-5, f"worst relative error {worst:.2e} over {instances} instances")


def random_symmetric(rng: np.random.Generator, d: int) -> np.ndarray:
    """
    A d x d symmetric matrix with algebraically largest eigenvalue 1 and all
    others in [-0.8, 0.8]; every other matrix instead has a dominant negative
    eigenvalue -1.5.
    """
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    values = rng.uniform(-0.8, 0.8, size=d)
    values[0] = 1.0
    if d > 2 and rng.random() < 0.5:
        values[1] = -1.5
    return (q * values) @ q.T


def eigensolver_check(seed: int, fault: str | None = None, matrices: int = 100) -> SuiteResult:
    """
    Power iteration against numpy's dense eigendecomposition.
    """
    root = SeedRecord(seed, (3,))
    worst_value = worst_vector = 0.0
    for i in range(matrices):
        rng = root.child(i).generator()
        d = int(rng.integers(1, 21))
        W = random_symmetric(rng, d)
        W = 0.5 * (W + W.T)
        result = leading_eigenvector(W, tol=1e-10, max_iter=10_000, rng=rng)
        values, vectors = np.linalg.eigh(W)
        expected = vectors[:, -1]
        if expected @ result.vector < 0:
            expected = -expected
        worst_value = max(worst_value, abs(result.value - values[-1]))
        worst_vector = max(worst_vector, float(np.linalg.norm(result.vector - expected)))
    passed = worst_value <= 1e-8 and worst_vector <= 1e-6
    return SuiteResult(
        "eigensolver",
        passed,
        f"worst eigenvalue error {worst_value:.2e}, eigenvector error {worst_vector:.2e}",
    )


def _small_instance(seed: SeedRecord, nsr: float):
    rng = seed.generator()
    signal = generate_signal(50, 3, rng)
    noise = NoiseSpec.gaussian_or_none(nsr * signal.two_norm**2)
    return generate_instance(signal, 300, noise, rng, seed=seed), signal


def equivariance_check(seed: int, fault: str | None = None) -> SuiteResult:
    """
    Negating the initial estimate negates every iterate exactly, for both
    operators.
    """
    instance, signal = _small_instance(SeedRecord(seed, (4,)), nsr=0.5)
    phi_sq = float(np.mean(instance.measurements))
    z0 = SeedRecord(seed, (4, 1)).generator().standard_normal(instance.p) * np.sqrt(phi_sq / instance.p)
    mismatches = []
    for op in ThresholdOperator:
        config = TwfConfig(phi_sq=phi_sq, iterations=50, operator=op)
        plus = run(z0, instance, config).final
        minus = run(-z0, instance, config).final
        if not np.array_equal(minus, -plus):
            mismatches.append(op.value)
        if not np.array_equal(op.apply(-z0, 0.3), -op.apply(z0, 0.3)):
            mismatches.append(f"{op.value} operator")
    return SuiteResult(
        "equivariance",
        not mismatches,
        "exact sign equivariance" if not mismatches else f"broken for {', '.join(mismatches)}",
    )


def fixed_point_check(seed: int, fault: str | None = None) -> SuiteResult:
    """
    Without noise, x and -x are fixed points of one update (up to rounding
    in the residuals).
    """
    instance, signal = _small_instance(SeedRecord(seed, (5,)), nsr=0.0)
    x = signal.dense()
    config = TwfConfig(phi_sq=signal.two_norm**2)
    atol = 1e-12 * signal.two_norm
    stays = all(
        np.allclose(twf_step(s * x, instance, config), s * x, rtol=0.0, atol=atol) for s in (1.0, -1.0)
    )
    return SuiteResult("fixed-point", stays, "x and -x are fixed" if stays else "the true signal moved")


def oracle_suite(seed: int, fault: str | None = None) -> SuiteResult:
    report = oracle_checks(seed)
    failed = [check.name for check in report.checks if not check.passed]
    return SuiteResult(
        "oracles",
        not failed,
        f"{len(report.checks)} checks passed" if not failed else f"failed: {', '.join(failed)}",
    )


def determinism_check(seed: int, fault: str | None = None) -> SuiteResult:
    """
    The same small sweep on one and on two workers gives identical results.
    """
    spec = SweepSpec(
        axis="beta",
        grid=(0.0, 1.0),
        trials=2,
        master_seed=seed,
        fixed={"p": 30, "m": 200, "k": 3, "nsr": 0.5, "iterations": 30},
    )
    serial = json.dumps(run_sweep(spec, workers=1).as_json())
    parallel = json.dumps(run_sweep(spec, workers=2).as_json())
    same = serial == parallel
    return SuiteResult("determinism", same, "workers 1 and 2 agree" if same else "results differ by worker count")


SUITES: dict[str, Callable[[int, str | None], SuiteResult]] = {
    "threshold-contract": threshold_contract,
    "gradient": gradient_check,
    "eigensolver": eigensolver_check,
    "equivariance": equivariance_check,
    "fixed-point": fixed_point_check,
    "oracles": oracle_suite,
    "determinism": determinism_check,
}


def run_suites(
    names: list[str] | None = None, seed: int = 0, fault: str | None = None
) -> list[SuiteResult]:
    """
    Run the named suites (all by default) in their canonical order.
    """
    chosen = list(SUITES) if not names else [name for name in SUITES if name in names]
    results = []
    for name in chosen:
        log.debug(f"Running suite '{name}'")
        with mute_log(logging.ERROR):
            results.append(SUITES[name](seed, fault))
    return results
