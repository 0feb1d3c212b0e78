"""
Spectral initialization with diagonal thresholding.

The norm estimate phi^2 = mean(y) and the marginals I_l = mean(y_j a_jl^2)
screen coordinates whose marginal clearly exceeds phi^2; the leading
eigenvector of the second-moment matrix W = mean(y_j a_j a_j') restricted to
the screened set, scaled to length phi, is the initial estimate.

All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import ConvergenceError, DegenerateInstanceError, InvalidArgumentError
from .log import log
from .model import ProblemInstance

DEFAULT_ALPHA = 0.1
DEFAULT_EIG_TOL = 1e-8
DEFAULT_EIG_MAX_ITER = 1000
SYMMETRY_TOL = 1e-8


@dataclass(frozen=True)
class EigenResult:
    """
    Unit eigenvector (largest-magnitude coordinate positive), its Rayleigh
    quotient, the number of matrix-vector products used and the final
    residual ||Wv - lambda v||.
    """

    vector: np.ndarray
    value: float
    iterations: int
    residual: float
    converged: bool = True


@dataclass(frozen=True)
class RestrictedMoment:
    """
    W restricted to the rows and columns in `indices` (0-based, increasing).
    """

    matrix: np.ndarray
    indices: np.ndarray


@dataclass(frozen=True)
class InitResult:
    phi_sq: float
    marginals: np.ndarray
    selected: np.ndarray
    x0: np.ndarray
    eigenvalue: float
    eigen_iterations: int
    eigen_residual: float
    eigen_converged: bool = True
    fallback: bool = False

    @property
    def phi(self) -> float:
        return math.sqrt(max(self.phi_sq, 0.0))

    def as_json(self) -> dict[str, Any]:
        return {
            "phi_sq": self.phi_sq,
            "selected": [int(i) + 1 for i in self.selected],
            "fallback": self.fallback,
            "eigenvalue": self.eigenvalue,
            "eigen_iterations": self.eigen_iterations,
            "eigen_residual": self.eigen_residual,
            "eigen_converged": self.eigen_converged,
            "x0": [float(v) for v in self.x0],
        }


def norm_estimate(instance: ProblemInstance) -> float:
    """
    phi^2 = (1/m) sum_j y_j, an estimate of ||x||^2.
    """
    return float(np.mean(instance.measurements))


def marginal_signals(instance: ProblemInstance) -> np.ndarray:
    """
    I_l = (1/m) sum_j y_j a_jl^2 for every coordinate l.
    """
    A, y = instance.design, instance.measurements
    return np.einsum("j,jl,jl->l", y, A, A) / instance.m


def support_cutoff(phi_sq: float, alpha: float, m: int, p: int) -> float:
    """
    (1 + alpha sqrt(log(mp) / m)) phi^2.

    >>> f"{support_cutoff(1.0, 0.1, 100, 100):.4f}"
    '1.0303'
    """
    return (1.0 + alpha * math.sqrt(math.log(m * p) / m)) * phi_sq


def select_support(
    marginals: np.ndarray, phi_sq: float, alpha: float, m: int, p: int
) -> np.ndarray:
    """
    Coordinates whose marginal strictly exceeds the cutoff. May be empty.
    """
    if not math.isfinite(alpha) or alpha < 0:
        raise InvalidArgumentError(f"alpha must be >= 0, got {alpha}")
    if m < 1 or p < 1:
        raise InvalidArgumentError(f"m and p must be at least 1, got m={m}, p={p}")
    cutoff = support_cutoff(phi_sq, alpha, m, p)
    return np.flatnonzero(np.asarray(marginals) > cutoff)


def restricted_second_moment(
    instance: ProblemInstance, selected: np.ndarray
) -> RestrictedMoment:
    """
    W_SS = (1/m) sum_j y_j a_jS a_jS' on the selected coordinates only.
    """
    indices = np.unique(np.asarray(selected, dtype=np.int64))
    if indices.size == 0:
        raise InvalidArgumentError("the selected coordinate set is empty")
    if indices[0] < 0 or indices[-1] >= instance.p:
        raise InvalidArgumentError(f"selected indices must lie in [0, {instance.p})")
    A_S = instance.design[:, indices]
    W = A_S.T @ (instance.measurements[:, None] * A_S) / instance.m
    return RestrictedMoment(matrix=0.5 * (W + W.T), indices=indices)


def _normalize_sign(v: np.ndarray) -> np.ndarray:
    # np.argmax picks the lowest index among ties.
    return -v if v[np.argmax(np.abs(v))] < 0 else v


def _power_iteration(
    W: np.ndarray,
    tol: float,
    max_iter: int,
    rng: np.random.Generator,
    offset: float = 0.0,
    start: np.ndarray | None = None,
) -> EigenResult:
    """
    Power iteration from a unit start vector, by default the normalised
    all-ones vector. The stopping test is relative to the eigenvalue of
    W - offset * I, so a shifted matrix is held to the tolerance of the
    unshifted problem.
    """
    d = W.shape[0]
    v = np.full(d, 1.0 / math.sqrt(d)) if start is None else start
    best: EigenResult | None = None
    first_residual = math.inf
    restarted = False

    for iteration in range(1, max_iter + 1):
        w = W @ v
        value = float(v @ w)
        residual = float(np.linalg.norm(w - value * v))
        if best is None or residual < best.residual:
            best = EigenResult(v, value, iteration, residual, converged=False)
        if residual <= tol * max(abs(value - offset), 1.0):
            return EigenResult(v, value, iteration, residual)
        if iteration == 1:
            first_residual = residual

        norm = np.linalg.norm(w)
        v = w / norm
        if not restarted and 1 < iteration == max_iter // 2 and residual >= first_residual:
            # No decay after half the budget: the start is probably orthogonal
            # to the dominant eigenspace.
            log.debug(f"Power iteration stalled at residual {residual:.3e}, restarting")
            v = rng.standard_normal(d)
            v /= np.linalg.norm(v)
            restarted = True

    raise ConvergenceError(
        f"power iteration did not reach residual {tol:g} in {max_iter} iterations "
        f"(best {best.residual:.3e})",
        best=best,
    )


def _gershgorin_shift(W: np.ndarray) -> float:
    """
    Smallest s >= 0 for which every Gershgorin disc of W + sI lies in
    [0, inf). The shifted matrix is positive semidefinite, so its dominant
    eigenvalue is the largest one.

    >>> _gershgorin_shift(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    0.0
    >>> _gershgorin_shift(np.diag([1.0, -3.0]))
    3.0
    """
    diagonal = np.diag(W)
    radii = np.sum(np.abs(W), axis=1) - np.abs(diagonal)
    return max(0.0, float(np.max(radii - diagonal)))


def _confirm(
    W: np.ndarray,
    result: EigenResult,
    tol: float,
    max_iter: int,
    rng: np.random.Generator,
    offset: float,
) -> EigenResult:
    """
    Rerun from the converged vector mixed with a random unit direction. An
    all-ones start that is itself an eigenvector of a smaller eigenvalue
    converges at once; the mixed start has a component along the largest one.
    The first result stands unless the rerun finds a larger eigenvalue.
    """
    d = W.shape[0]
    if d == 1:
        return result
    direction = rng.standard_normal(d)
    start = result.vector + direction / np.linalg.norm(direction)
    start /= np.linalg.norm(start)
    margin = tol * max(abs(result.value - offset), 1.0)
    try:
        check = _power_iteration(W, tol, max_iter, rng, offset=offset, start=start)
    except ConvergenceError as e:
        if e.best.value > result.value + margin:
            raise
        return result
    if check.value <= result.value + margin:
        return result
    log.debug(
        f"All-ones start stopped at eigenvalue {result.value - offset:.6g}, "
        f"random start found {check.value - offset:.6g}"
    )
    return EigenResult(check.vector, check.value, result.iterations + check.iterations, check.residual)


def _unshift(result: EigenResult, W: np.ndarray, shift: float) -> EigenResult:
    value = result.value - shift
    residual = float(np.linalg.norm(W @ result.vector - value * result.vector))
    return EigenResult(
        _normalize_sign(result.vector), value, result.iterations, residual, result.converged
    )


def leading_eigenvector(
    matrix: np.ndarray,
    tol: float = DEFAULT_EIG_TOL,
    max_iter: int = DEFAULT_EIG_MAX_ITER,
    rng: np.random.Generator | None = None,
) -> EigenResult:
    """
    Eigenpair of the algebraically largest eigenvalue of a symmetric matrix,
    with ||Wv - lambda v|| <= tol * max(|lambda|, 1).

    The iteration runs on W + sI with the Gershgorin shift s, where the
    largest eigenvalue is also the dominant one. The all-ones start is then
    checked by a second run from a randomly perturbed start, drawn from rng.
    """
    W = np.asarray(matrix, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] < 1:
        raise InvalidArgumentError(f"expected a nonempty square matrix, got shape {W.shape}")
    if not np.all(np.isfinite(W)):
        raise InvalidArgumentError("matrix entries must be finite")
    asymmetry = float(np.max(np.abs(W - W.T)))
    if asymmetry > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(W)))):
        raise InvalidArgumentError(f"matrix is not symmetric (max |W - W'| = {asymmetry:.3e})")
    if not (math.isfinite(tol) and tol > 0) or max_iter < 1:
        raise InvalidArgumentError("tol must be positive and finite, max_iter at least 1")
    if rng is None:
        rng = np.random.default_rng(0)

    shift = _gershgorin_shift(W)
    shifted = W + shift * np.eye(W.shape[0]) if shift > 0 else W
    try:
        result = _power_iteration(shifted, tol, max_iter, rng, offset=shift)
        result = _confirm(shifted, result, tol, max_iter, rng, offset=shift)
    except ConvergenceError as e:
        e.best = _unshift(e.best, W, shift)
        raise
    return _unshift(result, W, shift)


def initialize(
    instance: ProblemInstance,
    alpha: float = DEFAULT_ALPHA,
    eig_tol: float = DEFAULT_EIG_TOL,
    eig_max_iter: int = DEFAULT_EIG_MAX_ITER,
    rng: np.random.Generator | None = None,
) -> InitResult:
    """
    Screen coordinates, compute the restricted leading eigenvector and scale
    it to the norm estimate. If no coordinate passes the screen, the single
    coordinate with the largest marginal is used and `fallback` is set.
    """
    if not math.isfinite(alpha) or alpha < 0:
        raise InvalidArgumentError(f"alpha must be >= 0, got {alpha}")
    m, p = instance.m, instance.p

    phi_sq = norm_estimate(instance)
    if phi_sq <= 0:
        raise DegenerateInstanceError(
            f"norm estimate phi^2 = {phi_sq:.4g} is not positive, noise overwhelms the signal"
        )

    marginals = marginal_signals(instance)
    selected = select_support(marginals, phi_sq, alpha, m, p)
    fallback = selected.size == 0
    if fallback:
        selected = np.array([int(np.argmax(marginals))])
        log.warning(
            f"No coordinate passed the screen at alpha={alpha}, "
            f"falling back to coordinate {selected[0] + 1}"
        )

    moment = restricted_second_moment(instance, selected)
    try:
        eigen = leading_eigenvector(moment.matrix, eig_tol, eig_max_iter, rng)
    except ConvergenceError as e:
        eigen = e.best
        log.warning(f"{e}; using the best iterate")

    x0 = np.zeros(p)
    x0[moment.indices] = math.sqrt(phi_sq) * eigen.vector
    log.debug(
        f"Initialization: phi^2={phi_sq:.4g}, |S0|={moment.indices.size}, "
        f"lambda={eigen.value:.4g} after {eigen.iterations} iterations"
    )
    return InitResult(
        phi_sq=phi_sq,
        marginals=marginals,
        selected=moment.indices,
        x0=x0,
        eigenvalue=eigen.value,
        eigen_iterations=eigen.iterations,
        eigen_residual=eigen.residual,
        eigen_converged=eigen.converged,
        fallback=fallback,
    )
