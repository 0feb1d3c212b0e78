"""
Coordinatewise threshold operators T_tau. Both kinds satisfy, for every
tau >= 0 and every x,

    T_tau(x) = 0            whenever |x| <= tau,
    |T_tau(x) - x| <= tau,

with the comparisons holding in floating point, not only in exact arithmetic.
"""

from enum import Enum

import numpy as np

from .errors import InvalidArgumentError


def _check_level(tau: float) -> float:
    tau = float(tau)
    if not np.isfinite(tau) or tau < 0:
        raise InvalidArgumentError(f"threshold level must be finite and >= 0, got {tau}")
    return tau


def soft_threshold(v: np.ndarray, tau: float) -> np.ndarray:
    """
    sign(v) * max(|v| - tau, 0).

    >>> soft_threshold(np.array([3.0, -0.5, 1.0]), 1.0).tolist()
    [2.0, -0.0, 0.0]
    """
    tau = _check_level(tau)
    v = np.asarray(v, dtype=np.float64)
    magnitude = np.abs(v)
    shrunk = np.maximum(magnitude - tau, 0.0)
    # Rounding in |v| - tau can leave |v| - shrunk one ulp above tau; moving
    # shrunk one ulp towards |v| restores |T(v) - v| <= tau.
    over = magnitude - shrunk > tau
    shrunk = np.where(over, np.nextafter(shrunk, np.inf), shrunk)
    return np.copysign(shrunk, v)


def hard_threshold(v: np.ndarray, tau: float) -> np.ndarray:
    """
    v where |v| > tau, else 0.

    >>> hard_threshold(np.array([3.0, -0.5, 1.0]), 1.0).tolist()
    [3.0, 0.0, 0.0]
    """
    tau = _check_level(tau)
    v = np.asarray(v, dtype=np.float64)
    return np.where(np.abs(v) > tau, v, 0.0)


class ThresholdOperator(str, Enum):
    """
    Threshold kind, named "soft" or "hard" in configuration files.
    """

    SOFT = "soft"
    HARD = "hard"

    def apply(self, v: np.ndarray, tau: float) -> np.ndarray:
        if self is ThresholdOperator.SOFT:
            return soft_threshold(v, tau)
        return hard_threshold(v, tau)

    @staticmethod
    def parse(name: "str | ThresholdOperator") -> "ThresholdOperator":
        try:
            return ThresholdOperator(name)
        except ValueError:
            raise InvalidArgumentError(
                f"Unknown threshold operator '{name}', choose from soft, hard"
            )


def apply(op: ThresholdOperator, v: np.ndarray, tau: float) -> np.ndarray:
    """
    Apply the operator `op` at level `tau` to every coordinate of `v`.
    """
    return ThresholdOperator.parse(op).apply(v, tau)
