"""
Measurement model for sparse phase retrieval: ground-truth signals, Gaussian
designs, sub-exponential noise, quadratic measurements y_j = (a_j'x)^2 + eps_j,
and the sign-invariant relative error.

Indices are 0-based in memory; artifacts written to disk use 1-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InvalidArgumentError

NOISE_FAMILIES = ("none", "gaussian", "laplace", "centered_exponential")


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SeedRecord:
    """
    Provenance of a random stream: the master seed and the spawn key of the
    substream derived from it.
    """

    master_seed: int
    spawn_key: tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        """
        Counter-based Philox stream for this record. Distinct spawn keys give
        independent streams regardless of the order they are created in.
        """
        sequence = np.random.SeedSequence(self.master_seed, spawn_key=self.spawn_key)
        return np.random.Generator(np.random.Philox(sequence))

    def child(self, *key: int) -> SeedRecord:
        return SeedRecord(self.master_seed, self.spawn_key + tuple(key))

    def label(self) -> str:
        """
        >>> SeedRecord(7, (2, 3)).label()
        '7/2/3'
        """
        return "/".join(str(part) for part in (self.master_seed, *self.spawn_key))

    def as_json(self) -> dict[str, Any]:
        return {"master_seed": self.master_seed, "spawn_key": list(self.spawn_key)}

    @staticmethod
    def from_json(data: dict[str, Any]) -> SeedRecord:
        return SeedRecord(int(data["master_seed"]), tuple(int(k) for k in data["spawn_key"]))


@dataclass(frozen=True)
class SparseSignal:
    """
    A k-sparse ground truth x in R^p with explicit support. `support` holds
    distinct 0-based indices in increasing order, `values` the matching
    nonzero amplitudes.
    """

    p: int
    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.p < 1:
            raise InvalidArgumentError(f"p must be at least 1, got {self.p}")
        support = np.asarray(self.support, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if support.size != values.size:
            raise InvalidArgumentError(
                f"support has {support.size} indices but {values.size} values were given"
            )
        if support.size == 0:
            raise InvalidArgumentError("support must not be empty")
        if np.unique(support).size != support.size:
            raise InvalidArgumentError("support indices must be distinct")
        if support.min() < 0 or support.max() >= self.p:
            raise InvalidArgumentError(f"support indices must lie in [0, {self.p})")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("signal values must be finite")
        order = np.argsort(support)
        support, values = support[order], values[order]
        if not np.any(values != 0.0):
            raise InvalidArgumentError("the zero signal is not allowed")
        object.__setattr__(self, "support", _frozen(support))
        object.__setattr__(self, "values", _frozen(values))

    @property
    def k(self) -> int:
        return int(self.support.size)

    @property
    def two_norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def dense(self) -> np.ndarray:
        x = np.zeros(self.p)
        x[self.support] = self.values
        return x

    def as_json(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "support": [int(i) + 1 for i in self.support],
            "values": [float(v) for v in self.values],
        }

    @staticmethod
    def from_json(data: dict[str, Any]) -> SparseSignal:
        return SparseSignal(
            p=int(data["p"]),
            support=np.asarray(data["support"], dtype=np.int64) - 1,
            values=np.asarray(data["values"], dtype=np.float64),
        )


@dataclass(frozen=True)
class NoiseSpec:
    """
    Distribution of the additive noise. `scale` is the natural scale of each
    family: the standard deviation for gaussian, the Laplace scale b for
    laplace, and the rate inverse for centered_exponential (Exp(scale) - scale).
    All three are sub-exponential with psi_1 norm equal to a family-dependent
    constant times `scale`; no normalisation is applied.
    """

    family: str = "none"
    scale: float = 0.0

    def __post_init__(self):
        if self.family not in NOISE_FAMILIES:
            raise InvalidArgumentError(
                f"Unknown noise family '{self.family}', choose from {', '.join(NOISE_FAMILIES)}"
            )
        if not np.isfinite(self.scale) or self.scale < 0:
            raise InvalidArgumentError(f"noise scale must be >= 0, got {self.scale}")
        if self.family == "none" and self.scale != 0:
            raise InvalidArgumentError("noise family 'none' requires scale 0")

    @staticmethod
    def gaussian_or_none(scale: float) -> NoiseSpec:
        return NoiseSpec("gaussian", scale) if scale > 0 else NoiseSpec()

    def draw(self, m: int, rng: np.random.Generator) -> np.ndarray:
        """
        Draw m mean-zero noise values.
        """
        if self.family == "none" or self.scale == 0:
            return np.zeros(m)
        if self.family == "gaussian":
            return rng.normal(0.0, self.scale, size=m)
        if self.family == "laplace":
            return rng.laplace(0.0, self.scale, size=m)
        return rng.exponential(self.scale, size=m) - self.scale

    def as_json(self) -> dict[str, Any]:
        return {"family": self.family, "scale": self.scale}


def measure(design: np.ndarray, signal: SparseSignal, noise: np.ndarray) -> np.ndarray:
    """
    Quadratic measurements y = (A x)^2 + noise. Every measurement path goes
    through here so stored and recomputed measurements agree bit for bit.
    """
    return (design @ signal.dense()) ** 2 + noise


@dataclass(frozen=True)
class ProblemInstance:
    """
    One realisation of the measurement model. `signal` is None for instances
    loaded from files without ground truth.
    """

    design: np.ndarray
    measurements: np.ndarray
    noise: np.ndarray
    noise_spec: NoiseSpec = field(default_factory=NoiseSpec)
    seed: SeedRecord | None = None
    signal: SparseSignal | None = None

    def __post_init__(self):
        design = np.ascontiguousarray(self.design, dtype=np.float64)
        measurements = np.asarray(self.measurements, dtype=np.float64).ravel()
        noise = np.asarray(self.noise, dtype=np.float64).ravel()
        if design.ndim != 2:
            raise InvalidArgumentError("design must be a matrix")
        m, p = design.shape
        if m < 1 or p < 1:
            raise InvalidArgumentError(f"design must be at least 1x1, got {m}x{p}")
        if measurements.size != m or noise.size != m:
            raise InvalidArgumentError(
                f"expected {m} measurements and noise values, got "
                f"{measurements.size} and {noise.size}"
            )
        if self.signal is not None:
            if self.signal.p != p:
                raise InvalidArgumentError(
                    f"signal dimension {self.signal.p} does not match design width {p}"
                )
            expected = measure(design, self.signal, noise)
            if not np.allclose(measurements, expected, rtol=1e-12, atol=1e-12):
                raise InvalidArgumentError(
                    "measurements are inconsistent with design, signal and noise"
                )
        object.__setattr__(self, "design", _frozen(design))
        object.__setattr__(self, "measurements", _frozen(measurements))
        object.__setattr__(self, "noise", _frozen(noise))

    @property
    def m(self) -> int:
        return self.design.shape[0]

    @property
    def p(self) -> int:
        return self.design.shape[1]

    @property
    def noise_scale(self) -> float:
        return self.noise_spec.scale

    def with_measurements(self, measurements: np.ndarray) -> ProblemInstance:
        """
        The same design with replaced measurements and no ground truth; used
        for rescaled or externally supplied data.
        """
        return ProblemInstance(
            design=self.design,
            measurements=measurements,
            noise=np.zeros(self.m),
            noise_spec=NoiseSpec(),
            seed=self.seed,
        )


def generate_signal(p: int, k: int, rng: np.random.Generator) -> SparseSignal:
    """
    A k-sparse signal with uniformly random support and i.i.d. N(0, 1)
    amplitudes.
    """
    if p < 1:
        raise InvalidArgumentError(f"p must be at least 1, got {p}")
    if k < 1 or k > p:
        raise InvalidArgumentError(f"k must satisfy 1 <= k <= p, got k={k}, p={p}")
    support = rng.choice(p, size=k, replace=False)
    values = rng.standard_normal(k)
    while not np.any(values != 0.0):
        values = rng.standard_normal(k)
    return SparseSignal(p=p, support=support, values=values)


def generate_instance(
    signal: SparseSignal,
    m: int,
    noise: NoiseSpec,
    rng: np.random.Generator,
    seed: SeedRecord | None = None,
) -> ProblemInstance:
    """
    Draw an m x p standard Gaussian design and noise per `noise`, then
    assemble the measurements.
    """
    if m < 1:
        raise InvalidArgumentError(f"m must be at least 1, got {m}")
    design = rng.standard_normal((m, signal.p))
    eps = noise.draw(m, rng)
    return ProblemInstance(
        design=design,
        measurements=measure(design, signal, eps),
        noise=eps,
        noise_spec=noise,
        seed=seed,
        signal=signal,
    )


def relative_error(estimate: np.ndarray, truth: SparseSignal | np.ndarray) -> float:
    """
    min(||z - x||, ||z + x||) / ||x||, the error up to the global sign.
    """
    x = truth.dense() if isinstance(truth, SparseSignal) else np.asarray(truth, dtype=np.float64)
    z = np.asarray(estimate, dtype=np.float64)
    if z.shape != x.shape:
        raise InvalidArgumentError(f"estimate shape {z.shape} does not match truth {x.shape}")
    norm = np.linalg.norm(x)
    if norm == 0:
        raise InvalidArgumentError("relative error is undefined for a zero truth")
    return float(min(np.linalg.norm(z - x), np.linalg.norm(z + x)) / norm)
