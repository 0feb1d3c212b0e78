import numpy as np
import pytest

from sparsewf.model import NoiseSpec, ProblemInstance, SeedRecord, SparseSignal, generate_instance, generate_signal


def make_instance(design, measurements) -> ProblemInstance:
    """
    Hand-built instance without ground truth.
    """
    design = np.atleast_2d(np.asarray(design, dtype=np.float64))
    measurements = np.asarray(measurements, dtype=np.float64)
    return ProblemInstance(design=design, measurements=measurements, noise=np.zeros(design.shape[0]))


def synthetic(p: int, m: int, k: int, nsr: float = 0.0, seed: int = 0) -> ProblemInstance:
    rng = SeedRecord(seed).generator()
    signal = generate_signal(p, k, rng)
    return generate_instance(signal, m, NoiseSpec.gaussian_or_none(nsr * signal.two_norm**2), rng)


@pytest.fixture
def small_noiseless() -> ProblemInstance:
    return synthetic(p=50, m=400, k=3, seed=11)


@pytest.fixture
def small_noisy() -> ProblemInstance:
    return synthetic(p=50, m=400, k=3, nsr=0.5, seed=12)


@pytest.fixture
def spike() -> SparseSignal:
    return SparseSignal(p=20, support=np.array([0]), values=np.array([2.0]))


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch):
    for name in ("SPARSEWF_OUT_DIR", "SPARSEWF_WORKERS", "SPARSEWF_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
