import math

import numpy as np
import pytest

from sparsewf.errors import ConvergenceError, DegenerateInstanceError, InvalidArgumentError
from sparsewf.initialization import (
    initialize,
    leading_eigenvector,
    marginal_signals,
    norm_estimate,
    restricted_second_moment,
    select_support,
    support_cutoff,
)
from sparsewf.model import NoiseSpec, SeedRecord, SparseSignal, generate_instance, relative_error

from conftest import make_instance, synthetic


def spectrum_matrix(rng, values):
    q, _ = np.linalg.qr(rng.standard_normal((len(values), len(values))))
    W = (q * np.asarray(values)) @ q.T
    return 0.5 * (W + W.T)


def test_norm_estimate():
    assert norm_estimate(make_instance(np.ones((3, 2)), [1.0, 2.0, 3.0])) == 2.0
    assert norm_estimate(make_instance(np.ones((3, 2)), [0.0, 0.0, 0.0])) == 0.0


def test_norm_estimate_monte_carlo():
    signal = SparseSignal(p=10, support=np.array([4]), values=np.array([2.0]))
    instance = generate_instance(signal, 100_000, NoiseSpec(), SeedRecord(1).generator())
    assert abs(norm_estimate(instance) - 4.0) <= 0.1


def test_marginal_signals_by_hand():
    instance = make_instance([[1.0, -2.0]], [2.0])
    assert marginal_signals(instance).tolist() == [2.0, 8.0]
    assert not np.any(marginal_signals(make_instance([[1.0, -2.0]], [0.0])))


def test_marginal_signals_monte_carlo(spike):
    instance = generate_instance(spike, 100_000, NoiseSpec(), SeedRecord(2).generator())
    marginals = marginal_signals(instance)
    assert abs(marginals[0] - 12.0) <= 0.3
    assert abs(marginals[1] - 4.0) <= 0.2


def test_cutoff_boundary_is_excluded():
    cutoff = support_cutoff(1.0, 0.1, 100, 100)
    assert select_support(np.full(4, cutoff), 1.0, 0.1, 100, 100).size == 0


def test_select_support_without_margin():
    assert select_support(np.array([2.0, 0.5]), 1.0, 0.0, 10, 2).tolist() == [0]


def test_select_support_hand_cutoff():
    # 1 + 0.1 * sqrt(log(10^4) / 100) = 1.0303...
    assert support_cutoff(1.0, 0.1, 100, 100) == pytest.approx(1.0 + 0.1 * math.sqrt(math.log(1e4) / 100))
    assert select_support(np.array([1.05, 1.0]), 1.0, 0.1, 100, 100).tolist() == [0]
    assert select_support(np.array([1.03, 1.0]), 1.0, 0.1, 100, 100).size == 0


def test_restricted_second_moment_by_hand():
    instance = make_instance([[1.0, 2.0, 5.0]], [1.0])
    moment = restricted_second_moment(instance, np.array([0, 1]))
    assert moment.matrix.tolist() == [[1.0, 2.0], [2.0, 4.0]]
    zero = restricted_second_moment(make_instance([[1.0, 2.0, 5.0]], [0.0]), np.array([0, 1]))
    assert not np.any(zero.matrix)
    with pytest.raises(InvalidArgumentError):
        restricted_second_moment(instance, np.array([], dtype=int))


def test_leading_eigenvector_of_diagonal():
    result = leading_eigenvector(np.diag([2.0, 1.0]))
    assert result.value == pytest.approx(2.0, abs=1e-8)
    assert np.allclose(result.vector, [1.0, 0.0], atol=1e-6)


def test_leading_eigenvector_of_rank_one():
    u = np.array([3.0, 4.0]) / 5.0
    result = leading_eigenvector(np.outer(u, u))
    assert result.value == pytest.approx(1.0, abs=1e-8)
    assert np.allclose(result.vector, u, atol=1e-8)


def test_leading_eigenvector_prefers_largest_over_dominant_negative():
    result = leading_eigenvector(np.diag([1.0, -3.0]))
    assert result.value == pytest.approx(1.0, abs=1e-8)
    assert np.allclose(result.vector, [1.0, 0.0], atol=1e-6)


def test_leading_eigenvector_when_all_ones_is_a_null_vector():
    # The all-ones start is an exact eigenvector for eigenvalue 0.
    result = leading_eigenvector(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    assert result.value == pytest.approx(2.0, abs=1e-8)
    assert np.allclose(result.vector, np.array([1.0, -1.0]) / math.sqrt(2.0), atol=1e-6)


def test_leading_eigenvector_with_opposite_eigenvalues_of_equal_magnitude():
    result = leading_eigenvector(np.diag([1.0, -1.0]))
    assert result.value == pytest.approx(1.0, abs=1e-8)
    assert np.allclose(result.vector, [1.0, 0.0], atol=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_leading_eigenvector_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    W = spectrum_matrix(rng, [1.0, 0.7, -0.5, 0.2, -0.1])
    result = leading_eigenvector(W, tol=1e-11, max_iter=5000)
    values, vectors = np.linalg.eigh(W)
    expected = vectors[:, -1] * np.sign(vectors[:, -1] @ result.vector)
    assert abs(result.value - values[-1]) <= 1e-8
    assert np.linalg.norm(result.vector - expected) <= 1e-6
    assert result.vector[np.argmax(np.abs(result.vector))] > 0


def test_leading_eigenvector_rejects_nonsymmetric():
    with pytest.raises(InvalidArgumentError):
        leading_eigenvector(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_leading_eigenvector_reports_best_iterate():
    W = spectrum_matrix(np.random.default_rng(3), [1.0, 0.99, 0.5])
    with pytest.raises(ConvergenceError) as e:
        leading_eigenvector(W, tol=1e-12, max_iter=3)
    best = e.value.best
    assert not best.converged
    assert np.linalg.norm(best.vector) == pytest.approx(1.0)


def test_initialize_recovers_a_single_spike(spike):
    instance = generate_instance(spike, 100_000, NoiseSpec(), SeedRecord(4).generator())
    result = initialize(instance, alpha=0.1)
    assert 0 in result.selected
    assert relative_error(result.x0, spike) <= 0.05
    # With a wider margin the screen keeps exactly the spike.
    assert initialize(instance, alpha=10.0).selected.tolist() == [0]


def test_initialize_falls_back_when_nothing_passes(caplog):
    rng = np.random.default_rng(5)
    instance = make_instance(rng.standard_normal((200, 30)), np.full(200, 3.0))
    result = initialize(instance, alpha=1e6)
    assert result.fallback
    assert result.selected.size == 1
    assert result.selected[0] == np.argmax(result.marginals)
    assert "falling back" in caplog.text


def test_initialize_rejects_nonpositive_norm_estimate():
    with pytest.raises(DegenerateInstanceError):
        initialize(make_instance(np.ones((3, 2)), [-1.0, -1.0, 0.5]))


def test_initialize_uses_best_iterate_when_eigensolver_stalls():
    rng = SeedRecord(6).generator()
    signal = SparseSignal(p=20, support=np.arange(5), values=np.full(5, 1 / math.sqrt(5)))
    instance = generate_instance(signal, 2000, NoiseSpec(), rng)
    result = initialize(instance, alpha=0.1, eig_max_iter=1)
    assert result.selected.size > 1
    assert not result.eigen_converged
    assert np.all(np.isfinite(result.x0))
    assert np.linalg.norm(result.x0) == pytest.approx(result.phi)


def test_initialize_scales_estimate_to_norm_estimate(small_noisy):
    result = initialize(small_noisy)
    assert np.linalg.norm(result.x0) == pytest.approx(math.sqrt(result.phi_sq))
    assert set(np.flatnonzero(result.x0)) <= set(result.selected.tolist())
    assert result.as_json()["selected"] == [int(i) + 1 for i in result.selected]


@pytest.mark.slow
def test_initialization_in_the_paper_regime():
    good = 0
    for trial in range(20):
        rng = SeedRecord(2024, (trial,)).generator()
        instance = synthetic(1000, 7000, 100, nsr=1.0, seed=trial)
        result = initialize(instance, alpha=0.1, rng=rng)
        x = instance.signal.dense()
        good += min(np.linalg.norm(result.x0 - x), np.linalg.norm(result.x0 + x)) <= np.linalg.norm(x) / 2
    assert good >= 16


def test_screening_is_invariant_to_measurement_scale(small_noisy):
    scaled = small_noisy.with_measurements(4.0 * small_noisy.measurements)
    assert norm_estimate(scaled) == 4.0 * norm_estimate(small_noisy)
    assert np.array_equal(marginal_signals(scaled), 4.0 * marginal_signals(small_noisy))
    original = initialize(small_noisy)
    rescaled = initialize(scaled)
    assert rescaled.selected.tolist() == original.selected.tolist()
    assert rescaled.phi_sq == 4.0 * original.phi_sq
    assert rescaled.x0 == pytest.approx(2.0 * original.x0, abs=1e-6)
