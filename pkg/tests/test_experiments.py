import json
import math

import numpy as np
import pytest

from sparsewf.errors import InvalidArgumentError
from sparsewf.experiments import (
    PRESETS,
    SweepPoint,
    SweepSpec,
    TrialOutcome,
    TrialParams,
    figure_sweep,
    rate_scaling_study,
    run_sweep,
    run_trial,
)
from sparsewf.model import SeedRecord

SMALL = {"p": 50, "m": 400, "k": 3, "iterations": 100}


def outcome(trial: int, error: float | None) -> TrialOutcome:
    return TrialOutcome(point=0, trial=trial, axis_value=1.0, seed=SeedRecord(0, (0, trial)), error=error)


def test_trial_is_deterministic():
    params = TrialParams(nsr=0.5, **SMALL)
    first = run_trial(params, SeedRecord(3, (0, 0)))
    second = run_trial(params, SeedRecord(3, (0, 0)))
    assert first.error == second.error
    assert first.wallclock_ms is None


def test_noiseless_trial_recovers_exactly():
    params = TrialParams(p=100, m=2000, k=5, nsr=0.0)
    assert run_trial(params, SeedRecord(1, (0, 0))).error <= 1e-3


def test_timings_are_opt_in():
    params = TrialParams(nsr=0.5, **SMALL)
    assert run_trial(params, SeedRecord(0), timings=True).wallclock_ms >= 0


def test_trial_params_validation():
    with pytest.raises(InvalidArgumentError, match="mu must be positive"):
        TrialParams(mu=0.0)
    with pytest.raises(InvalidArgumentError):
        TrialParams(p=10, k=11)
    with pytest.raises(InvalidArgumentError):
        TrialParams(operator="firm")


@pytest.mark.parametrize("field", ["nsr", "alpha", "beta", "mu", "eig_tol"])
@pytest.mark.parametrize("value", [math.nan, math.inf])
def test_trial_params_reject_non_finite_values(field, value):
    with pytest.raises(InvalidArgumentError, match=field):
        TrialParams(**{field: value})


@pytest.mark.parametrize(
    "kwargs",
    [
        {"axis": "beta", "grid": (1.0, 0.5), "trials": 2},
        {"axis": "beta", "grid": (), "trials": 2},
        {"axis": "beta", "grid": (0.0,), "trials": 0},
        {"axis": "gamma", "grid": (0.0,), "trials": 1},
        {"axis": "beta", "grid": (0.0,), "trials": 1, "fixed": {"beta": 1.0}},
        {"axis": "beta", "grid": (0.0,), "trials": 1, "fixed": {"lambda": 1.0}},
        {"axis": "k", "grid": (10, 60), "trials": 1, "fixed": {"p": 50}},
    ],
)
def test_sweep_spec_validation(kwargs):
    with pytest.raises(InvalidArgumentError):
        SweepSpec(**kwargs)


def test_integer_axes_are_cast():
    spec = SweepSpec(axis="m", grid=(400.0, 800.0), trials=1, fixed={"p": 50, "k": 3})
    assert spec.grid == (400, 800)
    assert isinstance(spec.params_at(400).m, int)


def test_failed_trials_are_excluded_and_flag_the_point():
    errors = [0.1, 0.3, None, 0.2, 0.4]
    point = SweepPoint(1.0, tuple(outcome(i, e) for i, e in enumerate(errors)))
    assert point.failures == 1
    assert point.mean_error == pytest.approx(0.25)
    assert point.valid
    point = SweepPoint(1.0, tuple(outcome(i, e) for i, e in enumerate([0.1, None, None, 0.2, 0.4])))
    assert not point.valid
    point = SweepPoint(1.0, (outcome(0, None),))
    assert point.mean_error is None


def test_sweep_is_independent_of_worker_count():
    spec = SweepSpec(axis="nsr", grid=(0.0, 0.5), trials=3, master_seed=5, fixed=SMALL)
    serial = run_sweep(spec, workers=1)
    parallel = run_sweep(spec, workers=2)
    assert json.dumps(serial.as_json()) == json.dumps(parallel.as_json())
    assert [o.trial for o in serial.points[0].outcomes] == [0, 1, 2]
    assert serial.points[1].outcomes[2].seed.label() == "5/1/2"


def test_sweep_result_embeds_resolved_parameters():
    spec = SweepSpec(axis="beta", grid=(0.0, 1.0), trials=1, fixed=SMALL)
    result = run_sweep(spec).as_json()
    assert [r["beta"] for r in result["resolved"]] == [0.0, 1.0]
    assert result["spec"]["name"] == "beta"
    assert len(result["points"]) == 2


def test_figure_grids():
    beta = figure_sweep("beta", "quick")
    assert len(beta.grid) == 13 and beta.grid[-1] == 3.0
    m = figure_sweep("m", "paper")
    assert m.grid == tuple(range(2000, 11001, 1000))
    assert m.trials == 5
    nsr = figure_sweep("nsr", "paper")
    assert len(nsr.grid) == 11 and nsr.fixed["m"] == 7000
    k = figure_sweep("k", "quick")
    assert k.grid == (5, 10, 15, 20, 25, 30, 35, 40)
    assert "k" not in k.fixed


def test_figure_overrides_and_names():
    spec = figure_sweep("beta", "quick", overrides={"alpha": 0.5, "iterations": 10}, name="beta_alpha0.5")
    assert spec.name == "beta_alpha0.5"
    assert spec.fixed["alpha"] == 0.5 and spec.fixed["iterations"] == 10
    assert figure_sweep("beta", "quick", overrides={"beta": 2.0}).fixed.get("beta") is None
    with pytest.raises(InvalidArgumentError):
        figure_sweep("gamma")
    with pytest.raises(InvalidArgumentError):
        figure_sweep("beta", preset="huge")


def test_rate_study_skips_the_noiseless_regime():
    params = TrialParams(nsr=0.0, **{**SMALL, "iterations": 200})
    study = rate_scaling_study(params, (400, 1600), trials=2)
    assert study.passed is None
    assert study.note == "noiseless regime, rate check skipped"
    assert [row.m for row in study.rows] == [400, 1600]


def test_rate_study_k_side_table():
    params = TrialParams(nsr=0.5, **{**SMALL, "iterations": 50})
    study = rate_scaling_study(params, (400, 800), trials=1, k_side=True)
    assert [k for k, _ in study.k_table] == [3, 6]
    assert study.as_json()["k_table"][1]["k"] == 6


PAPER = {"p": 1000, "m": 7000, "k": 100, "nsr": 1.0, "beta": 1.0, "alpha": 0.1, "mu": 0.01, "iterations": 1000}


@pytest.mark.slow
def test_noise_study_point_at_unit_nsr():
    spec = SweepSpec(axis="nsr", grid=(1.0,), trials=10, master_seed=1, fixed={k: v for k, v in PAPER.items() if k != "nsr"})
    mean = run_sweep(spec, workers=4).points[0].mean_error
    assert 0.07 <= mean <= 0.18


@pytest.mark.slow
def test_sample_size_study_breakdown_and_recovery():
    fixed = {k: v for k, v in PAPER.items() if k != "m"}
    spec = SweepSpec(axis="m", grid=(2000, 4000, 7000, 11000), trials=5, master_seed=2, fixed=fixed)
    means = [point.mean_error for point in run_sweep(spec, workers=4).points]
    assert means[0] >= 0.5
    assert means[1] > means[2] > means[3]
    assert means[3] <= 0.15


@pytest.mark.slow
def test_thresholding_beats_plain_gradient_descent_at_quick_scale():
    fixed = {**PRESETS["quick"].base, "nsr": 1.0, "alpha": 0.1}
    spec = SweepSpec(axis="beta", grid=(0.0, 0.75), trials=10, master_seed=3, fixed=fixed)
    plain, thresholded = (point.mean_error for point in run_sweep(spec, workers=4).points)
    assert thresholded <= 0.75 * plain


@pytest.mark.slow
def test_error_decays_like_inverse_square_root_of_m():
    params = TrialParams(**PRESETS["quick"].base, nsr=0.5)
    study = rate_scaling_study(params, (2000, 8000), trials=20, master_seed=4, workers=4)
    (_, _, ratio, _), = study.ratios
    assert 0.35 <= ratio <= 0.65
    assert study.passed


@pytest.mark.slow
def test_thresholding_beats_plain_gradient_descent_at_full_scale():
    fixed = {k: v for k, v in PAPER.items() if k != "beta"}
    spec = SweepSpec(axis="beta", grid=(0.0, 0.75), trials=10, master_seed=5, fixed=fixed)
    plain, thresholded = (point.mean_error for point in run_sweep(spec, workers=4).points)
    assert thresholded <= 0.75 * plain


@pytest.mark.slow
def test_error_grows_with_sparsity():
    fixed = {k: v for k, v in PAPER.items() if k != "k"}
    spec = SweepSpec(axis="k", grid=(25, 100, 200), trials=10, master_seed=6, fixed=fixed)
    means = [point.mean_error for point in run_sweep(spec, workers=4).points]
    assert means[0] < means[1] < means[2]
