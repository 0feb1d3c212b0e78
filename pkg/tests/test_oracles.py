import json
import math

import numpy as np

from sparsewf.model import SeedRecord
from sparsewf.oracles import (
    check_design_norm,
    check_second_moment,
    check_zero_signal_guard,
    flat_signal,
    oracle_checks,
)


def test_flat_signal_has_unit_norm_and_equal_magnitudes():
    signal = flat_signal(10, 4, SeedRecord(0).generator())
    assert signal.k == 4
    assert math.isclose(signal.two_norm, 1.0)
    assert np.allclose(np.abs(signal.values), 0.5)


def test_moment_identities_hold_at_the_default_scale():
    report = oracle_checks(seed=0)
    by_name = {check.name: check for check in report.checks}
    for name in ("second-moment", "design-spectral-norm", "zero-signal-guard"):
        assert by_name[name].passed
    # Eleven three-standard-error checks: a single miss is within chance.
    misses = [c for c in report.checks if c.tolerance == 3.0 and not c.passed]
    assert len(misses) <= 1
    names = [check.name for check in report.checks]
    assert names[0] == "second-moment"
    assert sum(name.startswith("marginal-") for name in names) == 10
    json.dumps(report.as_json())


def test_second_moment_check_detects_a_wrong_matrix():
    signal = flat_signal(5, 2, SeedRecord(1).generator())
    x = signal.dense()
    exact = np.eye(5) + 2 * np.outer(x, x)
    assert check_second_moment(signal, exact).passed
    assert check_second_moment(signal, exact + 0.1 * np.eye(5)).measured > 0.05
    assert not check_second_moment(signal, 3 * np.eye(5)).passed


def test_design_norm_bound():
    check = check_design_norm(SeedRecord(2), m=200, k=10, draws=50)
    assert check.passed
    assert check.measured == 1.0


def test_zero_signal_guard():
    assert check_zero_signal_guard().passed


def test_report_serializes_with_plain_python_types():
    report = oracle_checks(seed=3, m=2000, replicates=1, design_draws=20)
    document = json.loads(json.dumps(report.as_json()))
    assert type(report.passed) is bool
    for check in report.checks:
        assert type(check.passed) is bool
        assert type(check.measured) is float
    assert len(document["checks"]) == len(report.checks)
