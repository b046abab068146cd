"""Weight admissibility: positivity, monotonicity, divergence heuristics."""

import numpy as np
import pytest

from implift.errors import NonPositiveValue
from implift.weights import Weight, check_weight


class TestEvaluate:
    def test_affine(self):
        assert Weight.affine(1.0, 1.0)(2.0) == 3.0
        assert Weight.affine(2.0, 1.0)(0.5) == 2.0

    def test_constant(self):
        assert Weight.constant(5.0)(100.0) == 5.0

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            Weight.constant(1.0)(-0.1)

    def test_nonpositive_value_raises(self):
        with pytest.raises(NonPositiveValue):
            Weight.from_function(lambda t: t - 1.0)(0.5)


class TestAdmissibility:
    def test_affine_plus_one_admissible(self):
        report = check_weight(Weight.affine(1.0, 1.0))
        assert report.admissible
        assert not report.divergence_heuristic

    def test_constant_admissible(self):
        assert check_weight(Weight.constant(2.0)).admissible

    def test_exponential_fails_divergence_only(self):
        report = check_weight(Weight.from_function(np.exp, name="exp"))
        assert report.positivity
        assert report.monotonicity
        assert not report.divergence
        assert report.divergence_heuristic
        assert not report.admissible

    def test_decreasing_fails_monotonicity(self):
        report = check_weight(Weight.from_function(lambda t: 1.0 / (1.0 + t)))
        assert not report.monotonicity
        assert not report.admissible

    def test_affine_admissible_for_every_horizon(self):
        for grid_max in (1.0, 10.0, 100.0, 1000.0, 1e5):
            assert check_weight(Weight.affine(0.5, 2.0), grid_max=grid_max).admissible

    def test_verdict_never_recovers_with_horizon(self):
        # a convergent reciprocal integral may pass small horizons, but a
        # fail is never followed by a pass at a larger horizon
        verdicts = [check_weight(Weight.from_function(np.exp, name="exp"),
                                 grid_max=t).divergence
                    for t in (10.0, 100.0, 1000.0, 10000.0)]
        failed = False
        for verdict in verdicts:
            if failed:
                assert not verdict
            failed = failed or not verdict
        assert failed  # the default horizon does flag it

    def test_table_weight(self):
        weight = Weight.from_table([0.0, 1.0, 10.0], [1.0, 2.0, 11.0])
        assert weight(0.5) == pytest.approx(1.5)
        assert weight(100.0) == pytest.approx(11.0)  # constant extension
        report = check_weight(weight, grid_max=50.0)
        assert report.positivity and report.monotonicity
        assert report.divergence_heuristic

    def test_sqrt_growth_admissible_heuristically(self):
        report = check_weight(Weight.from_function(lambda t: np.sqrt(t) + 1.0))
        assert report.admissible
        assert report.divergence_heuristic

    def test_report_dict_roundtrip(self):
        payload = check_weight(Weight.affine(1.0, 1.0)).to_dict()
        assert payload["positivity"] and payload["monotonicity"]
        assert payload["weight_name"] == "affine:1,1"
