"""Atlas queries: evaluation, path independence, monodromy, persistence."""

import numpy as np
import pytest

from implift import examples
from implift.atlas import SolutionAtlas
from implift.errors import DomainViolation, Unreachable
from implift.tracer import CirclePath, PolylinePath, SegmentPath


class TestEvaluate:
    def test_diode_closed_form(self):
        atlas = SolutionAtlas(examples.get("diode").problem)
        y = atlas.evaluate([2.0])
        assert y[0] == pytest.approx(np.log(2.0), abs=1e-6)

    def test_linear_solution(self):
        atlas = SolutionAtlas(examples.get("linear").problem)
        np.testing.assert_allclose(atlas.evaluate([1.0, 1.0]), [-0.5, -0.5],
                                   atol=1e-8)

    def test_cubic_root(self):
        atlas = SolutionAtlas(examples.get("cubic").problem)
        assert atlas.evaluate([2.0])[0] == pytest.approx(1.0, abs=1e-8)

    def test_idempotent_to_the_bit(self):
        atlas = SolutionAtlas(examples.get("diode").problem)
        first = atlas.evaluate([3.0])
        second = atlas.evaluate([3.0])
        np.testing.assert_array_equal(first, second)

    def test_cache_grows_and_respects_residuals(self):
        descriptor = examples.get("diode")
        atlas = SolutionAtlas(descriptor.problem)
        atlas.evaluate([2.0])
        atlas.evaluate([5.0])
        assert atlas.cache_size > 2
        for x, y in atlas.cached_points():
            assert descriptor.problem.residual_norm(x, y) <= atlas.options.trace_tol

    def test_unreachable_carries_failed_trace(self):
        # the solution escapes the voltage interval before I reaches -1.989
        atlas = SolutionAtlas(examples.get("diode").problem)
        with pytest.raises(Unreachable) as info:
            atlas.evaluate([-1.989])
        assert info.value.reason == "boundary_escape"
        assert info.value.trace is not None
        assert not info.value.trace.completed

    def test_out_of_domain_target_rejected(self):
        atlas = SolutionAtlas(examples.get("diode").problem)
        with pytest.raises(DomainViolation):
            atlas.evaluate([500.0])

    def test_chart_planning_follows_chart_lines(self):
        descriptor = examples.get("diode")
        atlas = SolutionAtlas(descriptor.problem, charts=descriptor.charts)
        assert atlas.evaluate([2.0])[0] == pytest.approx(np.log(2.0), abs=1e-6)


class TestDerivative:
    def test_line_unit_slope(self):
        atlas = SolutionAtlas(examples.get("line").problem)
        np.testing.assert_allclose(atlas.derivative([0.3]), [[1.0]], atol=1e-10)

    def test_diode_quarter(self):
        atlas = SolutionAtlas(examples.get("diode").problem)
        assert atlas.derivative([2.0])[0, 0] == pytest.approx(0.25, abs=1e-8)

    def test_linear_exact(self):
        atlas = SolutionAtlas(examples.get("linear").problem)
        np.testing.assert_allclose(atlas.derivative([1.0, 0.5]), -0.5 * np.eye(2),
                                   atol=1e-12)

    def test_matches_finite_differences_of_evaluate(self):
        h = 1e-5
        for name, targets in (("diode", [[2.0], [5.0]]),
                              ("cubic", [[2.0], [-1.0]]),
                              ("linear", [[1.0, 1.0]])):
            atlas = SolutionAtlas(examples.get(name).problem)
            for target in targets:
                target = np.asarray(target, dtype=float)
                analytic = atlas.derivative(target)
                for j in range(target.shape[0]):
                    bump = np.zeros_like(target)
                    bump[j] = h
                    column = (atlas.evaluate(target + bump)
                              - atlas.evaluate(target - bump)) / (2.0 * h)
                    err = np.linalg.norm(column - analytic[:, j])
                    assert err <= 1e-4 * max(1.0, np.linalg.norm(analytic[:, j]))


class TestPathIndependence:
    def test_diode_detour(self):
        atlas = SolutionAtlas(examples.get("diode").problem)
        result = atlas.path_independence_check(
            [2.0], [SegmentPath([0.0], [2.0]),
                    PolylinePath([[0.0], [3.0], [2.0]])])
        assert result.passed
        assert result.max_gap <= 1e-6

    def test_linear_l_shape(self):
        atlas = SolutionAtlas(examples.get("linear").problem)
        result = atlas.path_independence_check(
            [1.0, 1.0], [SegmentPath([0.0, 0.0], [1.0, 1.0]),
                         PolylinePath([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])])
        assert result.passed
        assert result.max_gap <= 1e-8

    def test_annulus_arcs_expose_sheets(self):
        # three-quarter turn one way vs quarter turn the other: same endpoint
        # in x, endpoints a quarter of the angular range apart in y
        annulus = examples.get("annulus")
        atlas = SolutionAtlas(annulus.problem)
        start = -0.3 * np.pi
        ccw = CirclePath([0.0, 0.0], 1.5, turns=-0.75, start_angle=start)
        cw = CirclePath([0.0, 0.0], 1.5, turns=0.25, start_angle=start)
        result = atlas.path_independence_check(ccw.position(1.0), [ccw, cw])
        assert not result.passed
        assert result.max_gap == pytest.approx(0.25, abs=1e-3)

    def test_requires_matching_endpoints(self):
        atlas = SolutionAtlas(examples.get("diode").problem)
        with pytest.raises(ValueError):
            atlas.path_independence_check(
                [2.0], [SegmentPath([0.0], [2.0]), SegmentPath([0.0], [3.0])])


class TestMonodromy:
    def test_annulus_open(self):
        annulus = examples.get("annulus")
        atlas = SolutionAtlas(annulus.problem)
        result = atlas.monodromy_check(annulus.monodromy_loop)
        assert not result.closed
        assert abs(result.gap_vector[0]) == pytest.approx(0.25, abs=1e-3)

    def test_circle_open_by_two_pi(self):
        circle = examples.get("circle-x")
        atlas = SolutionAtlas(circle.problem)
        result = atlas.monodromy_check(circle.monodromy_loop)
        assert not result.closed
        assert result.gap == pytest.approx(2.0 * np.pi, abs=1e-5)

    def test_constrained_circle_closed(self):
        descriptor = examples.get("constrained-circle")
        atlas = SolutionAtlas(descriptor.problem)
        result = atlas.monodromy_check(descriptor.monodromy_loop)
        assert result.closed
        assert result.gap <= 1e-6

    def test_solvable_examples_close_all_loops(self):
        for name in ("diode", "cubic", "linear"):
            descriptor = examples.get(name)
            if descriptor.monodromy_loop is None:
                continue
            atlas = SolutionAtlas(descriptor.problem)
            result = atlas.monodromy_check(descriptor.monodromy_loop)
            assert result.closed, name

    def test_open_loop_rejected(self):
        atlas = SolutionAtlas(examples.get("linear").problem)
        with pytest.raises(ValueError):
            atlas.monodromy_check(SegmentPath([0.0, 0.0], [1.0, 0.0]))


class TestPersistence:
    def test_export_import_roundtrip(self):
        atlas = SolutionAtlas(examples.get("diode").problem)
        expected = atlas.evaluate([2.0])
        payload = atlas.export_payload()
        assert payload["problem"]["name"] == "diode"
        restored = SolutionAtlas.from_payload(payload)
        np.testing.assert_array_equal(restored.evaluate([2.0]), expected)
        assert restored.cache_size == atlas.cache_size

    def test_payload_serializes_to_json(self):
        import json
        from implift._serialize import dumps
        atlas = SolutionAtlas(examples.get("annulus").problem)
        atlas.monodromy_check(examples.get("annulus").monodromy_loop)
        text = dumps(atlas.export_payload())
        parsed = json.loads(text)
        assert parsed["problem"]["parameters"]["delta"] == 0.5

    def test_json_stream_roundtrip(self, tmp_path):
        atlas = SolutionAtlas(examples.get("cubic").problem)
        expected = atlas.evaluate([2.0])
        path = tmp_path / "session.json"
        with open(path, "w") as stream:
            atlas.export_json(stream)
        with open(path) as stream:
            restored = SolutionAtlas.from_json(stream)
        np.testing.assert_array_equal(restored.evaluate([2.0]), expected)
