"""Chart-space and programmatic paths, predictor limits, planning rejection."""

import numpy as np
import pytest

from implift import examples
from implift.atlas import SolutionAtlas
from implift.charts import tangent_box_chart
from implift.corrector import CorrectorOptions
from implift.errors import PredictorBlowup, Unreachable
from implift.problem import ImplicitProblem
from implift.tracer import (CallablePath, ChartLinePath, TracerOptions,
                            lift_path, step)


class TestChartLinePath:
    def test_positions_follow_inverse_chart(self):
        chart = tangent_box_chart([-1.0], [1.0])
        path = ChartLinePath(chart.forward_point([-0.5]),
                             chart.forward_point([0.5]), chart)
        np.testing.assert_allclose(path.position(0.0), [-0.5], atol=1e-12)
        np.testing.assert_allclose(path.position(1.0), [0.5], atol=1e-12)

    def test_velocity_matches_finite_differences(self):
        chart = tangent_box_chart([-1.0], [1.0])
        path = ChartLinePath(chart.forward_point([-0.5]),
                             chart.forward_point([0.5]), chart)
        h = 1e-7
        for t in (0.2, 0.5, 0.8):
            numeric = (path.position(t + h) - path.position(t - h)) / (2.0 * h)
            np.testing.assert_allclose(path.velocity(t), numeric, rtol=1e-6)

    def test_lift_along_chart_line(self):
        line = examples.get("line")
        chart = line.charts.phi
        path = ChartLinePath(chart.forward_point([0.0]),
                             chart.forward_point([0.9]), chart)
        trace = lift_path(line.problem, path, np.array([0.0]))
        assert trace.completed
        assert trace.final.y[0] == pytest.approx(0.9, abs=1e-8)


class TestCallablePath:
    def test_explicit_velocity(self):
        path = CallablePath(lambda t: np.array([t ** 2]), 1,
                            velocity_fn=lambda t: np.array([2.0 * t]))
        np.testing.assert_allclose(path.position(0.5), [0.25])
        np.testing.assert_allclose(path.velocity(0.5), [1.0])
        rev = path.reversed()
        np.testing.assert_allclose(rev.position(0.0), path.position(1.0))
        np.testing.assert_allclose(rev.velocity(0.25), [-2.0 * 0.75])

    def test_finite_difference_velocity(self):
        path = CallablePath(lambda t: np.array([np.sin(t)]), 1)
        assert path.velocity(0.5)[0] == pytest.approx(np.cos(0.5), rel=1e-6)
        assert path.velocity(0.0)[0] == pytest.approx(1.0, rel=1e-5)

    def test_lift_on_callable_arc(self):
        circle = examples.get("circle-x")
        path = CallablePath(
            lambda t: np.array([np.cos(np.pi * t), np.sin(np.pi * t)]), 2,
            velocity_fn=lambda t: np.pi * np.array([-np.sin(np.pi * t),
                                                    np.cos(np.pi * t)]))
        trace = lift_path(circle.problem, path, np.array([0.0]))
        assert trace.completed
        assert trace.final.y[0] == pytest.approx(np.pi, abs=1e-6)


class TestPredictorLimits:
    def test_giant_step_with_steep_slope_blows_up(self):
        # y = 100 x, so a unit x-step predicts a y-move of 100 >> trust bound
        steep = ImplicitProblem(
            1, 1, 1, lambda x, y: np.array([x[0] - y[0] / 100.0]), [0.0], [0.0],
            jac_x_fn=lambda x, y: np.array([[1.0]]),
            jac_y_fn=lambda x, y: np.array([[-0.01]]))
        with pytest.raises(PredictorBlowup):
            step(steep, [0.0], [0.0], [2.0])

    def test_tracer_recovers_by_halving(self):
        steep = ImplicitProblem(
            1, 1, 1, lambda x, y: np.array([x[0] - y[0] / 100.0]), [0.0], [0.0],
            jac_x_fn=lambda x, y: np.array([[1.0]]),
            jac_y_fn=lambda x, y: np.array([[-0.01]]))
        from implift.tracer import SegmentPath
        trace = lift_path(steep, SegmentPath([0.0], [2.0]), np.array([0.0]),
                          TracerOptions(h_init=0.1, h_max=0.1))
        assert trace.completed
        assert trace.final.y[0] == pytest.approx(200.0, abs=1e-5)

    def test_custom_corrector_options_respected(self):
        diode = examples.get("diode")
        opts = TracerOptions(corrector=CorrectorOptions(tol=1e-12, max_iter=40))
        from implift.tracer import SegmentPath
        trace = lift_path(diode.problem, SegmentPath([0.0], [2.0]),
                          np.array([0.0]), opts)
        assert trace.completed
        assert all(s.residual_norm <= 1e-11 for s in trace.samples)


class TestPlanningRejection:
    def test_nonconvex_predicate_domain_rejects_straight_plans(self):
        # domain excludes a disc around the origin; the straight plan from the
        # seed to the antipode crosses it
        def punctured(x):
            return bool(np.linalg.norm(x) > 0.5)

        problem = ImplicitProblem(
            2, 2, 2, lambda x, y: x - y, [1.0, 0.0], [1.0, 0.0],
            jac_x_fn=lambda x, y: np.eye(2),
            jac_y_fn=lambda x, y: -np.eye(2),
            domain_x=punctured)
        atlas = SolutionAtlas(problem)
        with pytest.raises(Unreachable) as info:
            atlas.evaluate([-1.0, 0.0])
        assert info.value.reason == "plan_outside_domain"

    def test_explicit_arc_reaches_around_the_hole(self):
        def punctured(x):
            return bool(np.linalg.norm(x) > 0.5)

        problem = ImplicitProblem(
            2, 2, 2, lambda x, y: x - y, [1.0, 0.0], [1.0, 0.0],
            jac_x_fn=lambda x, y: np.eye(2),
            jac_y_fn=lambda x, y: -np.eye(2),
            domain_x=punctured)
        from implift.tracer import CirclePath
        arc = CirclePath([0.0, 0.0], 1.0, turns=0.5, start_angle=0.0)
        trace = lift_path(problem, arc, np.array([1.0, 0.0]))
        assert trace.completed
        np.testing.assert_allclose(trace.final.y, [-1.0, 0.0], atol=1e-8)
