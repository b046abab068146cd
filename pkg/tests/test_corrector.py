"""Gauss-Newton corrector: convergence, failure modes, fixed-point property."""

import numpy as np
import pytest

from implift import examples, linalg
from implift.corrector import CorrectorOptions, correct_full, newton_correct
from implift.errors import BoundaryEscape, NoConvergence, RankLoss


def test_line_converges_in_one_iteration():
    line = examples.get("line")
    result = correct_full(line.problem, np.array([0.3]), np.array([0.0]))
    assert result.iterations == 1
    np.testing.assert_allclose(result.y, [0.3], atol=1e-14)


def test_diode_closed_form():
    diode = examples.get("diode")
    y = newton_correct(diode.problem, np.array([2.0]), np.array([0.5]))
    assert y[0] == pytest.approx(np.log(2.0), abs=1e-9)


def test_diode_quadratic_tail():
    diode = examples.get("diode")
    result = correct_full(diode.problem, np.array([2.0]), np.array([0.5]))
    norms = result.residual_norms
    assert len(norms) >= 3
    assert norms[-1] <= norms[-2] ** 1.5 + 1e-15
    assert norms[-2] <= norms[-3] ** 1.5 + 1e-15


def test_diode_without_solution_fails():
    # f(V) > -2 everywhere, so I = -3 has no zero: the corrector must not
    # pretend otherwise
    diode = examples.get("diode", i_bounds=(-5.0, 110.0))
    with pytest.raises((NoConvergence, BoundaryEscape)):
        newton_correct(diode.problem, np.array([-3.0]), np.array([0.0]))


def test_boundary_escape_on_bounded_strip():
    line = examples.get("line")  # y restricted to (-1, 1)
    with pytest.raises(BoundaryEscape):
        newton_correct(line.problem, np.array([1.5]), np.array([0.0]))


def test_rank_loss_at_fold():
    from implift.problem import ImplicitProblem
    fold = ImplicitProblem(
        1, 1, 1, lambda x, y: np.array([x[0] - y[0] ** 2]), [1.0], [1.0],
        jac_y_fn=lambda x, y: np.array([[-2.0 * y[0]]]))
    with pytest.raises(RankLoss):
        newton_correct(fold, np.array([0.5]), np.array([0.0]))


def test_returned_point_is_fixed():
    diode = examples.get("diode")
    opts = CorrectorOptions(tol=1e-10)
    x = np.array([5.0])
    y = newton_correct(diode.problem, x, np.array([0.0]), opts)
    step = linalg.least_squares_step(diode.problem.jac_y(x, y),
                                     diode.problem.residual(x, y))
    assert np.linalg.norm(step) <= 10.0 * opts.tol


def test_overdetermined_converges_to_true_zero():
    # all residual components must vanish, not just the least-squares optimum
    descriptor = examples.get("constrained-circle")
    theta = 1.0
    x = np.array([np.cos(theta), np.sin(theta)])
    opts = CorrectorOptions(tol=1e-10)
    y = newton_correct(descriptor.problem, x, x + 0.3, opts)
    residual = descriptor.problem.residual(x, y)
    assert np.all(np.abs(residual) <= opts.tol)


def test_already_converged_returns_immediately():
    line = examples.get("line")
    result = correct_full(line.problem, np.array([0.25]), np.array([0.25]))
    assert result.iterations == 0


def test_cubic_from_far_guess_with_damping():
    cubic = examples.get("cubic")
    y = newton_correct(cubic.problem, np.array([2.0]), np.array([1.9]))
    assert y[0] == pytest.approx(1.0, abs=1e-9)


def test_options_validation():
    with pytest.raises(ValueError):
        CorrectorOptions(tol=0.0)
    with pytest.raises(ValueError):
        CorrectorOptions(max_iter=0)
