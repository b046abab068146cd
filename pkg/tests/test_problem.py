"""Implicit problem surface: residuals, Jacobians, domains, seed validation."""

import numpy as np
import pytest

from implift import examples
from implift.errors import DomainViolation, SeedNotOnZ, SeedRankDeficient
from implift.problem import (BOUNDARY_MARGIN, Box, ImplicitProblem,
                             finite_difference_jacobian, validate_seed)

E_MINUS_1 = np.e - 1.0


def fold_problem(seed_y=0.0):
    """F(x, y) = x - y^2; the y-Jacobian vanishes at y = 0."""
    return ImplicitProblem(
        1, 1, 1, lambda x, y: np.array([x[0] - y[0] ** 2]),
        [seed_y ** 2], [seed_y],
        jac_x_fn=lambda x, y: np.array([[1.0]]),
        jac_y_fn=lambda x, y: np.array([[-2.0 * y[0]]]))


class TestBox:
    def test_margin_semantics(self):
        box = Box([0.0], [1.0])
        assert box.contains([0.5])
        assert not box.contains([0.0])
        assert not box.contains([1.0 - 0.5 * BOUNDARY_MARGIN])
        assert box.contains([1.0 - 2.0 * BOUNDARY_MARGIN])

    def test_unbounded_sides(self):
        box = Box([-np.inf, 0.0], [np.inf, 1.0])
        assert box.contains([1e12, 0.5])
        assert not box.contains([0.0, 1.5])
        assert not box.contains([np.inf, 0.5])

    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            Box([1.0], [0.0])

    def test_finite_extent(self):
        assert Box([-1.0, 0.0], [1.0, 5.0]).finite_extent() == 5.0
        assert Box.unbounded(2).finite_extent() is None


class TestResidual:
    def test_line_on_diagonal(self):
        line = examples.get("line")
        assert line.problem.residual([0.3], [0.3]) == pytest.approx(0.0)

    def test_diode_closed_form_zero(self):
        # f(ln 2) = 2 (e^{ln 2} - 1) = 2
        diode = examples.get("diode")
        r = diode.problem.residual([2.0], [np.log(2.0)])
        assert abs(r[0]) <= 1e-12

    def test_diode_direct_value(self):
        diode = examples.get("diode")
        r = diode.problem.residual([0.0], [1.0])
        assert r[0] == pytest.approx(-2.0 * E_MINUS_1, rel=1e-14)

    def test_domain_violation(self):
        diode = examples.get("diode")
        with pytest.raises(DomainViolation):
            diode.problem.residual([200.0], [0.0])
        with pytest.raises(DomainViolation):
            diode.problem.residual([0.0], [9.0])

    def test_purity(self):
        diode = examples.get("diode")
        a, b = diode.problem.seed
        first = diode.problem.residual(a, b)
        for _ in range(5):
            np.testing.assert_array_equal(diode.problem.residual(a, b), first)


class TestJacobians:
    def test_diode_jac_y_at_origin(self):
        # -f'(0) = -(a1/b1 + a2/b2) = -2 for unit parameters
        diode = examples.get("diode")
        np.testing.assert_allclose(diode.problem.jac_y([0.0], [0.0]), [[-2.0]],
                                   rtol=1e-14)

    def test_line_jacobians_constant(self):
        line = examples.get("line")
        np.testing.assert_array_equal(line.problem.jac_x([0.1], [0.1]), [[1.0]])
        np.testing.assert_array_equal(line.problem.jac_y([0.1], [0.1]), [[-1.0]])

    def test_circle_jac_y(self):
        circle = examples.get("circle-x")
        np.testing.assert_allclose(circle.problem.jac_y([1.0, 0.0], [0.0]),
                                   [[0.0], [-1.0]], atol=1e-14)

    def test_finite_difference_matches_analytic(self, rng):
        for name in ("diode", "cubic", "annulus", "constrained-circle"):
            descriptor = examples.get(name)
            problem = descriptor.problem
            stripped = ImplicitProblem(
                problem.m, problem.n, problem.l, problem.residual_fn,
                problem.seed_x, problem.seed_y,
                domain_x=problem.domain_x, domain_y=problem.domain_y)
            box_x = descriptor.sample_box_x or Box.unbounded(problem.m)
            box_y = descriptor.sample_box_y or Box.unbounded(problem.n)
            for _ in range(20):
                x = box_x.sample(rng)[0]
                y = box_y.sample(rng)[0]
                for which in ("jac_x", "jac_y"):
                    analytic = getattr(problem, which)(x, y)
                    numeric = getattr(stripped, which)(x, y)
                    err = np.linalg.norm(numeric - analytic)
                    assert err <= 1e-5 * max(1.0, np.linalg.norm(analytic))

    def test_one_sided_near_boundary(self):
        problem = ImplicitProblem(
            1, 1, 1, lambda x, y: np.array([x[0] - y[0]]), [0.5], [0.5],
            domain_y=Box([0.0], [1.0]))
        jac = problem.jac_y([0.5], [1.5e-9])
        assert jac[0, 0] == pytest.approx(-1.0, rel=1e-6)

    def test_stencil_failure_raises(self):
        # a sliver domain leaves no room for any stencil
        problem = ImplicitProblem(
            1, 1, 1, lambda x, y: np.array([x[0] - y[0]]), [0.0], [1.9e-9],
            domain_y=Box([0.0], [3.8e-9]))
        with pytest.raises(DomainViolation):
            problem.jac_y([0.0], [1.9e-9])


class TestValidateSeed:
    def test_diode_seed_ok(self):
        assert validate_seed(examples.get("diode").problem) <= 1e-10

    def test_seed_off_zero_set(self):
        diode = examples.get("diode")
        moved = ImplicitProblem(1, 1, 1, diode.problem.residual_fn, [0.0], [0.1],
                                domain_x=diode.problem.domain_x,
                                domain_y=diode.problem.domain_y)
        with pytest.raises(SeedNotOnZ):
            validate_seed(moved)

    def test_seed_rank_deficient(self):
        with pytest.raises(SeedRankDeficient):
            validate_seed(fold_problem(seed_y=0.0))

    def test_fold_away_from_origin_ok(self):
        validate_seed(fold_problem(seed_y=1.0))


class TestConstruction:
    def test_l_must_cover_n(self):
        from implift.errors import DimensionMismatch
        with pytest.raises(DimensionMismatch):
            ImplicitProblem(1, 2, 1, lambda x, y: np.array([x[0]]), [0.0], [0.0, 0.0])

    def test_seed_must_be_interior(self):
        with pytest.raises(DomainViolation):
            ImplicitProblem(1, 1, 1, lambda x, y: np.array([x[0] - y[0]]),
                            [0.0], [1.0], domain_y=Box([0.0], [1.0]))

    def test_fd_jacobian_helper_quadratic(self):
        jac = finite_difference_jacobian(
            lambda v: np.array([v[0] ** 2 + 3.0 * v[1]]), np.array([2.0, 1.0]),
            None, 1)
        np.testing.assert_allclose(jac, [[4.0, 3.0]], rtol=1e-7)
