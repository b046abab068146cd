"""Expression language: parsing, precedence, compiled residuals."""

import math

import numpy as np
import pytest

from implift.errors import ExpressionError
from implift.expressions import compile_residual, parse_expression


def evaluate(text, **env):
    return parse_expression(text).evaluate(env)


class TestEvaluation:
    def test_arithmetic(self):
        assert evaluate("1 + 2 * 3") == 7.0
        assert evaluate("(1 + 2) * 3") == 9.0
        assert evaluate("7 / 2") == 3.5
        assert evaluate("10 - 4 - 3") == 3.0  # left associative

    def test_power_precedence(self):
        assert evaluate("2 + 3 * 4^2") == 50.0
        assert evaluate("-2^2") == -4.0      # power binds tighter than negation
        assert evaluate("2^-1") == 0.5
        assert evaluate("2^3^2") == 512.0    # right associative

    def test_functions(self):
        assert evaluate("exp(0)") == 1.0
        assert evaluate("log(exp(2))") == pytest.approx(2.0)
        assert evaluate("sin(0) + cos(0)") == 1.0

    def test_variables(self):
        assert evaluate("x1 - y1", x1=2.0, y1=0.5) == 1.5
        assert evaluate("x1 * x2 + y1", x1=2.0, x2=3.0, y1=1.0) == 7.0

    def test_scientific_notation(self):
        assert evaluate("1e-3 + 2.5E2") == pytest.approx(250.001)
        assert evaluate(".5 * 4") == 2.0

    def test_unicode_operator_aliases(self):
        assert evaluate("6 ÷ 2") == 3.0
        assert evaluate("3 × 4") == 12.0
        assert evaluate("5 − 1") == 4.0

    def test_matches_python_eval_randomly(self, rng):
        texts = ["x1^2 + 3*y1 - 1", "exp(x1/4) - y1*y1", "sin(x1)*cos(y1) + 2"]
        for text in texts:
            python_text = text.replace("^", "**")
            for _ in range(25):
                x1, y1 = rng.uniform(-2.0, 2.0, 2)
                expected = eval(python_text, {"exp": math.exp, "sin": math.sin,
                                              "cos": math.cos}, {"x1": x1, "y1": y1})
                assert evaluate(text, x1=x1, y1=y1) == pytest.approx(expected,
                                                                     rel=1e-12)


class TestErrors:
    @pytest.mark.parametrize("text", ["2 +", "(2", "2 @ 3", "foo(2)", "2 3", ""])
    def test_malformed_rejected(self, text):
        with pytest.raises(ExpressionError):
            parse_expression(text)

    def test_log_of_negative_reports_expression(self):
        expr = parse_expression("log(x1)")
        with pytest.raises(ExpressionError):
            expr.evaluate({"x1": -1.0})


class TestCompiledResiduals:
    def test_unknown_variables_rejected(self):
        with pytest.raises(ExpressionError):
            compile_residual(["x1 - y2"], 1, 1)

    def test_cubic_matches_closed_form(self, rng):
        residual = compile_residual(["y1^3 + y1 - x1"], 1, 1)
        for _ in range(20):
            x, y = rng.uniform(-3.0, 3.0, 2)
            assert residual([x], [y])[0] == pytest.approx(y ** 3 + y - x, rel=1e-12)

    def test_usable_as_problem_with_fd_jacobians(self):
        from implift.corrector import newton_correct
        from implift.problem import ImplicitProblem
        residual_list = compile_residual(["y1^3 + y1 - x1"], 1, 1)
        problem = ImplicitProblem(
            1, 1, 1, lambda x, y: np.array(residual_list(x, y)), [0.0], [0.0])
        y = newton_correct(problem, np.array([2.0]), np.array([0.5]))
        assert y[0] == pytest.approx(1.0, abs=1e-9)

    def test_multi_component(self):
        residual = compile_residual(["x1 - cos(y1)", "x2 - sin(y1)"], 2, 1)
        values = residual([1.0, 0.0], [0.0])
        assert values == pytest.approx([0.0, 0.0])
