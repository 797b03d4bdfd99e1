import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from vfc.expressions import (
    Dual,
    const_vec,
    eval_expr,
    eval_pred,
    eval_vector,
    jacobian,
    num,
    value_and_jacobian,
    var,
)

F = Fraction


class TestRationalEval:
    def test_num_and_var(self):
        assert eval_expr(num("3/4"), []) == F(3, 4)
        assert eval_expr(var(1), [F(1), F(5, 2)]) == F(5, 2)

    def test_arith_stays_rational(self):
        ast = ["/", ["+", var(0), ["*", num(2), var(1)]], num("3/1")]
        out = eval_expr(ast, [F(1, 2), F(1, 4)])
        assert out == F(1, 3)
        assert isinstance(out, Fraction)

    def test_pow(self):
        assert eval_expr(["pow", var(0), 3], [F(2, 3)]) == F(8, 27)
        assert eval_expr(["pow", var(0), 0], [F(7)]) == F(1)
        assert eval_expr(["pow", var(0), -2], [F(2)]) == F(1, 4)

    def test_neg_sub(self):
        assert eval_expr(["neg", ["-", var(0), var(1)]], [F(1), F(3)]) == F(2)

    def test_const_vec(self):
        assert eval_vector(const_vec([1, F(1, 2)]), []) == [F(1), F(1, 2)]


class TestTranscendental:
    def test_sin_cos_quarter_turn(self):
        assert eval_expr(["sin2pi", num("1/4")], []) == pytest.approx(1.0)
        assert eval_expr(["cos2pi", num("1/2")], []) == pytest.approx(-1.0)

    def test_sqrt(self):
        assert eval_expr(["sqrt", num("9/4")], []) == pytest.approx(1.5)

    def test_clamp01(self):
        assert eval_expr(["clamp01", num("-1/2")], []) == 0
        assert eval_expr(["clamp01", num("3/2")], []) == 1
        assert eval_expr(["clamp01", num("1/3")], []) == F(1, 3)

    def test_smoothstep_values(self):
        assert eval_expr(["smoothstep", num("-1/1")], []) == 0
        assert eval_expr(["smoothstep", num("2/1")], []) == 1
        assert eval_expr(["smoothstep", num("1/2")], []) == F(1, 2)
        # u^2 (3 - 2u) at 1/4 = (1/16)(5/2) = 5/32
        assert eval_expr(["smoothstep", num("1/4")], []) == F(5, 32)


class TestDual:
    def test_product_rule(self):
        x = Dual.seed(F(2), 0, 2)
        y = Dual.seed(F(3), 1, 2)
        z = x * y + x
        assert z.val == F(8)
        assert z.grad == (F(4), F(2))

    def test_quotient_rule(self):
        x = Dual.seed(F(1), 0, 1)
        z = 1 / (1 + x)
        assert z.val == F(1, 2)
        assert z.grad == (F(-1, 4),)

    def test_jacobian_polynomial_exact(self):
        # f(x, y) = (x^2 y, x - y^3)
        asts = [
            ["*", ["pow", var(0), 2], var(1)],
            ["-", var(0), ["pow", var(1), 3]],
        ]
        rows = jacobian(asts, [F(2), F(3)])
        assert rows == [[F(12), F(4)], [F(1), F(-27)]]

    def test_jacobian_trig(self):
        asts = [["sin2pi", var(0)], ["cos2pi", var(0)]]
        rows = jacobian(asts, [F(1, 8)])
        tau = 2 * math.pi
        assert rows[0][0] == pytest.approx(tau * math.cos(tau / 8))
        assert rows[1][0] == pytest.approx(-tau * math.sin(tau / 8))

    def test_tangent_dims_restriction(self):
        # derivative only along coordinate 1; coordinate 0 held constant
        asts = [["*", var(0), var(1)]]
        vals, rows = value_and_jacobian(asts, [F(5), F(7)], tangent_dims=[1])
        assert vals == [F(35)]
        assert rows == [[F(5)]]

    def test_smoothstep_derivative_c1(self):
        ast = ["smoothstep", var(0)]
        # interior: d/du u^2(3-2u) = 6u - 6u^2
        (row,) = jacobian([ast], [F(1, 4)])
        assert row[0] == F(6, 4) - F(6, 16)
        # flat regions: derivative exactly zero
        assert jacobian([ast], [F(-1)]) == [[0]]
        assert jacobian([ast], [F(2)]) == [[0]]

    @given(st.fractions(min_value=-3, max_value=3), st.fractions(min_value=-3, max_value=3))
    def test_derivative_matches_finite_difference(self, a, b):
        ast = ["+", ["*", var(0), var(0), var(1)], ["pow", ["+", var(1), num(5)], 2]]
        (row,) = jacobian([ast], [a, b])
        h = F(1, 1_000_000)
        for k, d in enumerate(row):
            bumped = [a, b]
            bumped[k] += h
            fd = (eval_expr(ast, bumped) - eval_expr(ast, [a, b])) / h
            assert abs(fd - d) < F(1, 1000)


class TestPredicates:
    def test_comparisons_exact(self):
        assert eval_pred(["<=", var(0), num("1/3")], [F(1, 3)])
        assert not eval_pred(["<", var(0), num("1/3")], [F(1, 3)])
        assert eval_pred(["==", ["*", num(3), var(0)], num(1)], [F(1, 3)])

    def test_boolean_ops(self):
        p = ["and", ["true"], ["or", ["false"], ["not", ["false"]]]]
        assert eval_pred(p, [])
        assert not eval_pred(["and", ["true"], ["false"]], [])

    def test_annulus_membership(self):
        # 1/4 <= x^2 + y^2 <= 4
        q = ["+", ["pow", var(0), 2], ["pow", var(1), 2]]
        p = ["and", ["<=", num("1/4"), q], ["<=", q, num("4/1")]]
        assert eval_pred(p, [F(1), F(0)])
        assert not eval_pred(p, [F(0), F(0)])
        assert not eval_pred(p, [F(3), F(0)])

    def test_unknown_node_raises(self):
        with pytest.raises(ValueError):
            eval_expr(["bogus", 1], [])
        with pytest.raises(ValueError):
            eval_pred(["bogus", num(1), num(2)], [])
