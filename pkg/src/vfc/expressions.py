"""Expression ASTs with forward-mode (dual-number) first derivatives.

Expressions are JSON-native nested lists, e.g. ``["*", ["var", 0],
["num", "1/2"]]``.  Rational subexpressions evaluate exactly over
:class:`fractions.Fraction`; transcendental nodes (``sin2pi``, ``cos2pi``,
``sqrt``) coerce to floats.  Angle arguments are fractions of a full turn,
so rational sample coordinates stay rational as long as possible.

Supported value nodes
---------------------
``["num", "p/q"]``, ``["var", k]``, ``["+", a, b, ...]``, ``["-", a, b]``,
``["neg", a]``, ``["*", a, b, ...]``, ``["/", a, b]``, ``["pow", a, n]``,
``["sqrt", a]``, ``["sin2pi", a]``, ``["cos2pi", a]``, ``["clamp01", a]``,
``["smoothstep", a]`` (the C¹ ramp u²(3-2u) of the clamped argument,
equal to 0 for a ≤ 0 and 1 for a ≥ 1).

Predicate nodes
---------------
``["<=", a, b]``, ``["<", a, b]``, [">=", a, b], [">", a, b],
``["==", a, b]``, ``["and", ...]``, ``["or", ...]``, ``["not", p]``,
``["true"]``, ``["false"]``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

__all__ = [
    "Dual",
    "eval_expr",
    "eval_vector",
    "eval_pred",
    "jacobian",
    "value_and_jacobian",
    "num",
    "var",
    "const_vec",
]

Number = int | float | Fraction


def num(value) -> list:
    """AST literal node for an exact rational."""
    v = Fraction(value)
    return ["num", f"{v.numerator}/{v.denominator}"]


def var(k: int) -> list:
    return ["var", k]


def const_vec(values) -> list[list]:
    return [num(v) for v in values]


class Dual:
    """A first-order dual number: value + directional gradient."""

    __slots__ = ("val", "grad")

    def __init__(self, val, grad: tuple):
        self.val = val
        self.grad = tuple(grad)

    @staticmethod
    def lift(x, nvars: int) -> "Dual":
        if isinstance(x, Dual):
            return x
        return Dual(x, (0,) * nvars)

    @staticmethod
    def seed(x, k: int, nvars: int) -> "Dual":
        return Dual(x, tuple(1 if i == k else 0 for i in range(nvars)))

    def _coerce(self, other):
        if isinstance(other, Dual):
            return other
        return Dual(other, (0,) * len(self.grad))

    def __add__(self, other):
        o = self._coerce(other)
        return Dual(self.val + o.val, tuple(a + b for a, b in zip(self.grad, o.grad)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return Dual(self.val - o.val, tuple(a - b for a, b in zip(self.grad, o.grad)))

    def __rsub__(self, other):
        o = self._coerce(other)
        return o - self

    def __neg__(self):
        return Dual(-self.val, tuple(-a for a in self.grad))

    def __mul__(self, other):
        o = self._coerce(other)
        return Dual(
            self.val * o.val,
            tuple(a * o.val + self.val * b for a, b in zip(self.grad, o.grad)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        inv = 1 / o.val if isinstance(o.val, Fraction) else 1.0 / o.val
        val = self.val * inv
        return Dual(
            val,
            tuple((a - val * b) * inv for a, b in zip(self.grad, o.grad)),
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return o / self

    def __repr__(self):
        return f"Dual({self.val}, {self.grad})"


def _val(x):
    return x.val if isinstance(x, Dual) else x


def _chain(x, fval, dval):
    """Lift a scalar function with value fval and derivative dval at x."""
    if isinstance(x, Dual):
        return Dual(fval, tuple(dval * g for g in x.grad))
    return fval


_TWO_PI = 2.0 * math.pi


def eval_expr(ast, coords: Sequence):
    """Evaluate an AST at coordinates (numbers or Duals)."""
    op = ast[0]
    if op == "num":
        return Fraction(ast[1])
    if op == "var":
        return coords[ast[1]]
    if op == "+":
        acc = eval_expr(ast[1], coords)
        for sub in ast[2:]:
            acc = acc + eval_expr(sub, coords)
        return acc
    if op == "-":
        return eval_expr(ast[1], coords) - eval_expr(ast[2], coords)
    if op == "neg":
        return -eval_expr(ast[1], coords)
    if op == "*":
        acc = eval_expr(ast[1], coords)
        for sub in ast[2:]:
            acc = acc * eval_expr(sub, coords)
        return acc
    if op == "/":
        return eval_expr(ast[1], coords) / eval_expr(ast[2], coords)
    if op == "pow":
        base = eval_expr(ast[1], coords)
        n = int(ast[2])
        acc = base
        if n == 0:
            return Fraction(1)
        if n < 0:
            acc = 1 / base if not isinstance(base, Dual) else Dual(1, (0,) * len(base.grad)) / base
            base = acc
            n = -n
            acc = base
        for _ in range(n - 1):
            acc = acc * base
        return acc
    if op == "sqrt":
        x = eval_expr(ast[1], coords)
        v = float(_val(x))
        f = math.sqrt(v)
        d = 0.0 if f == 0.0 else 0.5 / f
        return _chain(x, f, d)
    if op == "sin2pi":
        x = eval_expr(ast[1], coords)
        v = float(_val(x)) * _TWO_PI
        return _chain(x, math.sin(v), _TWO_PI * math.cos(v))
    if op == "cos2pi":
        x = eval_expr(ast[1], coords)
        v = float(_val(x)) * _TWO_PI
        return _chain(x, math.cos(v), -_TWO_PI * math.sin(v))
    if op == "clamp01":
        x = eval_expr(ast[1], coords)
        v = _val(x)
        if v <= 0:
            return _chain(x, Fraction(0) if isinstance(v, Fraction) else 0.0, 0)
        if v >= 1:
            return _chain(x, Fraction(1) if isinstance(v, Fraction) else 1.0, 0)
        return x
    if op == "smoothstep":
        x = eval_expr(ast[1], coords)
        v = _val(x)
        if v <= 0:
            return _chain(x, Fraction(0) if isinstance(v, Fraction) else 0.0, 0)
        if v >= 1:
            return _chain(x, Fraction(1) if isinstance(v, Fraction) else 1.0, 0)
        return x * x * (3 - 2 * x)
    raise ValueError(f"unknown expression node: {op!r}")


def eval_vector(asts: Sequence, coords: Sequence) -> list:
    return [eval_expr(a, coords) for a in asts]


def eval_pred(ast, coords: Sequence) -> bool:
    op = ast[0]
    if op == "true":
        return True
    if op == "false":
        return False
    if op == "and":
        return all(eval_pred(sub, coords) for sub in ast[1:])
    if op == "or":
        return any(eval_pred(sub, coords) for sub in ast[1:])
    if op == "not":
        return not eval_pred(ast[1], coords)
    a = _val(eval_expr(ast[1], coords))
    b = _val(eval_expr(ast[2], coords))
    if op == "<=":
        return a <= b
    if op == "<":
        return a < b
    if op == ">=":
        return a >= b
    if op == ">":
        return a > b
    if op == "==":
        return a == b
    raise ValueError(f"unknown predicate node: {op!r}")


def value_and_jacobian(
    asts: Sequence,
    coords: Sequence,
    tangent_dims: Sequence[int] | None = None,
) -> tuple[list, list[list]]:
    """Values and the Jacobian w.r.t. the tangent coordinate directions.

    Returns ``(values, rows)`` where ``rows[i][j]`` is the derivative of the
    i-th component along the j-th tangent direction.  Non-tangent
    coordinates are treated as constants.
    """
    dims = list(tangent_dims) if tangent_dims is not None else list(range(len(coords)))
    nv = len(dims)
    lifted = []
    for idx, c in enumerate(coords):
        if idx in dims:
            lifted.append(Dual.seed(c, dims.index(idx), nv))
        else:
            lifted.append(c)
    values, rows = [], []
    for a in asts:
        r = eval_expr(a, lifted)
        if isinstance(r, Dual):
            values.append(r.val)
            rows.append(list(r.grad))
        else:
            values.append(r)
            rows.append([0] * nv)
    return values, rows


def jacobian(
    asts: Sequence,
    coords: Sequence,
    tangent_dims: Sequence[int] | None = None,
) -> list[list]:
    return value_and_jacobian(asts, coords, tangent_dims)[1]
