import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from framecurv import expr as ex
from framecurv.expr import BinOp, Call, Const, Neg, Num, Var

NAMES = ("x", "y", "z")
SMOOTH = ("sin", "cos", "exp", "tanh", "sinh", "cosh")


def leaves():
    return st.one_of(
        st.floats(0, 3, allow_nan=False).map(lambda v: Num(round(v, 3))),
        st.sampled_from(NAMES).map(Var),
        st.sampled_from(["pi", "e"]).map(Const),
    )


def trees(max_leaves=12):
    def extend(children):
        return st.one_of(
            children.map(Neg),
            st.tuples(st.sampled_from("+-*"), children, children).map(lambda t: BinOp(*t)),
            st.tuples(children, st.integers(1, 3)).map(lambda t: BinOp("^", t[0], Num(float(t[1])))),
            st.tuples(children, children).map(
                lambda t: BinOp("/", t[0], BinOp("+", Num(2.0), BinOp("^", t[1], Num(2.0))))),
            st.tuples(st.sampled_from(SMOOTH), children).map(lambda t: Call(*t)),
        )
    return st.recursive(leaves(), extend, max_leaves=max_leaves)


# Any AST at all, including constructs the smooth strategy avoids.
def any_trees():
    def extend(children):
        return st.one_of(
            children.map(Neg),
            st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: BinOp(*t)),
            st.tuples(st.sampled_from(sorted(ex.FUNCTIONS)), children).map(lambda t: Call(*t)),
        )
    nums = st.floats(0, 1e300, allow_nan=False, allow_infinity=False).map(Num)
    return st.recursive(st.one_of(nums, st.sampled_from(NAMES).map(Var),
                                  st.sampled_from(["pi", "e"]).map(Const)), extend, max_leaves=20)


points = st.fixed_dictionaries({n: st.floats(-1.5, 1.5) for n in NAMES})


class TestParse:
    def test_literal(self):
        assert ex.parse("0") == Num(0.0)

    def test_frame_entry(self):
        assert ex.parse("csc(p)") == Call("csc", Var("p"))

    def test_negated_variable(self):
        assert ex.parse("-x4") == Neg(Var("x4"))

    def test_power_binds_tighter_than_negation(self):
        assert ex.parse("-x^2") == Neg(BinOp("^", Var("x"), Num(2.0)))

    def test_power_is_right_associative(self):
        a, b, c = Var("a"), Var("b"), Var("c")
        assert ex.parse("a^b^c") == BinOp("^", a, BinOp("^", b, c))

    @pytest.mark.parametrize("op", ["-", "/"])
    def test_left_associative(self, op):
        a, b, c = Var("a"), Var("b"), Var("c")
        assert ex.parse(f"a{op}b{op}c") == BinOp(op, BinOp(op, a, b), c)

    def test_product_before_sum(self):
        assert ex.parse("1 + 2*x") == BinOp("+", Num(1.0), BinOp("*", Num(2.0), Var("x")))

    def test_whitespace_is_ignored(self):
        assert ex.parse(" 1+ t ^2 ") == ex.parse("1+t^2")

    def test_exponent_literals(self):
        assert ex.parse("2e3") == Num(2000.0)
        assert ex.parse("1.5E-2") == Num(0.015)

    @pytest.mark.parametrize("src, offset", [
        ("1+", 2), ("(x", 2), ("x)", 1), ("x y", 2), ("sin x", 4), ("", 0),
    ])
    def test_syntax_error_offset(self, src, offset):
        with pytest.raises(ex.ParseError) as info:
            ex.parse(src, ["x"])
        assert info.value.offset == offset

    def test_offset_counts_bytes(self):
        with pytest.raises(ex.ParseError) as info:
            ex.parse("é + @")
        assert info.value.offset == 0
        with pytest.raises(ex.ParseError) as info:
            ex.parse("x + é", ["x"])
        assert info.value.offset == 4

    def test_unknown_identifier(self):
        with pytest.raises(ex.UnknownIdentifier) as info:
            ex.parse("q + 1", ["p"])
        assert info.value.name == "q"
        with pytest.raises(ex.UnknownIdentifier):
            ex.parse("foo(x)", ["x"])

    def test_free_names_without_chart(self):
        assert ex.variables_of(ex.parse("t*x1 + sin(p)")) == {"t", "x1", "p"}


class TestRoundTrip:
    @given(any_trees())
    def test_parse_print_identity(self, tree):
        assert ex.parse(ex.to_text(tree)) == tree

    @given(any_trees())
    def test_print_parse_idempotent(self, tree):
        text = ex.to_text(tree)
        assert ex.to_text(ex.parse(text)) == text


class TestEvaluate:
    def test_examples(self):
        assert ex.evaluate(ex.parse("csc(p)"), {"p": math.pi / 2}) == pytest.approx(1.0, abs=1e-15)
        assert ex.evaluate(ex.parse("t"), {"t": 0.7}) == 0.7
        assert ex.evaluate(ex.parse("1+t^2"), {"t": 2.0}) == 5.0

    def test_constants(self):
        assert ex.evaluate(ex.parse("pi + e"), {}) == math.pi + math.e

    @pytest.mark.parametrize("src, env", [
        ("log(0-x)", {"x": 1.0}),
        ("1/x", {"x": 0.0}),
        ("csc(x)", {"x": 0.0}),
        ("cot(x)", {"x": math.pi}),
        ("sqrt(x)", {"x": -1.0}),
        ("(0-x)^0.5", {"x": 2.0}),
    ])
    def test_domain_errors_name_the_point(self, src, env):
        with pytest.raises(ex.DomainError) as info:
            ex.evaluate(ex.parse(src), env)
        assert info.value.point == env

    def test_negative_base_integer_power(self):
        assert ex.evaluate(ex.parse("(0-x)^3"), {"x": 2.0}) == -8.0

    @given(trees(), points)
    def test_deterministic(self, tree, pt):
        try:
            a = ex.evaluate(tree, pt)
        except ex.DomainError:
            return
        b = ex.evaluate(tree, pt)
        assert a == b or (math.isnan(a) and math.isnan(b))


class TestDual:
    def test_variable_seed(self):
        d = ex.eval_dual(ex.parse("t"), {"t": 0.3}, {"t": 1.0})
        assert (d.primal, d.tangent) == (0.3, 1.0)

    def test_csc_derivative(self):
        d = ex.eval_dual(ex.parse("csc(p)"), {"p": math.pi / 4}, {"p": 1.0})
        assert d.tangent == pytest.approx(-math.sqrt(2), abs=1e-14)
        h = 1e-6
        f = lambda p: 1 / math.sin(p)
        fd = (f(math.pi / 4 + h) - f(math.pi / 4 - h)) / (2 * h)
        assert d.tangent == pytest.approx(fd, abs=1e-8)

    @given(trees(), points)
    def test_zero_direction(self, tree, pt):
        try:
            d = ex.eval_dual(tree, pt, {n: 0.0 for n in NAMES})
            plain = ex.evaluate(tree, pt)
        except (ex.DomainError, OverflowError):
            return
        assume(math.isfinite(plain))
        assert d.tangent == 0.0
        assert d.primal == plain

    @given(trees(), points, st.fixed_dictionaries({n: st.floats(-1, 1) for n in NAMES}))
    def test_matches_central_difference(self, tree, pt, direction):
        try:
            d = ex.eval_dual(tree, pt, direction)
        except (ex.DomainError, OverflowError):
            return
        assume(math.isfinite(d.primal) and abs(d.primal) < 1e3 and abs(d.tangent) < 1e4)
        h = 1e-6

        def at(s):
            return ex.evaluate(tree, {n: pt[n] + s * direction[n] for n in NAMES})

        try:
            fd = (at(h) - at(-h)) / (2 * h)
        except (ex.DomainError, OverflowError):
            return
        assert abs(d.tangent - fd) <= 1e-6 * (1 + abs(d.tangent))

    @given(trees(max_leaves=8), points)
    def test_jet_matches_dual(self, tree, pt):
        x = np.array([pt[n] for n in NAMES])
        try:
            jet = ex.eval_jet(tree, NAMES, x)
        except (ex.DomainError, OverflowError):
            return
        assume(np.all(np.isfinite(jet.hess)) and abs(jet.value) < 1e6)
        assert np.allclose(jet.hess, jet.hess.T, rtol=1e-12, atol=1e-12)
        for i, n in enumerate(NAMES):
            d = ex.eval_dual(tree, pt, {m: float(m == n) for m in NAMES})
            assert jet.grad[i] == pytest.approx(d.tangent, rel=1e-12, abs=1e-12)
