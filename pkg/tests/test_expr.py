import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvlab.errors import DomainError, ExprSyntaxError, UnknownIdentifierError
from curvlab.expr import Binary, Const, Field, Num, Unary, Var, constant_value, evaluate, parse_expr, to_string


def test_sin_squared_plus_one():
    assert Field("sin(x1)^2 + 1", 1)(np.zeros((1, 1)))[0] == 1.0


def test_two_pi():
    assert constant_value("2*pi") == 6.283185307179586


def test_unclosed_call_offset():
    with pytest.raises(ExprSyntaxError) as err:
        parse_expr("sin(")
    assert err.value.offset == 4
    assert "offset 4" in str(err.value)


@pytest.mark.parametrize("text,offset", [("3 $ 4", 2), ("(1 + 2", 6), ("1 +", 3), ("2 3", 2)])
def test_error_offsets(text, offset):
    with pytest.raises(ExprSyntaxError) as err:
        parse_expr(text)
    assert err.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse_expr("foo + 1")
    with pytest.raises(UnknownIdentifierError):
        parse_expr("x4", nvars=3)


@pytest.mark.parametrize("text,value", [
    ("2^3^2", 512.0),
    ("-2^2", -4.0),
    ("1 - 2 - 3", -4.0),
    ("8 / 4 / 2", 1.0),
    ("2 * 3 + 4", 10.0),
    ("2 * (3 + 4)", 14.0),
    ("sqrt(16) + exp(0) + cos(0)", 6.0),
    ("1.5e1", 15.0),
])
def test_precedence(text, value):
    assert constant_value(text) == value


def test_vectorized_variables():
    X = np.array([[0.0, 1.0], [math.pi / 2, 2.0]])
    assert np.allclose(Field("sin(x1) * x2")(X), [0.0, 2.0])


def test_non_finite_is_domain_error():
    with pytest.raises(DomainError):
        Field("sqrt(x1)", 1)(np.array([[-1.0]]))


leaves = st.one_of(
    st.integers(0, 99).map(lambda k: Num(float(k), str(k))),
    st.integers(0, 2).map(Var),
    st.just(Const("pi")),
)


def extend(children):
    return st.one_of(
        st.builds(Unary, st.sampled_from(["neg", "sin", "cos", "exp", "sqrt"]), children),
        st.builds(Binary, st.sampled_from(list("+-*/^")), children, children),
    )


trees = st.recursive(leaves, extend, max_leaves=12)


@given(trees)
@settings(max_examples=300, deadline=None)
def test_print_parse_roundtrip(tree):
    assert parse_expr(to_string(tree), 3) == tree


@given(trees)
@settings(max_examples=100, deadline=None)
def test_print_parse_preserves_value(tree):
    X = np.array([[0.3, -0.7, 1.1]])
    with np.errstate(all="ignore"):
        a = evaluate(tree, X)
        b = evaluate(parse_expr(to_string(tree), 3), X)
    assert np.array_equal(a, b, equal_nan=True)
