import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddpredict.basis import (BasisExpr, BasisSet, BasisSyntaxError, Factor, LagVar, eval_basis,
                             format_basis, parse_basis)
from ddpredict.errors import NonFiniteError


def test_parse_single_factor():
    e = parse_basis("sin(y[-1])")
    assert e.factors == (Factor("sin", LagVar("y", 1), 1),)


def test_parse_power():
    e = parse_basis("y[-2]^2")
    assert e.factors == (Factor("identity", LagVar("y", 2), 2),)


def test_parse_bilinear_and_normalize():
    e = parse_basis("y[-1] * u[0]")
    assert e == parse_basis("u[0]*y[-1]")
    assert format_basis(e) == "u[0]*y[-1]"


@pytest.mark.parametrize("text", ["sin(y[-1])", "u[0]*y[-1]", "cos(y[-1])^2", "exp(u[-2])*y[-1]^3"])
def test_format_canonical(text):
    assert format_basis(parse_basis(text)) == text


def test_whitespace_ignored():
    assert parse_basis(" cos ( y [ -1 ] ) ^ 2 ") == parse_basis("cos(y[-1])^2")


@pytest.mark.parametrize("text, pos", [
    ("y[0]", 2),
    ("y[1]", 2),
    ("u[2]", 2),
    ("tan(y[-1])", 0),
    ("sin(y[-1]", 9),
    ("y[-1]*", 6),
    ("y[-1]^0", 6),
    ("y[-x]", 3),
    ("", 0),
    ("y[-1] y[-2]", 6),
])
def test_parse_errors(text, pos):
    with pytest.raises(BasisSyntaxError) as exc:
        parse_basis(text)
    assert exc.value.pos == pos


def test_eval_examples():
    assert math.isclose(eval_basis(parse_basis("sin(y[-1])"), [0.0, 1.0], [0, 0, 0]), math.sin(1.0))
    assert eval_basis(parse_basis("y[-2]^2"), [3.0, 7.0], [0, 0, 0]) == 9.0
    assert eval_basis(parse_basis("u[0]*y[-1]"), [0.0, 5.0], [0.0, 0.0, 2.0]) == 10.0


def test_eval_vectorized():
    e = parse_basis("u[-1]*cos(y[-2])")
    x_y = np.array([[0.1, 0.2, 0.3], [1.0, 2.0, 3.0]])
    x_u = np.array([[9.0, 9, 9], [1.0, 2.0, 3.0], [0.0, 0, 0]])
    assert np.allclose(eval_basis(e, x_y, x_u), [1.0 * math.cos(0.1), 2 * math.cos(0.2), 3 * math.cos(0.3)])


def test_eval_overflow_names_factor():
    with pytest.raises(NonFiniteError, match="exp"):
        eval_basis(parse_basis("exp(y[-1])"), [1000.0], [0.0, 0.0])


def test_eval_lag_beyond_window():
    with pytest.raises(ValueError):
        eval_basis(parse_basis("y[-3]"), [1.0, 2.0], [0, 0, 0])


def test_eval_does_not_mutate_inputs():
    x_y, x_u = np.array([0.5, 0.7]), np.array([1.0, 2.0, 3.0])
    e = parse_basis("sin(y[-1])*u[0]^2")
    a = eval_basis(e, x_y, x_u)
    b = eval_basis(e, x_y, x_u)
    assert a == b and np.array_equal(x_y, [0.5, 0.7]) and np.array_equal(x_u, [1, 2, 3])


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=20))
def test_six_functions_match_scalar(vals):
    exprs = BasisSet.parse(["y[-1]^2", "y[-1]^3", "y[-1]^4", "cos(y[-1])", "sin(y[-1])", "exp(y[-1])"])
    direct = [lambda y: y**2, lambda y: y**3, lambda y: y**4, math.cos, math.sin, math.exp]
    for v in vals:
        got = exprs.evaluate([0.0, v], [0.0, 0.0, 0.0])
        for g, f in zip(got, direct):
            assert g == pytest.approx(f(v), rel=1e-15, abs=1e-300)


def test_basis_set_lag():
    assert BasisSet.parse(["sin(y[-1])", "y[-2]^2"]).lag == 2
    assert BasisSet().lag == 0
    assert len(BasisSet.parse(["u[0]"])) == 1


def test_empty_expr_rejected():
    with pytest.raises(ValueError):
        BasisExpr(())


lagvars = st.one_of(
    st.builds(LagVar, st.just("y"), st.integers(1, 5)),
    st.builds(LagVar, st.just("u"), st.integers(0, 5)),
)
factors = st.builds(Factor, st.sampled_from(["identity", "sin", "cos", "exp"]), lagvars, st.integers(1, 4))
exprs = st.lists(factors, min_size=1, max_size=4).map(lambda fs: BasisExpr(tuple(fs)))


@given(exprs)
def test_round_trip(e):
    assert parse_basis(format_basis(e)) == e


@given(exprs, st.randoms())
def test_factor_order_irrelevant(e, rnd):
    fs = list(e.factors)
    rnd.shuffle(fs)
    assert BasisExpr(tuple(fs)) == e
