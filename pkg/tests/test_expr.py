import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eqstab.errors import DomainError, ExprSyntaxError, UnknownIdentifierError, VariableIndexError
from eqstab.expr import (
    Binary, Const, Unary, Var, compile_expr, diff_expr, eval_expr, parse_expr, to_text, variables,
)
from _gen import central_difference, fd_resolved, random_expr, rel_err, sample_in_domain


def test_parse_examples():
    assert parse_expr("sqrt(x1) - 1", 1) == Binary("-", Unary("sqrt", Var(1)), Const(1.0))
    assert parse_expr("(1 - x1^3)/3", 2) == Binary(
        "/", Binary("-", Const(1.0), Binary("^", Var(1), Const(3.0))), Const(3.0))


@pytest.mark.parametrize("text, expected", [
    ("-x1^2", Unary("neg", Binary("^", Var(1), Const(2.0)))),
    ("2^3^2", Binary("^", Const(2.0), Binary("^", Const(3.0), Const(2.0)))),
    ("x1 - x2 - x1", Binary("-", Binary("-", Var(1), Var(2)), Var(1))),
    ("x1/x2*x1", Binary("*", Binary("/", Var(1), Var(2)), Var(1))),
    ("-3", Const(-3.0)),
    ("1.5e-3", Const(0.0015)),
])
def test_precedence_and_associativity(text, expected):
    assert parse_expr(text, 2) == expected


def test_power_binds_tighter_than_unary_minus():
    assert eval_expr(parse_expr("-2^2", 1), [0.0]) == -4.0
    assert eval_expr(parse_expr("2^-1", 1), [0.0]) == 0.5


@pytest.mark.parametrize("text, exc", [
    ("x9", VariableIndexError),
    ("x0", VariableIndexError),
    ("foo(x1)", UnknownIdentifierError),
    ("y", UnknownIdentifierError),
    ("1 +", ExprSyntaxError),
    ("(x1", ExprSyntaxError),
    ("x1 x2", ExprSyntaxError),
    ("", ExprSyntaxError),
    ("x1 $ 2", ExprSyntaxError),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_expr(text, 3)


def test_syntax_error_reports_byte_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("x1 + * 2", 1)
    assert info.value.offset == 5
    assert "byte 5" in str(info.value)


def test_eval_examples():
    e = parse_expr("sqrt(x1) - 1", 1)
    assert eval_expr(e, [4.0]) == 1.0
    assert eval_expr(e, [1.0]) == 0.0
    with pytest.raises(DomainError) as info:
        eval_expr(e, [-1.0])
    assert "sqrt(x1)" in str(info.value)


@pytest.mark.parametrize("text, x", [
    ("ln(x1)", 0.0), ("1/x1", 0.0), ("x1^0.5", -1.0), ("x1^-1", 0.0), ("exp(x1)", 1000.0),
])
def test_domain_errors(text, x):
    with pytest.raises(DomainError):
        eval_expr(parse_expr(text, 1), [x])


def test_integer_power_of_negative_base():
    assert eval_expr(parse_expr("x1^3", 1), [-2.0]) == -8.0


def test_derivative_examples():
    assert to_text(diff_expr(parse_expr("sqrt(x1) - 1", 1), 1)) == "1/(2*sqrt(x1))"
    e = parse_expr("(1 - x1^3)/3", 2)
    assert to_text(diff_expr(e, 1)) == "-x1^2"
    assert diff_expr(e, 2) == Const(0.0)


def test_simplifier_identities():
    assert diff_expr(parse_expr("x1*x2", 2), 1) == Var(2)
    assert diff_expr(parse_expr("x1 + 0*x2", 2), 2) == Const(0.0)
    assert diff_expr(parse_expr("3*x1", 1), 1) == Const(3.0)


def test_variables():
    assert variables(parse_expr("x1 + sin(x3)", 3)) == {1, 3}


def test_compiled_matches_interpreted():
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 300:
        e = random_expr(rng)
        x = sample_in_domain(rng, e)
        if x is None:
            continue
        assert compile_expr(e)(x) == eval_expr(e, x)
        checked += 1


def test_derivative_against_central_differences():
    rng = np.random.default_rng(99)
    for _ in range(200):
        e = random_expr(rng)
        x = sample_in_domain(rng, e)
        if x is None:
            continue
        for var in (1, 2, 3):
            if fd_resolved(e, x, var):
                assert rel_err(eval_expr(diff_expr(e, var), x),
                               central_difference(e, x, var)) <= 1e-5, to_text(e)


# ---------------------------------------------------------------------------
# properties

consts = st.sampled_from([0.0, 1.0, 2.0, 0.5, 3.25, 1e-3, 12345.0, 1e20, -1.0, -2.5, 0.1])
leaves = st.one_of(consts.map(Const), st.integers(1, 3).map(Var))


def _trees(children):
    return st.one_of(
        st.tuples(st.sampled_from(["neg", "sqrt", "sin", "cos", "exp", "ln"]), children)
        .map(lambda t: Unary(*t)),
        st.tuples(st.sampled_from(["+", "-", "*", "/", "^"]), children, children)
        .map(lambda t: Binary(*t)),
    )


asts = st.recursive(leaves, _trees, max_leaves=12)


def _canonical(e):
    """Parsing folds a minus sign on a numeric literal into the constant."""
    if isinstance(e, Unary):
        c = _canonical(e.child)
        if e.op == "neg" and isinstance(c, Const):
            return Const(-c.value)
        return Unary(e.op, c)
    if isinstance(e, Binary):
        return Binary(e.op, _canonical(e.left), _canonical(e.right))
    return e


@settings(max_examples=400, deadline=None)
@given(asts)
def test_round_trip_of_printed_form(e):
    e = _canonical(e)
    text = to_text(e)
    assert parse_expr(text, 3) == e
    assert to_text(parse_expr(text, 3)) == text


@settings(max_examples=200, deadline=None)
@given(asts, st.integers(1, 3))
def test_derivative_prints_and_reparses(e, var):
    d = diff_expr(e, var)
    assert parse_expr(to_text(d), 3) == d


@settings(max_examples=200, deadline=None)
@given(asts, st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_evaluation_is_deterministic(e, x):
    try:
        a = eval_expr(e, x)
    except DomainError:
        with pytest.raises(DomainError):
            eval_expr(e, x)
        return
    assert eval_expr(e, x) == a
    assert compile_expr(e)(x) == a
