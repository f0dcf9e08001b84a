import math

import numpy as np
import pytest

from wienerlab.chaos import ChaosPoly, hermite_product
from wienerlab.dsl import (
    Binary,
    DslSemanticError,
    DslSyntaxError,
    Hermite,
    Literal,
    Unary,
    Variable,
    Vector,
    lower,
    parse_functional,
    print_functional,
)
from wienerlab.malliavin import VField


# ---------------------------------------------------------------- parsing


def test_parse_atoms():
    assert parse_functional("x1") == Variable(1)
    assert parse_functional("x12") == Variable(12)
    assert parse_functional("3") == Literal(3.0)
    assert parse_functional("2.5e-3") == Literal(2.5e-3)
    assert parse_functional("h2(x1)") == Hermite(2, 1)
    assert parse_functional("h0(x3)") == Hermite(0, 3)


def test_parse_precedence_and_associativity():
    assert parse_functional("x1 + x2 * x3") == Binary(
        "+", Variable(1), Binary("*", Variable(2), Variable(3))
    )
    # left associative: a - b - c is (a - b) - c
    assert parse_functional("x1 - x2 - x3") == Binary(
        "-", Binary("-", Variable(1), Variable(2)), Variable(3)
    )
    assert parse_functional("(x1 + x2) * x3") == Binary(
        "*", Binary("+", Variable(1), Variable(2)), Variable(3)
    )
    # unary minus binds tighter than *
    assert parse_functional("-x1 * x2") == Binary("*", Unary(Variable(1)), Variable(2))
    assert parse_functional("-(x1 * x2)") == Unary(Binary("*", Variable(1), Variable(2)))


def test_parse_vector_literal():
    node = parse_functional("[x1, x2 * x2, 3]")
    assert node == Vector(
        (Variable(1), Binary("*", Variable(2), Variable(2)), Literal(3.0))
    )


def test_spans_track_lines_and_columns():
    node = parse_functional("x1 +\n  x2")
    assert node.span == (1, 4)
    assert node.left.span == (1, 1)
    assert node.right.span == (2, 3)


def test_syntax_error_unterminated_group_points_at_opener():
    with pytest.raises(DslSyntaxError) as err:
        parse_functional("x1*(")
    assert err.value.line == 1
    assert err.value.col == 4
    assert "unclosed" in str(err.value)


def test_syntax_error_positions_and_expected_sets():
    with pytest.raises(DslSyntaxError) as err:
        parse_functional("x1 +")
    assert (err.value.line, err.value.col) == (1, 5)
    assert "expected" in str(err.value)

    with pytest.raises(DslSyntaxError) as err:
        parse_functional(")x1")
    assert (err.value.line, err.value.col) == (1, 1)

    with pytest.raises(DslSyntaxError) as err:
        parse_functional("x1 x2")
    assert (err.value.line, err.value.col) == (1, 4)

    with pytest.raises(DslSyntaxError) as err:
        parse_functional("")
    assert "end of input" in str(err.value)


def test_syntax_error_bad_names_and_calls():
    with pytest.raises(DslSyntaxError) as err:
        parse_functional("foo + x1")
    assert (err.value.line, err.value.col) == (1, 1)
    assert "unknown name" in str(err.value)

    # Hermite factor needs a parenthesized coordinate
    with pytest.raises(DslSyntaxError) as err:
        parse_functional("h2 x1")
    assert (err.value.line, err.value.col) == (1, 4)

    with pytest.raises(DslSyntaxError) as err:
        parse_functional("h2(3)")
    assert (err.value.line, err.value.col) == (1, 4)

    with pytest.raises(DslSyntaxError) as err:
        parse_functional("[x1, x2")
    assert (err.value.line, err.value.col) == (1, 1)


def test_syntax_error_unknown_character():
    with pytest.raises(DslSyntaxError) as err:
        parse_functional("x1 @ x2")
    assert (err.value.line, err.value.col) == (1, 4)


# --------------------------------------------------------------- lowering


def test_lower_basic_functionals():
    n = 3
    assert lower(parse_functional("x1"), n) == ChaosPoly.coordinate(n, 1)
    assert lower(parse_functional("h2(x2)"), n) == ChaosPoly.hermite(n, 2, 2)
    assert lower(parse_functional("h0(x1)"), n) == ChaosPoly.constant(n, 1.0)
    assert lower(parse_functional("-x1"), n) == -ChaosPoly.coordinate(n, 1)
    combo = lower(parse_functional("2*x1 - x2 + 0.5"), n)
    expected = (
        ChaosPoly.coordinate(n, 1) * 2.0
        - ChaosPoly.coordinate(n, 2)
        + ChaosPoly.constant(n, 0.5)
    )
    assert combo == expected


def test_lower_product_expands_in_the_algebra():
    n = 2
    prod = lower(parse_functional("x1 * x1"), n)
    # eta^2 = He_2 + 1
    assert prod == ChaosPoly.hermite(n, 1, 2) + ChaosPoly.constant(n, 1.0)
    cross = lower(parse_functional("x1 * x2"), n)
    assert cross == hermite_product(
        ChaosPoly.coordinate(n, 1), ChaosPoly.coordinate(n, 2)
    )


def test_lower_vector_literal_gives_field():
    v = lower(parse_functional("[x1, h2(x2), 1]"), 2)
    assert isinstance(v, VField)
    assert v.d == 3
    assert v.component(1) == ChaosPoly.coordinate(2, 1)
    assert v.component(2) == ChaosPoly.hermite(2, 2, 2)
    assert v.component(3) == ChaosPoly.constant(2, 1.0)


def test_lower_agrees_with_pointwise_evaluation():
    rng = np.random.default_rng(4701)
    n = 3
    text = "(x1 + 2) * h2(x2) - x3 * x3 + 0.25"
    p = lower(parse_functional(text), n)
    for _ in range(20):
        w = rng.standard_normal(n)
        x1, x2, x3 = w
        direct = (x1 + 2.0) * (x2 * x2 - 1.0) - x3 * x3 + 0.25
        assert math.isclose(p.evaluate(w), direct, rel_tol=0, abs_tol=1e-12)


def test_semantic_error_hermite_order_cap():
    with pytest.raises(DslSemanticError) as err:
        lower(parse_functional("h9(x1)"), 1)
    assert (err.value.line, err.value.col) == (1, 1)
    assert "degree cap 8" in str(err.value)
    # a tighter configured cap applies
    with pytest.raises(DslSemanticError):
        lower(parse_functional("h4(x1)"), 1, cap=3)
    assert lower(parse_functional("h4(x1)"), 1, cap=4) == ChaosPoly.hermite(1, 1, 4)


def test_semantic_error_variable_out_of_range():
    with pytest.raises(DslSemanticError) as err:
        lower(parse_functional("x1 + x3"), 2)
    assert (err.value.line, err.value.col) == (1, 6)
    assert "n=2" in str(err.value)
    with pytest.raises(DslSemanticError) as err:
        lower(parse_functional("x0"), 2)
    assert "at least 1" in str(err.value)


def test_semantic_error_product_overflow_points_at_operator():
    with pytest.raises(DslSemanticError) as err:
        lower(parse_functional("h5(x1) * h5(x1)"), 1)
    assert (err.value.line, err.value.col) == (1, 8)
    assert "degree cap" in str(err.value)


# ---------------------------------------------------------------- printer


HAND_CORPUS = [
    "x1",
    "3",
    "2.5e-3",
    "h2(x1)",
    "x1 + x2 * x3",
    "x1 - x2 - x3",
    "x1 - (x2 - x3)",
    "x1 + (x2 + x3)",
    "(x1 + x2) * x3",
    "-x1 * x2",
    "-(x1 + x2)",
    "--x1",
    "x1 * (x2 + x3) - h3(x2)",
    "[x1, x2 * x2, 3]",
    "[h2(x1) - 1, -x2]",
]


@pytest.mark.parametrize("text", HAND_CORPUS)
def test_print_parse_round_trip_hand_corpus(text):
    tree = parse_functional(text)
    printed = print_functional(tree)
    assert parse_functional(printed) == tree


def _random_tree(rng, depth, vector_ok):
    if vector_ok and rng.random() < 0.3:
        count = int(rng.integers(1, 4))
        return Vector(tuple(_random_tree(rng, depth, False) for _ in range(count)))
    if depth == 0 or rng.random() < 0.25:
        kind = rng.integers(0, 3)
        if kind == 0:
            if rng.random() < 0.5:
                return Literal(float(rng.integers(0, 10)))
            return Literal(round(float(rng.uniform(0.0, 5.0)), 3))
        if kind == 1:
            return Variable(int(rng.integers(1, 5)))
        return Hermite(int(rng.integers(0, 5)), int(rng.integers(1, 5)))
    roll = rng.random()
    if roll < 0.2:
        return Unary(_random_tree(rng, depth - 1, False))
    op = ["+", "-", "*"][int(rng.integers(0, 3))]
    return Binary(
        op,
        _random_tree(rng, depth - 1, False),
        _random_tree(rng, depth - 1, False),
    )


def test_print_parse_round_trip_random_corpus():
    rng = np.random.default_rng(20240815)
    for _ in range(100):
        tree = _random_tree(rng, depth=4, vector_ok=True)
        printed = print_functional(tree)
        assert parse_functional(printed) == tree


def test_printed_form_lowers_identically():
    # additive trees stay under the degree cap, so lowering must agree
    rng = np.random.default_rng(515151)
    for _ in range(40):
        tree = _random_tree(rng, depth=3, vector_ok=False)
        printed = print_functional(tree)
        try:
            p = lower(tree, 4, cap=8)
        except DslSemanticError:
            continue
        assert lower(parse_functional(printed), 4, cap=8) == p
