import math
import re

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gradseries.errors import DimensionMismatchError, NumericError, ParseError
from gradseries.exprlang import (
    Add,
    Const,
    Mul,
    Pow,
    Var,
    degree,
    evaluate,
    flatten_terms,
    parse,
    rebuild_terms,
    serialize,
)
from corpus import random_analytic_source, random_point, random_polynomial_source

# ---------------------------------------------------------------------------
# Independent textbook oracle: shunting-yard to postfix, then a stack
# evaluator.  Shares nothing with the package's recursive-descent parser.

_TOKEN = re.compile(r"\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|[A-Za-z_][A-Za-z_0-9]*|[-+*^()])")

_ORACLE_FUNCS = {
    "exp": math.exp,
    "tanh": math.tanh,
    "sin": math.sin,
    "cos": math.cos,
    "sigmoid": lambda v: 1.0 / (1.0 + math.exp(-v)),
    "softplus": lambda v: math.log(1.0 + math.exp(v)),
}

_PREC = {"+": 1, "-": 1, "*": 2, "neg": 3, "^": 4}
_RIGHT = {"^", "neg"}


def _shunting_yard_eval(source, x):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        assert m, f"oracle tokenizer stuck at {source[pos:]}"
        tokens.append(m.group(1))
        pos = m.end()

    output, stack = [], []
    prev = None  # previous significant token, for unary minus detection
    for tok in tokens:
        if re.fullmatch(r"\d.*", tok):
            output.append(float(tok))
        elif re.fullmatch(r"x[1-9][0-9]*", tok):
            output.append(x[int(tok[1:]) - 1])
        elif tok in _ORACLE_FUNCS:
            stack.append(tok)
        elif tok == "(":
            stack.append(tok)
        elif tok == ")":
            while stack and stack[-1] != "(":
                output.append(stack.pop())
            stack.pop()
            if stack and stack[-1] in _ORACLE_FUNCS:
                output.append(stack.pop())
        else:
            op = tok
            if tok == "-" and (prev is None or prev in "(-+*^"):
                op = "neg"
            while (
                stack
                and stack[-1] not in ("(",)
                and stack[-1] not in _ORACLE_FUNCS
                and (
                    _PREC[stack[-1]] > _PREC[op]
                    or (_PREC[stack[-1]] == _PREC[op] and op not in _RIGHT)
                )
            ):
                output.append(stack.pop())
            stack.append(op)
        prev = tok
    while stack:
        output.append(stack.pop())

    values = []
    for item in output:
        if isinstance(item, float):
            values.append(item)
        elif item == "neg":
            values.append(-values.pop())
        elif item in _ORACLE_FUNCS:
            values.append(_ORACLE_FUNCS[item](values.pop()))
        else:
            b, a = values.pop(), values.pop()
            if item == "+":
                values.append(a + b)
            elif item == "-":
                values.append(a - b)
            elif item == "*":
                values.append(a * b)
            elif item == "^":
                values.append(a ** int(b))
    assert len(values) == 1
    return values[0]


# ---------------------------------------------------------------------------


def test_parse_examples():
    f = parse("x1^3")
    assert f.smoothness_class == "polynomial"
    assert f.dimension == 1
    assert degree(f) == 3

    g = parse("tanh(x1)*x2 + 0.5*x1^2")
    assert g.smoothness_class == "analytic"
    assert g.dimension == 2

    with pytest.raises(ParseError) as err:
        parse("x1 +")
    assert err.value.offset == 4


def test_parse_error_positions():
    with pytest.raises(ParseError) as err:
        parse("x1 + @")
    assert err.value.offset == 5
    assert err.value.line == 1
    assert err.value.column == 6

    with pytest.raises(ParseError) as err:
        parse("x1 * (x2 + 1")
    assert err.value.offset == 12


def test_unknown_identifier():
    with pytest.raises(ParseError, match="unknown identifier"):
        parse("y1 + 2")
    with pytest.raises(ParseError, match="unknown identifier"):
        parse("foo(x1)")
    with pytest.raises(ParseError, match="unknown identifier"):
        parse("x0")  # variables are 1-based


def test_bad_exponents():
    with pytest.raises(ParseError, match="integer"):
        parse("x1^2.5")
    with pytest.raises(ParseError, match="integer"):
        parse("x1^-2")
    with pytest.raises(ParseError, match="integer"):
        parse("x1^x2")


def test_evaluate_examples():
    assert evaluate(parse("x1^2 + 2*x2"), (1.0, 1.0)) == 3.0
    assert evaluate(parse("tanh(x1)"), (0.0,)) == 0.0
    assert evaluate(parse("exp(x1)*x2"), (0.0, 5.0)) == 5.0


def test_evaluate_longer_point_allowed():
    assert evaluate(parse("x1 + 1"), (2.0, 99.0, 7.0)) == 3.0


def test_evaluate_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        evaluate(parse("x1 + x3"), (1.0, 2.0))


def test_evaluate_overflow():
    with pytest.raises(NumericError):
        evaluate(parse("exp(x1)"), (1000.0,))
    with pytest.raises(NumericError):
        evaluate(parse("exp(exp(x1))"), (10.0,))


def test_stable_transcendentals():
    assert evaluate(parse("sigmoid(x1)"), (800.0,)) == 1.0
    assert evaluate(parse("sigmoid(x1)"), (-800.0,)) == pytest.approx(0.0, abs=1e-300)
    assert evaluate(parse("softplus(x1)"), (800.0,)) == 800.0
    assert evaluate(parse("softplus(x1)"), (-800.0,)) == pytest.approx(0.0, abs=1e-300)


def test_precedence_and_unary_minus():
    # ^ binds tighter than unary minus: -x1^2 is -(x1^2)
    assert evaluate(parse("-x1^2"), (3.0,)) == -9.0
    assert evaluate(parse("2 - 3 - 4"), ()) == -5.0
    assert evaluate(parse("2*x1 + 3*x2"), (1.0, 1.0)) == 5.0
    assert evaluate(parse("-2^2"), ()) == -4.0
    assert evaluate(parse("(x1 + 1)^2"), (2.0,)) == 9.0


def test_degree_examples():
    assert degree(parse("x1^3")) == 3
    assert degree(parse("x1*x2^2 + x1")) == 3
    assert degree(parse("tanh(x1)")) is None
    assert degree(parse("3.5")) == 0
    assert degree(parse("(x1 + x2)^4")) == 4


def test_degree_product_and_sum_rules():
    rng = np.random.default_rng(11)
    for _ in range(50):
        d = int(rng.integers(1, 4))
        p1 = random_polynomial_source(rng, d, int(rng.integers(1, 5)))
        p2 = random_polynomial_source(rng, d, int(rng.integers(1, 5)))
        d1, d2 = degree(parse(p1)), degree(parse(p2))
        assert degree(parse(f"({p1})*({p2})")) == d1 + d2
        assert degree(parse(f"({p1}) + ({p2})")) == max(d1, d2)


def test_roundtrip_hand_cases():
    for src in [
        "x1^3",
        "tanh(x1)*x2 + 0.5*x1^2",
        "-x1^2 + (x2 - 1)*(x2 + 1)",
        "sigmoid(softplus(x1) - cos(x2))",
        "1e-3*x1 + 2.5E+2",
        "x1 - (x2 + x3) - 2",
        "-(x1 + 1)^4",
    ]:
        f = parse(src)
        assert parse(serialize(f)).root == f.root


def test_roundtrip_random_corpus():
    rng = np.random.default_rng(5150)
    for _ in range(200):
        d = int(rng.integers(1, 4))
        src = (
            random_polynomial_source(rng, d, 5)
            if rng.random() < 0.5
            else random_analytic_source(rng, d)
        )
        f = parse(src)
        assert parse(serialize(f)).root == f.root


def test_evaluate_matches_shunting_yard_oracle():
    rng = np.random.default_rng(31337)
    checked = 0
    for _ in range(1000):
        d = int(rng.integers(1, 4))
        src = (
            random_polynomial_source(rng, d, 5)
            if rng.random() < 0.5
            else random_analytic_source(rng, d)
        )
        x = random_point(rng, d)
        mine = evaluate(parse(src), x)
        oracle = _shunting_yard_eval(src, x)
        assert mine == pytest.approx(oracle, rel=1e-12, abs=1e-12)
        checked += 1
    assert checked == 1000


def test_flatten_and_rebuild():
    f = parse("x1^2 + 2*x1 - (3 + x2)")
    terms = flatten_terms(f.root)
    assert [sign for sign, _ in terms] == [1, 1, -1, -1]
    rebuilt = rebuild_terms(terms)
    assert evaluate(parse(serialize(parse("x1^2 + 2*x1 - 3 - x2"))), (2.0, 1.0)) == evaluate(
        f, (2.0, 1.0)
    )
    assert rebuilt is not None
    assert rebuild_terms([]) is None


node_strategy = st.deferred(
    lambda: st.one_of(
        st.floats(min_value=0.0, max_value=100.0, allow_nan=False).map(Const),
        st.integers(min_value=1, max_value=3).map(Var),
        st.tuples(node_strategy, node_strategy).map(lambda p: Add(*p)),
        st.tuples(node_strategy, node_strategy).map(lambda p: Mul(*p)),
        st.tuples(node_strategy, st.integers(min_value=0, max_value=5)).map(lambda p: Pow(*p)),
    )
)


@given(node_strategy)
def test_roundtrip_generated_trees(root):
    from gradseries.exprlang import from_root

    f = from_root(root)
    assert parse(serialize(f)).root == root
