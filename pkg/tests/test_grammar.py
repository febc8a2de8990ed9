import pytest
from hypothesis import given, strategies as st

from opealg.fields import FieldExpr
from opealg.grammar import GrammarError, format_expr, parse_expr, parse_scalar
from opealg.presentations import build_large_n4
from strategies import R, ext_scalars

NAMES = ["e", "h'", "G^{++}", "G^{-+}", "beta", "b"]


@st.composite
def exprs(draw):
    terms = {}
    for _ in range(draw(st.integers(0, 3))):
        word = tuple((draw(st.sampled_from(NAMES)), draw(st.integers(0, 3))) for _ in range(draw(st.integers(0, 3))))
        terms[word] = draw(ext_scalars())
    return FieldExpr(R, terms)


@given(exprs())
def test_print_parse_round_trip(x):
    assert parse_expr(format_expr(x), R) == x


@pytest.mark.parametrize("text, words", [
    (":h' G^{++}:", {(("h'", 0), ("G^{++}", 0)): 1}),
    ("d(e)", {(("e", 1),): 1}),
    ("d^3(b)", {(("b", 3),): 1}),
    ("(1/(3+2*k))*:e' :f' d(x'):: - 2", {(("e'", 0), ("f'", 0), ("x'", 1)): "1/(3+2*k)", (): -2}),
    ("r2a*I*:b c:", {(("b", 0), ("c", 0)): "r2a*I"}),
])
def test_parse_examples(text, words):
    x = parse_expr(text, R)
    want = FieldExpr(R, {w: parse_scalar(str(c), R) for w, c in words.items()})
    assert x == want


@pytest.mark.parametrize("bad", [":e", "d(", "e f", "3*e*f", "k^", ":e (:f g:) h:"])
def test_syntax_errors(bad):
    with pytest.raises(GrammarError):
        parse_expr(bad, R)


def test_shipped_table_round_trips_bit_exactly():
    from opealg.presentation import dumps, loads

    for variant in ("L", "LC"):
        alg = build_large_n4(variant).alg
        text = dumps(alg)
        again = loads(text)
        assert again == alg
        assert dumps(again) == text
