import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from opealg.conformal import bracket, canonical, derive, jacobi_check, normal_order, skew_symmetry_check
from opealg.fields import FieldExpr
from opealg.presentations import affine_osp12, affine_sl2, beta_gamma_bc, build_large_n4
import mode_oracle as mo

BGBC = beta_gamma_bc().alg
SL2 = affine_sl2("k").alg
OSP = affine_osp12("k").alg
N4 = build_large_n4("L").alg


def word_strategy(alg, max_len=3, max_der=2):
    letter = st.tuples(st.sampled_from(alg.names), st.integers(0, max_der))
    return st.lists(letter, min_size=1, max_size=max_len).map(lambda w: alg.engine.canonical(FieldExpr.word(alg.ring, tuple(w))))


def pair(alg, max_len=3, max_der=2):
    return st.tuples(st.just(alg), word_strategy(alg, max_len, max_der), word_strategy(alg, max_len, max_der))


# composites in the large N=4 algebra grow fast, so they stay short
pairs = st.one_of(pair(BGBC), pair(SL2), pair(OSP, 2), pair(N4, 2, 1))


def parity(x, alg):
    (w, _), *_ = x.terms.items()
    return alg.engine.wpar(w)


@settings(max_examples=200)
@given(pairs)
def test_sesquilinearity(data):
    alg, a, b = data
    if not a or not b:
        return
    ab = bracket(a, b, alg)
    # (d a)_(j) b = -j a_(j-1) b
    da_b = bracket(derive(a, alg), b, alg)
    for n in range(1, ab.max_pole() + 3):
        assert da_b[n] == ab[n - 1] * (-(n - 1)) if n > 1 else not da_b[1]
    # a_(j) d b = d(a_(j) b) + j a_(j-1) b
    a_db = bracket(a, derive(b, alg), alg)
    for n in range(1, ab.max_pole() + 3):
        want = derive(ab[n], alg) + (ab[n - 1] * (n - 1) if n > 1 else FieldExpr.zero(alg.ring))
        assert a_db[n] == want


@settings(max_examples=100)
@given(pairs)
def test_commutator_formula(data):
    alg, a, b = data
    if not a or not b:
        return
    sign = -1 if parity(a, alg) and parity(b, alg) else 1
    lhs = normal_order(a, b, alg) - normal_order(b, a, alg) * sign
    rhs = FieldExpr.zero(alg.ring)
    for n, c in bracket(a, b, alg).poles.items():
        j = n - 1
        rhs = rhs + derive(c, alg, j + 1) * Fraction((-1) ** j, math.factorial(j + 1))
    assert lhs == rhs


@settings(max_examples=100)
@given(pairs)
def test_outputs_are_canonical(data):
    alg, a, b = data
    x = normal_order(a, b, alg)
    assert canonical(x, alg) == x
    for e in bracket(a, b, alg).poles.values():
        assert canonical(e, alg) == e


@settings(max_examples=100)
@given(pairs)
def test_skew_symmetry_on_composites(data):
    alg, a, b = data
    if not a or not b:
        return
    # a_(j) b = -(-1)^{p(a)p(b)} sum_i (-1)^{j+i} d^i (b_(j+i) a) / i!
    sign = -1 if parity(a, alg) and parity(b, alg) else 1
    ab, ba = bracket(a, b, alg), bracket(b, a, alg)
    top = max(ab.max_pole(), ba.max_pole())
    for j in range(top):
        want = FieldExpr.zero(alg.ring)
        for i in range(top - j):
            want = want + derive(ba[j + i + 1], alg, i) * Fraction(-sign * (-1) ** (j + i), math.factorial(i))
        assert ab[j + 1] == want


@pytest.mark.parametrize("alg", [BGBC, SL2, OSP, N4], ids=lambda a: a.name)
def test_generator_tables_are_skew_consistent(alg):
    assert skew_symmetry_check(alg) == []


def test_jacobi_detects_a_broken_table():
    from opealg.presentation import OPESingular
    from opealg.presentations import make_presentation

    good = make_presentation("sl2", [("e", "even", 1), ("h", "even", 1), ("f", "even", 1)],
                             {("e", "f"): {2: "k", 1: "h"}, ("h", "e"): {1: "2*e"}, ("h", "f"): {1: "-2*f"}, ("h", "h"): {2: "2*k"}})
    assert jacobi_check("e", "f", "h", good).passed
    bad = make_presentation("sl2", [("e", "even", 1), ("h", "even", 1), ("f", "even", 1)],
                            {("e", "f"): {2: "k", 1: "h"}, ("h", "e"): {1: "2*e"}, ("h", "f"): {1: "-2*f"}, ("h", "h"): {2: "k"}})
    r = jacobi_check("e", "f", "h", bad)
    assert not r.passed and r.first_failure()


# -- against the mode-expansion oracle ------------------------------------------------
def _random_word(rng, max_len=3, max_der=2):
    n = rng.randint(1, max_len)
    w = tuple((rng.choice(BGBC.names), rng.randint(0, max_der)) for _ in range(n))
    return BGBC.engine.canonical(FieldExpr.word(BGBC.ring, w))


def test_quasi_associativity_against_mode_oracle():
    rng = random.Random(20261016)
    checked = 0
    for _ in range(60):
        a, b, c = (_random_word(rng, 2) for _ in range(3))
        if not (a and b and c):
            continue
        left = normal_order(normal_order(a, b, BGBC), c, BGBC)
        right = normal_order(a, normal_order(b, c, BGBC), BGBC)
        # oracle: (:ab:)_(-1) acting on C, built mode by mode, and a_(-1) (b_(-1) C)
        sc = mo.state_of_expr(c)
        ab_modes = mo.expr_mode(normal_order(a, b, BGBC), -1, sc)
        a_bc = mo.expr_mode(a, -1, mo.expr_mode(b, -1, sc))
        assert mo.state_of_expr(left) == ab_modes
        assert mo.state_of_expr(right) == a_bc
        # correction: sum_j :(d^{j+1} a)/(j+1)! (b_(j) c): + (-1)^{p(a)p(b)} (same with a, b swapped)
        sign = -1 if parity(a, BGBC) and parity(b, BGBC) else 1
        corr = FieldExpr.zero(BGBC.ring)
        for x, y, s in ((a, b, 1), (b, a, sign)):
            for n, e in bracket(y, c, BGBC).poles.items():
                corr = corr + normal_order(derive(x, BGBC, n), e, BGBC) * Fraction(s, math.factorial(n))
        assert left - right == corr
        assert mo.state_of_expr(left) != {} or not left
        checked += 1
    assert checked >= 40
