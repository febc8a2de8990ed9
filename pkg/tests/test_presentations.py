from fractions import Fraction

import pytest

from opealg.conformal import bracket, jacobi_all
from opealg.grammar import parse_scalar
from opealg.presentation import dumps, loads
from opealg.presentations import (
    CentralityError,
    DivergenceError,
    a_infinity_limit,
    affine_osp12,
    affine_sl2,
    build_large_n4,
    central_charge,
    coset_virasoro,
    derive_coset_table,
    quotient_by_central,
    same_table,
    shipped_presentations,
    sl2_prime_sugawara,
    small_n4,
    small_n4_limit_expected,
    specialize_presentation,
    sugawara,
    virasoro_shape,
)

SHIPPED = shipped_presentations()


@pytest.mark.parametrize("name", sorted(SHIPPED))
def test_jacobi_on_every_shipped_presentation(name):
    alg = SHIPPED[name].alg
    bad = [r for r in jacobi_all(alg) if not r.passed]
    assert not bad, bad[0].first_failure()


@pytest.mark.parametrize("name", sorted(SHIPPED))
def test_schema_round_trip(name):
    alg = SHIPPED[name].alg
    text = dumps(alg)
    assert dumps(loads(text)) == text
    assert loads(text).schema_hash() == alg.schema_hash()


def test_coset_table_matches_its_derivation():
    assert derive_coset_table(build_large_n4("L"), build_large_n4("LC")) == {}


def test_central_charges_add_up():
    L = build_large_n4("L")
    A = L.alg
    c_L = central_charge(A.gen("L"), A)
    c_C = central_charge(coset_virasoro(L), A)
    c_p = central_charge(sl2_prime_sugawara(A), A)
    assert c_L == parse_scalar("-6*k-3", A.ring)
    assert c_C == parse_scalar("-6*k*(a+k+a*k)/(-1+k+a*k)", A.ring)
    assert c_L == c_C + c_p


def test_coset_field_commutes_with_primed_currents():
    L = build_large_n4("L")
    A = L.alg
    LC = coset_virasoro(L)
    for g in ("e'", "f'", "h'"):
        assert not bracket(A.gen(g), LC, A)
        assert not bracket(LC, A.gen(g), A)
    shape, problems = virasoro_shape(LC, A)
    assert not problems


@pytest.mark.parametrize("level, c", [("k", "3*k/(k+2)"), (Fraction(1), "1"), (Fraction(-3, 2), "-9")])
def test_sl2_sugawara(level, c):
    named = affine_sl2(level)
    L = sugawara(named)
    assert central_charge(L, named.alg) == parse_scalar(c, named.alg.ring)


def test_osp_sugawara_central_charge():
    named = affine_osp12("k")
    assert central_charge(sugawara(named), named.alg) == parse_scalar("2*k/(2*k+3)", named.alg.ring)


def test_limit_and_quotient():
    lim = a_infinity_limit("inverse_a")
    assert same_table(lim.alg, small_n4_limit_expected().alg) == {}
    q = quotient_by_central(lim, ["e'", "f'", "h'"])
    assert same_table(q.alg, small_n4().alg) == {}
    half = specialize_presentation(q, {"k": Fraction(1, 2)})
    assert central_charge(half.alg.gen("L^{C}"), half.alg) == half.alg.ring(-9)


def test_limit_rejects_positive_degree():
    # without the a^-1 rescaling of the primed currents the L table diverges
    with pytest.raises(DivergenceError):
        a_infinity_limit("inverse_a", source=build_large_n4("L"))


def test_quotient_rejects_non_central_fields():
    with pytest.raises(CentralityError):
        quotient_by_central(build_large_n4("LC"), ["e'"])


def test_sqrt_scaling_keeps_a_decoupled_sl2():
    sq = a_infinity_limit("inverse_sqrt_a")
    alg = sq.alg
    assert bracket(alg.gen("h'"), alg.gen("h'"), alg)[2] == alg.expr("-2*k")
    others = [n for n in alg.names if n not in ("e'", "f'", "h'")]
    assert all(not bracket(alg.gen(p), alg.gen(x), alg) for p in ("e'", "f'", "h'") for x in others)
