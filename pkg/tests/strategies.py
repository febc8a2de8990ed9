"""Hypothesis strategies for scalars in the default ring."""
from fractions import Fraction

from hypothesis import strategies as st

from opealg.ring import default_ring

R = default_ring()
small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def paramrats(draw, params=("k", "a")):
    """Sums of monomials c*k^i*a^j, optionally divided by (1 + k^p a^q) style factors."""
    out = R(0)
    for _ in range(draw(st.integers(1, 3))):
        term = R(draw(small_fracs))
        for p in params:
            term = term * R(R.param(p)) ** draw(st.integers(0, 2))
        out = out + term
    if draw(st.booleans()) and params:
        p = draw(st.sampled_from(params))
        out = out / (R(R.param(p)) + R(draw(st.sampled_from([3, 5, 7]))))
    return out


@st.composite
def ext_scalars(draw, roots=("r2a", "r32k", "I"), params=("k", "a")):
    out = R(0)
    for _ in range(draw(st.integers(1, 3))):
        term = draw(paramrats(params))
        for r in draw(st.lists(st.sampled_from(roots), max_size=2)) if roots else []:
            term = term * R.root(r)
        out = out + term
    return out


points = st.tuples(st.sampled_from([Fraction(1, 2), Fraction(2), Fraction(-1, 3), Fraction(7, 5)]),
                   st.sampled_from([Fraction(1), Fraction(3), Fraction(-2, 7), Fraction(9, 4)]))
