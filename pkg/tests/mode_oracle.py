"""Brute-force mode algebra for the beta-gamma / bc system, independent of the rewriting engine.

States of the vacuum module are polynomials in creation modes ``x_(-k)``, ``k >= 1``;
the odd ones anticommute.  A state is a dict ``monomial -> Fraction`` where a monomial is
a sorted tuple of ``(name, k)`` (odd variables appear at most once).  Annihilation modes
act as (left) derivatives:

    beta_(n)  =  d/d gamma_(-1-n)      gamma_(n) = -d/d beta_(-1-n)
    b_(n)     =  d/d c_(-1-n)          c_(n)     =  d/d b_(-1-n)

Modes of ``d^m x`` are ``(-1)^m n(n-1)...(n-m+1) x_(n-m)`` and modes of a normally ordered
word ``:l W:`` come from the normal-ordered mode sum, cut off by energy.  Every field has
weight 1/2 per letter plus one per derivative, so ``x_(n)`` shifts energy by ``1/2 - n - 1``.
"""
from __future__ import annotations

from fractions import Fraction

ODD = {"b", "c"}
PARTNER = {"beta": ("gamma", 1), "gamma": ("beta", -1), "b": ("c", 1), "c": ("b", 1)}
HALF = Fraction(1, 2)


def energy(mono) -> Fraction:
    return sum((k - 1 + HALF for _, k in mono), Fraction(0))


def _insert(var, mono):
    """``var * mono`` reordered; returns (sign, monomial) or None when an odd variable repeats."""
    sign, out = 1, list(mono)
    odd = var[0] in ODD
    if odd and var in out:
        return None
    pos = 0
    while pos < len(out) and out[pos] < var:
        pos += 1
    if odd:
        sign = -1 if sum(1 for v in out[:pos] if v[0] in ODD) % 2 else 1
    out.insert(pos, var)
    return sign, tuple(out)


def _derivative(var, mono):
    """Left derivative by ``var``: list of (coeff, monomial)."""
    if var not in mono:
        return []
    if var[0] in ODD:
        pos = mono.index(var)
        sign = -1 if sum(1 for v in mono[:pos] if v[0] in ODD) % 2 else 1
        return [(sign, mono[:pos] + mono[pos + 1:])]
    pos = mono.index(var)
    return [(mono.count(var), mono[:pos] + mono[pos + 1:])]


def add(acc: dict, state: dict, scale=1) -> dict:
    for m, c in state.items():
        v = acc.get(m, 0) + scale * c
        if v:
            acc[m] = v
        else:
            acc.pop(m, None)
    return acc


def letter_mode(name: str, n: int, state: dict) -> dict:
    out: dict = {}
    if n < 0:
        var = (name, -n)
        for m, c in state.items():
            got = _insert(var, m)
            if got:
                add(out, {got[1]: got[0] * c})
        return out
    partner, sign = PARTNER[name]
    var = (partner, n + 1)
    for m, c in state.items():
        for s, m2 in _derivative(var, m):
            add(out, {m2: sign * s * c})
    return out


def _weight(word) -> Fraction:
    return sum((HALF + d for _, d in word), Fraction(0))


def _parity(word) -> int:
    return sum(1 for x, _ in word if x in ODD) % 2


def _max_energy(state) -> Fraction:
    return max((energy(m) for m in state), default=Fraction(-1))


def word_mode(word: tuple, n: int, state: dict) -> dict:
    """``W_(n) state`` for the right-nested normally ordered word ``W``; the empty word is the vacuum field."""
    if not state:
        return {}
    if not word:
        return dict(state) if n == -1 else {}
    # vanishes when it would lower energy below zero
    if _max_energy(state) + _weight(word) - n - 1 < 0:
        return {}
    (x, d), rest = word[0], word[1:]
    if d:
        # (d^d x)_(n) = (-1)^d n(n-1)...(n-d+1) x_(n-d)
        coeff = (-1) ** d
        for t in range(d):
            coeff *= n - t
        if rest:
            return _nop_mode((x, d), rest, n, state)
        return {m: coeff * c for m, c in letter_mode(x, n - d, state).items()} if coeff else {}
    if not rest:
        return letter_mode(x, n, state)
    return _nop_mode((x, 0), rest, n, state)


def _nop_mode(letter, rest, n, state) -> dict:
    """``:a W:_(n) = sum_i a_(-1-i) W_(n+i) + (-1)^{p(a)p(W)} sum_i W_(n-1-i) a_(i)``."""
    out: dict = {}
    a = (letter,)
    E = _max_energy(state)
    sign = -1 if (_parity(a) and _parity(rest)) else 1
    top = int(E + _weight(rest)) + 1  # W_(m) S vanishes for m > E + wt(W) - 1
    for i in range(0, max(0, top - n) + 1):
        inner = word_mode(rest, n + i, state)
        if inner:
            add(out, word_mode(a, -1 - i, inner))
    topa = int(E + _weight(a)) + 1
    for i in range(0, topa + 1):
        inner = word_mode(a, i, state)
        if inner:
            add(out, word_mode(rest, n - 1 - i, inner), sign)
    return out


VACUUM = {(): Fraction(1)}


def state_of_word(word: tuple) -> dict:
    return word_mode(word, -1, VACUUM)


def state_of_expr(expr) -> dict:
    """State ``sum c_w W_(-1)|0>`` of a FieldExpr with rational coefficients."""
    out: dict = {}
    for w, c in expr.terms.items():
        add(out, state_of_word(w), c.as_fraction())
    return out


def expr_mode(expr, n: int, state: dict) -> dict:
    out: dict = {}
    for w, c in expr.terms.items():
        add(out, word_mode(w, n, state), c.as_fraction())
    return out
