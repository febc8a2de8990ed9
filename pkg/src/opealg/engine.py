"""Canonical normal ordering and lambda-brackets over a presentation.

Internally an expression is a dict ``word -> ExtScalar`` and a lambda-polynomial
is a dict ``j -> expression`` holding the coefficient of ``lambda^j``.  A word
``(l1, ..., ln)`` is canonical when its letter keys ``(rank, derivative order)``
are non-decreasing and no odd letter repeats; ``rank`` orders generators by
``(weight, parity, declaration index)``.

Rewriting rules (p is the parity sign):

* swap:        :l :m W:: = p :m :l W:: + :(sum_j (-1)^j d^{j+1} B_j/(j+1)) W:
  with B = [l_lambda m]; for a repeated odd letter, half of the correction.
* nesting:     ::a B: C: = :a :B C:: + sum_j 1/(j+1) :(d^{j+1} a) [B_lambda C]_j:
                           + p(a,B) sum_j 1/(j+1) :(d^{j+1} B) [a_lambda C]_j:
* Wick:        [a_lambda :b C:] = :[a_lambda b] C: + p(a,b) :b [a_lambda C]:
                                  + int_0^lambda [[a_lambda b]_mu C] dmu
* skew:        [X_lambda y] = -p(X,y) sum_j (-lambda-d)^j C_j
* sesquilinearity for derivatives of letters.

Each rule strictly lowers the total weight of bare letters or the word length,
so recursion terminates; all intermediate results are memoised on words.
"""
from __future__ import annotations

import sys
from fractions import Fraction
from math import comb

from .fields import FieldExpr, Letter, Word, add_into
from .ring import ExtScalar

Expr = dict  # Word -> ExtScalar
LPoly = dict  # int -> Expr

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class EngineError(RuntimeError):
    pass


def _lp_add(acc: LPoly, j: int, terms: Expr, scale: ExtScalar | None = None) -> None:
    if not terms:
        return
    slot = acc.setdefault(j, {})
    add_into(slot, terms, scale)
    if not slot:
        del acc[j]


class Engine:
    def __init__(self, alg):
        self.alg = alg
        self.ring = alg.ring
        gens = alg.generators
        order = sorted(range(len(gens)), key=lambda i: (gens[i].weight, gens[i].parity, i))
        self.rank = {gens[i].name: r for r, i in enumerate(order)}
        self.par = {g.name: g.parity for g in gens}
        self.weight = {g.name: g.weight for g in gens}
        self.one = self.ring.one
        self._consts: dict[Fraction, ExtScalar] = {}
        self._table: dict[tuple[str, str], LPoly] = {}
        self._swap: dict[tuple[Letter, Letter], Expr] = {}
        self._nop_lw: dict[tuple[Letter, Word], Expr] = {}
        self._nop_ww: dict[tuple[Word, Word], Expr] = {}
        self._canon: dict[Word, Expr] = {}
        self._deriv: dict[Word, Expr] = {}
        self._br_ll: dict[tuple[Letter, Letter], LPoly] = {}
        self._br_lw: dict[tuple[Letter, Word], LPoly] = {}
        self._br_ww: dict[tuple[Word, Word], LPoly] = {}

    # -- small helpers --------------------------------------------------------
    def c(self, num, den=1) -> ExtScalar:
        f = Fraction(num, den)
        v = self._consts.get(f)
        if v is None:
            v = self._consts[f] = self.ring(f)
        return v

    def key(self, l: Letter):
        return (self.rank[l[0]], l[1])

    def wpar(self, w: Word) -> int:
        p = 0
        for name, _ in w:
            p ^= self.par[name]
        return p

    def sign(self, p: int, q: int) -> int:
        return -1 if (p and q) else 1

    def is_canonical(self, w: Word) -> bool:
        for x, y in zip(w, w[1:]):
            kx, ky = self.key(x), self.key(y)
            if kx > ky or (kx == ky and self.par[x[0]]):
                return False
        return True

    def _wrap(self, terms: Expr) -> FieldExpr:
        return FieldExpr._raw(self.ring, terms)

    # -- generator table ------------------------------------------------------
    def table(self, a: str, b: str) -> LPoly:
        """Canonical lambda-bracket [a_lambda b] of two generators."""
        key = (a, b)
        got = self._table.get(key)
        if got is not None:
            return got
        ope = self.alg.ope
        if (a, b) in ope:
            lp: LPoly = {}
            for n, e in ope[(a, b)].poles.items():
                j = n - 1
                _lp_add(lp, j, self.canon_expr(e.terms), self.c(1, _fact(j)))
        elif (b, a) in ope:
            lp = self.skew(self.table(b, a), -self.sign(self.par[a], self.par[b]))
        else:
            lp = {}
        self._table[key] = lp
        return lp

    def skew(self, lp: LPoly, sign: int) -> LPoly:
        """``sign * sum_j (-lambda - d)^j lp[j]``."""
        out: LPoly = {}
        for j, e in lp.items():
            dk = e
            # (-lambda-d)^j = (-1)^j sum_i C(j,i) lambda^i d^{j-i}
            ders = [e]
            for _ in range(j):
                dk = self.derive_expr(dk)
                ders.append(dk)
            for i in range(j + 1):
                s = sign * (-1) ** j * comb(j, i)
                _lp_add(out, i, ders[j - i], self.c(s))
        return out

    # -- derivative -----------------------------------------------------------
    def derive_word(self, w: Word) -> Expr:
        got = self._deriv.get(w)
        if got is not None:
            return got
        if not w:
            out: Expr = {}
        else:
            l, rest = w[0], w[1:]
            out = dict(self.nop_letter((l[0], l[1] + 1), rest))
            for u, cu in self.derive_word(rest).items():
                add_into(out, self.nop_letter(l, u), cu)
        self._deriv[w] = out
        return out

    def derive_expr(self, e: Expr) -> Expr:
        out: Expr = {}
        for w, cw in e.items():
            add_into(out, self.derive_word(w), cw)
        return out

    def derive_n(self, e: Expr, n: int) -> Expr:
        for _ in range(n):
            e = self.derive_expr(e)
        return e

    # -- normal ordering ------------------------------------------------------
    def swap_correction(self, l: Letter, m: Letter) -> Expr:
        """:l m: - p(l,m) :m l: = sum_j (-1)^j d^{j+1} B_j / (j+1)."""
        key = (l, m)
        got = self._swap.get(key)
        if got is not None:
            return got
        out: Expr = {}
        for j, e in self.br_letter_letter(l, m).items():
            add_into(out, self.derive_n(e, j + 1), self.c((-1) ** j, j + 1))
        self._swap[key] = out
        return out

    def nop_letter(self, l: Letter, w: Word) -> Expr:
        """Canonical form of :l W: for a canonical word W."""
        if not w:
            return {(l,): self.one}
        key = (l, w)
        got = self._nop_lw.get(key)
        if got is not None:
            return got
        m = w[0]
        kl, km = self.key(l), self.key(m)
        if kl < km or (kl == km and not self.par[l[0]]):
            out = {(l,) + w: self.one}
        elif kl == km:
            # repeated odd letter: :l :l W':: = 1/2 :(:ll: + :ll:) W':
            out = self.nop_expr_word(self.swap_correction(l, l), w[1:], self.c(1, 2))
        else:
            rest = w[1:]
            s = self.c(self.sign(self.par[l[0]], self.par[m[0]]))
            out = {}
            for u, cu in self.nop_letter(l, rest).items():
                add_into(out, self.nop_letter(m, u), cu * s)
            add_into(out, self.nop_expr_word(self.swap_correction(l, m), rest))
        self._nop_lw[key] = out
        return out

    def nop_letter_expr(self, l: Letter, e: Expr) -> Expr:
        out: Expr = {}
        for w, cw in e.items():
            add_into(out, self.nop_letter(l, w), cw)
        return out

    def nop_word_word(self, x: Word, y: Word) -> Expr:
        """Canonical form of :X Y: for canonical words X, Y."""
        if not x:
            return {y: self.one}
        if len(x) == 1:
            return self.nop_letter(x[0], y)
        if not y:
            return {x: self.one}
        key = (x, y)
        got = self._nop_ww.get(key)
        if got is not None:
            return got
        a, b = x[0], x[1:]
        out: Expr = {}
        for u, cu in self.nop_word_word(b, y).items():
            add_into(out, self.nop_letter(a, u), cu)
        for j, e in self.br_word_word(b, y).items():
            add_into(out, self.nop_letter_expr((a[0], a[1] + j + 1), e), self.c(1, j + 1))
        br_ay = self.br_letter_word(a, y)
        if br_ay:
            s = self.sign(self.par[a[0]], self.wpar(b))
            db = {b: self.one}
            for j in range(max(br_ay) + 1):
                db = self.derive_expr(db)
                if j in br_ay:
                    add_into(out, self.nop_expr_expr(db, br_ay[j]), self.c(s, j + 1))
        self._nop_ww[key] = out
        return out

    def nop_expr_word(self, e: Expr, w: Word, scale: ExtScalar | None = None) -> Expr:
        out: Expr = {}
        for x, cx in e.items():
            add_into(out, self.nop_word_word(x, w), cx if scale is None else cx * scale)
        return out

    def nop_expr_expr(self, e: Expr, f: Expr) -> Expr:
        out: Expr = {}
        for x, cx in e.items():
            for y, cy in f.items():
                add_into(out, self.nop_word_word(x, y), cx * cy)
        return out

    def canon_word(self, w: Word) -> Expr:
        if len(w) <= 1:
            return {w: self.one}
        got = self._canon.get(w)
        if got is not None:
            return got
        out = self.nop_letter_expr(w[0], self.canon_word(w[1:]))
        self._canon[w] = out
        return out

    def canon_expr(self, e: Expr) -> Expr:
        out: Expr = {}
        for w, cw in e.items():
            for name, _ in w:
                if name not in self.rank:
                    from .presentation import UnknownGeneratorError

                    raise UnknownGeneratorError(f"{name!r} is not a generator of {self.alg.name}")
            add_into(out, self.canon_word(w), cw)
        return out

    # -- lambda-brackets ------------------------------------------------------
    def br_letter_letter(self, l: Letter, m: Letter) -> LPoly:
        """[d^p a_lambda d^q b] = (-lambda)^p (lambda + d)^q [a_lambda b]."""
        key = (l, m)
        got = self._br_ll.get(key)
        if got is not None:
            return got
        (a, p), (b, q) = l, m
        base = self.table(a, b)
        out: LPoly = {}
        for j, e in base.items():
            ders = [e]
            for _ in range(q):
                ders.append(self.derive_expr(ders[-1]))
            for i in range(q + 1):
                _lp_add(out, j + q - i + p, ders[i], self.c((-1) ** p * comb(q, i)))
        self._br_ll[key] = out
        return out

    def br_letter_word(self, l: Letter, w: Word) -> LPoly:
        if not w:
            return {}
        if len(w) == 1:
            return self.br_letter_letter(l, w[0])
        key = (l, w)
        got = self._br_lw.get(key)
        if got is not None:
            return got
        out = self._wick(self.br_letter_letter(l, w[0]), w, self.par[l[0]], lambda rest: self.br_letter_word(l, rest))
        self._br_lw[key] = out
        return out

    def _wick(self, first: LPoly, w: Word, xpar: int, br_rest) -> LPoly:
        """Right Wick expansion of [X_lambda :m W':] given [X_lambda m] = first."""
        m, rest = w[0], w[1:]
        out: LPoly = {}
        for j, e in first.items():
            _lp_add(out, j, self.nop_expr_word(e, rest))
        s = self.c(self.sign(xpar, self.par[m[0]]))
        for j, e in br_rest(rest).items():
            _lp_add(out, j, self.nop_letter_expr(m, e), s)
        for j, e in first.items():
            for x, cx in e.items():
                for i, f in self.br_word_word(x, rest).items():
                    _lp_add(out, j + i + 1, f, cx * self.c(1, i + 1))
        return out

    def br_word_word(self, x: Word, y: Word) -> LPoly:
        """[X_lambda Y] for canonical words."""
        if not x or not y:
            return {}
        if len(x) == 1:
            return self.br_letter_word(x[0], y)
        key = (x, y)
        got = self._br_ww.get(key)
        if got is not None:
            return got
        if len(y) == 1:
            out = self.skew(self.br_letter_word(y[0], x), -self.sign(self.wpar(x), self.par[y[0][0]]))
        else:
            out = self._wick(self.br_word_word(x, y[:1]), y, self.wpar(x), lambda rest: self.br_word_word(x, rest))
        self._br_ww[key] = out
        return out

    def br_expr_expr(self, e: Expr, f: Expr) -> LPoly:
        out: LPoly = {}
        for x, cx in e.items():
            for y, cy in f.items():
                for j, g in self.br_word_word(x, y).items():
                    _lp_add(out, j, g, cx * cy)
        return out

    # -- public wrappers ------------------------------------------------------
    def canonical(self, e: FieldExpr) -> FieldExpr:
        return self._wrap(self.canon_expr(e.terms))

    def derive(self, e: FieldExpr) -> FieldExpr:
        return self._wrap(self.derive_expr(self.canon_expr(e.terms)))

    def normal_order(self, a: FieldExpr, b: FieldExpr) -> FieldExpr:
        return self._wrap(self.nop_expr_expr(self.canon_expr(a.terms), self.canon_expr(b.terms)))

    def lambda_bracket(self, a: FieldExpr, b: FieldExpr) -> LPoly:
        return self.br_expr_expr(self.canon_expr(a.terms), self.canon_expr(b.terms))

    def substitute(self, e: FieldExpr, mapping: dict[str, FieldExpr], target=None) -> FieldExpr:
        """Image of ``e`` under the vertex-algebra map sending generator g to mapping[g].

        ``target`` is the engine of the codomain (defaults to self).  Generators not
        in ``mapping`` are sent to themselves.  Words are rebuilt from the right with
        the codomain's normal ordering, so the map must be a homomorphism for the
        result to be meaningful.
        """
        tgt = target or self
        images: dict[str, Expr] = {g: tgt.canon_expr(v.terms) for g, v in mapping.items()}
        cache: dict[Letter, Expr] = {}

        def letter_image(l: Letter) -> Expr:
            got = cache.get(l)
            if got is None:
                base = images.get(l[0])
                got = tgt.canon_expr({((l[0], 0),): tgt.one}) if base is None else base
                got = tgt.derive_n(got, l[1])
                cache[l] = got
            return got

        out: Expr = {}
        for w, cw in self.canon_expr(e.terms).items():
            acc: Expr = {(): tgt.one}
            for l in reversed(w):
                acc = tgt.nop_expr_expr(letter_image(l), acc)
                if not acc:
                    break
            add_into(out, acc, cw)
        return FieldExpr._raw(tgt.ring, out)


_FACT = [1]


def _fact(n: int) -> int:
    while len(_FACT) <= n:
        _FACT.append(_FACT[-1] * len(_FACT))
    return _FACT[n]
