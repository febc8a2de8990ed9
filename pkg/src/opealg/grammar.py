"""Text syntax for scalars and field expressions.

Grammar (whitespace is insignificant)::

    expr    := ["+"|"-"] term (("+"|"-") term)*
    term    := factor (("*" factor) | ("/" power))*   at most one field factor per term
    factor  := number | "(" ratfunc ")" | PARAM ["^" INT] | ROOT | field
    number  := INT ["/" INT]
    field   := letter | ":" item+ ":"          right-nested: :a b c: = :a :b c::
    item    := letter | "(" letter ")" | ":" item+ ":"   (a nested word must be last)
    letter  := NAME | "d(" NAME ")" | "d^" INT "(" NAME ")"
    ratfunc := ["+"|"-"] prod (("+"|"-") prod)*
    prod    := power (("*"|"/") power)*
    power   := atom ["^" ["-"] INT]
    atom    := INT | PARAM | ROOT | "(" ratfunc ")"

Parameter and root names (``k``, ``a``, ``r2a``...) are scalars wherever they
appear, so they cannot be used as generator names.  NAME is ``[A-Za-z][A-Za-z0-9_]*`` followed by optional primes and an optional
``^{...}`` tag, e.g. ``h'``, ``G^{+-}``, ``beta``.  A term without a field factor
multiplies the vacuum; ``0`` is the empty expression.  :func:`format_expr` prints
the same syntax, and ``parse_expr(format_expr(x)) == x`` for every expression.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .fields import FieldExpr, Letter, Word
from .ring import ExtScalar, ParamRat, ScalarRing

__all__ = ["GrammarError", "parse_expr", "parse_scalar", "parse_ratfunc", "format_expr", "format_scalar", "format_letter", "format_word"]


class GrammarError(ValueError):
    pass


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<name>[A-Za-z][A-Za-z0-9_]*'*(?:\^\{[^}]*\})?)
      | (?P<int>\d+)
      | (?P<op>[():+\-*/^])
    )""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise GrammarError(f"unexpected character at {pos} in {text!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    out.append(("end", ""))
    return out


class _Parser:
    def __init__(self, text: str, ring: ScalarRing):
        self.text = text
        self.ring = ring
        self.toks = _tokenize(text)
        self.i = 0

    # -- token helpers ------------------------------------------------------
    def peek(self, off: int = 0) -> tuple[str, str]:
        return self.toks[min(self.i + off, len(self.toks) - 1)]

    def take(self, value: str | None = None, kind: str | None = None) -> str:
        k, v = self.toks[self.i]
        if value is not None and v != value:
            raise GrammarError(f"expected {value!r}, found {v!r} in {self.text!r}")
        if kind is not None and k != kind:
            raise GrammarError(f"expected {kind}, found {v!r} in {self.text!r}")
        self.i += 1
        return v

    def at(self, value: str) -> bool:
        return self.toks[self.i][1] == value and self.toks[self.i][0] == "op"

    def done(self) -> None:
        if self.peek()[0] != "end":
            raise GrammarError(f"trailing input {self.peek()[1]!r} in {self.text!r}")

    # -- rational functions -------------------------------------------------
    def ratfunc(self) -> ExtScalar:
        sign = 1
        if self.at("+") or self.at("-"):
            sign = -1 if self.take() == "-" else 1
        acc = self.prod() * sign
        while self.at("+") or self.at("-"):
            op = self.take()
            rhs = self.prod()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def prod(self) -> ExtScalar:
        acc = self.power()
        while self.at("*") or self.at("/"):
            op = self.take()
            rhs = self.power()
            acc = acc * rhs if op == "*" else acc / rhs
        return acc

    def power(self) -> ExtScalar:
        base = self.ratatom()
        if self.at("^"):
            self.take()
            neg = False
            if self.at("-"):
                self.take()
                neg = True
            n = int(self.take(kind="int"))
            base = base ** (-n if neg else n)
        return base

    def ratatom(self) -> ExtScalar:
        kind, val = self.peek()
        if kind == "int":
            self.take()
            return self.ring(int(val))
        if kind == "name":
            self.take()
            if val in self.ring.params:
                return self.ring(self.ring.param(val))
            if val in self.ring.root_names:
                return self.ring.root(val)
            raise GrammarError(f"unknown scalar symbol {val!r} in {self.text!r}")
        if self.at("("):
            self.take()
            v = self.ratfunc()
            self.take(")")
            return v
        raise GrammarError(f"unexpected {val!r} in scalar in {self.text!r}")

    # -- field expressions --------------------------------------------------
    def expr(self) -> FieldExpr:
        acc: dict[Word, ExtScalar] = {}
        sign = 1
        if self.at("+") or self.at("-"):
            sign = -1 if self.take() == "-" else 1
        while True:
            coeff, word = self.term()
            coeff = coeff * sign
            if word in acc:
                s = acc[word] + coeff
                if s:
                    acc[word] = s
                else:
                    del acc[word]
            elif coeff:
                acc[word] = coeff
            if self.at("+") or self.at("-"):
                sign = -1 if self.take() == "-" else 1
                continue
            break
        return FieldExpr(self.ring, acc)

    def term(self) -> tuple[ExtScalar, Word]:
        coeff = self.ring.one
        word: Word | None = None
        while True:
            kind, val = self.peek()
            if kind == "int":
                self.take()
                num = int(val)
                if self.at("/") and self.peek(1)[0] == "int":
                    self.take()
                    num = Fraction(num, int(self.take()))
                coeff = coeff * self.ring(num)
            elif self.at("("):
                self.take()
                coeff = coeff * self.ratfunc()
                self.take(")")
            elif kind == "name" and (val in self.ring.params or val in self.ring.root_names):
                coeff = coeff * self.power()
            elif kind == "name" or self.at(":"):
                if word is not None:
                    raise GrammarError(f"two field factors in one term in {self.text!r}; use :a b: for products")
                word = self.field()
            else:
                raise GrammarError(f"unexpected {val!r} in {self.text!r}")
            if self.at("*"):
                self.take()
                continue
            if self.at("/"):
                self.take()
                coeff = coeff / self.power()
                if self.at("*"):
                    self.take()
                    continue
            break
        return coeff, (word if word is not None else ())

    def field(self) -> Word:
        if self.at(":"):
            self.take()
            return self.word_body()
        return (self.letter(),)

    def word_body(self) -> Word:
        items: list[Letter] = []
        while True:
            if self.at(":"):
                nxt_kind, nxt = self.peek(1)
                if nxt_kind == "name" or nxt == "(":
                    # nested word: must be the last item
                    self.take()
                    inner = self.word_body()
                    self.take(":")
                    return tuple(items) + inner
                self.take()
                if not items:
                    raise GrammarError(f"empty normally ordered product in {self.text!r}")
                return tuple(items)
            if self.at("("):
                self.take()
                items.append(self.letter())
                self.take(")")
            else:
                items.append(self.letter())

    def letter(self) -> Letter:
        kind, val = self.peek()
        if kind != "name":
            raise GrammarError(f"expected a generator, found {val!r} in {self.text!r}")
        if val == "d" and self.peek(1)[1] in ("(", "^"):
            self.take()
            order = 1
            if self.at("^"):
                self.take()
                order = int(self.take(kind="int"))
            self.take("(")
            name, inner = self.letter()
            self.take(")")
            return (name, inner + order)
        self.take()
        return (val, 0)


def parse_ratfunc(text: str, ring: ScalarRing) -> ParamRat:
    p = _Parser(text, ring)
    v = p.ratfunc()
    p.done()
    return v.as_paramrat()


def parse_scalar(text: str, ring: ScalarRing) -> ExtScalar:
    p = _Parser(text, ring)
    v = p.ratfunc()
    p.done()
    return v


def parse_expr(text: str, ring: ScalarRing) -> FieldExpr:
    """Parse an expression; words are kept exactly as written (not canonicalized)."""
    if text.strip() == "0":
        return FieldExpr.zero(ring)
    p = _Parser(text, ring)
    e = p.expr()
    p.done()
    return e


# -- printing -----------------------------------------------------------------
def format_letter(l: Letter) -> str:
    name, m = l
    if m == 0:
        return name
    if m == 1:
        return f"d({name})"
    return f"d^{m}({name})"


def format_word(w: Word) -> str:
    if not w:
        return "1"
    if len(w) == 1:
        return format_letter(w[0])
    return ":" + " ".join(format_letter(l) for l in w) + ":"


def format_scalar(c: ExtScalar) -> str:
    if c.is_rational():
        r = c.rational_part()
        if r.is_constant():
            f = r.as_fraction()
            return str(f)
    return f"({c})"


def _default_key(w: Word):
    return (len(w), w)


def format_expr(expr: FieldExpr, key=None) -> str:
    if not expr.terms:
        return "0"
    key = key or _default_key
    parts: list[str] = []
    for w in sorted(expr.terms, key=key):
        c = expr.terms[w]
        sign = "+"
        body: str
        if c.is_rational() and c.rational_part().is_constant():
            f = c.rational_part().as_fraction()
            if f < 0:
                sign, f = "-", -f
            if not w:
                body = str(f)
            elif f == 1:
                body = format_word(w)
            else:
                body = f"{f}*{format_word(w)}"
        else:
            body = f"({c})" if not w else f"({c})*{format_word(w)}"
        if not parts:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts)
