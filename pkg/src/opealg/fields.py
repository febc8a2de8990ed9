"""Field expressions: linear combinations of right-nested normally ordered words.

A *letter* is ``(name, m)`` and stands for the m-th derivative of a generator.  A
*word* is a tuple of letters ``(l1, l2, ..., ln)`` read as ``:l1 :l2 ... ln::``;
the empty word is the vacuum.  Whether a word is canonical depends on the
presentation (letter order, parity); see :mod:`opealg.engine`.
"""
from __future__ import annotations

from typing import Iterable, Iterator, Mapping

from .ring import ExtScalar, ScalarRing

Letter = tuple[str, int]
Word = tuple[Letter, ...]

VACUUM: Word = ()


def letter(name: str, order: int = 0) -> Letter:
    return (name, order)


class FieldExpr:
    """Immutable linear combination ``sum c_w * w`` with nonzero ``ExtScalar`` coefficients."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: ScalarRing, terms: Mapping[Word, ExtScalar] | None = None):
        self.ring = ring
        self.terms: dict[Word, ExtScalar] = {w: c for w, c in (terms or {}).items() if c}

    # -- constructors -------------------------------------------------------
    @classmethod
    def _raw(cls, ring: ScalarRing, terms: dict[Word, ExtScalar]) -> "FieldExpr":
        obj = cls.__new__(cls)
        obj.ring, obj.terms = ring, terms
        return obj

    @classmethod
    def gen(cls, ring: ScalarRing, name: str, order: int = 0) -> "FieldExpr":
        return cls._raw(ring, {((name, order),): ring.one})

    @classmethod
    def word(cls, ring: ScalarRing, word: Iterable[Letter], coeff=1) -> "FieldExpr":
        c = ring(coeff)
        return cls._raw(ring, {tuple(word): c} if c else {})

    @classmethod
    def vacuum(cls, ring: ScalarRing, coeff=1) -> "FieldExpr":
        return cls.word(ring, (), coeff)

    @classmethod
    def zero(cls, ring: ScalarRing) -> "FieldExpr":
        return cls._raw(ring, {})

    # -- container protocol -------------------------------------------------
    def __iter__(self) -> Iterator[tuple[Word, ExtScalar]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def coefficient(self, word: Iterable[Letter] = ()) -> ExtScalar:
        return self.terms.get(tuple(word), self.ring.zero)

    def vacuum_coefficient(self) -> ExtScalar:
        return self.coefficient(())

    def is_scalar(self) -> bool:
        return all(w == () for w in self.terms)

    def generators(self) -> set[str]:
        return {name for w in self.terms for name, _ in w}

    # -- linear structure ---------------------------------------------------
    def __add__(self, other: "FieldExpr") -> "FieldExpr":
        if not isinstance(other, FieldExpr):
            return NotImplemented
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = out[w] + c if w in out else c
            if s:
                out[w] = s
            else:
                out.pop(w, None)
        return FieldExpr._raw(self.ring, out)

    def __neg__(self) -> "FieldExpr":
        return FieldExpr._raw(self.ring, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "FieldExpr") -> "FieldExpr":
        return self + (-other)

    def __mul__(self, scalar) -> "FieldExpr":
        if isinstance(scalar, FieldExpr):
            return NotImplemented
        s = self.ring(scalar)
        if not s:
            return FieldExpr._raw(self.ring, {})
        out = {}
        for w, c in self.terms.items():
            p = c * s
            if p:
                out[w] = p
        return FieldExpr._raw(self.ring, out)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "FieldExpr":
        return self * self.ring(scalar).inverse()

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldExpr):
            return NotImplemented
        return self.terms.keys() == other.terms.keys() and all(c == other.terms[w] for w, c in self.terms.items())

    def __hash__(self) -> int:
        return hash(frozenset((w, hash(c)) for w, c in self.terms.items()))

    def map_coefficients(self, fn) -> "FieldExpr":
        out = {}
        for w, c in self.terms.items():
            d = fn(c)
            if d:
                out[w] = d
        return FieldExpr._raw(self.ring, out)

    def specialize(self, assignment) -> "FieldExpr":
        return self.map_coefficients(lambda c: c.specialize(assignment))

    def __str__(self) -> str:
        from .grammar import format_expr

        return format_expr(self)

    def __repr__(self) -> str:
        return f"FieldExpr({self})"


def add_into(acc: dict[Word, ExtScalar], terms: Mapping[Word, ExtScalar], scale: ExtScalar | None = None) -> None:
    """In-place ``acc += scale * terms`` on raw term dictionaries; drops zeros."""
    for w, c in terms.items():
        if scale is not None:
            c = c * scale
            if not c:
                continue
        if w in acc:
            s = acc[w] + c
            if s:
                acc[w] = s
            else:
                del acc[w]
        else:
            acc[w] = c
