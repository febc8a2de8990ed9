"""Exact coefficients: rational functions in named parameters, extended by square roots.

A :class:`ScalarRing` fixes the parameter names and the adjoined root symbols.
Every :class:`ParamRat` and :class:`ExtScalar` remembers the ring it was built in
and arithmetic between values of different rings raises :class:`DeclarationError`.

Polynomial arithmetic and gcd are delegated to FLINT (``python-flint``); this module
keeps fractions reduced and canonical, so equality is representational.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import flint

__all__ = [
    "DeclarationError",
    "PoleError",
    "ScalarRing",
    "ParamRat",
    "ExtScalar",
    "default_ring",
]


class DeclarationError(ValueError):
    """Operands were declared over different parameter/root sets."""


class PoleError(ZeroDivisionError):
    """A denominator vanished (division by zero or specialization at a pole)."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot read {x!r} as a rational number")


class ScalarRing:
    """Parameter names plus square-root symbols ``r`` with ``r**2 = radicand``.

    ``roots`` maps a root name to its radicand, given as a string in the
    parameters (``{"r2a": "2*a", "I": "-1"}``).  Roots cannot nest.
    """

    def __init__(self, params: tuple[str, ...] = ("k", "a"), roots: Mapping[str, str] | None = None):
        self.params = tuple(params)
        self.ctx = flint.fmpz_mpoly_ctx.get(self.params, "lex")
        self._zero_poly = self.ctx.from_dict({})
        self._one_poly = self.ctx.from_dict({(0,) * len(self.params): 1})
        self.root_names: tuple[str, ...] = ()
        self.radicands: tuple[ParamRat, ...] = ()
        self._const_cache: dict[Fraction, ExtScalar] = {}
        names, rads = [], []
        for name, text in (roots or {}).items():
            if name in self.params:
                raise DeclarationError(f"root symbol {name!r} clashes with a parameter")
            from .grammar import parse_ratfunc  # local: grammar imports ring

            rad = parse_ratfunc(text, self)
            if rad.is_zero():
                raise DeclarationError(f"root symbol {name!r} has zero radicand")
            names.append(name)
            rads.append(rad)
        self.root_names = tuple(names)
        self.radicands = tuple(rads)

    def __repr__(self) -> str:
        roots = ", ".join(f"{n}^2={r}" for n, r in zip(self.root_names, self.radicands))
        return f"ScalarRing(params={self.params}, roots=[{roots}])"

    # -- constructors -------------------------------------------------------
    def rat(self, value) -> "ParamRat":
        if isinstance(value, ParamRat):
            self._check(value.ring)
            return value
        f = _as_fraction(value)
        return ParamRat._from_polys(self, self._const_poly(f.numerator), self._const_poly(f.denominator))

    def param(self, name: str) -> "ParamRat":
        i = self.params.index(name)
        return ParamRat._make(self, self.ctx.gens()[i], self._one_poly)

    def __call__(self, value) -> "ExtScalar":
        """Coerce an int, Fraction, ParamRat or ExtScalar into this ring."""
        if isinstance(value, ExtScalar):
            self._check(value.ring)
            return value
        if isinstance(value, ParamRat):
            self._check(value.ring)
            return ExtScalar(self, {0: value} if not value.is_zero() else {})
        f = _as_fraction(value)
        hit = self._const_cache.get(f)
        if hit is None:
            hit = ExtScalar(self, {0: self.rat(f)} if f else {})
            if len(self._const_cache) < 4096:
                self._const_cache[f] = hit
        return hit

    def root(self, name: str) -> "ExtScalar":
        i = self.root_names.index(name)
        return ExtScalar(self, {1 << i: self.rat(1)})

    @property
    def zero(self) -> "ExtScalar":
        return self(0)

    @property
    def one(self) -> "ExtScalar":
        return self(1)

    def _const_poly(self, n: int):
        return self.ctx.from_dict({(0,) * len(self.params): n}) if n else self._zero_poly

    def _check(self, other: "ScalarRing") -> None:
        if other is not self:
            if other.params != self.params or other.root_names != self.root_names or other.radicands != self.radicands:
                raise DeclarationError(f"mixing values from {self!r} and {other!r}")


class ParamRat:
    """Reduced fraction of integer polynomials; denominator has positive leading coefficient."""

    __slots__ = ("ring", "num", "den")

    def __init__(self, ring: ScalarRing, num, den):
        self.ring = ring
        self.num = num
        self.den = den

    @classmethod
    def _make(cls, ring, num, den) -> "ParamRat":
        obj = cls.__new__(cls)
        obj.ring, obj.num, obj.den = ring, num, den
        return obj

    @classmethod
    def _from_polys(cls, ring, num, den) -> "ParamRat":
        if den.is_zero():
            raise PoleError("zero denominator")
        if num.is_zero():
            return cls._make(ring, ring._zero_poly, ring._one_poly)
        if not den.is_one():
            g = num.gcd(den)
            if not g.is_one():
                num = num / g
                den = den / g
            if den.leading_coefficient() < 0:
                num, den = -num, -den
        return cls._make(ring, num, den)

    # -- predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def as_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} depends on parameters")
        zero = (0,) * len(self.ring.params)
        return Fraction(int(self.num.to_dict().get(zero, 0)), int(self.den.to_dict()[zero]))

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "ParamRat":
        if isinstance(other, ParamRat):
            if other.ring is not self.ring:
                self.ring._check(other.ring)
            return other
        return self.ring.rat(other)

    def __add__(self, other) -> "ParamRat":
        o = self._coerce(other)
        if self.den.is_one() and o.den.is_one():
            return ParamRat._make(self.ring, self.num + o.num, self.den)
        if self.den == o.den:
            return ParamRat._from_polys(self.ring, self.num + o.num, self.den)
        return ParamRat._from_polys(self.ring, self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> "ParamRat":
        return ParamRat._make(self.ring, -self.num, self.den)

    def __sub__(self, other) -> "ParamRat":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ParamRat":
        return self._coerce(other) - self

    def __mul__(self, other) -> "ParamRat":
        o = self._coerce(other)
        if self.num.is_zero() or o.num.is_zero():
            return self.ring.rat(0)
        if self.den.is_one() and o.den.is_one():
            return ParamRat._make(self.ring, self.num * o.num, self.den)
        g1 = self.num.gcd(o.den)
        g2 = o.num.gcd(self.den)
        n1, d2 = (self.num, o.den) if g1.is_one() else (self.num / g1, o.den / g1)
        n2, d1 = (o.num, self.den) if g2.is_one() else (o.num / g2, self.den / g2)
        num, den = n1 * n2, d1 * d2
        if den.leading_coefficient() < 0:
            num, den = -num, -den
        return ParamRat._make(self.ring, num, den)

    __rmul__ = __mul__

    def inverse(self) -> "ParamRat":
        if self.num.is_zero():
            raise PoleError("division by zero")
        num, den = self.den, self.num
        if den.leading_coefficient() < 0:
            num, den = -num, -den
        return ParamRat._make(self.ring, num, den)

    def __truediv__(self, other) -> "ParamRat":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "ParamRat":
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "ParamRat":
        if n < 0:
            return self.inverse() ** (-n)
        return ParamRat._make(self.ring, self.num**n, self.den**n)

    def __eq__(self, other) -> bool:
        if isinstance(other, ExtScalar):
            return other == self
        try:
            o = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self) -> int:
        return hash((tuple(self.num.to_dict().items()), tuple(self.den.to_dict().items())))

    # -- parameter handling -------------------------------------------------
    def specialize(self, assignment: Mapping[str, object]) -> "ParamRat":
        """Substitute rational values for some parameters; a vanishing denominator is an error."""
        num, den = self.num, self.den
        for name, value in assignment.items():
            if name not in self.ring.params:
                raise DeclarationError(f"unknown parameter {name!r}")
            val = _as_fraction(value)
            i = self.ring.params.index(name)
            n2, sn = _subs_poly(self.ring, num, i, val)
            d2, sd = _subs_poly(self.ring, den, i, val)
            if d2.is_zero():
                raise PoleError(f"denominator {self.den} vanishes at {name} = {val}")
            # num/den = (n2/sn)/(d2/sd)
            num, den = n2 * sd, d2 * sn
        return ParamRat._from_polys(self.ring, num, den)

    def evaluate(self, assignment: Mapping[str, object]) -> Fraction:
        return self.specialize(assignment).as_fraction()

    def degree_in(self, name: str) -> int:
        """deg(num) - deg(den) in one parameter; -inf-like large negative for zero."""
        i = self.ring.params.index(name)
        if self.num.is_zero():
            return -(10**9)
        return int(self.num.degrees()[i]) - int(self.den.degrees()[i])

    def leading_in(self, name: str) -> "ParamRat":
        """Ratio of the leading coefficients of numerator and denominator in ``name``."""
        i = self.ring.params.index(name)
        if self.num.is_zero():
            return self
        return ParamRat._from_polys(self.ring, _leading_poly(self.ring, self.num, i), _leading_poly(self.ring, self.den, i))

    def free_params(self) -> set[str]:
        out = set()
        for poly in (self.num, self.den):
            for i, d in enumerate(poly.degrees()):
                if d > 0:
                    out.add(self.ring.params[i])
        return out

    def __str__(self) -> str:
        n = str(self.num)
        if self.den.is_one():
            return n
        return f"({n})/({self.den})"

    def __repr__(self) -> str:
        return f"ParamRat({self})"


def _subs_poly(ring: ScalarRing, poly, i: int, val: Fraction):
    """Return (P, s) with poly(x_i = val) = P / s and P integral."""
    p, q = val.numerator, val.denominator
    terms = poly.to_dict()
    if not terms:
        return poly, 1
    d = max(e[i] for e in terms)
    out: dict[tuple[int, ...], int] = {}
    for exps, c in terms.items():
        e = exps[i]
        key = exps[:i] + (0,) + exps[i + 1:]
        out[key] = out.get(key, 0) + int(c) * p**e * q ** (d - e)
    return ring.ctx.from_dict({k: v for k, v in out.items() if v}), q**d


def _leading_poly(ring: ScalarRing, poly, i: int):
    terms = poly.to_dict()
    d = max(e[i] for e in terms)
    return ring.ctx.from_dict({e[:i] + (0,) + e[i + 1:]: c for e, c in terms.items() if e[i] == d})


@lru_cache(maxsize=None)
def _popcount(mask: int) -> int:
    return bin(mask).count("1")


class ExtScalar:
    """Element of ``ParamRat[r_1, ..., r_n]`` with ``r_i**2`` reduced eagerly.

    Stored as a map from a bitmask (square-free product of roots) to a nonzero
    :class:`ParamRat`.  Zero is the empty map.
    """

    __slots__ = ("ring", "terms")

    def __init__(self, ring: ScalarRing, terms: dict[int, ParamRat]):
        self.ring = ring
        self.terms = terms

    # -- coercion -----------------------------------------------------------
    def _coerce(self, other) -> "ExtScalar":
        if isinstance(other, ExtScalar):
            if other.ring is not self.ring:
                self.ring._check(other.ring)
            return other
        return self.ring(other)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_rational(self) -> bool:
        return all(m == 0 for m in self.terms)

    def rational_part(self) -> ParamRat:
        return self.terms.get(0, self.ring.rat(0))

    def as_paramrat(self) -> ParamRat:
        if not self.is_rational():
            raise ValueError(f"{self} involves root symbols")
        return self.rational_part()

    def as_fraction(self) -> Fraction:
        return self.as_paramrat().as_fraction()

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other) -> "ExtScalar":
        o = self._coerce(other)
        if not o.terms:
            return self
        if not self.terms:
            return o
        out = dict(self.terms)
        for m, c in o.terms.items():
            if m in out:
                s = out[m] + c
                if s.is_zero():
                    del out[m]
                else:
                    out[m] = s
            else:
                out[m] = c
        return ExtScalar(self.ring, out)

    __radd__ = __add__

    def __neg__(self) -> "ExtScalar":
        return ExtScalar(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "ExtScalar":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ExtScalar":
        return self._coerce(other) - self

    def __mul__(self, other) -> "ExtScalar":
        o = self._coerce(other)
        if not self.terms or not o.terms:
            return ExtScalar(self.ring, {})
        if len(self.terms) == 1 and len(o.terms) == 1:
            (m1, c1), = self.terms.items()
            (m2, c2), = o.terms.items()
            c = c1 * c2
            common = m1 & m2
            if common:
                c = c * self._radicand_product(common)
            return ExtScalar(self.ring, {m1 ^ m2: c})
        out: dict[int, ParamRat] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                c = c1 * c2
                common = m1 & m2
                if common:
                    c = c * self._radicand_product(common)
                m = m1 ^ m2
                out[m] = out[m] + c if m in out else c
        return ExtScalar(self.ring, {m: c for m, c in out.items() if not c.is_zero()})

    __rmul__ = __mul__

    def _radicand_product(self, mask: int) -> ParamRat:
        out = self.ring.rat(1)
        i = 0
        while mask:
            if mask & 1:
                out = out * self.ring.radicands[i]
            mask >>= 1
            i += 1
        return out

    def _conjugate(self, i: int) -> "ExtScalar":
        bit = 1 << i
        return ExtScalar(self.ring, {m: (-c if m & bit else c) for m, c in self.terms.items()})

    def inverse(self) -> "ExtScalar":
        if not self.terms:
            raise PoleError("division by zero")
        if len(self.terms) == 1:
            (m, c), = self.terms.items()
            # (c r_S)^-1 = r_S / (c * prod radicands)
            return ExtScalar(self.ring, {m: (c * self._radicand_product(m)).inverse()})
        # multiply by conjugates until the norm is free of every root
        x, acc = self, self.ring.one
        for i in range(len(self.ring.root_names)):
            if any(m >> i & 1 for m in x.terms):
                conj = x._conjugate(i)
                acc = acc * conj
                x = x * conj
        return acc * x.inverse()

    def __truediv__(self, other) -> "ExtScalar":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "ExtScalar":
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "ExtScalar":
        if n < 0:
            return self.inverse() ** (-n)
        out = self.ring.one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        try:
            o = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        if self.terms.keys() != o.terms.keys():
            return False
        return all(c == o.terms[m] for m, c in self.terms.items())

    def __hash__(self) -> int:
        return hash(tuple(sorted((m, hash(c)) for m, c in self.terms.items())))

    # -- parameters ---------------------------------------------------------
    def specialize(self, assignment: Mapping[str, object]) -> "ExtScalar":
        out: dict[int, ParamRat] = {}
        for m, c in self.terms.items():
            s = c.specialize(assignment)
            if not s.is_zero():
                out[m] = s
        # radicands keep their symbolic form; a root whose radicand becomes a
        # rational square is still represented symbolically
        return ExtScalar(self.ring, out)

    def free_params(self) -> set[str]:
        out: set[str] = set()
        for c in self.terms.values():
            out |= c.free_params()
        return out

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms):
            c = self.terms[m]
            roots = [self.ring.root_names[i] for i in range(len(self.ring.root_names)) if m >> i & 1]
            body = str(c)
            if roots:
                parts.append("*".join([f"({body})"] + roots))
            else:
                parts.append(body if len(self.terms) == 1 else f"({body})")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"ExtScalar({self})"


@lru_cache(maxsize=None)
def default_ring() -> ScalarRing:
    """Parameters ``k, a`` with roots ``r2a = sqrt(2a)``, ``r32k = sqrt(3+2k)``, ``I = sqrt(-1)``."""
    return ScalarRing(("k", "a"), {"r2a": "2*a", "r32k": "3+2*k", "I": "-1"})
