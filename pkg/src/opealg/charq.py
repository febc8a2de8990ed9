"""Truncated q-series with Jacobi variables, theta and eta functions, and the
character identities for the N=4 branching rules and the two reductions.

A :class:`QSeries` stores exponents of ``q`` scaled by a common denominator
``den`` and keeps every coefficient as a Laurent polynomial in the declared
variables (a dict from exponent tuples to exact rationals).  Terms with exponent
``>= order`` are unknown; ``order=None`` marks an exact finite sum.

Symbolic powers ``q^x`` with ``x`` depending on ``a`` never enter a series: they
live in ``prefactor`` (or :attr:`ProductFormula.qpow`) and are folded in only by
:meth:`ProductFormula.collapse`, which insists the exponent is a rational number.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Mapping

from .grammar import parse_scalar
from .report import Item, SuiteReport
from .ring import ExtScalar, default_ring

Mono = tuple[int, ...]


class SeriesError(ValueError):
    pass


class DivisionError(SeriesError):
    """Exact division of a Laurent polynomial left a remainder."""


class CollapseError(SeriesError):
    """A symbolic q-exponent did not reduce to a rational number."""


class UnsupportedError(SeriesError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _frac(x) -> Fraction:
    if isinstance(x, ExtScalar):
        return x.as_fraction()
    return Fraction(x)


def _add_laurent(acc: dict, other: Mapping, scale=1, shift: Mono | None = None) -> None:
    for m, c in other.items():
        if shift is not None:
            m = tuple(a + b for a, b in zip(m, shift))
        v = acc.get(m, 0) + c * scale
        if v:
            acc[m] = v
        else:
            acc.pop(m, None)


class QSeries:
    __slots__ = ("vars", "den", "order", "data", "prefactor")

    def __init__(self, vars: Iterable[str] = (), den: int = 1, order=None, data=None, prefactor=None):
        self.vars = tuple(vars)
        self.den = int(den)
        self.order = None if order is None else Fraction(order)
        if self.order is not None and (self.order * self.den).denominator != 1:
            raise SeriesError(f"order {self.order} is not a multiple of 1/{self.den}")
        self.data: dict[int, dict[Mono, object]] = {}
        top = None if self.order is None else int(self.order * self.den)
        for t, lp in (data or {}).items():
            if top is not None and t >= top:
                continue
            lp = {m: c for m, c in lp.items() if c}
            if lp:
                self.data[t] = lp
        self.prefactor = prefactor

    # -- construction -------------------------------------------------------
    @classmethod
    def from_terms(cls, vars, terms: Iterable[tuple], order=None, den: int | None = None, prefactor=None) -> "QSeries":
        """``terms`` are ``(exponent, {var: power} or mono tuple, coeff)``."""
        vars = tuple(vars)
        terms = [(Fraction(e), _mono(m, vars), c) for e, m, c in terms]
        if den is None:
            den = 1
            for e, _, _ in terms:
                den = _lcm(den, e.denominator)
            if order is not None:
                den = _lcm(den, Fraction(order).denominator)
        data: dict[int, dict] = defaultdict(dict)
        for e, m, c in terms:
            t = e * den
            if t.denominator != 1:
                raise SeriesError(f"exponent {e} is not a multiple of 1/{den}")
            _add_laurent(data[int(t)], {m: c})
        return cls(vars, den, order, data, prefactor)

    @classmethod
    def one(cls, vars=(), order=None, den: int = 1) -> "QSeries":
        return cls(vars, den, order, {0: {(0,) * len(tuple(vars)): 1}})

    @classmethod
    def laurent(cls, vars, poly: Mapping, order=None) -> "QSeries":
        """A q-constant Laurent polynomial ``{mono or {var: power}: coeff}``."""
        vars = tuple(vars)
        return cls.from_terms(vars, [(0, m, c) for m, c in poly.items()], order)

    # -- basic access -----------------------------------------------------
    def exponents(self) -> list[Fraction]:
        return [Fraction(t, self.den) for t in sorted(self.data)]

    def coefficient(self, exponent, mono=None):
        lp = self.data.get(_scaled(exponent, self.den), {})
        if mono is None:
            return dict(lp)
        return lp.get(_mono(mono, self.vars), 0)

    def terms(self) -> list[tuple[Fraction, Mono, object]]:
        return [(Fraction(t, self.den), m, c) for t in sorted(self.data) for m, c in sorted(self.data[t].items())]

    def valuation(self) -> Fraction | None:
        return Fraction(min(self.data), self.den) if self.data else None

    def is_exact(self) -> bool:
        return self.order is None

    def __bool__(self) -> bool:
        return bool(self.data)

    def __repr__(self) -> str:
        body = " + ".join(f"({_fmt_laurent(lp, self.vars)})*q^{Fraction(t, self.den)}" for t, lp in sorted(self.data.items())) or "0"
        tail = "" if self.order is None else f" + O(q^{self.order})"
        pre = "" if self.prefactor is None else f"q^({self.prefactor}) * "
        return pre + "[" + body + tail + "]"

    # -- alignment ----------------------------------------------------------
    def with_den(self, den: int) -> "QSeries":
        if den == self.den:
            return self
        if den % self.den:
            raise SeriesError(f"cannot rescale denominator {self.den} to {den}")
        f = den // self.den
        return QSeries(self.vars, den, self.order, {t * f: lp for t, lp in self.data.items()}, self.prefactor)

    def _align(self, other: "QSeries") -> tuple["QSeries", "QSeries"]:
        if self.vars != other.vars:
            raise SeriesError(f"variables differ: {self.vars} vs {other.vars}")
        d = _lcm(self.den, other.den)
        return self.with_den(d), other.with_den(d)

    def truncate(self, order) -> "QSeries":
        order = Fraction(order)
        if self.order is not None and order > self.order:
            raise SeriesError(f"cannot truncate a series known to q^{self.order} at q^{order}")
        den = _lcm(self.den, order.denominator)
        s = self.with_den(den)
        return QSeries(s.vars, den, order, s.data, s.prefactor)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "QSeries") -> "QSeries":
        a, b = self._align(other)
        order = _min_order(a.order, b.order)
        data = {t: dict(lp) for t, lp in a.data.items()}
        for t, lp in b.data.items():
            _add_laurent(data.setdefault(t, {}), lp)
        return QSeries(a.vars, a.den, order, data, _same_prefactor(a, b))

    def __neg__(self) -> "QSeries":
        return self.scale(-1)

    def __sub__(self, other: "QSeries") -> "QSeries":
        return self + (-other)

    def scale(self, c) -> "QSeries":
        return QSeries(self.vars, self.den, self.order, {t: {m: v * c for m, v in lp.items()} for t, lp in self.data.items()}, self.prefactor)

    def shift(self, exponent) -> "QSeries":
        """Multiply by ``q^exponent``."""
        e = Fraction(exponent)
        den = _lcm(self.den, e.denominator)
        s = self.with_den(den)
        k = int(e * den)
        order = None if s.order is None else s.order + e
        return QSeries(s.vars, den, order, {t + k: lp for t, lp in s.data.items()}, s.prefactor)

    def times_monomial(self, mono) -> "QSeries":
        m = _mono(mono, self.vars)
        return QSeries(self.vars, self.den, self.order,
                       {t: {tuple(a + b for a, b in zip(k, m)): c for k, c in lp.items()} for t, lp in self.data.items()}, self.prefactor)

    def __mul__(self, other) -> "QSeries":
        if not isinstance(other, QSeries):
            return self.scale(other)
        a, b = self._align(other)
        va, vb = a.valuation(), b.valuation()
        cands = []
        if a.order is not None:
            cands.append(a.order + (vb if vb is not None else 0))
        if b.order is not None:
            cands.append(b.order + (va if va is not None else 0))
        order = min(cands) if cands else None
        top = None if order is None else int(order * a.den)
        data: dict[int, dict] = {}
        for t1, l1 in a.data.items():
            for t2, l2 in b.data.items():
                t = t1 + t2
                if top is not None and t >= top:
                    continue
                slot = data.setdefault(t, {})
                for m1, c1 in l1.items():
                    for m2, c2 in l2.items():
                        m = tuple(x + y for x, y in zip(m1, m2))
                        v = slot.get(m, 0) + c1 * c2
                        if v:
                            slot[m] = v
                        else:
                            slot.pop(m, None)
        pre = _add_prefactors(a.prefactor, b.prefactor)
        return QSeries(a.vars, a.den, order, data, pre)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "QSeries":
        if n < 0:
            return self.inverse() ** (-n)
        out = QSeries.one(self.vars, self.order, self.den)
        for _ in range(n):
            out = out * self
        return out

    def inverse(self) -> "QSeries":
        """Inverse of a truncated series whose lowest coefficient is a nonzero constant."""
        if self.order is None:
            raise SeriesError("inverse of an exact finite sum needs a truncation order")
        v = self.valuation()
        if v is None:
            raise SeriesError("inverse of zero")
        lead = self.data[int(v * self.den)]
        const = (0,) * len(self.vars)
        if set(lead) != {const}:
            raise SeriesError("inverse needs a constant lowest coefficient")
        c0 = Fraction(lead[const])
        rel = self.shift(-v)
        top = int(rel.order * rel.den)
        inv: dict[int, dict] = {0: {const: 1 / c0}}
        for t in range(1, top):
            acc: dict = {}
            for s, ls in rel.data.items():
                if 0 < s <= t and (t - s) in inv:
                    for m1, c1 in ls.items():
                        for m2, c2 in inv[t - s].items():
                            m = tuple(x + y for x, y in zip(m1, m2))
                            acc[m] = acc.get(m, 0) + c1 * c2
            acc = {m: -c / c0 for m, c in acc.items() if c}
            if acc:
                inv[t] = acc
        pre = None if self.prefactor is None else -self.prefactor
        return QSeries(self.vars, rel.den, rel.order, inv, pre).shift(-v)

    # -- in-place factor updates (used by ProductFormula.expand) --------------
    def _apply_factor(self, c, mono: Mono, e: int, mult: int) -> None:
        """Multiply in place by ``(1 - c * mono * q^(e/den))^mult`` with ``e > 0``."""
        top = int(self.order * self.den)
        for _ in range(abs(mult)):
            keys = range(min(self.data, default=0), top)
            if mult > 0:
                for t in reversed(keys):
                    src = self.data.get(t - e)
                    if src:
                        slot = self.data.setdefault(t, {})
                        _add_laurent(slot, src, -c, mono)
                        if not slot:
                            del self.data[t]
            else:
                for t in keys:
                    src = self.data.get(t - e)
                    if src:
                        slot = self.data.setdefault(t, {})
                        _add_laurent(slot, src, c, mono)
                        if not slot:
                            del self.data[t]

    # -- variable operations ------------------------------------------------
    def _var(self, var: str) -> int:
        try:
            return self.vars.index(var)
        except ValueError:
            raise SeriesError(f"{var!r} is not a variable of this series {self.vars}") from None

    def supercharacter(self, var: str) -> "QSeries":
        """Replace ``var`` by ``-var``."""
        i = self._var(var)
        return QSeries(self.vars, self.den, self.order,
                       {t: {m: (-c if m[i] % 2 else c) for m, c in lp.items()} for t, lp in self.data.items()}, self.prefactor)

    def specialize(self, var: str, value) -> "QSeries":
        """Evaluate ``var`` at a nonzero rational; the variable is dropped."""
        i = self._var(var)
        value = Fraction(value)
        vars = self.vars[:i] + self.vars[i + 1:]
        data: dict[int, dict] = {}
        for t, lp in self.data.items():
            slot: dict = {}
            for m, c in lp.items():
                _add_laurent(slot, {m[:i] + m[i + 1:]: c * value ** m[i]})
            data[t] = slot
        return QSeries(vars, self.den, self.order, data, self.prefactor)

    def substitute(self, var: str, qpow) -> "QSeries":
        """``var^j -> q^(qpow * j)`` on an exact finite sum."""
        if self.order is not None:
            raise SeriesError("substitution into a truncated series is not well defined; use ProductFormula")
        i = self._var(var)
        s = Fraction(qpow)
        den = _lcm(self.den, s.denominator)
        vars = self.vars[:i] + self.vars[i + 1:]
        data: dict[int, dict] = defaultdict(dict)
        for t, lp in self.with_den(den).data.items():
            for m, c in lp.items():
                _add_laurent(data[t + int(s * m[i] * den)], {m[:i] + m[i + 1:]: c})
        return QSeries(vars, den, None, data, self.prefactor)

    def derivative_at_one(self, var: str, n: int = 2) -> "QSeries":
        """``(d/dvar)^n`` evaluated at ``var = 1``; the variable is dropped."""
        i = self._var(var)
        vars = self.vars[:i] + self.vars[i + 1:]
        data: dict[int, dict] = {}
        for t, lp in self.data.items():
            slot: dict = {}
            for m, c in lp.items():
                f = 1
                for r in range(n):
                    f *= m[i] - r
                _add_laurent(slot, {m[:i] + m[i + 1:]: c * f})
            data[t] = slot
        return QSeries(vars, self.den, self.order, data, self.prefactor)

    def divide_binomial(self, var: str, c, d: int) -> "QSeries":
        """Exact division of every coefficient by ``1 - c * var^d`` (``d != 0``)."""
        i = self._var(var)
        c = Fraction(c)
        if d < 0:
            # 1 - c v^d = -c v^d (1 - v^(-d) / c)
            q = self.divide_binomial(var, 1 / c, -d)
            shift = tuple(-d if j == i else 0 for j in range(len(self.vars)))
            return q.times_monomial(shift).scale(-1 / c)
        data: dict[int, dict] = {}
        for t, lp in self.data.items():
            groups: dict[Mono, dict[int, object]] = defaultdict(dict)
            for m, v in lp.items():
                groups[m[:i] + m[i + 1:]][m[i]] = v
            slot: dict = {}
            for rest, poly in groups.items():
                for deg, v in _divide_univariate(poly, c, d).items():
                    slot[rest[:i] + (deg,) + rest[i:]] = v
            data[t] = slot
        return QSeries(self.vars, self.den, self.order, data, self.prefactor)

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        if self.vars != other.vars or self.order != other.order or self.prefactor != other.prefactor:
            return False
        a, b = self._align(other)
        return a.data == b.data

    __hash__ = None

    def first_difference(self, other: "QSeries", order=None):
        """First ``(exponent, mono, lhs, rhs)`` where the series differ below ``order``."""
        a, b = self._align(other)
        order = Fraction(order) if order is not None else _min_order(a.order, b.order)
        top = None if order is None else int(order * a.den)
        for t in sorted(set(a.data) | set(b.data)):
            if top is not None and t >= top:
                break
            la, lb = a.data.get(t, {}), b.data.get(t, {})
            for m in sorted(set(la) | set(lb)):
                if la.get(m, 0) != lb.get(m, 0):
                    return Fraction(t, a.den), m, la.get(m, 0), lb.get(m, 0)
        return None

    def table(self, other: "QSeries", order=None, limit: int | None = None) -> list[tuple]:
        """Rows ``(exponent, monomial, lhs, rhs, match)`` for every monomial present on either side."""
        a, b = self._align(other)
        order = Fraction(order) if order is not None else _min_order(a.order, b.order)
        top = None if order is None else int(order * a.den)
        rows = []
        for t in sorted(set(a.data) | set(b.data)):
            if top is not None and t >= top:
                break
            la, lb = a.data.get(t, {}), b.data.get(t, {})
            for m in sorted(set(la) | set(lb)):
                x, y = la.get(m, 0), lb.get(m, 0)
                rows.append((Fraction(t, a.den), _fmt_mono(m, a.vars), Fraction(x), Fraction(y), x == y))
                if limit is not None and len(rows) >= limit:
                    return rows
        return rows


def _divide_univariate(poly: Mapping[int, object], c: Fraction, d: int) -> dict[int, object]:
    """Quotient of a Laurent polynomial by ``1 - c v^d`` with ``d > 0``."""
    rem = {k: v for k, v in poly.items() if v}
    out: dict[int, object] = {}
    while rem:
        lo = min(rem)
        v = rem.pop(lo)
        out[lo] = v
        rem[lo + d] = rem.get(lo + d, 0) + c * v
        if not rem[lo + d]:
            del rem[lo + d]
        if rem and min(rem) > max(poly) + d:
            break
    if rem:
        raise DivisionError(f"remainder {rem} after dividing by 1 - {c}*v^{d}")
    return out


def _mono(m, vars: tuple[str, ...]) -> Mono:
    if isinstance(m, tuple):
        if len(m) != len(vars):
            raise SeriesError(f"monomial {m} does not match variables {vars}")
        return m
    m = dict(m or {})
    for v in m:
        if v not in vars:
            raise SeriesError(f"unknown variable {v!r}")
    return tuple(int(m.get(v, 0)) for v in vars)


def _scaled(exponent, den: int) -> int:
    t = Fraction(exponent) * den
    if t.denominator != 1:
        raise SeriesError(f"exponent {exponent} is not a multiple of 1/{den}")
    return int(t)


def _min_order(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _same_prefactor(a: QSeries, b: QSeries):
    if a.prefactor != b.prefactor:
        raise SeriesError(f"cannot add series with prefactors {a.prefactor} and {b.prefactor}")
    return a.prefactor


def _add_prefactors(x, y):
    if x is None:
        return y
    if y is None:
        return x
    return x + y


def _fmt_mono(m: Mono, vars) -> str:
    parts = [v if e == 1 else f"{v}^{e}" for v, e in zip(vars, m) if e]
    return "*".join(parts) or "1"


def _fmt_laurent(lp: Mapping, vars) -> str:
    return " + ".join(f"{c}*{_fmt_mono(m, vars)}" for m, c in sorted(lp.items()))


# -- product formulas -----------------------------------------------------------
@dataclass(frozen=True)
class ThetaSum:
    """``coeff * sum_{n in Z} q^(n^2/2 + lin*n) * mono^n``."""

    mono: Mono
    lin: Fraction = Fraction(0)
    coeff: Fraction = Fraction(1)

    def expand(self, vars, order: Fraction) -> QSeries:
        terms = []
        n = 0
        while True:
            found = False
            for s in ((n, -n) if n else (0,)):
                e = Fraction(s * s, 2) + self.lin * s
                if e < order:
                    terms.append((e, tuple(x * s for x in self.mono), self.coeff))
                    found = True
            # n^2/2 - |lin| n is increasing once n > |lin|
            if not found and n > abs(self.lin):
                break
            n += 1
        den = _lcm(2, _lcm(self.lin.denominator, order.denominator))
        return QSeries.from_terms(vars, terms, order, den)


Factor = tuple[Fraction, Mono, Fraction]  # (c, mono, e) meaning 1 - c * mono * q^e


@dataclass
class ProductFormula:
    """``q^qpow * mono * numerator * prod (1 - c*m*q^e)^mult`` over the declared variables.

    ``numerator`` is an exact finite :class:`QSeries` or a list of :class:`ThetaSum`.
    Factors with the same key cancel when formulas are multiplied.
    """

    vars: tuple[str, ...]
    numerator: object
    factors: dict[Factor, int] = field(default_factory=dict)
    qpow: ExtScalar = field(default_factory=lambda: default_ring().zero)
    mono: Mono | None = None

    def __post_init__(self):
        if self.mono is None:
            self.mono = (0,) * len(self.vars)
        self.factors = {k: v for k, v in self.factors.items() if v}

    @classmethod
    def unit(cls, vars) -> "ProductFormula":
        vars = tuple(vars)
        return cls(vars, QSeries.one(vars))

    def _is_unit_numerator(self) -> bool:
        n = self.numerator
        return isinstance(n, QSeries) and n.order is None and n.data == {0: {(0,) * len(self.vars): 1}}

    def __mul__(self, other: "ProductFormula") -> "ProductFormula":
        if self.vars != other.vars:
            raise SeriesError("variables differ")
        if self._is_unit_numerator():
            num = other.numerator
        elif other._is_unit_numerator():
            num = self.numerator
        elif isinstance(self.numerator, QSeries) and isinstance(other.numerator, QSeries):
            num = self.numerator * other.numerator
        else:
            raise UnsupportedError("products of two theta numerators are not supported")
        facs = dict(self.factors)
        for k, v in other.factors.items():
            facs[k] = facs.get(k, 0) + v
        mono = tuple(a + b for a, b in zip(self.mono, other.mono))
        return ProductFormula(self.vars, num, facs, self.qpow + other.qpow, mono)

    def times_q(self, x) -> "ProductFormula":
        x = x if isinstance(x, ExtScalar) else default_ring()(x)
        return ProductFormula(self.vars, self.numerator, dict(self.factors), self.qpow + x, self.mono)

    def substitute(self, var: str, qpow) -> "ProductFormula":
        """``var -> q^qpow`` applied factor by factor; the variable disappears."""
        i = self.vars.index(var)
        s = Fraction(qpow)
        vars = self.vars[:i] + self.vars[i + 1:]
        drop = lambda m: m[:i] + m[i + 1:]
        facs: dict[Factor, int] = {}
        for (c, m, e), mult in self.factors.items():
            key = (c, drop(m), e + s * m[i])
            facs[key] = facs.get(key, 0) + mult
        if isinstance(self.numerator, QSeries):
            num = self.numerator.substitute(var, s)
        else:
            num = [ThetaSum(drop(t.mono), t.lin + s * t.mono[i], t.coeff) for t in self.numerator]
        qpow = self.qpow + default_ring()(s * self.mono[i])
        return ProductFormula(vars, num, facs, qpow, drop(self.mono))

    def collapse(self) -> Fraction:
        """The q-prefactor as a rational number, or :class:`CollapseError`."""
        if self.qpow.free_params() or not self.qpow.is_rational():
            raise CollapseError(f"q-exponent {self.qpow} does not reduce to a rational number")
        return self.qpow.as_fraction()

    def expand(self, order, qpow: Fraction | None = None) -> QSeries:
        """Series to ``q^order`` including the collapsed prefactor (or ``qpow`` if given)."""
        order = Fraction(order)
        pre = self.collapse() if qpow is None else Fraction(qpow)
        rel = order - pre
        vars = self.vars
        const = (0,) * len(vars)
        scalar = Fraction(1)
        finite: list[tuple[Fraction, Mono, int]] = []
        positive: list[tuple[Fraction, Mono, Fraction, int]] = []
        for (c, m, e), mult in sorted(self.factors.items()):
            if e < 0:
                raise SeriesError(f"factor (1 - {c}*{_fmt_mono(m, vars)}*q^{e}) has a negative q-power")
            if e == 0 and m == const:
                base = 1 - c
                if base == 0 and mult < 0:
                    raise SeriesError("the product has a pole: factor (1 - 1) in the denominator")
                scalar *= base**mult
            elif e == 0:
                finite.append((c, m, mult))
            else:
                positive.append((c, m, e, mult))
        # a numerator known below rel suffices: every factor has q-valuation >= 0
        if isinstance(self.numerator, QSeries):
            num = self.numerator.truncate(rel) if self.numerator.order is None else self.numerator
        else:
            num = QSeries(vars, _lcm(2, rel.denominator), rel)
            for t in self.numerator:
                num = num + t.expand(vars, rel)
        for c, m, mult in finite:
            for _ in range(abs(mult)) if mult < 0 else ():
                j = [k for k, x in enumerate(m) if x]
                if len(j) != 1:
                    raise UnsupportedError("division by a q^0 factor in more than one variable")
                num = num.divide_binomial(vars[j[0]], c, m[j[0]])
            for _ in range(mult) if mult > 0 else ():
                num = num * QSeries.laurent(vars, {const: 1, m: -c})
        den = num.den
        for c, m, e, mult in positive:
            den = _lcm(den, e.denominator)
        den = _lcm(den, rel.denominator)
        out = num.with_den(den)
        out = QSeries(vars, den, rel, out.data)
        if num.order is not None and num.order < rel:
            raise SeriesError(f"numerator known only to q^{num.order}, need q^{rel}")
        for c, m, e, mult in positive:
            if e < rel:
                out._apply_factor(c, m, int(e * den), mult)
        out = out.scale(scalar).times_monomial(self.mono)
        return out.shift(pre)


def _factors_family(vars, c, mono: Mapping, start: int, stop: int, mult: int) -> dict[Factor, int]:
    """``prod_{n=start}^{stop-1} (1 - c*mono*q^n)^mult``."""
    m = _mono(mono, vars)
    return {(Fraction(c), m, Fraction(n)): mult for n in range(start, stop)}


def weyl_denominator_formula(var: str, vars, nmax: int, power: int = 1) -> ProductFormula:
    """``Pi(var)^power`` with ``Pi = q^(1/8) (v - v^-1) prod_{n>=1}^{nmax-1} (1-v^2 q^n)(1-q^n)(1-v^-2 q^n)``."""
    vars = tuple(vars)
    ring = default_ring()
    facs: dict[Factor, int] = {}
    for fam in (
        _factors_family(vars, 1, {var: 2}, 1, nmax, power),
        _factors_family(vars, 1, {}, 1, nmax, power),
        _factors_family(vars, 1, {var: -2}, 1, nmax, power),
        # v - v^-1 = v (1 - v^-2)
        {(Fraction(1), _mono({var: -2}, vars), Fraction(0)): power},
    ):
        for k, v in fam.items():
            facs[k] = facs.get(k, 0) + v
    return ProductFormula(vars, QSeries.one(vars), facs, ring(Fraction(power, 8)), _mono({var: power}, vars))


def ghost_supercharacter_formula(var: str, vars, nmax: int) -> ProductFormula:
    """Supercharacter of a bc pair: ``q^(1/12) prod_{n>=1} (1 - v^2 q^n)(1 - v^-2 q^(n-1))``."""
    vars = tuple(vars)
    facs = _factors_family(vars, 1, {var: 2}, 1, nmax, 1)
    for k, v in _factors_family(vars, 1, {var: -2}, 0, nmax - 1, 1).items():
        facs[k] = facs.get(k, 0) + v
    return ProductFormula(vars, QSeries.one(vars), facs, default_ring()(Fraction(1, 12)))


# -- named series -------------------------------------------------------------
def theta_Z(arg, N, vars=None) -> QSeries:
    """``sum_{m^2/2 < N} q^(m^2/2) arg^m`` where ``arg`` is a variable name or ``{var: power}``."""
    N = Fraction(N)
    if N <= 0:
        raise SeriesError("order must be positive")
    arg = {arg: 1} if isinstance(arg, str) else dict(arg)
    vars = tuple(vars) if vars is not None else tuple(arg)
    return ThetaSum(_mono(arg, vars)).expand(vars, N)


def weyl_denominator(var: str, N, vars=None) -> QSeries:
    """``(v - v^-1) prod (1-v^2 q^n)(1-q^n)(1-v^-2 q^n)`` to ``q^N``; ``prefactor`` holds the 1/8."""
    N = Fraction(N)
    vars = tuple(vars) if vars is not None else (var,)
    f = weyl_denominator_formula(var, vars, int(N) + 2)
    s = f.expand(N, qpow=0)
    s.prefactor = default_ring()(Fraction(1, 8))
    return s


def euler_product(N, power: int = 1, vars=()) -> QSeries:
    """``prod_{n>=1} (1 - q^n)^power`` to ``q^N``."""
    N = Fraction(N)
    facs = _factors_family(tuple(vars), 1, {}, 1, int(N) + 2, power)
    return ProductFormula(tuple(vars), QSeries.one(vars), facs).expand(N)


def eta(N) -> QSeries:
    """Dedekind eta without its ``q^(1/24)``, which is kept in ``prefactor``."""
    s = euler_product(N)
    s.prefactor = default_ring()(Fraction(1, 24))
    return s


def supercharacter(x: QSeries, var: str) -> QSeries:
    return x.supercharacter(var)


# -- Weyl modules ---------------------------------------------------------------
@dataclass(frozen=True)
class WeylModuleSpec:
    level: object  # ExtScalar, rational, or a string in the scalar grammar
    m: int
    var: str = "z"
    generic: bool = False

    def level_scalar(self) -> ExtScalar:
        ring = default_ring()
        if isinstance(self.level, ExtScalar):
            return self.level
        if isinstance(self.level, str):
            return parse_scalar(self.level, ring)
        return ring(self.level)


def top_weight(level: ExtScalar, m: int) -> ExtScalar:
    """Conformal weight of the top space of the Weyl module of weight m*omega."""
    return default_ring()(Fraction(m * (m + 2), 4)) / (level + 2)


def sl2_central_charge(level: ExtScalar) -> ExtScalar:
    return 3 * level / (level + 2)


def finite_character(m: int, var: str, vars) -> QSeries:
    """``(v^(m+1) - v^-(m+1)) / (v - v^-1)``."""
    return QSeries.laurent(vars, {_mono({var: m - 2 * j}, tuple(vars)): 1 for j in range(m + 1)})


def weyl_char_formula(spec: WeylModuleSpec, vars, nmax: int) -> ProductFormula:
    """``ch = q^(h - c/24 + 1/8) (v^(m+1) - v^-(m+1)) / Pi(v)``."""
    k = spec.level_scalar()
    if (k + 2).is_zero():
        raise SeriesError("critical level k = -2")
    if not spec.generic and not k.free_params():
        raise UnsupportedError(f"level {k} is a number; pass generic=True if the Weyl module is simple there")
    vars = tuple(vars)
    num = QSeries.laurent(vars, {_mono({spec.var: spec.m + 1}, vars): 1, _mono({spec.var: -spec.m - 1}, vars): -1})
    pre = top_weight(k, spec.m) - sl2_central_charge(k) / 24 + Fraction(1, 8)
    return ProductFormula(vars, num, qpow=pre) * _inverse(weyl_denominator_formula(spec.var, vars, nmax))


def weyl_char(spec: WeylModuleSpec, N, vars=None) -> QSeries:
    """Reduced character ``chi_m(v) / prod (1-v^2 q^n)(1-q^n)(1-v^-2 q^n)`` to ``q^N``.

    ``prefactor`` is ``h - c/24``: the full character is ``q^prefactor`` times
    the returned series.
    """
    vars = tuple(vars) if vars is not None else (spec.var,)
    f = weyl_char_formula(spec, vars, int(Fraction(N)) + 2)
    s = f.expand(N, qpow=0)
    s.prefactor = f.qpow
    return s


def _inverse(f: ProductFormula) -> ProductFormula:
    if not f._is_unit_numerator():
        raise UnsupportedError("only pure products can be inverted")
    return ProductFormula(f.vars, f.numerator, {k: -v for k, v in f.factors.items()}, -f.qpow, tuple(-x for x in f.mono))


# -- PBW counting oracle ----------------------------------------------------------
@dataclass(frozen=True)
class ModeGenerator:
    weight: Fraction
    charge: Mono
    odd: bool = False


def pbw_character(vars, gens: Iterable[ModeGenerator], N, top: QSeries | None = None) -> QSeries:
    """Graded count of ordered monomials in the negative modes of free generators.

    A generator of weight ``w`` contributes modes of degree ``w, w+1, ...``; even
    modes may repeat, odd modes appear at most once.  ``top`` is the character of
    the space the modes act on (the vacuum by default).
    """
    vars = tuple(vars)
    N = Fraction(N)
    gens = list(gens)
    den = N.denominator
    for g in gens:
        den = _lcm(den, Fraction(g.weight).denominator)
    top_series = top if top is not None else QSeries.one(vars)
    den = _lcm(den, top_series.den)
    limit = int(N * den)
    # states[t] = {charge: count}
    states: dict[int, dict] = {t: dict(lp) for t, lp in top_series.with_den(den).data.items() if t < limit}
    for g in gens:
        w = int(Fraction(g.weight) * den)
        d = w
        while d < limit:
            new: dict[int, dict] = {t: dict(lp) for t, lp in states.items()}
            for t, lp in states.items():
                reps = 1
                while t + reps * d < limit:
                    slot = new.setdefault(t + reps * d, {})
                    shift = tuple(x * reps for x in g.charge)
                    _add_laurent(slot, lp, 1, shift)
                    if g.odd:
                        break
                    reps += 1
            states = new
            d += den
    return QSeries(vars, den, N, states)


def sugawara_top_weight(level, m: int) -> ExtScalar:
    """Top weight read off the engine's Sugawara vector: ``A m^2 - C m`` for ``L = A :h h: + B :e f: + C d(h)``.

    On a highest-weight vector only zero modes survive: ``:h h:_0 -> m^2``,
    ``:e f:_0 -> f_0 e_0 = 0`` and ``(d h)_0 -> -h_0``.
    """
    from .presentations import affine_sl2, sugawara

    named = affine_sl2(level)
    L = sugawara(named)
    ring = named.alg.ring
    allowed = {(("h", 0), ("h", 0)), (("e", 0), ("f", 0)), (("h", 1),)}
    extra = [w for w, _ in L if w not in allowed]
    if extra:
        raise SeriesError(f"unexpected Sugawara words {extra}")
    A = L.coefficient((("h", 0), ("h", 0)))
    C = L.coefficient((("h", 1),))
    return A * (m * m) - C * m if A or C else ring.zero


# -- identity checks --------------------------------------------------------------
LEVEL_Z = "-(1/a+3)/2"  # sl2 attached to z: the one removed by the first reduction
LEVEL_W = "-(a+3)/2"  # sl2 attached to w: it survives inside osp(1|2)
VARS = ("z", "w")


def _scalar(text: str) -> ExtScalar:
    return parse_scalar(text, default_ring())


def _series_item(label: str, anchor: str, lhs: QSeries, rhs: QSeries, order) -> tuple[Item, list]:
    diff = lhs.first_difference(rhs, order)
    if diff is None:
        return Item(label, anchor, "pass"), lhs.table(rhs, order, limit=12)
    e, m, x, y = diff
    return Item(label, anchor, "fail", f"first mismatch at q^{e} {_fmt_mono(m, lhs.vars)}: {x} != {y}"), lhs.table(rhs, order)


def _scalar_item(label: str, anchor: str, got, want) -> Item:
    ok = got == want
    return Item(label, anchor, "pass" if ok else "fail", "" if ok else f"{got} != {want}")


def large_n4_character_formula(nmax: int) -> ProductFormula:
    """``(theta(zw) - theta(z/w)) / (Pi(z) Pi(w))``."""
    num = [ThetaSum((1, 1)), ThetaSum((1, -1), coeff=Fraction(-1))]
    f = ProductFormula(VARS, num)
    return f * _inverse(weyl_denominator_formula("z", VARS, nmax)) * _inverse(weyl_denominator_formula("w", VARS, nmax))


def branching_check(N=20) -> SuiteReport:
    N = Fraction(N)
    rep = SuiteReport("char-branching")
    anchor = "branching of the large N=4 algebra over two affine sl2"
    k1, k2 = _scalar(LEVEL_Z), _scalar(LEVEL_W)
    ring = default_ring()
    rep.items.append(_scalar_item("1/(k1+2) + 1/(k2+2) = 2", anchor, 1 / (k1 + 2) + 1 / (k2 + 2), ring(2)))
    rep.items.append(_scalar_item("c1 + c2 = -6", anchor, sl2_central_charge(k1) + sl2_central_charge(k2), ring(-6)))
    nmax = int(N) + 2
    M = isqrt(int(2 * N)) + 2
    lhs = None
    collapse_ok = True
    for m in range(M + 1):
        f = weyl_char_formula(WeylModuleSpec(k1, m, "z"), VARS, nmax) * weyl_char_formula(WeylModuleSpec(k2, m, "w"), VARS, nmax)
        # prefactors of the two characters collapse to (m+1)^2/2, less 1/4 from Pi(z) Pi(w)
        try:
            e = f.collapse()
            ok = e == Fraction((m + 1) ** 2, 2) - Fraction(1, 4)
        except CollapseError as exc:
            ok, e = False, exc
        collapse_ok &= ok
        rep.items.append(Item(f"m = {m}: q-exponents collapse to (m+1)^2/2", anchor, "pass" if ok else "fail", "" if ok else str(e)))
        if ok:
            s = f.expand(N)
            lhs = s if lhs is None else lhs + s
    rhs = large_n4_character_formula(nmax).expand(N)
    if lhs is not None:
        it, table = _series_item(f"sum of Weyl characters = theta difference over Pi(z)Pi(w) to q^{N}", anchor, lhs, rhs, N)
        rep.items.append(it)
        rep.tables[it.label] = table
    return rep


def small_n4_check(N=10) -> SuiteReport:
    """``sum (m+1) ch V_{-3/2}(m omega)`` times a rank-3 Heisenberg against the w = 1 limit."""
    N = Fraction(N)
    rep = SuiteReport("char-small-n4")
    anchor = "small N=4 decomposition into Weyl modules at level -3/2"
    ring = default_ring()
    k = ring(Fraction(-3, 2))
    rep.items.append(_scalar_item("c of V_{-3/2}(sl2) = -9", anchor, sl2_central_charge(k), ring(-9)))
    vars = ("z",)
    nmax = int(N) + 2
    lhs = None
    heis = euler_product(N, -3, vars)
    for m in range(isqrt(int(2 * N)) + 3):
        s = weyl_char(WeylModuleSpec(k, m, "z", generic=True), N, vars)
        # q^(h - c/24) for the Weyl module and q^(-3/24) for the Heisenberg fields
        e = s.prefactor - ring(Fraction(3, 24))
        want = ring(Fraction((m + 1) ** 2, 2) - Fraction(1, 4))
        rep.items.append(_scalar_item(f"m = {m}: exponent h_m + 9/24 - 3/24 = (m+1)^2/2 - 1/4", anchor, e, want))
        s.prefactor = None
        t = (s * heis).scale(m + 1).shift(e.as_fraction())
        lhs = t if lhs is None else lhs + t
    full = large_n4_character_formula(nmax)
    # w -> 1: divide by (w - w^-1) first, then evaluate
    rhs = _expand_then_specialize(full, N, "w", 1)
    it, table = _series_item(f"sum (m+1) ch V_(-3/2)(m omega) / prod(1-q^n)^3 = large N=4 character at w = 1 to q^{N}", anchor, lhs.truncate(N), rhs.truncate(N), N)
    rep.items.append(it)
    rep.tables[it.label] = table
    return rep


def _expand_then_specialize(f: ProductFormula, N, var: str, value) -> QSeries:
    return f.expand(N).specialize(var, value)


def _osp_pbw(N) -> QSeries:
    vars = ("w",)
    gens = [ModeGenerator(Fraction(1), (c,)) for c in (2, 0, -2)] + [ModeGenerator(Fraction(1), (c,), odd=True) for c in (1, -1)]
    return pbw_character(vars, gens, N)


def _n1_times_fermion_pbw(N) -> QSeries:
    gens = [ModeGenerator(Fraction(1, 2), (), odd=True), ModeGenerator(Fraction(2), ()), ModeGenerator(Fraction(3, 2), (), odd=True)]
    return pbw_character((), gens, N)


def qhr_char_check(step: str = "first", N=10) -> SuiteReport:
    N = Fraction(N)
    rep = SuiteReport(f"char-qhr-{step}")
    ring = default_ring()
    nmax = int(N) + 4
    f = large_n4_character_formula(nmax)
    kz, kw = _scalar(LEVEL_Z), _scalar(LEVEL_W)
    f = (f * ghost_supercharacter_formula("z", VARS, nmax)).times_q(kz / 4).substitute("z", Fraction(-1, 2))
    if step == "first":
        anchor = "character of the first reduction"
        c = ring(1) + 3 / _scalar("a")
        target = _osp_pbw(N)
    elif step == "second":
        anchor = "character of the second reduction"
        f = (f * ghost_supercharacter_formula("w", f.vars, nmax)).times_q(kw / 4).substitute("w", Fraction(-1, 2))
        c = _scalar("3/2 + 3*(a + 2 + 1/a)") + Fraction(1, 2)
        target = _n1_times_fermion_pbw(N)
    else:
        raise ValueError("step must be 'first' or 'second'")
    # the prefactor must equal -c/24 up to the valuation of the series
    shift = f.qpow + c / 24
    try:
        e = ProductFormula(f.vars, QSeries.one(f.vars), qpow=shift).collapse()
    except CollapseError as exc:
        rep.items.append(Item("q-prefactor equals -c/24", anchor, "flagged", str(exc)))
        return rep
    s = f.expand(N - e, qpow=0).shift(e)
    val = s.valuation() or Fraction(0)
    rep.items.append(_scalar_item("q-prefactor equals -c/24 (series starts at q^0)", anchor, val, Fraction(0)))
    it, table = _series_item(f"specialized character = PBW character to q^{N}", anchor, s.truncate(N) if s.order >= N else s, target, N)
    rep.items.append(it)
    rep.tables[it.label] = table
    return rep


def hopital_limit_check(N=10) -> SuiteReport:
    N = Fraction(N)
    rep = SuiteReport("char-limit")
    anchor = "z, w -> 1 limit of the large N=4 character"
    lhs = QSeries.from_terms((), [(Fraction((m + 1) ** 2, 2), (), (m + 1) ** 2) for m in range(isqrt(int(2 * N)) + 2)], N, den=2)
    theta2 = theta_Z("z", N).derivative_at_one("z", 2).scale(Fraction(1, 2))
    it, _ = _series_item("sum (m+1)^2 q^((m+1)^2/2) = theta''/2", anchor, lhs.truncate(N), theta2, N)
    rep.items.append(it)
    f = large_n4_character_formula(int(N) + 2)
    # prefactor of Pi(z)Pi(w) against eta^6
    rep.items.append(_scalar_item("q-prefactors: Pi(z) Pi(w) against eta^6", anchor, -f.qpow, eta(1).prefactor * 6))
    full = f.expand(N, qpow=0).specialize("z", 1).specialize("w", 1)
    rhs = theta2 * euler_product(N, -6)
    it, table = _series_item(f"character at z = w = 1 equals theta''/(2 eta^6) to q^{N}", anchor, full, rhs, N)
    rep.items.append(it)
    rep.tables[it.label] = table
    return rep


def supercharacter_check(N=10) -> SuiteReport:
    rep = SuiteReport("char-supercharacter")
    anchor = "supercharacter by z -> -z"
    f = large_n4_character_formula(int(N) + 2).expand(N)
    twice = supercharacter(supercharacter(f, "z"), "z")
    it, _ = _series_item("supercharacter is an involution", anchor, twice, f, N)
    rep.items.append(it)
    th = theta_Z("z", N)
    s = supercharacter(th, "z")
    want = QSeries.from_terms(("z",), [(e, m, c * (-1) ** m[0]) for e, m, c in th.terms()], th.order, th.den)
    it, _ = _series_item("supercharacter of theta flips odd z-degrees", anchor, s, want, N)
    rep.items.append(it)
    return rep


CHECKS = {
    "branching": branching_check,
    "small-n4": small_n4_check,
    "qhr1": lambda N: qhr_char_check("first", N),
    "qhr2": lambda N: qhr_char_check("second", N),
    "limit": hopital_limit_check,
    "supercharacter": supercharacter_check,
}
