"""Generators, OPE tables and the text schema for presentations.

Schema (one directive per line, ``#`` starts a comment)::

    opealg-presentation 1
    name <identifier>
    params k a
    root r2a 2*a
    generator <name> even|odd <weight>
    virasoro <name>
    free true|false
    ope <a> <b>
      <pole>: <expression>

An ``ope a b`` block lists the singular part of ``a(z) b(w)``; each line gives
the coefficient of ``(z-w)^-pole``.  Pairs that appear in neither order are
regular.  :func:`dumps` writes the canonical form, and ``dumps(loads(s)) == s``
for any ``s`` produced by :func:`dumps`.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from .fields import FieldExpr
from .grammar import format_expr, parse_expr, parse_ratfunc
from .ring import ScalarRing, default_ring

SCHEMA_VERSION = 1

EVEN, ODD = 0, 1


class PresentationError(ValueError):
    pass


class UnknownGeneratorError(KeyError):
    pass


@dataclass(frozen=True)
class Generator:
    name: str
    parity: int
    weight: Fraction

    @property
    def odd(self) -> bool:
        return self.parity == ODD


class OPESingular:
    """Singular part of ``a(z) b(w)``: pole order ``n >= 1`` -> coefficient field.

    The j-th product is ``a_(j) b = C_{j+1}``, i.e. ``j!`` times the coefficient
    of ``lambda^j`` in the lambda-bracket.
    """

    __slots__ = ("ring", "poles")

    def __init__(self, ring: ScalarRing, poles: Mapping[int, FieldExpr] | None = None):
        self.ring = ring
        self.poles: dict[int, FieldExpr] = {}
        for n, e in (poles or {}).items():
            if n < 1:
                raise ValueError(f"pole order must be >= 1, got {n}")
            if e:
                self.poles[int(n)] = e

    def __getitem__(self, n: int) -> FieldExpr:
        return self.poles.get(n, FieldExpr.zero(self.ring))

    def is_regular(self) -> bool:
        return not self.poles

    def __bool__(self) -> bool:
        return bool(self.poles)

    def max_pole(self) -> int:
        return max(self.poles, default=0)

    def items(self):
        return sorted(self.poles.items(), reverse=True)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OPESingular):
            return NotImplemented
        return self.poles.keys() == other.poles.keys() and all(e == other.poles[n] for n, e in self.poles.items())

    def __sub__(self, other: "OPESingular") -> "OPESingular":
        keys = set(self.poles) | set(other.poles)
        return OPESingular(self.ring, {n: self[n] - other[n] for n in keys})

    def __str__(self) -> str:
        if not self.poles:
            return "{}"
        return "{" + ", ".join(f"{n}: {e}" for n, e in self.items()) + "}"

    __repr__ = __str__


@dataclass
class AlgebraPresentation:
    """Strong generators plus the OPE table of generator pairs.

    ``ope[(a, b)]`` holds the singular part of ``a(z) b(w)`` as given; the
    reverse ordering is obtained by skew-symmetry inside the engine.
    """

    name: str
    generators: list[Generator]
    ope: dict[tuple[str, str], OPESingular]
    ring: ScalarRing = field(default_factory=default_ring)
    virasoro: str | None = None
    free: bool = True
    _engine: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise PresentationError(f"duplicate generator names in {self.name}")
        self._by_name = {g.name: g for g in self.generators}
        for (a, b), entry in self.ope.items():
            for n in (a, b):
                if n not in self._by_name:
                    raise UnknownGeneratorError(f"OPE entry ({a}, {b}) names unknown generator {n!r}")
            for e in entry.poles.values():
                for g in e.generators():
                    if g not in self._by_name:
                        raise UnknownGeneratorError(f"OPE entry ({a}, {b}) uses unknown generator {g!r}")
        if self.virasoro is not None and self.virasoro not in self._by_name:
            raise UnknownGeneratorError(self.virasoro)

    # -- access -------------------------------------------------------------
    def generator(self, name: str) -> Generator:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownGeneratorError(f"{name!r} is not a generator of {self.name}") from None

    @property
    def names(self) -> list[str]:
        return [g.name for g in self.generators]

    def parity(self, name: str) -> int:
        return self.generator(name).parity

    def gen(self, name: str, order: int = 0) -> FieldExpr:
        self.generator(name)
        return FieldExpr.gen(self.ring, name, order)

    def expr(self, text: str) -> FieldExpr:
        """Parse ``text`` and return its canonical form in this algebra."""
        e = parse_expr(text, self.ring)
        for g in e.generators():
            self.generator(g)
        return self.engine.canonical(e)

    @property
    def engine(self):
        if self._engine is None:
            from .engine import Engine

            self._engine = Engine(self)
        return self._engine

    def ordered_pairs(self) -> list[tuple[str, str]]:
        idx = {n: i for i, n in enumerate(self.names)}
        return sorted(self.ope, key=lambda p: (idx[p[0]], idx[p[1]]))

    def schema_hash(self) -> str:
        return hashlib.sha256(dumps(self).encode()).hexdigest()[:16]

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraPresentation):
            return NotImplemented
        return (
            self.name == other.name
            and self.generators == other.generators
            and self.virasoro == other.virasoro
            and self.free == other.free
            and self.ope.keys() == other.ope.keys()
            and all(self.ope[p] == other.ope[p] for p in self.ope)
        )


def make_presentation(
    name: str,
    generators: Iterable[tuple[str, str, object]],
    ope: Mapping[tuple[str, str], Mapping[int, str | FieldExpr]],
    ring: ScalarRing | None = None,
    virasoro: str | None = None,
    free: bool = True,
) -> AlgebraPresentation:
    """Build a presentation from ``(name, "even"|"odd", weight)`` triples and string OPEs."""
    ring = ring or default_ring()
    gens = [Generator(n, ODD if p == "odd" else EVEN, Fraction(w)) for n, p, w in generators]
    table: dict[tuple[str, str], OPESingular] = {}
    for pair, poles in ope.items():
        table[pair] = OPESingular(
            ring, {n: (e if isinstance(e, FieldExpr) else parse_expr(e, ring)) for n, e in poles.items()}
        )
    return AlgebraPresentation(name, gens, table, ring=ring, virasoro=virasoro, free=free)


def tensor(name: str, *algs: AlgebraPresentation, virasoro: str | None = None) -> AlgebraPresentation:
    """Tensor product: generators concatenated, cross OPEs regular."""
    gens: list[Generator] = []
    table: dict[tuple[str, str], OPESingular] = {}
    ring = algs[0].ring
    for alg in algs:
        ring._check(alg.ring)
        gens.extend(alg.generators)
        table.update(alg.ope)
    return AlgebraPresentation(name, gens, table, ring=ring, virasoro=virasoro, free=all(a.free for a in algs))


# -- schema I/O ---------------------------------------------------------------
def dumps(alg: AlgebraPresentation) -> str:
    ring = alg.ring
    lines = [f"opealg-presentation {SCHEMA_VERSION}", f"name {alg.name}", "params " + " ".join(ring.params)]
    for rname, rad in zip(ring.root_names, ring.radicands):
        lines.append(f"root {rname} {rad}")
    for g in alg.generators:
        lines.append(f"generator {g.name} {'odd' if g.odd else 'even'} {g.weight}")
    if alg.virasoro:
        lines.append(f"virasoro {alg.virasoro}")
    lines.append(f"free {'true' if alg.free else 'false'}")
    for a, b in alg.ordered_pairs():
        entry = alg.ope[(a, b)]
        lines.append(f"ope {a} {b}")
        for n, e in entry.items():
            lines.append(f"  {n}: {format_expr(e)}")
    return "\n".join(lines) + "\n"


def loads(text: str, ring: ScalarRing | None = None) -> AlgebraPresentation:
    name, params, roots = None, None, {}
    gens: list[Generator] = []
    virasoro, free = None, True
    entries: list[tuple[tuple[str, str], list[tuple[int, str]]]] = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if raw[:1].isspace():
            if not entries:
                raise PresentationError(f"line {lineno}: pole line outside an ope block")
            pole, _, body = line.strip().partition(":")
            entries[-1][1].append((int(pole), body.strip()))
            continue
        head, *rest = line.split()
        if head == "opealg-presentation":
            if int(rest[0]) != SCHEMA_VERSION:
                raise PresentationError(f"unsupported schema version {rest[0]}")
            header_seen = True
        elif head == "name":
            name = rest[0]
        elif head == "params":
            params = tuple(rest)
        elif head == "root":
            roots[rest[0]] = " ".join(rest[1:])
        elif head == "generator":
            gname, par, w = rest
            if par not in ("even", "odd"):
                raise PresentationError(f"line {lineno}: parity must be even or odd")
            gens.append(Generator(gname, ODD if par == "odd" else EVEN, Fraction(w)))
        elif head == "virasoro":
            virasoro = rest[0]
        elif head == "free":
            free = rest[0] == "true"
        elif head == "ope":
            entries.append(((rest[0], rest[1]), []))
        else:
            raise PresentationError(f"line {lineno}: unknown directive {head!r}")
    if not header_seen:
        raise PresentationError("missing 'opealg-presentation' header")
    if ring is None:
        ring = default_ring()
        if params is not None and tuple(params) != ring.params:
            ring = ScalarRing(params, roots)
    if params is not None and tuple(params) != ring.params:
        raise PresentationError(f"schema params {params} do not match ring {ring.params}")
    for rname, text_rad in roots.items():
        if rname not in ring.root_names or ring.radicands[ring.root_names.index(rname)] != parse_ratfunc(text_rad, ring):
            raise PresentationError(f"root {rname} = sqrt({text_rad}) is not declared in {ring!r}")
    table: dict[tuple[str, str], OPESingular] = {}
    for pair, poles in entries:
        if pair in table:
            raise PresentationError(f"duplicate ope block {pair}")
        table[pair] = OPESingular(ring, {n: parse_expr(e, ring) for n, e in poles})
    return AlgebraPresentation(name or "unnamed", gens, table, ring=ring, virasoro=virasoro, free=free)


def load(path: str | Path, ring: ScalarRing | None = None) -> AlgebraPresentation:
    return loads(Path(path).read_text(), ring)


def data_path(filename: str) -> Path:
    return Path(__file__).parent / "data" / filename
