"""Free-field realization of the small N=4 algebra at k = 1/2 (central charge -9)
inside the beta-gamma / bc system, and its sl2 highest-weight vectors."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .conformal import bracket
from .fields import FieldExpr
from .grammar import parse_expr
from .presentation import AlgebraPresentation, OPESingular, data_path
from .presentations import beta_gamma_bc, central_charge, small_n4
from .report import Item, SuiteReport

MAP_FILE = "small_n4_free_field.map"


@dataclass
class Realization:
    source: AlgebraPresentation  # where the images live
    target: AlgebraPresentation  # the algebra being realized
    images: dict[str, FieldExpr]

    def image(self, x) -> FieldExpr:
        x = self.target.expr(x) if isinstance(x, str) else x
        return self.target.engine.substitute(x, self.images, self.source.engine)

    def check_pair(self, u: str, v: str) -> tuple[bool, OPESingular]:
        got = bracket(self.images[u], self.images[v], self.source)
        table = bracket(self.target.gen(u), self.target.gen(v), self.target)
        want = OPESingular(self.source.ring, {n: self.image(e) for n, e in table.poles.items()})
        diff = got - want
        return not diff, diff

    def verify(self) -> SuiteReport:
        rep = SuiteReport("realize-small-n4")
        for u in self.target.names:
            for v in self.target.names:
                ok, diff = self.check_pair(u, v)
                rep.items.append(Item(f"{u} {v} OPE of the free-field images", "free-field realization of small N=4",
                                      "pass" if ok else "fail", "" if ok else str(diff)))
        return rep


def read_map(text: str, source: AlgebraPresentation, target: AlgebraPresentation) -> dict[str, FieldExpr]:
    """``name: expr`` lines; an expression may use source fields or earlier target names, not both."""
    images: dict[str, FieldExpr] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, _, body = line.partition(": ")
        target.generator(name)
        e = parse_expr(body.strip(), source.ring)
        gens = e.generators()
        if gens <= set(source.names):
            images[name] = source.engine.canonical(e)
        elif gens <= set(images):
            images[name] = target.engine.substitute(e, images, source.engine)
        else:
            raise ValueError(f"image of {name} mixes source fields with undefined target fields: {sorted(gens)}")
    missing = set(target.names) - set(images)
    if missing:
        raise ValueError(f"no image given for {sorted(missing)}")
    return images


def build_wakimoto_small_n4() -> Realization:
    source = beta_gamma_bc().alg
    target = small_n4(Fraction(1, 2)).alg
    images = read_map(data_path(MAP_FILE).read_text(), source, target)
    return Realization(source, target, images)


def x_vector(n: int, alg: AlgebraPresentation | None = None) -> FieldExpr:
    """``:b d(b) ... d^{n-1}(b):``; ``X_0`` is the vacuum."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    alg = alg or beta_gamma_bc().alg
    if n == 0:
        return FieldExpr.vacuum(alg.ring)
    return alg.engine.canonical(FieldExpr.word(alg.ring, tuple(("b", m) for m in range(n))))


def sugawara_field(real: Realization) -> FieldExpr:
    return real.images[real.target.virasoro]


def check_highest_weight(n: int, real: Realization | None = None, bound: int = 4) -> SuiteReport:
    if n > bound:
        raise ValueError(f"n = {n} exceeds the configured bound {bound}")
    real = real or build_wakimoto_small_n4()
    src = real.source
    X = x_vector(n, src)
    img = real.images
    rep = SuiteReport("highest-weight")
    anchor = "sl2 highest-weight vectors X_n"

    def add(label, got, want):
        d = got - want
        rep.items.append(Item(f"X_{n}: {label}", anchor, "pass" if not d else "fail", "" if not d else str(d)))

    be, bh, bf = (bracket(img[g], X, src) for g in ("e", "h", "f"))
    add("e_(j) X = 0 for j >= 0", OPESingular(src.ring, be.poles), OPESingular(src.ring))
    add(f"h_(0) X = {n} X", bh[1], X * n)
    add("h_(j) X = 0 for j >= 1", OPESingular(src.ring, {p: e for p, e in bh.poles.items() if p > 1}), OPESingular(src.ring))
    add("f_(j) X = 0 for j >= 1", OPESingular(src.ring, {p: e for p, e in bf.poles.items() if p > 1}), OPESingular(src.ring))
    bL = bracket(sugawara_field(real), X, src)
    add(f"L_(1) X = {Fraction(n * (n + 2), 2)} X", bL[2], X * Fraction(n * (n + 2), 2))
    return rep


def verify_realization(max_n: int = 4) -> SuiteReport:
    real = build_wakimoto_small_n4()
    rep = real.verify()
    src = real.source
    L = sugawara_field(real)
    c = central_charge(L, src)
    rep.items.append(Item("central charge of the Sugawara field is -9", "free-field realization of small N=4",
                          "pass" if c == src.ring(-9) else "fail", "" if c == src.ring(-9) else str(c)))
    lev = bracket(real.images["e"], real.images["f"], src)[2]
    want = FieldExpr.vacuum(src.ring, Fraction(-3, 2))
    rep.items.append(Item("e f second-order pole -3/2, so the sl2 level is -3/2", "free-field realization of small N=4",
                          "pass" if lev == want else "fail", "" if lev == want else str(lev)))
    for g, w in (("b", Fraction(3, 2)), ("c", Fraction(-1, 2))):
        got = bracket(L, src.gen(g), src)[2]
        ok = got == src.gen(g) * w
        rep.items.append(Item(f"conformal weight of {g} is {w}", "Sugawara weights of the ghosts",
                              "pass" if ok else "fail", "" if ok else str(got)))
    for n in range(max_n + 1):
        rep.extend(check_highest_weight(n, real, bound=max_n))
    return rep
