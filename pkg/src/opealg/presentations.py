"""Concrete presentations and constructions on them.

The large N=4 tables live in ``data/*.ope`` files; the smaller affine and
free-field algebras are generated here from a level.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .conformal import bracket, derive, lambda_to_ope
from .fields import FieldExpr
from .grammar import parse_scalar
from .presentation import (
    AlgebraPresentation,
    OPESingular,
    data_path,
    load,
    make_presentation,
)
from .ring import ExtScalar, ParamRat, PoleError, default_ring


class ShapeError(ValueError):
    pass


class DivergenceError(ValueError):
    pass


class CentralityError(ValueError):
    pass


@dataclass
class NamedPresentation:
    alg: AlgebraPresentation
    label: str
    params: tuple[str, ...] = ("k", "a")
    notes: list[str] = field(default_factory=list)
    assignment: dict = field(default_factory=dict)  # parameter values fixed by specialize_presentation

    @property
    def name(self) -> str:
        return self.alg.name


def _scalar(x, ring=None) -> ExtScalar:
    ring = ring or default_ring()
    if isinstance(x, ExtScalar):
        return x
    if isinstance(x, str):
        return parse_scalar(x, ring)
    return ring(x)


def _lvl(level, ring=None) -> str:
    return f"({_scalar(level, ring)})"


# -- the large N=4 algebra ------------------------------------------------------
LARGE_N4_FILES = {"L": "large_n4_L.ope", "LC": "large_n4_LC.ope"}
PRIMED = ("e'", "f'", "h'")


def build_large_n4(variant: str = "L") -> NamedPresentation:
    if variant not in LARGE_N4_FILES:
        raise ValueError(f"variant must be one of {sorted(LARGE_N4_FILES)}")
    alg = load(data_path(LARGE_N4_FILES[variant]))
    label = "large N=4 OPE table" if variant == "L" else "large N=4 OPE table, coset Virasoro field"
    return NamedPresentation(alg, label)


def sl2_prime_sugawara(alg: AlgebraPresentation, assignment: dict | None = None) -> FieldExpr:
    """Sugawara field of the primed sl2 inside V(k,a), written with e', f', h'."""
    x = alg.expr(
        "(-1/(4*(-1+k+a*k)))*:h' h': + (-1/(2*(-1+k+a*k)))*:e' f': + (-1/(2*(-1+k+a*k)))*:f' e':"
    )
    return x.specialize(assignment) if assignment else x


def coset_virasoro(named: NamedPresentation) -> FieldExpr:
    """``L - L^{sl2'}`` inside the L variant."""
    alg = named.alg
    return alg.gen("L") - sl2_prime_sugawara(alg, named.assignment)


def derive_coset_table(named_L: NamedPresentation, named_LC: NamedPresentation) -> dict:
    """Compare every entry of the coset-variant table with the bracket computed in the L variant.

    The coset variant is mapped into the L variant by ``L^{C} -> L - L^{sl2'}``;
    returns ``{(a, b): difference}`` for the entries that disagree.
    """
    L, LC = named_L.alg, named_LC.alg
    phi = {"L^{C}": coset_virasoro(named_L)}
    src = LC.engine
    img = {g: src.substitute(LC.gen(g), phi, L.engine) for g in LC.names}
    bad = {}
    for a in LC.names:
        for b in LC.names:
            derived = bracket(img[a], img[b], L)
            stated = lambda_to_ope(src.table(a, b), LC)
            mapped = OPESingular(L.ring, {n: src.substitute(e, phi, L.engine) for n, e in stated.poles.items()})
            if derived != mapped:
                bad[(a, b)] = derived - mapped
    return bad


# -- affine and free-field presentations -------------------------------------
def affine_sl2(level, names=("e", "h", "f"), name: str = "affine_sl2") -> NamedPresentation:
    """Affine sl2 at ``level``: h h ~ 2k, e f ~ k (z-w)^-2 + h (z-w)^-1."""
    e, h, f = names
    k = _lvl(level)
    alg = make_presentation(
        name,
        [(e, "even", 1), (h, "even", 1), (f, "even", 1)],
        {
            (h, h): {2: f"2*{k}"},
            (e, f): {2: k, 1: h},
            (h, e): {1: f"2*{e}"},
            (h, f): {1: f"-2*{f}"},
        },
    )
    return NamedPresentation(alg, "affine sl2", notes=[f"level {k}"])


def affine_osp12(level, name: str = "affine_osp12") -> NamedPresentation:
    """Affine osp(1|2) with even currents e', f', h' and odd currents x', y'."""
    k = _lvl(level)
    alg = make_presentation(
        name,
        [("e'", "even", 1), ("h'", "even", 1), ("f'", "even", 1), ("x'", "odd", 1), ("y'", "odd", 1)],
        {
            ("e'", "f'"): {2: k, 1: "h'"},
            ("h'", "h'"): {2: f"2*{k}"},
            ("h'", "e'"): {1: "2*e'"},
            ("h'", "f'"): {1: "-2*f'"},
            ("h'", "x'"): {1: "x'"},
            ("h'", "y'"): {1: "-y'"},
            ("e'", "y'"): {1: "x'"},
            ("f'", "x'"): {1: "y'"},
            ("x'", "y'"): {2: k, 1: "1/2*h'"},
            ("x'", "x'"): {1: "-e'"},
            ("y'", "y'"): {1: "f'"},
        },
    )
    return NamedPresentation(alg, "affine osp(1|2)", notes=[f"level {k}"])


def beta_gamma_bc() -> NamedPresentation:
    """beta gamma system with a fermionic bc pair; all four fields of weight 1/2."""
    alg = make_presentation(
        "beta_gamma_bc",
        [("beta", "even", "1/2"), ("gamma", "even", "1/2"), ("b", "odd", "1/2"), ("c", "odd", "1/2")],
        {("beta", "gamma"): {1: "1"}, ("b", "c"): {1: "1"}},
    )
    return NamedPresentation(alg, "beta-gamma and bc free fields")


def beta_gamma() -> NamedPresentation:
    alg = make_presentation("beta_gamma", [("beta", "even", "1/2"), ("gamma", "even", "1/2")], {("beta", "gamma"): {1: "1"}})
    return NamedPresentation(alg, "beta-gamma system")


def ghost_pair(b: str = "b", c: str = "c", name: str = "bc") -> NamedPresentation:
    """Fermionic ghosts ``b(z) c(w) ~ (z-w)^-1`` with complex grading weights 1 and 0."""
    alg = make_presentation(name, [(b, "odd", 1), (c, "odd", 0)], {(b, c): {1: "1"}})
    return NamedPresentation(alg, "fermionic ghost pair")


def heisenberg(level=1, name: str = "h") -> NamedPresentation:
    alg = make_presentation("heisenberg", [(name, "even", 1)], {(name, name): {2: _lvl(level)}})
    return NamedPresentation(alg, "Heisenberg algebra")


def free_fermion(name: str = "psi") -> NamedPresentation:
    alg = make_presentation("free_fermion", [(name, "odd", "1/2")], {(name, name): {1: "1"}})
    return NamedPresentation(alg, "free fermion")


def specialize_presentation(named: NamedPresentation, assignment: dict, name: str | None = None) -> NamedPresentation:
    alg = named.alg
    table = {
        pair: OPESingular(alg.ring, {n: e.specialize(assignment) for n, e in entry.poles.items()})
        for pair, entry in alg.ope.items()
    }
    out = AlgebraPresentation(name or alg.name, list(alg.generators), table, ring=alg.ring, virasoro=alg.virasoro, free=alg.free)
    return NamedPresentation(out, named.label, named.params, named.notes + [f"specialized at {assignment}"],
                             {**named.assignment, **assignment})


# -- Sugawara and central charge ---------------------------------------------
def _solve(rows: list[list[ExtScalar]], rhs: list[ExtScalar], nvars: int) -> list[ExtScalar]:
    """Exact Gaussian elimination; raises if inconsistent or underdetermined."""
    m = [r[:] + [b] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for col in range(nvars):
        p = next((i for i in range(r, len(m)) if m[i][col]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = m[r][col].inverse()
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col]:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        piv_cols.append(col)
        r += 1
    for i in range(r, len(m)):
        if m[i][-1]:
            raise ShapeError("no Sugawara vector: linear conditions are inconsistent")
    if len(piv_cols) < nvars:
        raise ShapeError("Sugawara conditions do not fix the vector uniquely")
    out = [None] * nvars
    for i, col in enumerate(piv_cols):
        out[col] = m[i][-1]
    return out


def sugawara(named: NamedPresentation, currents: list[str] | None = None) -> FieldExpr:
    """Unique combination of quadratics and derivatives of the currents with
    ``[L_lambda J] = (d + lambda) J`` for every current ``J``."""
    alg = named.alg
    eng = alg.engine
    ring = alg.ring
    cur = currents or [g.name for g in alg.generators if g.weight == 1]
    cur = sorted(cur, key=lambda n: eng.rank[n])
    ansatz: list[FieldExpr] = []
    for i, x in enumerate(cur):
        for y in cur[i:]:
            if x == y and eng.par[x]:
                continue
            ansatz.append(FieldExpr.word(ring, ((x, 0), (y, 0))))
    ansatz += [FieldExpr.gen(ring, x, 1) for x in cur]
    # conditions: coefficient of every (current, lambda power, word)
    eqs: dict[tuple, list[ExtScalar]] = {}
    targets: dict[tuple, ExtScalar] = {}
    for J in cur:
        Jx = FieldExpr.gen(ring, J)
        for idx, m in enumerate(ansatz):
            for j, e in eng.lambda_bracket(m, Jx).items():
                for w, c in e.items():
                    eqs.setdefault((J, j, w), [ring.zero] * len(ansatz))[idx] += c
        targets[(J, 1, ((J, 0),))] = ring.one
        targets[(J, 0, ((J, 1),))] = ring.one
        for key in targets:
            eqs.setdefault(key, [ring.zero] * len(ansatz))
    keys = sorted(eqs, key=repr)
    coeffs = _solve([eqs[k] for k in keys], [targets.get(k, ring.zero) for k in keys], len(ansatz))
    out = FieldExpr.zero(ring)
    for c, m in zip(coeffs, ansatz):
        out = out + m * c
    return eng.canonical(out)


def virasoro_shape(L: FieldExpr, alg: AlgebraPresentation) -> tuple[ExtScalar | None, list[str]]:
    ope = bracket(L, L, alg)
    problems = []
    if ope[1] != derive(L, alg):
        problems.append(f"pole 1: {ope[1]} != d(L)")
    if ope[2] != L * 2:
        problems.append(f"pole 2: {ope[2]} != 2L")
    if ope[3]:
        problems.append(f"pole 3: {ope[3]} != 0")
    if not ope[4].is_scalar():
        problems.append(f"pole 4: {ope[4]} is not a scalar")
    if ope.max_pole() > 4:
        problems.append(f"pole {ope.max_pole()} present")
    c = ope[4].vacuum_coefficient() * 2 if not problems else None
    return c, problems


def central_charge(L: FieldExpr, alg: AlgebraPresentation) -> ExtScalar:
    c, problems = virasoro_shape(L, alg)
    if problems:
        raise ShapeError("not a Virasoro field: " + "; ".join(problems))
    return c


# -- a -> infinity limit ------------------------------------------------------
SCALINGS = {"inverse_a": Fraction(1), "inverse_sqrt_a": Fraction(1, 2)}


def _limit_coeff(c: ExtScalar, shift: Fraction, where: str) -> ExtScalar:
    ring = c.ring
    if not c.is_rational():
        raise DivergenceError(f"{where}: coefficient {c} involves square roots")
    r = c.rational_part()
    deg = r.degree_in("a") + shift
    if deg > 0:
        raise DivergenceError(f"{where}: coefficient {r} times a^{shift} has positive degree {deg} in a")
    if deg < 0:
        return ring.zero
    return ring(r.leading_in("a"))


def a_infinity_limit(scaling: str = "inverse_a", source: NamedPresentation | None = None) -> NamedPresentation:
    """Rescale e', f', h' by a^-s and keep the leading a-behaviour of every table entry."""
    if scaling not in SCALINGS:
        raise ValueError(f"scaling must be one of {sorted(SCALINGS)}")
    s = SCALINGS[scaling]
    src = source or build_large_n4("LC")
    alg = src.alg
    eng = alg.engine
    primed = set(PRIMED)
    table = {}
    for (x, y), entry in alg.ope.items():
        lhs = (x in primed) + (y in primed)
        poles = {}
        for n, e in entry.poles.items():
            terms = {}
            for w, c in eng.canon_expr(e.terms).items():
                nw = sum(1 for name, _ in w if name in primed)
                v = _limit_coeff(c, s * (nw - lhs), f"{x} {y} pole {n} word {w}")
                if v:
                    terms[w] = v
            poles[n] = FieldExpr._raw(alg.ring, terms)
        table[(x, y)] = OPESingular(alg.ring, poles)
    table = {p: v for p, v in table.items() if not v.is_regular()}
    out = AlgebraPresentation(f"large_n4_limit_{scaling}", list(alg.generators), table, ring=alg.ring, virasoro=alg.virasoro, free=alg.free)
    return NamedPresentation(out, f"a to infinity limit ({scaling})", ("k",))


def quotient_by_central(named: NamedPresentation, central) -> NamedPresentation:
    """Drop central generators and set every word containing them to zero."""
    alg = named.alg
    central = set(central)
    eng = alg.engine
    for g in central:
        alg.generator(g)
        for x in alg.names:
            if eng.table(g, x) or eng.table(x, g):
                raise CentralityError(f"{g} has a singular OPE with {x}")
    table = {}
    for (x, y), entry in alg.ope.items():
        if x in central or y in central:
            continue
        poles = {}
        for n, e in entry.poles.items():
            poles[n] = FieldExpr._raw(alg.ring, {w: c for w, c in e.terms.items() if not any(l[0] in central for l in w)})
        q = OPESingular(alg.ring, poles)
        if not q.is_regular():
            table[(x, y)] = q
    gens = [g for g in alg.generators if g.name not in central]
    out = AlgebraPresentation(f"{alg.name}_mod_center", gens, table, ring=alg.ring, virasoro=alg.virasoro, free=alg.free)
    return NamedPresentation(out, named.label + " modulo centre", named.params, list(named.notes), dict(named.assignment))


def same_table(x: AlgebraPresentation, y: AlgebraPresentation) -> dict:
    """Entry-by-entry comparison in canonical form; returns the differing entries."""
    if x.names != y.names:
        raise ValueError(f"generator lists differ: {x.names} vs {y.names}")
    ex, ey = x.engine, y.engine
    bad = {}
    for a in x.names:
        for b in x.names:
            p = lambda_to_ope(ex.table(a, b), x)
            q = lambda_to_ope(ey.table(a, b), y)
            if p != q:
                bad[(a, b)] = p - q
    return bad


def load_named(filename: str, label: str) -> NamedPresentation:
    return NamedPresentation(load(data_path(filename)), label)


def small_n4_limit_expected() -> NamedPresentation:
    return load_named("large_n4_limit.ope", "a to infinity limit, stored table")


def small_n4(level=None) -> NamedPresentation:
    """Small N=4 table at level ``k`` (symbolic unless ``level`` is given)."""
    named = load_named("small_n4.ope", "small N=4 OPE table")
    if level is not None:
        named = specialize_presentation(named, {"k": level}, f"small_n4_k{Fraction(level)}".replace("/", "_"))
    return named


def shipped_presentations() -> dict[str, NamedPresentation]:
    """Every presentation the package ships, keyed by name."""
    out = {
        "large_n4_L": build_large_n4("L"),
        "large_n4_LC": build_large_n4("LC"),
        "large_n4_limit": small_n4_limit_expected(),
        "small_n4": small_n4(),
        "affine_sl2": affine_sl2("k"),
        "affine_osp12": affine_osp12("k"),
        "beta_gamma_bc": beta_gamma_bc(),
        "bc": ghost_pair(),
        "heisenberg": heisenberg(1),
        "free_fermion": free_fermion(),
    }
    return out


__all__ = [
    "NamedPresentation",
    "ShapeError",
    "DivergenceError",
    "CentralityError",
    "PoleError",
    "ParamRat",
    "build_large_n4",
    "affine_sl2",
    "affine_osp12",
    "beta_gamma_bc",
    "ghost_pair",
    "heisenberg",
    "free_fermion",
    "sugawara",
    "central_charge",
    "a_infinity_limit",
    "quotient_by_central",
]
