"""Public lambda-bracket calculus over an :class:`AlgebraPresentation`.

All functions take and return :class:`FieldExpr` values in canonical form.
Brackets come back as :class:`OPESingular` pole maps; the engine works with
lambda-polynomials internally and converts at the boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

from .fields import FieldExpr, Word, add_into
from .presentation import AlgebraPresentation, OPESingular
from .ring import ExtScalar


class UnsupportedError(ValueError):
    pass


class ConsistencyError(RuntimeError):
    pass


def _as_expr(x, alg: AlgebraPresentation) -> FieldExpr:
    if isinstance(x, str):
        return alg.expr(x)
    return x


def lambda_to_ope(lp: dict, alg: AlgebraPresentation) -> OPESingular:
    ring = alg.ring
    poles = {}
    for j, e in lp.items():
        f = factorial(j)
        poles[j + 1] = FieldExpr._raw(ring, dict(e)) * f if f != 1 else FieldExpr._raw(ring, dict(e))
    return OPESingular(ring, poles)


def derive(x: FieldExpr, alg: AlgebraPresentation, n: int = 1) -> FieldExpr:
    e = alg.engine.canon_expr(_as_expr(x, alg).terms)
    return FieldExpr._raw(alg.ring, alg.engine.derive_n(e, n))


def canonical(x: FieldExpr, alg: AlgebraPresentation) -> FieldExpr:
    return alg.engine.canonical(_as_expr(x, alg))


def bracket(a: FieldExpr, b: FieldExpr, alg: AlgebraPresentation) -> OPESingular:
    """Singular part of ``a(z) b(w)``."""
    return lambda_to_ope(alg.engine.lambda_bracket(_as_expr(a, alg), _as_expr(b, alg)), alg)


def normal_order(a: FieldExpr, b: FieldExpr, alg: AlgebraPresentation) -> FieldExpr:
    return alg.engine.normal_order(_as_expr(a, alg), _as_expr(b, alg))


def nth_product(a: FieldExpr, j: int, b: FieldExpr, alg: AlgebraPresentation) -> FieldExpr:
    """``a_(j) b``: pole coefficient ``C_{j+1}`` for ``j >= 0``, else ``:(d^{-j-1} a / (-j-1)!) b:``."""
    a, b = _as_expr(a, alg), _as_expr(b, alg)
    if j >= 0:
        return bracket(a, b, alg)[j + 1]
    n = -j - 1
    da = derive(a, alg, n) * Fraction(1, factorial(n))
    return normal_order(da, b, alg)


# -- Jacobi identity ------------------------------------------------------------
@dataclass
class JacobiResult:
    triple: tuple[str, str, str]
    passed: bool
    residual: dict = field(default_factory=dict)  # (lambda power, mu power) -> FieldExpr

    def first_failure(self) -> str:
        if self.passed:
            return ""
        (i, j), e = min(self.residual.items())
        return f"coefficient of lambda^{i} mu^{j}: {e}"


def jacobi_check(a: str, b: str, c: str, alg: AlgebraPresentation) -> JacobiResult:
    """[a_l [b_m c]] - p(a,b) [b_m [a_l c]] - [[a_l b]_{l+m} c] on three generators."""
    eng = alg.engine
    for g in (a, b, c):
        alg.generator(g)
    la, lb, lc = (a, 0), (b, 0), (c, 0)
    acc: dict[tuple[int, int], dict] = {}

    def put(i, j, terms, scale):
        slot = acc.setdefault((i, j), {})
        add_into(slot, terms, scale)

    for j, e in eng.table(b, c).items():
        for w, cw in e.items():
            for i, f in eng.br_letter_word(la, w).items():
                put(i, j, f, cw)
    s = -eng.sign(eng.par[a], eng.par[b])
    for i, e in eng.table(a, c).items():
        for w, cw in e.items():
            for j, f in eng.br_letter_word(lb, w).items():
                put(i, j, f, cw * s)
    for i, e in eng.table(a, b).items():
        for w, cw in e.items():
            for n, f in eng.br_word_word(w, (lc,)).items():
                for t in range(n + 1):
                    put(i + t, n - t, f, cw * eng.c(-comb(n, t)))
    residual = {k: FieldExpr._raw(alg.ring, v) for k, v in acc.items() if v}
    return JacobiResult((a, b, c), not residual, residual)


def jacobi_all(alg: AlgebraPresentation, triples=None) -> list[JacobiResult]:
    names = alg.names
    if triples is None:
        triples = [(x, y, z) for x in names for y in names for z in names]
    return [jacobi_check(x, y, z, alg) for x, y, z in triples]


def skew_symmetry_check(alg: AlgebraPresentation) -> list[tuple[str, str]]:
    """Pairs given in both orders whose entries disagree with skew-symmetry."""
    eng = alg.engine
    bad = []
    for (a, b) in alg.ope:
        if (b, a) in alg.ope:
            direct = lambda_to_ope(eng.table(a, b), alg)
            via = lambda_to_ope(eng.skew(eng.table(b, a), -eng.sign(eng.par[a], eng.par[b])), alg)
            if direct != via:
                bad.append((a, b))
    return bad


# -- weight-graded basis and pairing -------------------------------------------
def _letter_weight(alg, letter) -> Fraction:
    return alg.generator(letter[0]).weight + letter[1]


def weight_basis(alg: AlgebraPresentation, N) -> list[FieldExpr]:
    """Canonical words of total conformal weight exactly ``N`` (PBW basis of that weight space)."""
    if not alg.free:
        raise UnsupportedError(f"{alg.name} is not declared freely generated")
    N = Fraction(N)
    eng = alg.engine
    if any(g.weight <= 0 for g in alg.generators):
        raise UnsupportedError("weight_basis needs positive generator weights")
    letters = []
    for g in alg.generators:
        m = 0
        while g.weight + m <= N:
            letters.append((g.name, m))
            m += 1
    letters.sort(key=eng.key)
    out: list[Word] = []

    def rec(start: int, remaining: Fraction, prefix: tuple):
        if remaining == 0:
            out.append(prefix)
            return
        for idx in range(start, len(letters)):
            l = letters[idx]
            w = _letter_weight(alg, l)
            if w > remaining:
                continue
            nxt = idx + 1 if eng.par[l[0]] else idx
            rec(nxt, remaining - w, prefix + (l,))

    if N == 0:
        return [FieldExpr.vacuum(alg.ring)]
    rec(0, N, ())
    out.sort(key=lambda w: (len(w), [eng.key(l) for l in w]))
    return [FieldExpr.word(alg.ring, w) for w in out]


def shapovalov_matrix(alg: AlgebraPresentation, n, basis: list[FieldExpr] | None = None) -> list[list[ExtScalar]]:
    """Gram matrix ``<w_i, w_j> = (w_i)_(2n-1) w_j`` read off as a vacuum coefficient."""
    n = Fraction(n)
    basis = weight_basis(alg, n) if basis is None else [_as_expr(b, alg) for b in basis]
    j = 2 * n - 1
    if j.denominator != 1:
        raise ValueError(f"2n-1 must be an integer, got {j}")
    j = int(j)
    rows = []
    for wi in basis:
        row = []
        for wj in basis:
            v = nth_product(wi, j, wj, alg)
            if not v.is_scalar():
                raise ConsistencyError(f"pairing of {wi} and {wj} is not a scalar: {v}")
            row.append(v.vacuum_coefficient())
        rows.append(row)
    return rows
