"""``opealg run --suite NAME``: run a verification suite and print its report.

Configuration comes from an optional JSON file (``--config``) overridden by
flags.  Text output is deterministic for a fixed configuration; JSON adds the
wall-clock time.  The exit status is 1 iff some item failed, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .report import Item, SuiteReport, render

SUITES = (
    "validate-presentations",
    "ope-lc",
    "limit-a-infinity",
    "realize-small-n4",
    "reduce-first",
    "reduce-second",
    "char",
)
CHAR_CHECKS = ("branching", "small-n4", "qhr1", "qhr2", "limit", "supercharacter")


# config keys that change what a suite computes; only these are echoed in reports
SUITE_KEYS = {
    "validate-presentations": ("params", "presentation"),
    "ope-lc": ("params", "presentation"),
    "realize-small-n4": ("max_weight",),
    "char": ("order", "check"),
}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    order: int | None = None  # q-order for char checks; suite default when None
    params: dict[str, str] = field(default_factory=dict)  # numeric specialization, e.g. {"k": "1/3"}
    format: str = "text"
    jobs: int = 1
    max_weight: int = 4  # largest n for the X_n highest-weight checks
    check: str | None = None  # one char check, all when None
    presentation: str | None = None  # extra .ope file for validate-presentations

    def echo(self, suite: str) -> dict:
        keys = SUITE_KEYS.get(suite, ())
        d = {k: v for k, v in asdict(self).items() if k in keys and v not in (None, {})}
        if "params" in d:
            d["params"] = ",".join(f"{k}={v}" for k, v in sorted(d["params"].items()))
        return d


def parse_params(text: str | None) -> dict[str, str]:
    if not text:
        return {}
    out = {}
    for part in text.split(","):
        name, sep, val = part.partition("=")
        if not sep or name.strip() not in ("k", "a"):
            raise UsageError(f"--params expects k=...,a=..., got {part!r}")
        Fraction(val.strip())
        out[name.strip()] = val.strip()
    return out


def _guard(rep: SuiteReport, label: str, anchor: str, fn, *args):
    """Run ``fn``; an exception becomes a failed item instead of a crash."""
    try:
        return fn(*args)
    except Exception as exc:  # noqa: BLE001 - reported, not swallowed
        rep.items.append(Item(label, anchor, "fail", f"{type(exc).__name__}: {exc}", traceback.format_exc(limit=1).strip().splitlines()[-1]))
        return None


# -- suites ---------------------------------------------------------------------
def _specialized(named, params):
    from .presentations import specialize_presentation
    from .ring import PoleError

    try:
        return specialize_presentation(named, params) if params else named
    except PoleError as exc:
        raise UsageError(f"--params hits a pole of {named.name}: {exc}") from None


def _override(cfg: RunConfig):
    """The ``--presentation`` file as a NamedPresentation, or None."""
    if not cfg.presentation:
        return None
    from .presentation import load
    from .presentations import NamedPresentation

    path = Path(cfg.presentation)
    return NamedPresentation(load(path), f"presentation file {path.name}")


def _jacobi_item(name: str, params: dict, path: str | None = None) -> tuple[Item, str]:
    from .conformal import jacobi_all, skew_symmetry_check
    from .presentation import load
    from .presentations import NamedPresentation, shipped_presentations

    if path is not None:
        named = NamedPresentation(load(path), f"presentation file {Path(path).name}")
    else:
        named = shipped_presentations()[name]
    named = _specialized(named, params)
    alg = named.alg
    h = load(path).schema_hash() if path is not None else alg.schema_hash()
    skew = skew_symmetry_check(alg)
    results = jacobi_all(alg)
    bad = [r for r in results if not r.passed]
    anchor = named.label
    if skew:
        return Item(f"{name}: skew-symmetry of entries given in both orders", anchor, "fail", f"pairs {skew}"), h
    label = f"{name}: Jacobi identity on all {len(results)} generator triples"
    if bad:
        r = bad[0]
        return Item(label, anchor, "fail", f"{len(bad)} failing triples; first {r.triple}: {r.first_failure()}"), h
    return Item(label, anchor, "pass"), h


def suite_validate_presentations(cfg: RunConfig) -> SuiteReport:
    from .presentations import shipped_presentations

    rep = SuiteReport("validate-presentations")
    jobs = [(n, None) for n in shipped_presentations()]
    extra = _guard(rep, f"{Path(cfg.presentation).name}: load", "presentation file", _override, cfg) if cfg.presentation else None
    if extra is not None:
        # a file named like a shipped presentation replaces it
        jobs = [(n, p) for n, p in jobs if n != extra.name] + [(extra.name, cfg.presentation)]
    if cfg.jobs > 1:
        results = []
        with ProcessPoolExecutor(cfg.jobs) as ex:
            futs = [ex.submit(_jacobi_item, n, cfg.params, p) for n, p in jobs]
            for (n, _), f in zip(jobs, futs):
                try:
                    results.append(f.result())
                except Exception as exc:  # noqa: BLE001
                    results.append((Item(f"{n}: Jacobi identity", "presentation", "fail", f"{type(exc).__name__}: {exc}"), ""))
    else:
        results = []
        for n, p in jobs:
            got = _guard(rep, f"{n}: Jacobi identity", "presentation", _jacobi_item, n, cfg.params, p)
            results.append(got if got is not None else (None, ""))
    for (n, _), (item, h) in sorted(zip(jobs, results), key=lambda t: t[0][0]):
        if item is not None:
            rep.items.append(item)
        if h:
            rep.schema_hashes[n] = h
    rep.items.sort(key=lambda i: i.label)
    return rep


def suite_ope_lc(cfg: RunConfig) -> SuiteReport:
    from .grammar import parse_scalar
    from .presentations import build_large_n4, central_charge, coset_virasoro, derive_coset_table, sl2_prime_sugawara

    rep = SuiteReport("ope-lc")
    L, LC = build_large_n4("L"), build_large_n4("LC")
    extra = _override(cfg)
    if extra is not None:
        if extra.name not in ("large_n4_L", "large_n4_LC"):
            raise UsageError(f"ope-lc can only replace large_n4_L or large_n4_LC, not {extra.name}")
        L, LC = (extra, LC) if extra.name == "large_n4_L" else (L, extra)
    rep.schema_hashes = {"large_n4_L": L.alg.schema_hash(), "large_n4_LC": LC.alg.schema_hash()}
    L, LC = _specialized(L, cfg.params), _specialized(LC, cfg.params)
    anchor = "coset Virasoro field L - L^{sl2'}"
    bad = _guard(rep, "derived coset table", anchor, derive_coset_table, L, LC)
    if bad is not None:
        n = len(LC.alg.names) ** 2
        rep.items.append(Item(f"coset table entries agree with the derivation ({n} ordered pairs)", anchor,
                              "pass" if not bad else "fail", "" if not bad else "; ".join(f"{p}: {d}" for p, d in sorted(bad.items()))))
    A = L.alg
    ring = A.ring

    def want(text):
        s = parse_scalar(text, ring)
        return s.specialize(cfg.params) if cfg.params else s

    for label, field_, expected in (
        ("central charge of L", lambda: A.gen("L"), "-6*k-3"),
        ("central charge of L^{C}", lambda: coset_virasoro(L), "-6*k*(a+k+a*k)/(-1+k+a*k)"),
        ("central charge of the primed Sugawara field", lambda: sl2_prime_sugawara(A, L.assignment), "3*(k*a+k+1)/(k*a+k-1)"),
    ):
        c = _guard(rep, label, "central charges", lambda: central_charge(field_(), A))
        if c is not None:
            w = want(expected)
            rep.items.append(Item(f"{label} = {expected}", "central charges", "pass" if c == w else "fail", "" if c == w else f"{c}"))
    return rep


def suite_limit(cfg: RunConfig) -> SuiteReport:
    from .conformal import bracket
    from .presentations import (
        a_infinity_limit,
        central_charge,
        quotient_by_central,
        same_table,
        small_n4,
        small_n4_limit_expected,
        specialize_presentation,
    )

    rep = SuiteReport("limit-a-infinity")
    anchor = "a to infinity limit"
    lim = _guard(rep, "limit with e', f', h' scaled by 1/a", anchor, a_infinity_limit, "inverse_a")
    if lim is None:
        return rep
    exp = small_n4_limit_expected()
    rep.schema_hashes = {"large_n4_limit": exp.alg.schema_hash(), "small_n4": small_n4().alg.schema_hash()}
    bad = same_table(lim.alg, exp.alg)
    rep.items.append(Item("limit table equals the stored limit table", anchor, "pass" if not bad else "fail",
                          "" if not bad else "; ".join(f"{p}: {d}" for p, d in sorted(bad.items()))))
    q = _guard(rep, "quotient by e', f', h'", anchor, quotient_by_central, lim, ["e'", "f'", "h'"])
    if q is not None:
        bad = same_table(q.alg, small_n4().alg)
        rep.items.append(Item("quotient by the central fields equals the small N=4 table", anchor, "pass" if not bad else "fail",
                              "" if not bad else "; ".join(f"{p}: {d}" for p, d in sorted(bad.items()))))
        half = specialize_presentation(q, {"k": "1/2"})
        c = central_charge(half.alg.gen("L^{C}"), half.alg)
        ok = c == half.alg.ring(-9)
        rep.items.append(Item("central charge at k = 1/2 is -9", anchor, "pass" if ok else "fail", "" if ok else str(c)))
    sq = _guard(rep, "limit with e', f', h' scaled by 1/sqrt(a)", anchor, a_infinity_limit, "inverse_sqrt_a")
    if sq is not None:
        hh = bracket("h'", "h'", sq.alg)[2]
        decoupled = all(not bracket(x, y, sq.alg) for x in ("e'", "f'", "h'") for y in sq.alg.names if y not in ("e'", "f'", "h'"))
        rep.items.append(Item("1/sqrt(a) scaling: primed currents form a decoupled sl2 at level -k", anchor,
                              "flagged", "", f"h' h' pole 2 = {hh}; primed fields decouple from the rest: {decoupled}"))
    return rep


def suite_realize(cfg: RunConfig) -> SuiteReport:
    from .presentations import beta_gamma_bc, small_n4
    from .realizations import verify_realization

    rep = SuiteReport("realize-small-n4")
    got = _guard(rep, "free-field realization", "free-field realization of small N=4", verify_realization, cfg.max_weight)
    if got is not None:
        rep.extend(got)
    rep.schema_hashes = {"small_n4": small_n4().alg.schema_hash(), "beta_gamma_bc": beta_gamma_bc().alg.schema_hash()}
    return rep


def suite_reduce_first(cfg: RunConfig) -> SuiteReport:
    from .qhr import specialize_level_chain, verify_osp_subalgebra

    from .presentations import affine_osp12
    from .qhr import OSP_LEVEL_FROM_K, build_complex

    rep = SuiteReport("reduce-first")
    cx = build_complex("first")
    rep.schema_hashes = {cx.ambient.name: cx.ambient.schema_hash(), "affine_osp12": affine_osp12(OSP_LEVEL_FROM_K).alg.schema_hash()}
    for fn, args, label in ((verify_osp_subalgebra, (cx,), "osp(1|2) inside the first reduction"),
                            (specialize_level_chain, (), "specialization to k = 1/2")):
        got = _guard(rep, label, label, fn, *args)
        if got is not None:
            rep.extend(got)
    return rep


def suite_reduce_second(cfg: RunConfig) -> SuiteReport:
    from .qhr import build_complex, verify_n1_structure

    rep = SuiteReport("reduce-second")
    cx = build_complex("second")
    rep.schema_hashes = {cx.ambient.name: cx.ambient.schema_hash()}
    got = _guard(rep, "N=1 structure in the second reduction", "second reduction", verify_n1_structure, cx)
    if got is not None:
        rep.extend(got)
    return rep


def suite_char(cfg: RunConfig) -> SuiteReport:
    from . import charq

    rep = SuiteReport("char")
    checks = [cfg.check] if cfg.check else list(CHAR_CHECKS)
    for name in checks:
        if name not in charq.CHECKS:
            raise UsageError(f"unknown char check {name!r}; choose from {', '.join(CHAR_CHECKS)}")
        N = cfg.order if cfg.order is not None else (20 if name == "branching" else 10)
        got = _guard(rep, f"{name} to q^{N}", name, charq.CHECKS[name], N)
        if got is not None:
            got.tables = {f"{name}: {k}": v for k, v in got.tables.items()}
            rep.extend(got)
    return rep


RUNNERS = {
    "validate-presentations": suite_validate_presentations,
    "ope-lc": suite_ope_lc,
    "limit-a-infinity": suite_limit,
    "realize-small-n4": suite_realize,
    "reduce-first": suite_reduce_first,
    "reduce-second": suite_reduce_second,
    "char": suite_char,
}
PARAM_SUITES = ("validate-presentations", "ope-lc")


def run(suite: str, config: RunConfig | None = None) -> SuiteReport:
    cfg = config or RunConfig()
    if suite not in RUNNERS:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if cfg.params and suite not in PARAM_SUITES:
        raise UsageError(f"--params applies only to {', '.join(PARAM_SUITES)}")
    t = time.perf_counter()
    try:
        rep = RUNNERS[suite](cfg)
    except UsageError:
        raise
    except Exception as exc:  # noqa: BLE001 - a crash is a failed run, not a traceback
        rep = SuiteReport(suite, [Item(f"{suite} completed", "suite runner", "fail", f"{type(exc).__name__}: {exc}")])
    rep.suite = suite
    rep.config = cfg.echo(suite)
    rep.timing = round(time.perf_counter() - t, 3)
    return rep


# -- command line -------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="opealg", description="Exact OPE, reduction and character verification suites.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one verification suite")
    r.add_argument("--suite", choices=SUITES, help="suite to run")
    r.add_argument("--order", type=int, help="q-order for character checks")
    r.add_argument("--params", help="numeric specialization k=...,a=... (validate-presentations, ope-lc)")
    r.add_argument("--format", choices=("text", "json"))
    r.add_argument("--jobs", type=int, help="worker processes")
    r.add_argument("--max-weight", type=int, dest="max_weight", help="largest n for the X_n checks")
    r.add_argument("--check", choices=CHAR_CHECKS, help="single char check")
    r.add_argument("--presentation", help=".ope file; replaces the shipped presentation of the same name, else is validated alongside")
    r.add_argument("--config", help="JSON file with defaults for the flags above")
    r.add_argument("--output", help="write the report here instead of stdout")
    c = sub.add_parser("char", help="shorthand for run --suite char")
    c.add_argument("--order", type=int)
    c.add_argument("--check", choices=CHAR_CHECKS)
    c.add_argument("--format", choices=("text", "json"))
    c.add_argument("--output")
    c.add_argument("--config")
    sub.add_parser("suites", help="list suite names")
    return p


def config_from_args(args: argparse.Namespace) -> tuple[str | None, RunConfig]:
    base: dict = {}
    if getattr(args, "config", None):
        base = json.loads(Path(args.config).read_text())
        if not isinstance(base, dict):
            raise UsageError("config file must hold a JSON object")
    suite = getattr(args, "suite", None) or base.pop("suite", None)
    base.pop("suite", None)
    if args.command == "char":
        suite = "char"
    unknown = set(base) - set(RunConfig.__dataclass_fields__)
    if unknown:
        raise UsageError(f"unknown config keys {sorted(unknown)}")
    if isinstance(base.get("params"), str):
        base["params"] = parse_params(base["params"])
    cfg = RunConfig(**base)
    for name in ("order", "format", "jobs", "max_weight", "check", "presentation"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    if getattr(args, "params", None):
        cfg.params = parse_params(args.params)
    if cfg.format not in ("text", "json"):
        raise UsageError(f"format must be text or json, got {cfg.format!r}")
    return suite, cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "suites":
        print("\n".join(SUITES))
        return 0
    try:
        suite, cfg = config_from_args(args)
        if suite is None:
            raise UsageError("no suite given (use --suite or a config file)")
        rep = run(suite, cfg)
    except UsageError as exc:
        print(f"opealg: {exc}", file=sys.stderr)
        return 2
    out = render(rep, cfg.format)
    if getattr(args, "output", None):
        Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)
    return 0 if rep.ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
