"""Run every suite with default settings and write one report per suite.

    python scripts/run_all_suites.py [--out reports] [--format text|json]

Exits nonzero if any suite has a failed item.
"""
import argparse
from pathlib import Path

from opealg.cli import SUITES, RunConfig, run
from opealg.report import render


def main() -> int:
    p = argparse.ArgumentParser()
    p.add_argument("--out", default="reports")
    p.add_argument("--format", choices=("text", "json"), default="text")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bad = []
    for suite in SUITES:
        rep = run(suite, RunConfig(format=args.format))
        (out / f"{suite}.{'json' if args.format == 'json' else 'txt'}").write_text(render(rep, args.format))
        c = rep.counts()
        print(f"{suite:24} {c['pass']:4} passed {c['fail']:3} failed {c['flagged']:3} flagged  {rep.timing:.2f}s")
        if not rep.ok:
            bad.append(suite)
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
