"""Command line: ``cuntzkit run|study|symbolic``.

Exit status is 0 exactly when every check passes (expected failures count
as passes).  Configuration errors exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import config as cfgmod
from . import pipeline
from . import symbolic as sym

OUT_ENV = "CUNTZKIT_OUT"


def _resolve_config(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    shipped = cfgmod.shipped_configs()
    for key in (name, f"{name}.cfg"):
        if key in shipped:
            return shipped[key]
    raise cfgmod.ConfigError(f"no such config file (shipped: {', '.join(sorted(shipped))})", source=name)


def _out_dir(args, config) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env) / config.name
    return Path(config.output_dir)


def _load(args):
    config = cfgmod.load(_resolve_config(args.config))
    if args.seed is not None:
        config = config.with_overrides(seed=args.seed)
    return config


def cmd_run(args) -> int:
    config = _load(args)
    out = _out_dir(args, config)
    result = pipeline.run(config, out_dir=out, tolerance_scale=args.tolerance_scale)
    print(result.summary_table())
    for r in result.results:
        for c in r.report.checks:
            if not c.ok:
                print(f"FAIL {r.stage}-{r.size}: {c.name} = {c.value:.3e} (tolerance {c.tolerance:.1e}, {c.bound}) {c.context.get('error', '')}".rstrip())
    print(f"reports: {out}")
    return 0 if result.ok else 1


def cmd_study(args) -> int:
    config = _load(args)
    values = [int(v) for v in args.values.split(",")] if args.values else None
    study = pipeline.convergence_study(config, args.check, parameter=args.over, values=values, tolerance_scale=args.tolerance_scale)
    print(study.table())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"study-{args.check}-{args.over}.json").write_text(study.to_json() + "\n")
    return 0 if study.nonincreasing() else 1


def cmd_symbolic(args) -> int:
    """One expression per line; ``lhs == rhs`` lines are checked for equality."""
    text = Path(args.file).read_text()
    records, ok = [], True
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            if "==" in body:
                lhs, rhs = (sym.parse(part, args.N) for part in body.split("==", 1))
                equal = lhs == rhs
                ok = ok and equal
                records.append({"line": lineno, "lhs": str(lhs), "rhs": str(rhs), "equal": equal})
                print(f"{lineno}: {lhs}  {'==' if equal else '!='}  {rhs}")
            else:
                x = sym.parse(body, args.N)
                records.append({"line": lineno, "normal_form": str(x)})
                print(f"{lineno}: {x}")
        except sym.ParseError as exc:
            print(f"{args.file}:{lineno}: {exc}", file=sys.stderr)
            return 2
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"symbolic-{Path(args.file).stem}.json").write_text(json.dumps(records, indent=2, sort_keys=True) + "\n")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cuntzkit", description="Cuntz families implementing Koopman endomorphisms: build and verify.")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply every tolerance by this factor")
        sp.add_argument("--out", default=None, help=f"report directory (default: config output dir, or ${OUT_ENV}/<name>)")

    r = sub.add_parser("run", help="run every stage of a config")
    r.add_argument("config", help="config path or shipped config name")
    common(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("study", help="defect of one check across truncations")
    s.add_argument("config")
    s.add_argument("--check", required=True, help="e.g. check_implements, check_cuntz")
    s.add_argument("--over", choices=("size", "nodes"), default="size")
    s.add_argument("--values", default=None, help="comma separated sizes or node counts")
    common(s)
    s.set_defaults(func=cmd_study)

    y = sub.add_parser("symbolic", help="normal forms of O_N expressions in a file")
    y.add_argument("file")
    y.add_argument("--N", type=int, default=2)
    common(y)
    y.set_defaults(func=cmd_symbolic)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
