"""Command line: ``sap gen | solve | cert | bench``.

Every subcommand writes to ``--out`` (default: stdout).  ``--format``
chooses CSV or JSON where both make sense.  Output is deterministic for
fixed seeds unless ``--timing`` is given.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .core import (InputError, RefusalError, dumps, instance_from_dict, placement_to_dict,
                   profit)
from .generate import KINDS, GenSpec, generate_instance, generated_to_dict
from .oracle import OracleLimits
from .portfolio import (ALGOS, PortfolioConfig, compare_with_oracle, rows_to_csv, rows_to_json,
                        run_portfolio)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _algos(text: str) -> tuple[str, ...]:
    names = tuple(a.strip() for a in text.split(",") if a.strip())
    if names == ("all",):
        return ALGOS
    bad = [a for a in names if a not in ALGOS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown algorithms {bad}; choose from {ALGOS}")
    return names


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _knobs(pairs: Sequence[str]) -> dict:
    knobs = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise InputError(f"knob {pair!r} must look like key=value")
        knobs[key] = value if not value.lstrip("-").isdigit() else int(value)
    return knobs


def _config(args) -> PortfolioConfig:
    return PortfolioConfig(algos=args.algo, epsilon=args.epsilon, beta=args.beta, seed=args.seed,
                           oracle=not getattr(args, "no_oracle", False),
                           limits=OracleLimits(max_tasks=args.oracle_tasks),
                           timing=args.timing, workers=getattr(args, "workers", 1))


def cmd_gen(args) -> int:
    spec = GenSpec(args.kind, n=args.n, m=args.m, U=args.U, seed=args.seed,
                   knobs=_knobs(args.knob))
    _emit(dumps(generated_to_dict(generate_instance(spec))) + "\n", args.out)
    return 0


def cmd_solve(args) -> int:
    data = json.loads(Path(args.instance).read_text(encoding="utf-8"))
    instance = instance_from_dict(data["instance"] if "instance" in data else data)
    best, rows = run_portfolio(instance, _config(args), Path(args.instance).stem)
    if args.format == "csv":
        _emit(rows_to_csv(rows), args.out)
    else:
        payload = placement_to_dict(best)
        payload["profit"] = profit(instance, best)
        payload["rows"] = json.loads(rows_to_json(rows))["rows"]
        _emit(json.dumps(payload, indent=1) + "\n", args.out)
    return 0


def cmd_cert(args) -> int:
    from .certlp import VARIANTS, verify_certificates

    variants = VARIANTS if args.variant == "all" else (args.variant,)
    reports = [verify_certificates(v, args.alpha) for v in variants]
    if args.format == "csv":
        lines = ["variant,check,passed"]
        for rep in reports:
            lines += [f"{rep.variant},{name},{'PASS' if ok else 'FAIL'}"
                      for name, ok in rep.checks.items()]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        body = [r.to_dict() for r in reports]
        _emit(json.dumps(body[0] if len(body) == 1 else body, indent=1) + "\n", args.out)
    return 0 if all(r.ok for r in reports) or not args.strict else 1


def cmd_bench(args) -> int:
    batch = []
    for k in range(args.count):
        spec = GenSpec(args.suite, n=args.n, m=args.m, U=args.U, seed=args.seed + k)
        batch.append((f"{args.suite}-{args.seed + k}", generate_instance(spec).instance))
    rows = compare_with_oracle(batch, _config(args))
    text = rows_to_csv(rows) if args.format == "csv" else rows_to_json(rows)
    _emit(text, args.out)
    if args.figures:
        from .plots import write_figures

        write_figures(rows, dict(batch), args.figures)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    # default resolved per command: bench writes CSV, the rest JSON
    common.add_argument("--format", choices=("csv", "json"), default=None)

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--algo", type=_algos, default=ALGOS,
                        help="comma-separated subset of " + ",".join(ALGOS) + " or 'all'")
    solver.add_argument("--epsilon", type=_fraction, default=Fraction(1, 8))
    solver.add_argument("--beta", type=int, default=2)
    solver.add_argument("--oracle-tasks", type=int, default=10,
                        help="largest instance the exact oracle accepts")
    solver.add_argument("--timing", action="store_true", help="fill the ms column")

    parser = argparse.ArgumentParser(prog="sap", description="Storage allocation toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate an instance")
    g.add_argument("--kind", choices=KINDS, default="uniform-random")
    g.add_argument("--n", type=int, default=6)
    g.add_argument("--m", type=int, default=5)
    g.add_argument("--U", type=int, default=None)
    g.add_argument("--knob", action="append", default=[], help="kind-specific key=value")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", parents=[common, solver], help="run the portfolio")
    s.add_argument("--instance", required=True, help="instance JSON (or `sap gen` output)")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("cert", parents=[common], help="check the structural LP certificates")
    c.add_argument("--variant", choices=("stair_high", "stair_low", "uniform", "all"),
                   default="all")
    c.add_argument("--alpha", type=_fraction, default=Fraction(833, 100))
    c.add_argument("--strict", action="store_true", help="exit 1 if any check fails")
    c.set_defaults(func=cmd_cert)

    b = sub.add_parser("bench", parents=[common, solver], help="portfolio vs oracle on a suite")
    b.add_argument("--suite", choices=KINDS, default="uniform-random")
    b.add_argument("--count", type=int, default=10)
    b.add_argument("--n", type=int, default=7)
    b.add_argument("--m", type=int, default=5)
    b.add_argument("--U", type=int, default=None)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--no-oracle", action="store_true")
    b.add_argument("--figures", default=None, metavar="DIR",
                   help="also write PNG figures to DIR (needs matplotlib)")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "bench" else "json"
    try:
        return args.func(args)
    except (InputError, RefusalError, OSError, ValueError) as exc:
        print(f"sap: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
