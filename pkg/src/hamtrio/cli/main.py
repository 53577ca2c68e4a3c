"""Command-line entry point: ``hamtrio COMMAND ...`` (exit 0 pass, 1 fail, 2 usage error)."""

from __future__ import annotations

import argparse
import sys

from ..errors import HamtrioError, ParseError
from . import commands
from .commands import Library, UsageError


def _common(default) -> argparse.ArgumentParser:
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--format", choices=("text", "json"), default=default)
    c.add_argument("--file", "-f", action="append", default=[] if default != argparse.SUPPRESS else default,
                   help="definition file searched before the shipped examples (repeatable)")
    return c


def build_parser() -> argparse.ArgumentParser:
    # the options are accepted before or after the subcommand
    p = argparse.ArgumentParser(prog="hamtrio", description="Exact checks for trios of KdV type.",
                                parents=[_common("text")])
    leaf = _common(argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    def add_parser(subs, name, **kw):
        return subs.add_parser(name, parents=[leaf], **kw)

    check = sub.add_parser("check", help="check one operator, a pair, or a pair of metrics")
    csub = check.add_subparsers(dest="what", required=True)
    c = add_parser(csub, "hamiltonian")
    c.add_argument("name")
    c = add_parser(csub, "compatible")
    c.add_argument("first")
    c.add_argument("second")
    c = add_parser(csub, "flat-pencil")
    c.add_argument("g")
    c.add_argument("h")

    v = add_parser(sub, "verify", help="re-derive a classification result or an example")
    v.add_argument("target", help="theorem1..theorem4 or example41..example47")
    v.add_argument("--samples", type=int, default=10)
    v.add_argument("--seed", type=int, default=0)

    s = add_parser(sub, "search", help="ansatz search for first-order operators")
    s.add_argument("kind", choices=("ansatz",))
    s.add_argument("--operator", required=True, help="R2, R3_1, R3_2 or R3_3")

    fl = add_parser(sub, "flows", help="first flows (P1 + eps^2 R) dC of a trio")
    fl.add_argument("trio")
    fl.add_argument("--casimir", required=True)
    fl.add_argument("--eps", default=None, help="value of eps; symbolic when omitted")

    ci = add_parser(sub, "central-invariants", help="central invariants of the pencil of a trio")
    ci.add_argument("trio")
    ci.add_argument("--samples", type=int, default=10)
    ci.add_argument("--seed", type=int, default=0)
    ci.add_argument("--domain", default=None, help="lo1,hi1,lo2,hi2")
    ci.add_argument("--pencil", choices=("trio", "magri"), default="trio",
                    help="trio: -(P1 + eps^2 R) - lam Q1; magri: P1 + eps^2 R - lam Q1")
    return p


def dispatch(args) -> "commands.Report":
    lib = Library(args.file)
    if args.command == "check":
        if args.what == "hamiltonian":
            return commands.check_hamiltonian(lib, args.name)
        if args.what == "compatible":
            return commands.check_compatible(lib, args.first, args.second)
        return commands.check_flat_pencil(lib, args.g, args.h)
    if args.command == "verify":
        t = args.target.lower()
        if t.startswith("theorem") and t[7:] in ("1", "2", "3", "4"):
            return commands.verify_theorem(int(t[7:]))
        if t.startswith("example") and t[7:].isdigit():
            return commands.verify_example(int(t[7:]), args.samples, args.seed)
        raise UsageError(f"unknown target {args.target!r}")
    if args.command == "search":
        return commands.search_ansatz(args.operator)
    if args.command == "flows":
        return commands.flows(lib, args.trio, args.casimir, args.eps)
    return commands.invariants(lib, args.trio, args.samples, args.seed,
                               commands.parse_domain(args.domain), args.pencil)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        report = dispatch(args)
    except (UsageError, ParseError, OSError, ValueError) as exc:
        print(f"hamtrio: error: {exc}", file=sys.stderr)
        return 2
    except HamtrioError as exc:
        print(f"hamtrio: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(report.to_json() if args.format == "json" else report.to_text())
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
