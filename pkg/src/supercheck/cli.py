"""Command-line front end.

Subcommands: ``run`` evaluates an entry call on concrete data (natively
or through the bundled interpreter), ``encode`` prints a program's data
encoding, ``supercompile`` prints the residual of a parametric entry
template, ``verify`` reports Safe/NotShownSafe for the safety check,
and ``lint`` runs the static program checks.

Exit codes: 0 success/Safe, 1 NotShownSafe or lint issues, 2 usage,
parse, or input errors, 3 budget exhausted.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import driver, semantics
from .driver import build_graph, graph_to_json
from .encoding import EncodingError, encode_program
from .residual import residualize
from .selfint import interpret_call
from .semantics import (DEFAULT_STEP_BUDGET, BottomError, expr_to_value,
                        render_value, run_call)
from .syntax import ParseError, Program, lint_program, parse_expr, \
    parse_program, render_program
from .verify import VerifyError, verify_program, result_summary

EXIT_OK = 0
EXIT_UNSAFE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load_program(path: str) -> Program:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _Failure(EXIT_USAGE, f"cannot read {path}: {exc}")
    try:
        return parse_program(text)
    except ParseError as exc:
        raise _Failure(EXIT_USAGE, f"{path}: {exc}")


def _entry_template(prog: Program, entry: str | None) -> tuple:
    """verify accepts --entry as a bare function name or a template."""
    if entry is None:
        return "Main", None
    if "(" in entry:
        return None, entry
    return entry, None


def _cmd_run(args) -> int:
    prog = _load_program(args.file)
    try:
        data = expr_to_value(parse_expr(args.data))
    except (ParseError, ValueError) as exc:
        raise _Failure(EXIT_USAGE, f"bad --data expression: {exc}")
    try:
        if args.via_interpreter:
            value = interpret_call(prog, Path(args.file).stem, args.entry,
                                   data, budget_limit=args.budget)
        else:
            value = run_call(prog, args.entry, [data],
                             budget_limit=args.budget)
    except BottomError:
        print("Bottom")
        return EXIT_OK
    except KeyError as exc:
        raise _Failure(EXIT_USAGE, f"no such function: {exc}")
    print(render_value(value))
    return EXIT_OK


def _cmd_encode(args) -> int:
    prog = _load_program(args.file)
    try:
        encoded = encode_program(prog)
    except EncodingError as exc:
        raise _Failure(EXIT_USAGE, f"{args.file}: {exc}")
    print(render_value(encoded))
    return EXIT_OK


def _cmd_supercompile(args) -> int:
    prog = _load_program(args.file)
    from .config import template_to_seq
    from .verify import _entry_call
    try:
        root_seq = template_to_seq(args.entry)
        entry, patterns = _entry_call(root_seq)
    except (ParseError, VerifyError) as exc:
        raise _Failure(EXIT_USAGE, f"bad --entry template: {exc}")
    root, _ = build_graph(prog, root_seq, max_nodes=args.budget)
    if args.graph:
        Path(args.graph).write_text(graph_to_json(root))
    print(render_program(residualize(root, entry, patterns)), end="")
    return EXIT_OK


def _cmd_verify(args) -> int:
    prog = _load_program(args.file)
    entry, template = _entry_template(prog, args.entry)
    try:
        result = verify_program(
            prog, entry=entry or "Main", template=template,
            via_interpreter=args.via_interpreter,
            prog_name=Path(args.file).stem, rounds=args.rounds,
            max_nodes=args.budget)
    except (VerifyError, EncodingError) as exc:
        raise _Failure(EXIT_USAGE, str(exc))
    print(result_summary(result))
    if args.emit_residual:
        Path(args.emit_residual).write_text(render_program(result.residual))
    if args.graph:
        Path(args.graph).write_text(graph_to_json(result.root))
    if args.report_dir:
        from .report import write_report
        for path in write_report(result, args.report_dir):
            print(f"wrote {path}")
    return EXIT_OK if result.safe else EXIT_UNSAFE


def _cmd_lint(args) -> int:
    prog = _load_program(args.file)
    issues = lint_program(prog)
    for issue in issues:
        print(issue)
    return EXIT_UNSAFE if issues else EXIT_OK


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="supercheck",
        description="Supercompilation-based safety checks for "
                    "sequence-rewriting programs.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate an entry call on given data")
    p.add_argument("file")
    p.add_argument("--entry", default="Main")
    p.add_argument("--data", required=True,
                   help="argument value in concrete expression syntax")
    p.add_argument("--budget", type=int, default=DEFAULT_STEP_BUDGET,
                   help="step budget")
    p.add_argument("--via-interpreter", action="store_true",
                   help="run through the bundled interpreter")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("encode", help="print the program's data encoding")
    p.add_argument("file")
    p.set_defaults(fn=_cmd_encode)

    p = sub.add_parser("supercompile",
                       help="print the residual of a parametric entry")
    p.add_argument("file")
    p.add_argument("--entry", required=True,
                   help='entry template, e.g. "Main(e.d)"')
    p.add_argument("--graph", help="write the process graph (scpgraph-v1)")
    p.add_argument("--budget", type=int, default=driver.DEFAULT_MAX_NODES,
                   help="node budget")
    p.set_defaults(fn=_cmd_supercompile)

    p = sub.add_parser("verify", help="prove the model never returns False")
    p.add_argument("file")
    p.add_argument("--entry",
                   help="entry function name or template (default Main)")
    p.add_argument("--via-interpreter", action="store_true",
                   help="verify the encoded model through the interpreter")
    p.add_argument("--rounds", type=int, default=1,
                   help="maximum supercompilation rounds (default 1)")
    p.add_argument("--budget", type=int, default=driver.DEFAULT_MAX_NODES,
                   help="node budget per round")
    p.add_argument("--emit-residual", metavar="OUT.L",
                   help="write the final residual program")
    p.add_argument("--graph", metavar="OUT",
                   help="write the final process graph (scpgraph-v1)")
    p.add_argument("--report-dir", metavar="DIR",
                   help="write summary.csv, figures, and report.txt")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("lint", help="static checks on a program")
    p.add_argument("file")
    p.set_defaults(fn=_cmd_lint)
    return top


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except _Failure as exc:
        print(f"supercheck: {exc}", file=sys.stderr)
        return exc.code
    except (driver.BudgetExceeded, semantics.BudgetExceeded) as exc:
        print(f"supercheck: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
