"""Safety verification: specialize away the input and look for ``False``.

A model signals a safety violation by rewriting to the identifier
``False``.  Supercompiling the model's entry call over fully parametric
input yields a residual program covering every reachable behaviour; if
no residual right-hand side mentions ``False``, no input can reach it,
and the model is reported Safe.  The check runs either directly on the
model or on the bundled interpreter specialized to the encoded model
(``via_interpreter``), optionally for several rounds — each round
re-supercompiles the previous residual, which can erase unreachable
``False`` sites the earlier round left syntactically present.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .config import Seq, template_to_seq
from .driver import (DEFAULT_MAX_DEPTH, DEFAULT_MAX_NODES, Node, Trace,
                     build_graph, iter_nodes)
from .residual import residualize, seq_to_pattern
from .selfint import build_interpreted, int_root_seq
from .syntax import (Program, Sym, bodies_mention_symbol,
                     program_mentions_symbol, render_program)

UNSAFE_SYMBOL = Sym("id", "False")
VIA_ENTRY = "Spec"


class VerifyError(Exception):
    """A malformed verification request (bad entry or template)."""


@dataclass
class RoundStats:
    number: int
    nodes: int          # nodes in the finished graph
    allocated: int      # nodes created, discarded attempts included
    seconds: float
    folds: int
    lateral_folds: int
    gens: int
    splits: int
    veto_continues: int
    msg_failures: int
    elided: int
    functions: int
    rules: int
    rhs_unsafe: bool
    anywhere_unsafe: bool


@dataclass
class VerifyResult:
    verdict: str                      # "Safe" | "NotShownSafe"
    mode: str                         # "direct" | "via-interpreter"
    entry: str                        # entry function of the residual
    residual: Program
    root: Node                        # last round's graph
    trace: Trace                      # last round's trace
    rounds: list[RoundStats] = field(default_factory=list)

    @property
    def safe(self) -> bool:
        return self.verdict == "Safe"


def _entry_call(root_seq: Seq):
    if len(root_seq) != 1 or isinstance(root_seq[0], str) or \
            root_seq[0][0] != "call":
        raise VerifyError("the entry template must be a single call")
    _, fname, args = root_seq[0]
    return fname, tuple(seq_to_pattern(a) for a in args)


def _round(program: Program, root_seq: Seq, entry: str, patterns,
           max_nodes: int, max_depth: int, number: int,
           lateral: bool) -> tuple[Program, Node, Trace, RoundStats]:
    t0 = time.time()
    root, trace = build_graph(program, root_seq, max_nodes=max_nodes,
                              max_depth=max_depth, lateral=lateral)
    residual = residualize(root, entry, patterns)
    stats = RoundStats(
        number=number,
        nodes=sum(1 for _ in iter_nodes(root)),
        allocated=max((n.id for n in iter_nodes(root)), default=0),
        seconds=time.time() - t0,
        folds=trace.folds,
        lateral_folds=trace.lateral_folds,
        gens=trace.gens,
        splits=trace.splits,
        veto_continues=trace.veto_continues,
        msg_failures=trace.msg_failures,
        elided=trace.elided,
        functions=sum(1 for _ in residual),
        rules=sum(len(d.rules) for d in residual),
        rhs_unsafe=bodies_mention_symbol(residual, UNSAFE_SYMBOL),
        anywhere_unsafe=program_mentions_symbol(residual, UNSAFE_SYMBOL),
    )
    return residual, root, trace, stats


def verify_program(prog: Program, entry: str = "Main",
                   via_interpreter: bool = False, prog_name: str = "model",
                   rounds: int = 1, template: str | None = None,
                   max_nodes: int = DEFAULT_MAX_NODES,
                   max_depth: int = DEFAULT_MAX_DEPTH,
                   lateral: bool = True) -> VerifyResult:
    """Supercompile the model's parametric entry and test the residual
    for the unsafe identifier.  ``rounds`` bounds how many times a
    still-unsafe residual is re-supercompiled."""
    if via_interpreter:
        if template is not None:
            raise VerifyError(
                "a custom template only applies to direct verification")
        program = build_interpreted(prog, prog_name)
        root_seq = int_root_seq(entry, prog_name)
        res_entry, res_patterns = VIA_ENTRY, _entry_call(
            template_to_seq(f"{VIA_ENTRY}(e.d)"))[1]
        mode = "via-interpreter"
    else:
        if template is None:
            if entry not in prog.by_name:
                raise VerifyError(f"no function {entry} in the program")
            arity = prog.by_name[entry].arity
            args = ", ".join(f"e.d{i + 1}" for i in range(arity))
            template = f"{entry}({args})"
        root_seq = template_to_seq(template)
        res_entry, res_patterns = _entry_call(root_seq)
        if res_entry not in prog.by_name:
            raise VerifyError(f"no function {res_entry} in the program")
        program = prog
        mode = "direct"

    all_rounds: list[RoundStats] = []
    residual, root, trace, stats = _round(
        program, root_seq, res_entry, res_patterns,
        max_nodes, max_depth, 1, lateral)
    all_rounds.append(stats)
    args = ", ".join(f"e.d{i + 1}" for i in range(len(res_patterns)))
    again_seq = template_to_seq(f"{res_entry}({args})")
    again_patterns = _entry_call(again_seq)[1]
    for number in range(2, rounds + 1):
        if not all_rounds[-1].rhs_unsafe:
            break
        residual, root, trace, stats = _round(
            residual, again_seq, res_entry, again_patterns,
            max_nodes, max_depth, number, lateral)
        all_rounds.append(stats)

    verdict = "NotShownSafe" if all_rounds[-1].rhs_unsafe else "Safe"
    return VerifyResult(verdict=verdict, mode=mode, entry=res_entry,
                        residual=residual, root=root, trace=trace,
                        rounds=all_rounds)


def result_summary(result: VerifyResult) -> str:
    lines = [f"verdict: {result.verdict}",
             f"mode: {result.mode}",
             f"entry: {result.entry}"]
    for r in result.rounds:
        lines.append(
            f"round {r.number}: {r.nodes} nodes in {r.seconds:.2f}s; "
            f"folds={r.folds}+{r.lateral_folds} gens={r.gens} "
            f"splits={r.splits}; residual {r.functions} functions / "
            f"{r.rules} rules; unsafe rhs: {'yes' if r.rhs_unsafe else 'no'}"
            f" (anywhere: {'yes' if r.anywhere_unsafe else 'no'})")
    return "\n".join(lines)
