"""Call-by-value rewriting semantics.

Values are flat tuples of value terms; a value term is either an
interned string ``"i<text>"`` / ``"c<text>"`` (identifier or character
symbol) or a tuple (a parenthesised value).  Evaluation is strict and
leftmost-innermost; rules are tried in order and the first match wins.
When no rule of the called function matches - or the called function
does not exist, as can happen in residual programs whose impossible
branches were pruned - the computation is stuck, modelled by
:class:`BottomError`.

The step budget counts rule applications.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .syntax import (Append, Call, Cons, EVar, Expr, Nil, Paren, Pattern,
                     PConsP, PConsS, PConsSym, PEVar, PNil, Program, Rule,
                     SVar, Sym)

VTerm = str | tuple
Value = tuple  # tuple[VTerm, ...]


class BottomError(Exception):
    """The computation got stuck: no rule matched a call."""


class BudgetExceeded(Exception):
    """The rule-application budget ran out."""


@dataclass
class Budget:
    limit: int
    used: int = 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise BudgetExceeded(f"step budget of {self.limit} exhausted")


def sym_term(sym: Sym) -> str:
    return ("i" if sym.kind == "id" else "c") + sym.text


def term_sym(vt: str) -> Sym:
    return Sym("id" if vt[0] == "i" else "ch", vt[1:])


def expr_to_value(expr: Expr) -> Value:
    """Convert a ground, call-free expression (external data) to a value."""
    out: list[VTerm] = []
    while True:
        if isinstance(expr, Nil):
            return tuple(out)
        if isinstance(expr, Cons):
            head = expr.head
            if isinstance(head, Sym):
                out.append(sym_term(head))
            elif isinstance(head, Paren):
                out.append(expr_to_value(head.exp))
            else:
                raise ValueError("variables are not allowed in data")
            expr = expr.tail
            continue
        raise ValueError("data must be a ground, call-free expression")


def value_to_expr(value: Value) -> Expr:
    expr: Expr = Nil()
    for vt in reversed(value):
        head = term_sym(vt) if isinstance(vt, str) else Paren(value_to_expr(vt))
        expr = Cons(head, expr)
    return expr


def render_value(value: Value) -> str:
    from .syntax import render_expr
    return render_expr(value_to_expr(value))


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

def match_pattern(pat: Pattern, value: Value, env: dict[str, object]) -> bool:
    """Deterministic left-to-right matching; e-variables close sequences
    so no backtracking is ever needed.  Repeated variables must bind
    equal values.  ``env`` is updated in place and may hold partial
    bindings after a failed match."""
    pos = 0
    while True:
        if isinstance(pat, PNil):
            return pos == len(value)
        if isinstance(pat, PEVar):
            rest = value[pos:]
            prev = env.get(pat.name)
            if prev is None:
                env[pat.name] = rest
                return True
            return prev == rest
        if pos == len(value):
            return False
        head = value[pos]
        if isinstance(pat, PConsS):
            if not isinstance(head, str):
                return False
            prev = env.get(pat.name)
            if prev is None:
                env[pat.name] = head
            elif prev != head:
                return False
        elif isinstance(pat, PConsSym):
            if head != sym_term(pat.sym):
                return False
        else:  # PConsP
            if not isinstance(head, tuple):
                return False
            if not match_pattern(pat.inner, head, env):
                return False
        pos += 1
        pat = pat.rest


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def eval_expr(expr: Expr, env: dict[str, object], prog: Program, budget: Budget) -> Value:
    out: list[VTerm] = []
    _eval_into(expr, env, prog, budget, out)
    return tuple(out)


def _eval_into(expr: Expr, env: dict[str, object], prog: Program,
               budget: Budget, out: list[VTerm]) -> None:
    while True:
        if isinstance(expr, Nil):
            return
        if isinstance(expr, EVar):
            out.extend(env[expr.name])
            return
        if isinstance(expr, Cons):
            head = expr.head
            if isinstance(head, Sym):
                out.append(sym_term(head))
            elif isinstance(head, SVar):
                out.append(env[head.name])
            else:
                sub: list[VTerm] = []
                _eval_into(head.exp, env, prog, budget, sub)
                out.append(tuple(sub))
            expr = expr.tail
            continue
        if isinstance(expr, Append):
            _eval_into(expr.left, env, prog, budget, out)
            expr = expr.right
            continue
        # Call: evaluate arguments left to right, then apply.
        args = [eval_expr(a, env, prog, budget) for a in expr.args]
        out.extend(apply_function(expr.fname, args, prog, budget))
        return


def apply_function(fname: str, args: list[Value], prog: Program, budget: Budget) -> Value:
    fdef = prog.get(fname)
    if fdef is None:
        raise BottomError(f"no function {fname}")
    if len(args) != fdef.arity:
        raise BottomError(f"{fname} expects {fdef.arity} argument(s), got {len(args)}")
    for rule in fdef.rules:
        env: dict[str, object] = {}
        if _match_all(rule.patterns, args, env):
            budget.tick()
            return eval_expr(rule.body, env, prog, budget)
    raise BottomError(f"no rule of {fname} matches")


def _match_all(patterns: tuple[Pattern, ...], args: list[Value], env: dict[str, object]) -> bool:
    return all(match_pattern(p, a, env) for p, a in zip(patterns, args))


DEFAULT_STEP_BUDGET = 1_000_000


def run_call(prog: Program, fname: str, args: list[Value],
             budget_limit: int = DEFAULT_STEP_BUDGET) -> Value:
    """Evaluate ``fname(args...)``; deep recursions are executed on a
    dedicated large-stack thread."""
    budget = Budget(budget_limit)

    def work():
        return apply_function(fname, args, prog, budget)

    return call_with_big_stack(work)


def run_outcome(prog: Program, fname: str, args: list[Value],
                budget_limit: int = DEFAULT_STEP_BUDGET) -> tuple[str, Value | None]:
    """Like :func:`run_call` but folds stuckness into the result:
    returns ("value", v) or ("bottom", None).  Budget overruns still
    raise."""
    try:
        return ("value", run_call(prog, fname, args, budget_limit))
    except BottomError:
        return ("bottom", None)


_BIG_STACK_BYTES = 512 * 1024 * 1024
_RECURSION_LIMIT = 400_000


def call_with_big_stack(fn):
    """Run ``fn`` on a thread with a large stack, propagating the result
    or exception.  Interpreted runs nest Python frames proportionally to
    the rewriting depth, which overflows default limits."""
    result: list[object] = []
    error: list[BaseException] = []

    def runner():
        import sys
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(_RECURSION_LIMIT)
        try:
            result.append(fn())
        except BaseException as exc:  # noqa: BLE001 - propagated below
            error.append(exc)
        finally:
            sys.setrecursionlimit(old)

    old_size = threading.stack_size(_BIG_STACK_BYTES)
    try:
        thread = threading.Thread(target=runner, name="supercheck-eval")
        thread.start()
        thread.join()
    finally:
        threading.stack_size(old_size)
    if error:
        raise error[0]
    return result[0]
