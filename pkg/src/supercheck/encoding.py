"""Programs and data as first-class values.

The encodable fragment is deliberately small: every function is unary
and bodies never use ``++``.  Encoding maps syntax onto values:

* a symbol encodes as itself;
* a parenthesised term ``(q)`` encodes as ``('*' q*)``;
* a variable encodes as ``(Var 'e' name)`` / ``(Var 's' name)``;
* a call ``f(q)`` encodes (in program bodies only) as ``(Call f q*)``;
* a rule ``p => q`` encodes as the element ``((p*) '=' (q*))``;
* a function encodes as ``(name rule* ...)``;
* a program encodes as the parenthesised list of its functions.

Because the three marker symbols (``Var``, ``Call``, ``'*'``) only ever
occur as the head of an encoding-produced parenthesis, and every
encoded data parenthesis is ``'*'``-headed, the map is injective and
the image of data encoding is a proper subset of all values: any
parenthesis not headed by ``'*'`` is outside it.
"""

from __future__ import annotations

from .syntax import (Append, Call, Cons, EVar, Expr, FunDef, Nil, Paren,
                     Pattern, PConsSym, PNil, Program, Rule, Sym, SVar,
                     expr_to_pattern, pattern_to_expr)
from .semantics import Value, VTerm, sym_term, term_sym

STAR = "c*"
VAR = "iVar"
CALL = "iCall"
EQUALS = "c="
SORT_E = "ce"
SORT_S = "cs"


class EncodingError(Exception):
    """The program steps outside the encodable fragment."""


class NotInImage(Exception):
    """A value is not the encoding of any data value."""


# ---------------------------------------------------------------------------
# Data values
# ---------------------------------------------------------------------------

def encode_value(value: Value) -> Value:
    """Encode ground data: symbols stay, parens get a ``'*'`` head."""
    return tuple(vt if isinstance(vt, str) else (STAR, *encode_value(vt))
                 for vt in value)


def decode_value(value: Value) -> Value:
    """Invert :func:`encode_value`; raises NotInImage off the image."""
    out: list[VTerm] = []
    for vt in value:
        if isinstance(vt, str):
            out.append(vt)
        elif vt and vt[0] == STAR:
            out.append(decode_value(vt[1:]))
        else:
            raise NotInImage(f"parenthesis not headed by '*': {vt!r}")
    return tuple(out)


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------

def encode_expr(expr: Expr) -> Value:
    """Encode a rule body from the unary, append-free fragment."""
    out: list[VTerm] = []
    while True:
        if isinstance(expr, Nil):
            return tuple(out)
        if isinstance(expr, EVar):
            out.append((VAR, SORT_E, "i" + expr.name))
            return tuple(out)
        if isinstance(expr, Call):
            if len(expr.args) != 1:
                raise EncodingError(f"only unary calls are encodable: {expr.fname}")
            out.append((CALL, "i" + expr.fname, *encode_expr(expr.args[0])))
            return tuple(out)
        if isinstance(expr, Append):
            raise EncodingError("'++' is not encodable")
        head = expr.head
        if isinstance(head, Sym):
            out.append(sym_term(head))
        elif isinstance(head, SVar):
            out.append((VAR, SORT_S, "i" + head.name))
        else:
            out.append((STAR, *encode_expr(head.exp)))
        expr = expr.tail


def encode_pattern(pat: Pattern) -> Value:
    return encode_expr(pattern_to_expr(pat))


def encode_rule(rule: Rule) -> VTerm:
    if len(rule.patterns) != 1:
        raise EncodingError(f"only unary functions are encodable: {rule.fname}")
    return (encode_pattern(rule.patterns[0]), EQUALS, encode_expr(rule.body))


def encode_fundef(fdef: FunDef) -> VTerm:
    return ("i" + fdef.name, *[encode_rule(r) for r in fdef.rules])


def encode_program(prog: Program) -> Value:
    """The whole program as one parenthesised value."""
    return (tuple(encode_fundef(d) for d in prog),)


# ---------------------------------------------------------------------------
# Decoding programs (used by round-trip checks)
# ---------------------------------------------------------------------------

def decode_expr(value: Value) -> Expr:
    expr: Expr = Nil()
    for vt in reversed(value):
        if isinstance(vt, str):
            expr = Cons(term_sym(vt), expr)
        elif vt and vt[0] == VAR:
            sort, name = vt[1], vt[2]
            if sort == SORT_E:
                if not isinstance(expr, Nil):
                    raise NotInImage("sequence variable before the end of a sequence")
                expr = EVar(name[1:])
            else:
                expr = Cons(SVar(name[1:]), expr)
        elif vt and vt[0] == CALL:
            if not isinstance(expr, Nil):
                raise NotInImage("call element before the end of a sequence")
            expr = Call(vt[1][1:], (decode_expr(tuple(vt[2:])),))
        elif vt and vt[0] == STAR:
            expr = Cons(Paren(decode_expr(tuple(vt[1:]))), expr)
        else:
            raise NotInImage(f"unmarked parenthesis: {vt!r}")
    return expr


def decode_program(value: Value) -> Program:
    if len(value) != 1 or not isinstance(value[0], tuple):
        raise NotInImage("a program encoding is a single parenthesis")
    defs = []
    for entry in value[0]:
        if not (isinstance(entry, tuple) and entry and isinstance(entry[0], str)):
            raise NotInImage("bad function entry")
        name = entry[0][1:]
        rules = []
        for relem in entry[1:]:
            if not (isinstance(relem, tuple) and len(relem) == 3 and relem[1] == EQUALS
                    and isinstance(relem[0], tuple) and isinstance(relem[2], tuple)):
                raise NotInImage("bad rule element")
            pat = expr_to_pattern(decode_expr(relem[0]))
            body = decode_expr(relem[2])
            rules.append(Rule(name, (pat,), body))
        defs.append(FunDef(name, tuple(rules)))
    return Program(tuple(defs))


# ---------------------------------------------------------------------------
# The synthesized lookup function and the interpreter entry value
# ---------------------------------------------------------------------------

PROG_FUNCTION = "Prog"


def make_prog_function(prog_name: str, prog: Program) -> FunDef:
    """``Prog(<name>) => <encoded functions>;`` - the interpreter looks
    programs up by name, which is what lets specialization treat the
    program as static."""
    entries = encode_program(prog)[0]
    body: Expr = Nil()
    for entry in reversed(entries):
        body = Cons(Paren(_value_expr(entry)), body)
    pattern = PConsSym(Sym("id", prog_name), PNil())
    return FunDef(PROG_FUNCTION, (Rule(PROG_FUNCTION, (pattern,), body),))


def _value_expr(value: Value) -> Expr:
    from .semantics import value_to_expr
    return value_to_expr(value)


def prog_ref(prog_name: str) -> VTerm:
    """The value naming a program: ``(Prog <name>)``."""
    return ("iProg", "i" + prog_name)


def encoded_call(fname: str, encoded_arg: Value) -> VTerm:
    """The value of an encoded call ``(Call f d*)``."""
    return (CALL, "i" + fname, *encoded_arg)
