"""Concrete syntax for the sequence-rewriting language.

A program is a list of functions, each a contiguous block of rewrite
rules ``Name(p1, ..., pn) => expr;``.  Expressions denote flat sequences
of terms; a term is a symbol or a parenthesised sequence.  Sequence
variables ``e.name`` stand for arbitrary subsequences, scalar variables
``s.name`` for single symbols.

Concrete-syntax conventions:

* ``:`` conses a single term onto the sequence to its right.
* Plain juxtaposition concatenates (``(Invalid I e.is)`` has three
  elements).
* ``++`` concatenates two sequence-valued expressions.
* ``[]`` is the empty sequence.
* An identifier immediately followed by ``(`` (no whitespace) is a
  function call; with whitespace it is a symbol followed by a
  parenthesised term.
* ``'x'`` is a character symbol; a longer quoted run like ``'ab'``
  abbreviates the two character symbols ``'a' 'b'``.
* ``//`` starts a line comment.

Patterns use the same surface syntax but may not contain calls or
``++``, and a sequence variable may only close a sequence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class ParseError(Exception):
    """Raised on malformed input; carries a 1-based source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Sym:
    """A symbol: an identifier word or a single character literal."""

    kind: str  # "id" | "ch"
    text: str

    def __str__(self) -> str:
        return self.text if self.kind == "id" else f"'{self.text}'"


@dataclass(frozen=True, slots=True)
class SVar:
    """Scalar variable term ``s.name``; matches exactly one symbol."""

    name: str


@dataclass(frozen=True, slots=True)
class Paren:
    """Parenthesised term wrapping a whole expression."""

    exp: "Expr"


Term = Sym | SVar | Paren


@dataclass(frozen=True, slots=True)
class Nil:
    """The empty sequence ``[]``."""


@dataclass(frozen=True, slots=True)
class EVar:
    """Sequence variable ``e.name`` used as an expression."""

    name: str


@dataclass(frozen=True, slots=True)
class Cons:
    """One term followed by the rest of the sequence."""

    head: Term
    tail: "Expr"


@dataclass(frozen=True, slots=True)
class Append:
    """Concatenation of two sequence-valued expressions."""

    left: "Expr"
    right: "Expr"


@dataclass(frozen=True, slots=True)
class Call:
    """Function application; arguments are expressions."""

    fname: str
    args: tuple["Expr", ...]


Expr = Nil | EVar | Cons | Append | Call

NIL = Nil()


def mk_append(left: Expr, right: Expr) -> Expr:
    """Concatenate, keeping the normal form: Append never has a Nil,
    Cons or Append on its left, and never a Nil on its right."""
    if isinstance(left, Nil):
        return right
    if isinstance(left, Cons):
        return Cons(left.head, mk_append(left.tail, right))
    if isinstance(left, Append):
        return mk_append(left.left, mk_append(left.right, right))
    if isinstance(right, Nil):
        return left
    return Append(left, right)


def normalize_append(expr: Expr) -> Expr:
    """Right-normal concatenation form, applied through the whole tree.

    The parser already builds this form; use this on programmatically
    constructed or decoded expressions.  Idempotent."""
    if isinstance(expr, Cons):
        head = expr.head
        if isinstance(head, Paren):
            head = Paren(normalize_append(head.exp))
        return Cons(head, normalize_append(expr.tail))
    if isinstance(expr, Append):
        return mk_append(normalize_append(expr.left),
                         normalize_append(expr.right))
    if isinstance(expr, Call):
        return Call(expr.fname, tuple(normalize_append(a) for a in expr.args))
    return expr


# Patterns: call-free, append-free; e-variables only in tail position.

@dataclass(frozen=True, slots=True)
class PNil:
    pass


@dataclass(frozen=True, slots=True)
class PEVar:
    name: str


@dataclass(frozen=True, slots=True)
class PConsS:
    name: str
    rest: "Pattern"


@dataclass(frozen=True, slots=True)
class PConsP:
    inner: "Pattern"
    rest: "Pattern"


@dataclass(frozen=True, slots=True)
class PConsSym:
    sym: Sym
    rest: "Pattern"


Pattern = PNil | PEVar | PConsS | PConsP | PConsSym


@dataclass(frozen=True, slots=True)
class Rule:
    fname: str
    patterns: tuple[Pattern, ...]
    body: Expr


@dataclass(frozen=True, slots=True)
class FunDef:
    name: str
    rules: tuple[Rule, ...]

    @property
    def arity(self) -> int:
        return len(self.rules[0].patterns)


class Program:
    """A parsed program: ordered function definitions plus an index."""

    def __init__(self, defs: tuple[FunDef, ...]):
        self.defs = defs
        self.by_name: dict[str, FunDef] = {d.name: d for d in defs}

    def __iter__(self):
        return iter(self.defs)

    def get(self, name: str) -> FunDef | None:
        return self.by_name.get(name)

    def extended(self, extra: "Program") -> "Program":
        """A new program with ``extra``'s functions appended."""
        clash = set(self.by_name) & set(extra.by_name)
        if clash:
            raise ValueError(f"duplicate functions: {sorted(clash)}")
        return Program(self.defs + extra.defs)

    def __eq__(self, other) -> bool:
        return isinstance(other, Program) and self.defs == other.defs

    def __repr__(self) -> str:
        return f"Program({[d.name for d in self.defs]})"


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>//[^\n]*)
    | (?P<evar>e\.[A-Za-z0-9_]+)
    | (?P<svar>s\.[A-Za-z0-9_]+)
    | (?P<ident>[A-Za-z0-9_]+)
    | (?P<chars>'[^'\n]+')
    | (?P<nil>\[\])
    | (?P<arrow>=>)
    | (?P<dplus>\+\+)
    | (?P<lp>\()
    | (?P<rp>\))
    | (?P<colon>:)
    | (?P<comma>,)
    | (?P<semi>;)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    col: int
    pos: int  # absolute offset, used for adjacency checks


def tokenize(src: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, pos - line_start + 1, pos))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, src: str):
        self.tokens = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            raise ParseError(f"expected {kind}, found {self.tok.text or 'end of input'!r}",
                             self.tok.line, self.tok.col)
        return self.advance()

    def fail(self, message: str):
        raise ParseError(message, self.tok.line, self.tok.col)

    # -- expressions --------------------------------------------------------

    def _at_unit(self) -> bool:
        return self.tok.kind in ("ident", "chars", "svar", "evar", "lp", "nil")

    def _call_ahead(self) -> bool:
        """True when the current identifier starts a call: ``Name(`` with
        no whitespace between the name and the parenthesis."""
        t = self.tok
        nxt = self.tokens[self.i + 1]
        return t.kind == "ident" and nxt.kind == "lp" and nxt.pos == t.pos + len(t.text)

    def parse_units(self, allow_calls: bool) -> Expr:
        """Parse a sequence of units joined by ``:``, ``++`` or adjacency."""
        if not self._at_unit():
            self.fail(f"expected an expression, found {self.tok.text or 'end of input'!r}")
        units: list[tuple[str, object]] = []  # ("term", Term) | ("expr", Expr)
        seps: list[str] = []  # connective after unit i: ":", "++", "juxt"
        while True:
            units.append(self.parse_unit(allow_calls))
            if self.tok.kind in ("colon", "dplus"):
                sep = ":" if self.tok.kind == "colon" else "++"
                if sep == "++" and not allow_calls:
                    self.fail("'++' is not allowed in patterns")
                self.advance()
                if not self._at_unit():
                    self.fail(f"expected an expression after {sep!r}")
                seps.append(sep)
            elif self._at_unit():
                seps.append("juxt")
            else:
                break
        # Fold right-to-left.
        expr = self._unit_expr(units[-1])
        for k in range(len(seps) - 1, -1, -1):
            sort, payload = units[k]
            sep = seps[k]
            if sep == ":" and sort == "expr":
                self.fail("the left operand of ':' must be a single term")
            if sort == "term":
                expr = Cons(payload, expr)
            else:  # "expr" under juxtaposition/"++", or a quoted run ("chexpr")
                expr = mk_append(payload, expr)
        return expr

    def _unit_expr(self, unit: tuple[str, object]) -> Expr:
        sort, payload = unit
        return Cons(payload, NIL) if sort == "term" else payload

    def parse_unit(self, allow_calls: bool) -> tuple[str, object]:
        t = self.tok
        if t.kind == "nil":
            self.advance()
            return ("expr", NIL)
        if t.kind == "evar":
            self.advance()
            return ("expr", EVar(t.text[2:]))
        if t.kind == "svar":
            self.advance()
            return ("term", SVar(t.text[2:]))
        if t.kind == "chars":
            run = t.text[1:-1]
            self.advance()
            if len(run) == 1:
                return ("term", Sym("ch", run))
            expr: Expr = NIL
            for ch in reversed(run):
                expr = Cons(Sym("ch", ch), expr)
            return ("chexpr", expr)
        if t.kind == "ident":
            if self._call_ahead():
                if not allow_calls:
                    self.fail("function calls are not allowed in patterns")
                name = self.advance().text
                self.expect("lp")
                args: list[Expr] = []
                if self.tok.kind != "rp":
                    args.append(self.parse_units(allow_calls=True))
                    while self.tok.kind == "comma":
                        self.advance()
                        args.append(self.parse_units(allow_calls=True))
                self.expect("rp")
                return ("expr", Call(name, tuple(args)))
            self.advance()
            return ("term", Sym("id", t.text))
        if t.kind == "lp":
            self.advance()
            inner = self.parse_units(allow_calls)
            self.expect("rp")
            return ("term", Paren(inner))
        self.fail(f"expected an expression, found {t.text or 'end of input'!r}")

    # -- rules and programs -------------------------------------------------

    def parse_rule(self) -> Rule:
        if not self._call_ahead():
            self.fail("expected a rule head like Name(...)")
        head = self.tok
        fname = self.advance().text
        self.expect("lp")
        patterns: list[Pattern] = []
        if self.tok.kind != "rp":
            patterns.append(self._parse_pattern())
            while self.tok.kind == "comma":
                self.advance()
                patterns.append(self._parse_pattern())
        self.expect("rp")
        self.expect("arrow")
        body = self.parse_units(allow_calls=True)
        self.expect("semi")
        bound: dict[str, str] = {}
        for p in patterns:
            pattern_vars(p, bound)
        for name, sort in expr_vars(body).items():
            if name not in bound:
                raise ParseError(
                    f"{fname}: {sort}.{name} is free in the right-hand side",
                    head.line, head.col)
        return Rule(fname, tuple(patterns), body)

    def _parse_pattern(self) -> Pattern:
        t = self.tok
        expr = self.parse_units(allow_calls=False)
        try:
            return expr_to_pattern(expr)
        except ValueError as exc:
            raise ParseError(str(exc), t.line, t.col) from None

    def parse_program(self) -> Program:
        rules: list[Rule] = []
        while self.tok.kind != "eof":
            rules.append(self.parse_rule())
        if not rules:
            self.fail("empty program")
        defs: list[FunDef] = []
        seen: set[str] = set()
        block: list[Rule] = [rules[0]]
        for rule in rules[1:]:
            if rule.fname == block[-1].fname:
                block.append(rule)
                continue
            defs.append(self._close_block(block, seen))
            block = [rule]
        defs.append(self._close_block(block, seen))
        return Program(tuple(defs))

    def _close_block(self, block: list[Rule], seen: set[str]) -> FunDef:
        name = block[0].fname
        if name in seen:
            raise ParseError(f"rules for {name} must be contiguous", 1, 1)
        seen.add(name)
        arities = {len(r.patterns) for r in block}
        if len(arities) != 1:
            raise ParseError(f"{name} used with mixed arities {sorted(arities)}", 1, 1)
        return FunDef(name, tuple(block))


def expr_to_pattern(expr: Expr) -> Pattern:
    """Reinterpret a call-free, append-free expression as a pattern."""
    if isinstance(expr, Nil):
        return PNil()
    if isinstance(expr, EVar):
        return PEVar(expr.name)
    if isinstance(expr, Cons):
        rest = expr_to_pattern(expr.tail)
        head = expr.head
        if isinstance(head, SVar):
            return PConsS(head.name, rest)
        if isinstance(head, Sym):
            return PConsSym(head, rest)
        return PConsP(expr_to_pattern(head.exp), rest)
    if isinstance(expr, Append):
        raise ValueError("'++' is not allowed in patterns")
    raise ValueError("function calls are not allowed in patterns")


def pattern_to_expr(pat: Pattern) -> Expr:
    """The embedding of patterns back into expressions."""
    if isinstance(pat, PNil):
        return NIL
    if isinstance(pat, PEVar):
        return EVar(pat.name)
    if isinstance(pat, PConsS):
        return Cons(SVar(pat.name), pattern_to_expr(pat.rest))
    if isinstance(pat, PConsSym):
        return Cons(pat.sym, pattern_to_expr(pat.rest))
    return Cons(Paren(pattern_to_expr(pat.inner)), pattern_to_expr(pat.rest))


def parse_program(src: str) -> Program:
    return _Parser(src).parse_program()


def parse_expr(src: str) -> Expr:
    p = _Parser(src)
    expr = p.parse_units(allow_calls=True)
    if p.tok.kind != "eof":
        p.fail(f"trailing input {p.tok.text!r}")
    return expr


# ---------------------------------------------------------------------------
# Renderer
# ---------------------------------------------------------------------------

def render_expr(expr: Expr) -> str:
    """Canonical textual form: colon-separated elements, ``: []`` tails
    omitted, parentheses only where the grammar requires them."""
    parts = _render_seq(expr)
    return " : ".join(parts) if parts else "[]"


def _render_seq(expr: Expr) -> list[str]:
    parts: list[str] = []
    while True:
        if isinstance(expr, Nil):
            return parts
        if isinstance(expr, Cons):
            parts.append(_render_term(expr.head))
            expr = expr.tail
            continue
        if isinstance(expr, EVar):
            parts.append(f"e.{expr.name}")
            return parts
        if isinstance(expr, Call):
            parts.append(_render_call(expr))
            return parts
        # Append: render both operands into the same flat element list.
        parts.extend(_render_seq(expr.left) or ["[]"])
        sub = _render_seq(expr.right)
        if not sub:
            return parts
        parts[-1] = parts[-1] + " ++ " + sub[0]
        parts.extend(sub[1:])
        return parts


def _render_term(term: Term) -> str:
    if isinstance(term, Sym):
        return str(term)
    if isinstance(term, SVar):
        return f"s.{term.name}"
    inner = render_expr(term.exp)
    return "([])" if inner == "[]" else f"({inner})"


def _render_call(call: Call) -> str:
    args = ", ".join(render_expr(a) for a in call.args)
    return f"{call.fname}({args})"


def render_pattern(pat: Pattern) -> str:
    return render_expr(pattern_to_expr(pat))


def render_rule(rule: Rule) -> str:
    pats = ", ".join(render_pattern(p) for p in rule.patterns)
    return f"{rule.fname}({pats}) => {render_expr(rule.body)};"


def render_program(prog: Program) -> str:
    lines: list[str] = []
    for fdef in prog:
        for rule in fdef.rules:
            lines.append(render_rule(rule))
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


# ---------------------------------------------------------------------------
# Static checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class LintIssue:
    severity: str  # "error" | "warning"
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.message}"


def _expr_calls(expr: Expr):
    if isinstance(expr, Cons):
        if isinstance(expr.head, Paren):
            yield from _expr_calls(expr.head.exp)
        yield from _expr_calls(expr.tail)
    elif isinstance(expr, Append):
        yield from _expr_calls(expr.left)
        yield from _expr_calls(expr.right)
    elif isinstance(expr, Call):
        yield expr
        for a in expr.args:
            yield from _expr_calls(a)


def pattern_vars(pat: Pattern, out: dict[str, str] | None = None) -> dict[str, str]:
    """Variable name -> sort ("s" or "e"), in first-occurrence order."""
    if out is None:
        out = {}
    if isinstance(pat, PEVar):
        out.setdefault(pat.name, "e")
    elif isinstance(pat, PConsS):
        out.setdefault(pat.name, "s")
        pattern_vars(pat.rest, out)
    elif isinstance(pat, PConsSym):
        pattern_vars(pat.rest, out)
    elif isinstance(pat, PConsP):
        pattern_vars(pat.inner, out)
        pattern_vars(pat.rest, out)
    return out


def expr_vars(expr: Expr, out: dict[str, str] | None = None) -> dict[str, str]:
    if out is None:
        out = {}
    if isinstance(expr, EVar):
        out.setdefault(expr.name, "e")
    elif isinstance(expr, Cons):
        head = expr.head
        if isinstance(head, SVar):
            out.setdefault(head.name, "s")
        elif isinstance(head, Paren):
            expr_vars(head.exp, out)
        expr_vars(expr.tail, out)
    elif isinstance(expr, Append):
        expr_vars(expr.left, out)
        expr_vars(expr.right, out)
    elif isinstance(expr, Call):
        for a in expr.args:
            expr_vars(a, out)
    return out


def multiplicity(var: str, item) -> int:
    """Occurrences of a variable (written ``e.name`` or ``s.name``) in an
    expression or pattern."""
    sort, _, name = var.partition(".")
    if sort not in ("e", "s") or not name:
        raise ValueError(f"not a variable spec: {var!r}")

    def in_expr(e: Expr) -> int:
        if isinstance(e, EVar):
            return int(sort == "e" and e.name == name)
        if isinstance(e, Cons):
            head = e.head
            n = in_expr(e.tail)
            if isinstance(head, SVar):
                n += int(sort == "s" and head.name == name)
            elif isinstance(head, Paren):
                n += in_expr(head.exp)
            return n
        if isinstance(e, Append):
            return in_expr(e.left) + in_expr(e.right)
        if isinstance(e, Call):
            return sum(in_expr(a) for a in e.args)
        return 0

    def in_pattern(p: Pattern) -> int:
        if isinstance(p, PEVar):
            return int(sort == "e" and p.name == name)
        if isinstance(p, PConsS):
            return int(sort == "s" and p.name == name) + in_pattern(p.rest)
        if isinstance(p, PConsSym):
            return in_pattern(p.rest)
        if isinstance(p, PConsP):
            return in_pattern(p.inner) + in_pattern(p.rest)
        return 0

    if isinstance(item, (PNil, PEVar, PConsS, PConsP, PConsSym)):
        return in_pattern(item)
    return in_expr(item)


@dataclass(frozen=True, slots=True)
class RuleReport:
    fname: str
    index: int  # 1-based within the function
    linear: bool  # every pattern variable occurs once across the patterns
    max_multiplicity: int  # highest pattern-variable occurrence count
    passive: bool  # right-hand side contains no call


@dataclass(frozen=True, slots=True)
class ProgramReport:
    arities: dict[str, int]
    rules: tuple[RuleReport, ...]

    @property
    def all_linear(self) -> bool:
        return all(r.linear for r in self.rules)


def analyze(prog: Program) -> ProgramReport:
    """Static shape report: arity table, per-rule pattern linearity and
    the highest variable multiplicity, per-rule passivity of the body."""
    reports = []
    for fdef in prog:
        for idx, rule in enumerate(fdef.rules, start=1):
            counts: dict[tuple[str, str], int] = {}

            def count(p: Pattern) -> None:
                if isinstance(p, PEVar):
                    counts[("e", p.name)] = counts.get(("e", p.name), 0) + 1
                elif isinstance(p, PConsS):
                    counts[("s", p.name)] = counts.get(("s", p.name), 0) + 1
                    count(p.rest)
                elif isinstance(p, PConsSym):
                    count(p.rest)
                elif isinstance(p, PConsP):
                    count(p.inner)
                    count(p.rest)

            for p in rule.patterns:
                count(p)
            most = max(counts.values(), default=0)
            reports.append(RuleReport(
                fname=fdef.name, index=idx, linear=most < 2,
                max_multiplicity=most,
                passive=next(_expr_calls(rule.body), None) is None))
    return ProgramReport(
        arities={d.name: d.arity for d in prog}, rules=tuple(reports))


def mentions_symbol(expr: Expr, sym: Sym) -> bool:
    if isinstance(expr, Cons):
        head = expr.head
        if head == sym:
            return True
        if isinstance(head, Paren) and mentions_symbol(head.exp, sym):
            return True
        return mentions_symbol(expr.tail, sym)
    if isinstance(expr, Append):
        return mentions_symbol(expr.left, sym) or mentions_symbol(expr.right, sym)
    if isinstance(expr, Call):
        return any(mentions_symbol(a, sym) for a in expr.args)
    return False


def pattern_mentions_symbol(pat: Pattern, sym: Sym) -> bool:
    return mentions_symbol(pattern_to_expr(pat), sym)


def bodies_mention_symbol(prog: Program, sym: Sym) -> bool:
    """Does any rule's right-hand side mention the symbol?"""
    return any(mentions_symbol(rule.body, sym)
               for fdef in prog for rule in fdef.rules)


def program_mentions_symbol(prog: Program, sym: Sym) -> bool:
    for fdef in prog:
        for rule in fdef.rules:
            if mentions_symbol(rule.body, sym):
                return True
            if any(pattern_mentions_symbol(p, sym) for p in rule.patterns):
                return True
    return False


def lint_program(prog: Program) -> list[LintIssue]:
    """Whole-program checks beyond the grammar: call targets exist,
    arities agree, rule bodies use only variables bound by their
    patterns."""
    issues: list[LintIssue] = []
    for fdef in prog:
        for idx, rule in enumerate(fdef.rules, start=1):
            where = f"{fdef.name} rule {idx}"
            bound: dict[str, str] = {}
            for p in rule.patterns:
                pattern_vars(p, bound)
            for name, sort in expr_vars(rule.body).items():
                if name not in bound:
                    issues.append(LintIssue("error", f"{where}: unbound variable {sort}.{name}"))
                elif bound[name] != sort:
                    issues.append(LintIssue("error", f"{where}: variable {name} bound as "
                                                     f"{bound[name]}-sort, used as {sort}-sort"))
            for call in _expr_calls(rule.body):
                target = prog.get(call.fname)
                if target is None:
                    issues.append(LintIssue("error", f"{where}: call to undefined function {call.fname}"))
                elif target.arity != len(call.args):
                    issues.append(LintIssue("error", f"{where}: {call.fname} expects {target.arity} "
                                                     f"argument(s), got {len(call.args)}"))
    return issues
