"""Turning a finished process graph back into a program.

Functions are emitted for fold targets, for nodes that branch, and for
nodes whose single surviving child restricts the domain (a non-identity
contraction, or stuck siblings that callers must still get stuck on).
Everything else is inlined.  Rules appear in trial order, which is what
makes the contingent equality branches exact: the branch assuming the
equality is emitted before the branch that skipped the rule.

A child whose whole subtree is stuck normally just loses its rule (no
rule means the call gets stuck at run time, preserving the meaning).
When a later sibling's patterns overlap the dropped ones, dropping
would leak those inputs into the sibling, so instead the rule is kept
with a call to a deliberately undefined function as its body.
"""

from __future__ import annotations

from .config import (Seq, Subst, config_params, image_is_atom, seq_to_expr,
                     subst_seq)
from .driver import Node, UnsupportedNonlinearPattern
from .syntax import (Call, EVar, Expr, FunDef, Nil, Paren, PConsP, PConsS,
                     PConsSym, PEVar, PNil, Pattern, Program, Rule, SVar, Sym,
                     Cons, Append, expr_vars, pattern_vars, _expr_calls)

_BOTTOM = object()


def seq_to_pattern(seq: Seq) -> Pattern:
    if not seq:
        return PNil()
    a = seq[0]
    if isinstance(a, str):
        return PConsSym(Sym("id" if a[0] == "i" else "ch", a[1:]),
                        seq_to_pattern(seq[1:]))
    if a[0] == "sv":
        return PConsS(a[1], seq_to_pattern(seq[1:]))
    if a[0] == "par":
        return PConsP(seq_to_pattern(a[1]), seq_to_pattern(seq[1:]))
    if a[0] == "ev":
        if len(seq) != 1:
            raise UnsupportedNonlinearPattern(
                "a sequence parameter surfaced mid-pattern; the source "
                "rule is too nonlinear to residualize")
        return PEVar(a[1])
    raise ValueError(f"cannot render {a!r} as a pattern")


def patterns_may_overlap(a: Pattern, b: Pattern) -> bool:
    """Conservative: False only when provably disjoint."""
    if isinstance(a, PEVar) or isinstance(b, PEVar):
        return True
    if isinstance(a, PNil) or isinstance(b, PNil):
        return isinstance(a, PNil) and isinstance(b, PNil)
    if isinstance(a, PConsSym):
        if isinstance(b, PConsSym):
            return a.sym == b.sym and patterns_may_overlap(a.rest, b.rest)
        if isinstance(b, PConsS):
            return patterns_may_overlap(a.rest, b.rest)
        return False
    if isinstance(a, PConsS):
        if isinstance(b, (PConsSym, PConsS)):
            return patterns_may_overlap(a.rest, b.rest)
        return False
    # PConsP
    return isinstance(b, PConsP) and \
        patterns_may_overlap(a.inner, b.inner) and \
        patterns_may_overlap(a.rest, b.rest)


def _pat_subsumes(g: Pattern, s: Pattern) -> bool:
    """True when ``g`` matches everything ``s`` matches (g linear)."""
    if isinstance(g, PEVar):
        return True
    if isinstance(s, PEVar):
        return False
    if isinstance(g, PNil) or isinstance(s, PNil):
        return isinstance(g, PNil) and isinstance(s, PNil)
    if isinstance(g, PConsSym):
        return isinstance(s, PConsSym) and g.sym == s.sym \
            and _pat_subsumes(g.rest, s.rest)
    if isinstance(g, PConsS):
        return isinstance(s, (PConsSym, PConsS)) \
            and _pat_subsumes(g.rest, s.rest)
    return isinstance(s, PConsP) and _pat_subsumes(g.inner, s.inner) \
        and _pat_subsumes(g.rest, s.rest)


class Residualizer:
    def __init__(self, root: Node, entry_fname: str,
                 entry_patterns: tuple[Pattern, ...]):
        self.root = root
        self.entry_fname = entry_fname
        self.entry_patterns = entry_patterns
        self._bottom: dict[int, bool] = {}
        self._expr: dict[int, object] = {}
        self._name: dict[int, str] = {}
        self._fold_targets = {n.fold_target.id
                              for n in _iter(root) if n.kind == "fold"}
        self._counter = 0

    # -- analysis -------------------------------------------------------

    def is_bottom(self, n: Node) -> bool:
        hit = self._bottom.get(n.id)
        if hit is not None:
            return hit
        self._bottom[n.id] = False  # loops through folds are not stuck
        k = n.kind
        if k == "bottom":
            r = True
        elif k in ("value", "fold"):
            r = False
        elif k == "let":
            r = self.is_bottom(n.children[0][1]) or \
                self.is_bottom(n.children[1][1])
        elif k == "gen":
            r = self.is_bottom(n.children[0][1])
        else:
            r = all(self.is_bottom(c) for _, c in n.children)
        self._bottom[n.id] = r
        return r

    def emits(self, n: Node) -> bool:
        if n.kind != "step" or self.is_bottom(n):
            return False
        if n.id in self._fold_targets:
            return True
        if len(n.children) >= 2:
            return True
        theta, _child = n.children[0]
        return bool(theta)

    def name_of(self, n: Node) -> str:
        got = self._name.get(n.id)
        if got is None:
            while True:
                self._counter += 1
                got = f"F{self._counter}"
                if got != self.entry_fname:
                    break
            self._name[n.id] = got
        return got

    # -- expressions ------------------------------------------------------

    def _identity_args(self, n: Node) -> tuple[Seq, ...]:
        return tuple(
            (("ev", name),) if sort == "e" else (("sv", name),)
            for sort, name in config_params(n.config))

    def _call_to(self, target: Node, theta: Subst) -> Seq:
        args = []
        for sort, name in config_params(target.config):
            img = theta.get(name)
            if img is None:
                img = (("ev", name),) if sort == "e" else ("sv", name)
            args.append((img,) if image_is_atom(img) else img)
        return (("call", self.name_of(target), tuple(args)),)

    def expr_of(self, n: Node):
        hit = self._expr.get(n.id)
        if hit is not None:
            return hit
        r = self._expr_raw(n)
        self._expr[n.id] = r
        return r

    def _expr_raw(self, n: Node):
        if self.is_bottom(n):
            return _BOTTOM
        k = n.kind
        if k == "value":
            return n.value
        if k == "fold":
            return self._call_to(n.fold_target, n.theta)
        if k == "let":
            head = self.expr_of(n.children[0][1])
            cont = self.expr_of(n.children[1][1])
            return subst_seq(cont, {n.binder: head})
        if k == "gen":
            child = n.children[0][1]
            if self.emits(child):
                return self._call_to(child, n.gen_theta)
            return subst_seq(self.expr_of(child), n.gen_theta)
        # step
        if self.emits(n):
            return (("call", self.name_of(n), self._identity_args(n)),)
        for theta, child in n.children:
            if not self.is_bottom(child):
                return self.expr_of(child)
        raise AssertionError("unreachable: non-bottom step with no live child")

    # -- rules ------------------------------------------------------------

    def _pattern_vector(self, n: Node, theta: Subst) -> tuple[Pattern, ...]:
        pats = []
        for sort, name in config_params(n.config):
            img = theta.get(name)
            if img is None:
                img = (("ev", name),) if sort == "e" else ("sv", name)
            pats.append(seq_to_pattern((img,) if image_is_atom(img) else img))
        return tuple(pats)

    def _rules_for(self, n: Node, diverge: str) -> list[Rule]:
        fname = self.name_of(n)
        entries = []
        for theta, child in n.children:
            vec = self._pattern_vector(n, theta or {})
            body = None if self.is_bottom(child) else self.expr_of(child)
            entries.append((vec, body))
        rules: list[Rule] = []
        for i, (vec, body) in enumerate(entries):
            if body is None:
                survivors = [v for v, b in entries[i + 1:] if b is not None]
                if any(all(patterns_may_overlap(p, q)
                           for p, q in zip(vec, sv))
                       for sv in survivors):
                    rules.append(Rule(fname, vec, Call(diverge, ())))
                continue
            rules.append(Rule(fname, vec, seq_to_expr(body)))
        return rules

    # -- assembly -----------------------------------------------------------

    def program(self) -> Program:
        root_expr = self.expr_of(self.root)
        if root_expr is _BOTTOM:
            return Program(())
        diverge = "Diverge"
        entry_rule = Rule(self.entry_fname, self.entry_patterns,
                          seq_to_expr(root_expr))
        defs = [FunDef(self.entry_fname, (entry_rule,))]
        for n in _iter(self.root):
            if self.emits(n):
                rules = self._rules_for(n, diverge)
                if not rules:
                    # Every branch was stuck with disjoint shapes; the
                    # function vanishes and callers get stuck, as they must.
                    continue
                defs.append(FunDef(self.name_of(n), tuple(rules)))
        prog = Program(tuple(defs))
        prog = _prune_unreachable(prog, self.entry_fname)
        prog = _drop_shadowed(prog)
        prog = _rename_rule_vars(prog, skip={self.entry_fname})
        return prog


def _iter(root: Node):
    stack = [root]
    seen = set()
    while stack:
        n = stack.pop()
        if n.id in seen:
            continue
        seen.add(n.id)
        yield n
        for _, c in reversed(n.children):
            stack.append(c)


def residualize(root: Node, entry_fname: str,
                entry_patterns: tuple[Pattern, ...]) -> Program:
    return Residualizer(root, entry_fname, entry_patterns).program()


# ---------------------------------------------------------------------------
# Cleanup passes
# ---------------------------------------------------------------------------

def _prune_unreachable(prog: Program, entry: str) -> Program:
    keep: set[str] = set()
    work = [entry]
    while work:
        name = work.pop()
        if name in keep:
            continue
        keep.add(name)
        fn = prog.get(name)
        if fn is None:
            continue
        for rule in fn.rules:
            for call in _expr_calls(rule.body):
                if call.fname not in keep:
                    work.append(call.fname)
    return Program(tuple(d for d in prog.defs if d.name in keep))


def _is_linear(vec: tuple[Pattern, ...]) -> bool:
    counts: dict[str, int] = {}

    def walk(p: Pattern) -> None:
        if isinstance(p, PEVar):
            counts[p.name] = counts.get(p.name, 0) + 1
        elif isinstance(p, PConsS):
            counts[p.name] = counts.get(p.name, 0) + 1
            walk(p.rest)
        elif isinstance(p, PConsP):
            walk(p.inner)
            walk(p.rest)
        elif isinstance(p, PConsSym):
            walk(p.rest)

    for p in vec:
        walk(p)
    return all(c == 1 for c in counts.values())


def _drop_shadowed(prog: Program) -> Program:
    defs = []
    for fn in prog.defs:
        kept: list[Rule] = []
        for rule in fn.rules:
            dead = any(
                _is_linear(k.patterns) and
                len(k.patterns) == len(rule.patterns) and
                all(_pat_subsumes(g, s)
                    for g, s in zip(k.patterns, rule.patterns))
                for k in kept)
            if not dead:
                kept.append(rule)
        defs.append(FunDef(fn.name, tuple(kept)))
    return Program(tuple(defs))


def _rename_pattern(p: Pattern, m: dict[str, str]) -> Pattern:
    if isinstance(p, PNil):
        return p
    if isinstance(p, PEVar):
        return PEVar(m[p.name])
    if isinstance(p, PConsS):
        return PConsS(m[p.name], _rename_pattern(p.rest, m))
    if isinstance(p, PConsP):
        return PConsP(_rename_pattern(p.inner, m), _rename_pattern(p.rest, m))
    return PConsSym(p.sym, _rename_pattern(p.rest, m))


def _rename_expr(e: Expr, m: dict[str, str]) -> Expr:
    if isinstance(e, Nil):
        return e
    if isinstance(e, EVar):
        return EVar(m.get(e.name, e.name))
    if isinstance(e, Cons):
        head = e.head
        if isinstance(head, SVar):
            head = SVar(m.get(head.name, head.name))
        elif isinstance(head, Paren):
            head = Paren(_rename_expr(head.exp, m))
        return Cons(head, _rename_expr(e.tail, m))
    if isinstance(e, Append):
        return Append(_rename_expr(e.left, m), _rename_expr(e.right, m))
    return Call(e.fname, tuple(_rename_expr(a, m) for a in e.args))


def _rename_rule_vars(prog: Program, skip: set[str]) -> Program:
    defs = []
    for fn in prog.defs:
        if fn.name in skip:
            defs.append(fn)
            continue
        rules = []
        for rule in fn.rules:
            order: dict[str, str] = {}
            for p in rule.patterns:
                pattern_vars(p, order)
            expr_vars(rule.body, order)
            m = {old: f"x{i + 1}" for i, old in enumerate(order)}
            rules.append(Rule(fn.name,
                              tuple(_rename_pattern(p, m)
                                    for p in rule.patterns),
                              _rename_expr(rule.body, m)))
        defs.append(FunDef(fn.name, tuple(rules)))
    return Program(tuple(defs))
