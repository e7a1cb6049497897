"""Symbolic configurations for the supercompiler.

A configuration is a stack of timed call frames over a passive tail.
The first frame is the active call: its arguments are parameter-bearing
but passive (no calls, no slot).  Every later frame, and the tail, has
exactly one result slot (the atom ``HOLE``) marking where the inner
value flows.  Times are attached when a frame is created and survive
narrowing and slot filling, so shared history between two stacks is
visible as shared (name, time) pairs.

Atoms:

* ``"i<text>"`` / ``"c<text>"`` - a symbol (same spelling as values);
* ``("par", seq)``              - a parenthesised subsequence;
* ``("ev", name)``              - a sequence parameter;
* ``("sv", name)``              - a symbol parameter;
* ``("hole",)``                 - the result slot;
* ``("call", fname, (seq, ..))`` - a call, only transiently during
  decomposition of freshly instantiated rule bodies.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple

from .semantics import Value, VTerm
from .syntax import (Append, Call, Cons, EVar, Expr, Nil, Paren, Sym, SVar,
                     parse_expr)

Atom = object
Seq = tuple
HOLE = ("hole",)


class Frame(NamedTuple):
    fname: str
    args: tuple[Seq, ...]
    time: int


class Config(NamedTuple):
    frames: tuple[Frame, ...]
    tail: Seq

    def names(self) -> tuple[str, ...]:
        return tuple(f.fname for f in self.frames)


class Gensym:
    """Fresh parameter names and frame times for one build."""

    def __init__(self):
        self.n = 0
        self.t = 0

    def ev(self) -> str:
        self.n += 1
        return f"~e{self.n}"

    def sv(self) -> str:
        self.n += 1
        return f"~s{self.n}"

    def time(self) -> int:
        self.t += 1
        return self.t


def is_sym(atom: Atom) -> bool:
    return isinstance(atom, str)


def atom_tag(atom: Atom) -> str:
    return "sym" if isinstance(atom, str) else atom[0]


def is_term_atom(atom: Atom) -> bool:
    """Atoms standing for exactly one term."""
    return isinstance(atom, str) or atom[0] in ("par", "sv")


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------

def value_to_seq(value: Value) -> Seq:
    return tuple(vt if isinstance(vt, str) else ("par", value_to_seq(vt))
                 for vt in value)


def seq_to_value(seq: Seq) -> Value:
    out: list[VTerm] = []
    for a in seq:
        if isinstance(a, str):
            out.append(a)
        elif a[0] == "par":
            out.append(seq_to_value(a[1]))
        else:
            raise ValueError(f"not a ground sequence: {a!r}")
    return tuple(out)


def expr_to_seq(expr: Expr, binding: dict[str, object]) -> Seq:
    """Instantiate a rule body: pattern variables come from ``binding``
    (s-names to one atom, e-names to a sequence)."""
    out: list[Atom] = []
    _expr_into(expr, binding, out)
    return tuple(out)


def _expr_into(expr: Expr, binding: dict[str, object], out: list[Atom]) -> None:
    while True:
        if isinstance(expr, Nil):
            return
        if isinstance(expr, EVar):
            out.extend(binding[expr.name])
            return
        if isinstance(expr, Cons):
            head = expr.head
            if isinstance(head, Sym):
                out.append(("i" if head.kind == "id" else "c") + head.text)
            elif isinstance(head, SVar):
                out.append(binding[head.name])
            else:
                sub: list[Atom] = []
                _expr_into(head.exp, binding, sub)
                out.append(("par", tuple(sub)))
            expr = expr.tail
            continue
        if isinstance(expr, Append):
            _expr_into(expr.left, binding, out)
            expr = expr.right
            continue
        out.append(("call", expr.fname,
                    tuple(expr_to_seq(a, binding) for a in expr.args)))
        return


def seq_to_expr(seq: Seq) -> Expr:
    """Render a call-bearing, parameter-bearing sequence back to syntax.
    Parameter names are emitted verbatim (canonicalise first for
    output programs)."""
    expr: Expr = Nil()
    for a in reversed(seq):
        if isinstance(a, str):
            expr = Cons(Sym("id" if a[0] == "i" else "ch", a[1:]), expr)
        elif a[0] == "par":
            expr = Cons(Paren(seq_to_expr(a[1])), expr)
        elif a[0] == "sv":
            expr = Cons(SVar(a[1]), expr)
        elif a[0] == "ev":
            base: Expr = EVar(a[1])
            if isinstance(expr, Nil):
                expr = base
            else:
                expr = Append(base, expr)
        elif a[0] == "call":
            base = Call(a[1], tuple(seq_to_expr(s) for s in a[2]))
            if isinstance(expr, Nil):
                expr = base
            else:
                expr = Append(base, expr)
        else:
            raise ValueError("a result slot cannot be rendered as syntax")
    return expr


def template_to_seq(template: str) -> Seq:
    """Parse an entry template like ``Main(e.d)`` into a root sequence;
    template variables become parameters of the same name."""
    expr = parse_expr(template)
    names = {}
    from .syntax import expr_vars
    expr_vars(expr, names)
    binding = {n: (("ev", n),) if sort == "e" else ("sv", n)
               for n, sort in names.items()}
    return expr_to_seq(expr, binding)


# ---------------------------------------------------------------------------
# Substitution and parameters
# ---------------------------------------------------------------------------

Subst = dict  # param name -> atom (s-sort) | Seq (e-sort)


def subst_seq(seq: Seq, theta: Subst) -> Seq:
    if not theta:
        return seq
    out: list[Atom] = []
    for a in seq:
        if isinstance(a, str):
            out.append(a)
        elif a[0] == "ev":
            rep = theta.get(a[1])
            if rep is None:
                out.append(a)
            else:
                out.extend(rep)
        elif a[0] == "sv":
            out.append(theta.get(a[1], a))
        elif a[0] == "par":
            out.append(("par", subst_seq(a[1], theta)))
        elif a[0] == "call":
            out.append(("call", a[1], tuple(subst_seq(s, theta) for s in a[2])))
        else:
            out.append(a)
    return tuple(out)


def subst_config(cfg: Config, theta: Subst) -> Config:
    return Config(tuple(Frame(f.fname, tuple(subst_seq(s, theta) for s in f.args), f.time)
                        for f in cfg.frames),
                  subst_seq(cfg.tail, theta))


def image_is_atom(v) -> bool:
    """Whether a substitution image is a single atom (symbol-parameter
    binding) rather than a sequence.  Unambiguous: a bare "par"/"sv"
    string is never an atom, so a two-element sequence cannot be
    mistaken for a tagged atom."""
    return isinstance(v, str) or (
        len(v) == 2 and v[0] in ("par", "sv")
        and isinstance(v[1], (str, tuple)))


def compose_subst(first: Subst, then: Subst) -> Subst:
    """Apply ``first``, then ``then``."""
    out: Subst = {}
    for k, v in first.items():
        out[k] = _subst_atom(v, then) if image_is_atom(v) else subst_seq(v, then)
    for k, v in then.items():
        out.setdefault(k, v)
    return out


def _subst_atom(atom: Atom, theta: Subst):
    if isinstance(atom, tuple) and atom[0] == "sv":
        return theta.get(atom[1], atom)
    if isinstance(atom, tuple) and atom[0] == "par":
        return ("par", subst_seq(atom[1], theta))
    return atom


def seq_params(seq: Seq, out: list[tuple[str, str]] | None = None) -> list[tuple[str, str]]:
    """(sort, name) pairs in first-occurrence order; sort "e" or "s"."""
    if out is None:
        out = []
    for a in seq:
        if isinstance(a, str):
            continue
        if a[0] == "ev":
            if ("e", a[1]) not in out:
                out.append(("e", a[1]))
        elif a[0] == "sv":
            if ("s", a[1]) not in out:
                out.append(("s", a[1]))
        elif a[0] == "par":
            seq_params(a[1], out)
        elif a[0] == "call":
            for s in a[2]:
                seq_params(s, out)
    return out


def config_params(cfg: Config) -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []
    for f in cfg.frames:
        for s in f.args:
            seq_params(s, out)
    seq_params(cfg.tail, out)
    return out


def canon_seq(seq: Seq) -> Seq:
    """Rename parameters in first-occurrence order, for structural
    comparison up to naming."""
    mapping: dict[str, str] = {}
    return _canon(seq, mapping)


def _canon(seq: Seq, mapping: dict[str, str]) -> Seq:
    out: list[Atom] = []
    for a in seq:
        if isinstance(a, str):
            out.append(a)
        elif a[0] in ("ev", "sv"):
            name = mapping.setdefault(a[1], f"&{len(mapping)}")
            out.append((a[0], name))
        elif a[0] == "par":
            out.append(("par", _canon(a[1], mapping)))
        elif a[0] == "call":
            out.append(("call", a[1], tuple(_canon(s, mapping) for s in a[2])))
        else:
            out.append(a)
    return tuple(out)


def canon_config(cfg: Config, keep_times: bool = False) -> tuple:
    """A comparison key: parameter names canonicalised, times dropped
    (or kept for exact-repeat detection)."""
    mapping: dict[str, str] = {}
    frames = tuple((f.fname,
                    tuple(_canon(s, mapping) for s in f.args),
                    f.time if keep_times else 0)
                   for f in cfg.frames)
    return (frames, _canon(cfg.tail, mapping))


# ---------------------------------------------------------------------------
# Decomposition
# ---------------------------------------------------------------------------

def contains_call(seq: Seq) -> bool:
    return any(not isinstance(a, str)
               and (a[0] == "call" or (a[0] == "par" and contains_call(a[1])))
               for a in seq)


def count_holes(seq: Seq) -> int:
    n = 0
    for a in seq:
        if isinstance(a, str):
            continue
        if a == HOLE:
            n += 1
        elif a[0] == "par":
            n += count_holes(a[1])
        elif a[0] == "call":
            n += sum(count_holes(s) for s in a[2])
    return n


def fill_hole(seq: Seq, filler: Seq) -> Seq:
    """Splice ``filler`` at the unique slot."""
    out: list[Atom] = []
    for a in seq:
        if a == HOLE:
            out.extend(filler)
        elif not isinstance(a, str) and a[0] == "par":
            out.append(("par", fill_hole(a[1], filler)))
        else:
            out.append(a)
    return tuple(out)


def fill_frame(frame: Frame, filler: Seq) -> Frame:
    return Frame(frame.fname,
                 tuple(fill_hole(s, filler) for s in frame.args),
                 frame.time)


def _locate_redex(seq: Seq) -> list[tuple]:
    """Path to the leftmost-innermost call.  Steps: ("at", i) the call
    atom itself, ("into_par", i), ("into_arg", i, j)."""
    for i, a in enumerate(seq):
        if isinstance(a, str):
            continue
        if a[0] == "par" and contains_call(a[1]):
            return [("into_par", i)] + _locate_redex(a[1])
        if a[0] == "call":
            for j, arg in enumerate(a[2]):
                if contains_call(arg):
                    return [("into_arg", i, j)] + _locate_redex(arg)
            return [("at", i)]
    raise ValueError("no call in sequence")


def _get_atom(seq: Seq, path: list[tuple]) -> Atom:
    step = path[0]
    if step[0] == "at":
        return seq[step[1]]
    if step[0] == "into_par":
        return _get_atom(seq[step[1]][1], path[1:])
    return _get_atom(seq[step[1]][2][step[2]], path[1:])


def _replace_at(seq: Seq, path: list[tuple], repl: Seq) -> Seq:
    step = path[0]
    i = step[1]
    if step[0] == "at":
        return seq[:i] + repl + seq[i + 1:]
    a = seq[i]
    if step[0] == "into_par":
        return seq[:i] + (("par", _replace_at(a[1], path[1:], repl)),) + seq[i + 1:]
    j = step[2]
    new_args = a[2][:j] + (_replace_at(a[2][j], path[1:], repl),) + a[2][j + 1:]
    return seq[:i] + (("call", a[1], new_args),) + seq[i + 1:]


def decompose(seq: Seq, gen: Gensym):
    """Split an expression into the active call chain and its context.

    Returns ("value", seq) when passive, ("config", Config) when the
    whole expression is one chain over a passive context, or
    ("let", binder, head_config, cont_seq) when parallel calls remain:
    the head chain is bound to a fresh parameter that marks its place
    in the continuation.
    """
    if not contains_call(seq):
        return ("value", seq)
    assert count_holes(seq) == 0, "decompose input must be slot-free"
    path = _locate_redex(seq)
    redex = _get_atom(seq, path)
    frames = [Frame(redex[1], redex[2], gen.time())]
    target = path  # path to the atom the chain so far computes
    while True:
        # Nearest enclosing call above the target; parens in between are
        # pure context and simply stay around the slot.
        k = len(target) - 2
        while k >= 0 and target[k][0] == "into_par":
            k -= 1
        if k < 0:
            break
        step = target[k]
        i, j = step[1], step[2]
        call_path = target[:k] + [("at", i)]
        call_atom = _get_atom(seq, call_path)
        hole_arg = _replace_at(call_atom[2][j], target[k + 1:], (HOLE,))
        if contains_call(hole_arg) or any(
                contains_call(arg) for m, arg in enumerate(call_atom[2]) if m != j):
            break  # parallel calls inside this one: the chain stops below it
        args = call_atom[2][:j] + (hole_arg,) + call_atom[2][j + 1:]
        frames.append(Frame(call_atom[1], args, gen.time()))
        target = call_path
    ctx = _replace_at(seq, target, (HOLE,))
    if contains_call(ctx):
        binder = gen.ev()
        cont = _replace_at(seq, target, ((("ev", binder),)))
        return ("let", binder, Config(tuple(frames), (HOLE,)), cont)
    return ("config", Config(tuple(frames), ctx))


def extend_config(rhs: Seq, rest: tuple[Frame, ...], tail: Seq, gen: Gensym):
    """Re-plug a fired rule body into the remaining context.

    Returns ("value", seq) when everything is finished, ("config", cfg)
    to keep driving, or ("let", binder, head_config, cont_seq, rest, tail)
    when the body splits; the continuation still owes the given context.
    """
    d = decompose(rhs, gen)
    if d[0] == "value":
        val = d[1]
        if not rest:
            return ("value", fill_hole(tail, val))
        lead = fill_frame(rest[0], val)
        return ("config", Config((lead,) + rest[1:], tail))
    if d[0] == "config":
        inner = d[1]
        if not rest:
            return ("config", Config(inner.frames, fill_hole(tail, inner.tail)))
        lead = fill_frame(rest[0], inner.tail)
        return ("config", Config(inner.frames + (lead,) + rest[1:], tail))
    _, binder, head, cont = d
    return ("let", binder, head, cont, rest, tail)


# ---------------------------------------------------------------------------
# Instance matching
# ---------------------------------------------------------------------------

def _seq_match(gen_seq: Seq, spec: Seq, theta: Subst) -> Iterator[Subst]:
    """All ways to see ``spec`` as an instance of ``gen_seq``; lazy, so
    the first solution wins.  Result slots only map to result slots."""
    if not gen_seq:
        if not spec:
            yield theta
        return
    g0 = gen_seq[0]
    if isinstance(g0, str):
        if spec and spec[0] == g0:
            yield from _seq_match(gen_seq[1:], spec[1:], theta)
        return
    tag = g0[0]
    if tag == "hole":
        if spec and spec[0] == HOLE:
            yield from _seq_match(gen_seq[1:], spec[1:], theta)
        return
    if tag == "par":
        if spec and not isinstance(spec[0], str) and spec[0][0] == "par":
            for t1 in _seq_match(g0[1], spec[0][1], theta):
                yield from _seq_match(gen_seq[1:], spec[1:], t1)
        return
    if tag == "sv":
        if not spec:
            return
        s0 = spec[0]
        if not (isinstance(s0, str) or s0[0] == "sv"):
            return
        bound = theta.get(g0[1])
        if bound is not None:
            if bound == s0:
                yield from _seq_match(gen_seq[1:], spec[1:], theta)
            return
        t1 = dict(theta)
        t1[g0[1]] = s0
        yield from _seq_match(gen_seq[1:], spec[1:], t1)
        return
    if tag == "ev":
        bound = theta.get(g0[1])
        if bound is not None:
            n = len(bound)
            if spec[:n] == bound:
                yield from _seq_match(gen_seq[1:], spec[n:], theta)
            return
        for n in range(len(spec) + 1):
            piece = spec[:n]
            if count_holes(piece):
                return  # a slot can never be swallowed by a parameter
            t1 = dict(theta)
            t1[g0[1]] = piece
            yield from _seq_match(gen_seq[1:], spec[n:], t1)
        return
    raise ValueError(f"unexpected atom in configuration: {g0!r}")


def match_instance(general: Config, specific: Config) -> Subst | None:
    """A substitution sending ``general`` to ``specific`` (frame times
    ignored), or None."""
    if len(general.frames) != len(specific.frames):
        return None
    if general.names() != specific.names():
        return None

    def chain(i: int, theta: Subst) -> Iterator[Subst]:
        if i == len(general.frames):
            yield from _seq_match(general.tail, specific.tail, theta)
            return
        gf, sf = general.frames[i], specific.frames[i]
        if len(gf.args) != len(sf.args):
            return

        def args(j: int, th: Subst) -> Iterator[Subst]:
            if j == len(gf.args):
                yield from chain(i + 1, th)
                return
            for t1 in _seq_match(gf.args[j], sf.args[j], th):
                yield from args(j + 1, t1)

        yield from args(0, theta)

    return next(chain(0, {}), None)


# ---------------------------------------------------------------------------
# Most specific generalization
# ---------------------------------------------------------------------------

def _msg_seq(a: Seq, b: Seq, gen: Gensym, ta: Subst, tb: Subst) -> Seq | None:
    # Align trailing slots first so a shared context survives a length
    # mismatch earlier in the sequence.
    if a and b and a[-1] == HOLE and b[-1] == HOLE:
        core = _msg_seq(a[:-1], b[:-1], gen, ta, tb)
        return None if core is None else core + (HOLE,)
    out: list[Atom] = []
    n = min(len(a), len(b))
    for i in range(n):
        x, y = a[i], b[i]
        if x == y and not count_holes((x,)) and (
                isinstance(x, str) or x[0] in ("sv", "ev")):
            out.append(x)
            continue
        if x == HOLE and y == HOLE:
            out.append(HOLE)
            continue
        xt, yt = atom_tag(x), atom_tag(y)
        if xt == "par" and yt == "par":
            inner = _msg_seq(x[1], y[1], gen, ta, tb)
            if inner is None:
                return None
            out.append(("par", inner))
            continue
        if is_term_atom(x) and is_term_atom(y):
            if count_holes((x,)) or count_holes((y,)):
                return None  # a slot may not disappear into a parameter
            p = gen.sv()
            ta[p] = x
            tb[p] = y
            out.append(("sv", p))
            continue
        if xt == "ev" and yt == "ev":
            p = gen.ev()
            ta[p] = (x,)
            tb[p] = (y,)
            out.append(("ev", p))
            continue
        # Sorts disagree: one remainder absorbs everything on both sides.
        ra, rb = a[i:], b[i:]
        if count_holes(ra) or count_holes(rb):
            return None
        p = gen.ev()
        ta[p] = ra
        tb[p] = rb
        out.append(("ev", p))
        return tuple(out)
    ra, rb = a[n:], b[n:]
    if not ra and not rb:
        return tuple(out)
    if count_holes(ra) or count_holes(rb):
        return None
    p = gen.ev()
    ta[p] = ra
    tb[p] = rb
    out.append(("ev", p))
    return tuple(out)


def msg_config(a: Config, b: Config, gen: Gensym):
    """Most specific common shape of two same-named stacks.

    Returns (general, theta_a, theta_b) with fresh frame times, or None
    when the slot structure cannot be preserved.
    """
    if a.names() != b.names():
        return None
    ta: Subst = {}
    tb: Subst = {}
    frames = []
    for fa, fb in zip(a.frames, b.frames):
        if len(fa.args) != len(fb.args):
            return None
        args = []
        for sa, sb in zip(fa.args, fb.args):
            g = _msg_seq(sa, sb, gen, ta, tb)
            if g is None:
                return None
            args.append(g)
        frames.append(Frame(fa.fname, tuple(args), gen.time()))
    tail = _msg_seq(a.tail, b.tail, gen, ta, tb)
    if tail is None:
        return None
    g = Config(tuple(frames), tail)
    if not _well_slotted(g):
        return None
    return (g, ta, tb)


def _well_slotted(cfg: Config) -> bool:
    if not cfg.frames:
        return count_holes(cfg.tail) == 0
    for i, f in enumerate(cfg.frames):
        want = 0 if i == 0 else 1
        if sum(count_holes(s) for s in f.args) != want:
            return False
    return count_holes(cfg.tail) == 1


# ---------------------------------------------------------------------------
# Homeomorphic embedding
# ---------------------------------------------------------------------------

class Embedder:
    """Embedding of passive sequences, with memoisation.

    One deliberate restriction: an empty parenthesised group does not
    embed into a parenthesised group holding exactly one symbol or one
    symbol parameter.  This keeps counter-like arguments from relating
    across genuinely different control states.
    """

    def __init__(self):
        self.cache: dict[tuple, bool] = {}

    def seq(self, a: Seq, b: Seq) -> bool:
        if not a:
            return True
        if not b:
            return False
        key = (a, b)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        self.cache[key] = False  # cycle guard; shapes are finite anyway
        b0 = b[0]
        res = self.seq(a, b[1:])
        if not res and self.atom(a[0], b0):
            res = self.seq(a[1:], b[1:])
        if not res and not isinstance(b0, str):
            if b0[0] == "par":
                res = self.seq(a, b0[1])
            elif b0[0] == "call":
                res = any(self.seq(a, arg) for arg in b0[2])
        self.cache[key] = res
        return res

    def atom(self, x: Atom, y: Atom) -> bool:
        if isinstance(x, str) or isinstance(y, str):
            return x == y
        xt, yt = x[0], y[0]
        if xt == "ev" and yt == "ev":
            return True
        if xt == "sv" and yt == "sv":
            return True
        if xt == "hole" or yt == "hole":
            return x == y
        if xt == "par" and yt == "par":
            if x[1] == () and len(y[1]) == 1 and (
                    isinstance(y[1][0], str)
                    or y[1][0][0] == "sv"):
                return False
            return self.seq(x[1], y[1])
        if xt == "call" and yt == "call":
            return (x[1] == y[1] and len(x[2]) == len(y[2])
                    and all(self.seq(p, q) for p, q in zip(x[2], y[2])))
        return False


# ---------------------------------------------------------------------------
# Rendering (debug output and graph dumps)
# ---------------------------------------------------------------------------

def seq_to_str(seq: Seq) -> str:
    if not seq:
        return "[]"
    return " ".join(_atom_str(a) for a in seq)


def _atom_str(a: Atom) -> str:
    if isinstance(a, str):
        return a[1:] if a[0] == "i" else f"'{a[1:]}'"
    tag = a[0]
    if tag == "par":
        return f"({seq_to_str(a[1]) if a[1] else ''})"
    if tag == "ev":
        return f"e.{a[1]}"
    if tag == "sv":
        return f"s.{a[1]}"
    if tag == "hole":
        return "•"
    return f"{a[1]}({', '.join(seq_to_str(s) for s in a[2])})"


def config_to_str(cfg: Config) -> str:
    parts = [f"{f.fname}@{f.time}({', '.join(seq_to_str(s) for s in f.args)})"
             for f in cfg.frames]
    parts.append(seq_to_str(cfg.tail))
    return " :: ".join(parts)


def image_to_str(v) -> str:
    return _atom_str(v) if image_is_atom(v) else seq_to_str(v)
