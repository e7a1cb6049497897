"""Driving: building a process graph from a program and a root call.

Each graph node holds a configuration (a stack of timed frames over a
passive tail).  Driving the leading call of a configuration yields a
list of children in rule-trial order; matching a rule against symbolic
arguments may require narrowing a sequence parameter (three exhaustive
shapes: empty, symbol head, parenthesised head) or a contingent
equality on a symbol or sequence parameter (the equality branch is
tried first, the skip branch continues with the next rule, and rule
order in the residual program restores exactness).

Loop handling on the active path, most recent ancestor first:

* instance of an ancestor        -> fold (a back edge);
* stack grown over a shared timed suffix with embedded arguments
                                  -> split the ancestor;
* same-shaped stack with embedded arguments
                                  -> generalize the ancestor.

Replacing an ancestor abandons its subtree (including any folds into
it, which necessarily come from inside) and rebuilds from the more
general or split form.
"""

from __future__ import annotations

import json

from .config import (HOLE, Config, Embedder, Frame, Gensym, Seq, Subst,
                     canon_config, compose_subst, config_to_str,
                     expr_to_seq, extend_config, fill_frame, image_to_str,
                     match_instance, msg_config, seq_params, seq_to_str,
                     subst_config, subst_seq)
from .semantics import BudgetExceeded
from .syntax import (PConsP, PConsS, PConsSym, PEVar, PNil, Program)
from .whistle import (flat_related, shared_context_len, split_veto,
                      suffix_related)


class UnsupportedNonlinearPattern(Exception):
    """A repeated pattern variable forced an equality between two
    symbolic sequences that neither side can express as a contraction."""


class _Replace(Exception):
    """Internal: unwind to an ancestor node and rebuild it."""

    def __init__(self, node: "Node", action: tuple):
        self.node = node
        self.action = action


# ---------------------------------------------------------------------------
# Symbolic rule matching
# ---------------------------------------------------------------------------

def narrow_cases(param: str, gen: Gensym) -> list[Subst]:
    """The three exhaustive shapes of a sequence parameter."""
    s, e1 = gen.sv(), gen.ev()
    inner, e2 = gen.ev(), gen.ev()
    return [
        {param: ()},
        {param: (("sv", s), ("ev", e1))},
        {param: (("par", (("ev", inner),)), ("ev", e2))},
    ]


def _is_ground(seq: Seq) -> bool:
    return not seq_params(seq)


def _s_equal(x, y):
    """Equality constraint between two symbol-sorted atoms."""
    if x == y:
        return None
    if isinstance(x, str) and isinstance(y, str):
        return ("fail",)
    if not isinstance(x, str) and x[0] == "sv":
        return ("contingent", {x[1]: y})
    return ("contingent", {y[1]: x})


def _e_equal(x: Seq, y: Seq):
    """Equality constraint between two symbolic sequences."""
    if x == y:
        return None
    if _is_ground(x) and _is_ground(y):
        return ("fail",)
    if len(x) == 1 and not isinstance(x[0], str) and x[0][0] == "ev" \
            and all(n != x[0][1] for _, n in seq_params(y)):
        return ("contingent", {x[0][1]: y})
    if len(y) == 1 and not isinstance(y[0], str) and y[0][0] == "ev" \
            and all(n != y[0][1] for _, n in seq_params(x)):
        return ("contingent", {y[0][1]: x})
    raise UnsupportedNonlinearPattern(
        f"cannot express the equality {seq_to_str(x)} = {seq_to_str(y)}")


def _pmatch(pat, seq: Seq, env: dict):
    """Match one pattern against one symbolic sequence.  Returns None on
    success (env extended) or a blocking outcome: ("fail",),
    ("narrow", param), ("contingent", contraction)."""
    while True:
        if isinstance(pat, PNil):
            if not seq:
                return None
            a = seq[0]
            if isinstance(a, str) or a[0] in ("par", "sv"):
                return ("fail",)
            return ("narrow", a[1])
        if isinstance(pat, PEVar):
            bound = env.get(pat.name)
            if bound is None:
                env[pat.name] = seq
                return None
            return _e_equal(bound, seq)
        # A term-consuming pattern head.
        if not seq:
            return ("fail",)
        a = seq[0]
        if not isinstance(a, str) and a[0] == "ev":
            return ("narrow", a[1])
        if isinstance(pat, PConsSym):
            want = ("i" if pat.sym.kind == "id" else "c") + pat.sym.text
            if isinstance(a, str):
                if a != want:
                    return ("fail",)
            elif a[0] == "par":
                return ("fail",)
            else:  # symbol parameter: contingent on it being this symbol
                return ("contingent", {a[1]: want})
        elif isinstance(pat, PConsS):
            if not isinstance(a, str) and a[0] == "par":
                return ("fail",)
            bound = env.get(pat.name)
            if bound is None:
                env[pat.name] = a
            else:
                out = _s_equal(bound, a)
                if out is not None:
                    return out
        else:  # PConsP
            if isinstance(a, str) or a[0] == "sv":
                return ("fail",)
            out = _pmatch(pat.inner, a[1], env)
            if out is not None:
                return out
        pat = pat.rest
        seq = seq[1:]


def sym_match_rule(rule, args: tuple[Seq, ...]):
    """("match", binding) | ("fail",) | ("narrow", p) | ("contingent", c)."""
    env: dict = {}
    for pat, seq in zip(rule.patterns, args):
        out = _pmatch(pat, seq, env)
        if out is not None:
            return out
    return ("match", env)


def explore(cfg: Config, program: Program, gen: Gensym):
    """Drive the leading call one step.

    Returns [(theta, rhs_seq | None, narrowed_config)] in trial order;
    rhs None means no rule applies under that contraction.
    """
    results: list = []

    def go(c: Config, theta: Subst, start: int) -> None:
        fn = program.by_name.get(c.frames[0].fname)
        if fn is None:
            results.append((theta, None, c))
            return
        i = start
        while i < len(fn.rules):
            rule = fn.rules[i]
            out = sym_match_rule(rule, c.frames[0].args)
            kind = out[0]
            if kind == "match":
                results.append((theta, expr_to_seq(rule.body, out[1]), c))
                return
            if kind == "fail":
                i += 1
                continue
            if kind == "narrow":
                for sigma in narrow_cases(out[1], gen):
                    go(subst_config(c, sigma), compose_subst(theta, sigma), i)
                return
            sigma = out[1]
            go(subst_config(c, sigma), compose_subst(theta, sigma), i)
            go(c, theta, i + 1)
            return
        results.append((theta, None, c))

    go(cfg, {}, 0)
    return results


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------

class Node:
    __slots__ = ("id", "kind", "config", "value", "children", "binder",
                 "fold_target", "theta", "gen_theta", "gen_desc")

    def __init__(self, nid: int, kind: str):
        self.id = nid
        self.kind = kind          # step | value | bottom | let | gen | fold
        self.config: Config | None = None
        self.value: Seq | None = None
        self.children: list[tuple[Subst | None, "Node"]] = []
        self.binder: str | None = None
        self.fold_target: "Node | None" = None
        self.theta: Subst | None = None       # fold: instance substitution
        self.gen_theta: Subst | None = None   # gen: ancestor = general . theta
        self.gen_desc: Config | None = None   # gen: the descendant that fired


class Trace:
    """Construction statistics and the raw events the monitors check."""

    def __init__(self):
        self.folds = 0
        self.lateral_folds = 0
        self.gens = 0
        self.splits = 0
        self.elided = 0
        self.veto_continues = 0
        self.msg_failures = 0


DEFAULT_MAX_NODES = 200_000
DEFAULT_MAX_DEPTH = 10_000
_ELIDE_HEIGHT_SLACK = 64
_ELIDE_RUN_LIMIT = 10_000


class Builder:
    def __init__(self, program: Program, gen: Gensym | None = None,
                 max_nodes: int = DEFAULT_MAX_NODES,
                 max_depth: int = DEFAULT_MAX_DEPTH,
                 lateral: bool = True):
        self.program = program
        self.gen = gen or Gensym()
        self.max_nodes = max_nodes
        self.max_depth = max_depth
        self.lateral = lateral
        self.count = 0
        self.path: list[Node] = []
        self.by_names: dict[tuple, list[Node]] = {}
        self.emb = Embedder()
        self.trace = Trace()
        self.no_gen: set[tuple] = set()
        # Completed step nodes, indexed for lateral folding.  A new
        # configuration that is an instance of a finished one can call its
        # residual function instead of being re-driven; in depth-first
        # order a finished node is only ever discarded together with every
        # node created after it, so such references cannot dangle as long
        # as entries from abandoned drive attempts are purged.
        self.done: dict[tuple, list[Node]] = {}
        self.done_log: list[Node] = []

    # -- bookkeeping --------------------------------------------------

    def _new(self, kind: str) -> Node:
        self.count += 1
        if self.count > self.max_nodes:
            raise BudgetExceeded(
                f"graph exceeded {self.max_nodes} nodes")
        return Node(self.count, kind)

    def _push(self, node: Node) -> None:
        if len(self.path) >= self.max_depth:
            raise BudgetExceeded(
                f"driving exceeded depth {self.max_depth}")
        self.path.append(node)
        self.by_names.setdefault(node.config.names(), []).append(node)

    def _pop(self, node: Node) -> None:
        self.path.pop()
        self.by_names[node.config.names()].remove(node)

    def _remember(self, node: Node) -> None:
        self.done.setdefault(node.config.names(), []).append(node)
        self.done_log.append(node)

    def _purge_done(self, mark: int) -> None:
        for n in self.done_log[mark:]:
            self.done[n.config.names()].remove(n)
        del self.done_log[mark:]

    # -- entry point --------------------------------------------------

    def build(self, root_seq: Seq) -> Node:
        return self._task(root_seq, (), (HOLE,))

    # -- tasks ----------------------------------------------------------

    def _task(self, seq: Seq, rest: tuple[Frame, ...], tail: Seq) -> Node:
        return self._ext(extend_config(seq, rest, tail, self.gen))

    def _ext(self, ext) -> Node:
        if ext[0] == "value":
            node = self._new("value")
            node.value = ext[1]
            return node
        if ext[0] == "config":
            return self._config_node(ext[1])
        _, binder, head, cont, rest, tail = ext
        return self._let(binder, head.frames, cont, rest, tail)

    # -- let handling ---------------------------------------------------

    def _let(self, binder: str, head_frames: tuple[Frame, ...], cont: Seq,
             rest: tuple[Frame, ...], tail: Seq) -> Node:
        head_cfg = Config(head_frames, (HOLE,))
        seen = {canon_config(head_cfg)}
        start_height = len(head_cfg.frames)
        elided = 0
        while True:
            results = explore(head_cfg, self.program, self.gen)
            if len(results) != 1:
                break
            theta, rhs, ncfg = results[0]
            if theta:
                break
            if rhs is None:
                # The head deterministically reaches a stuck call, so the
                # whole expression does.
                return self._new("bottom")
            ext = extend_config(rhs, ncfg.frames[1:], ncfg.tail, self.gen)
            if ext[0] == "value":
                # Finished head: propagate the value into the continuation.
                return self._task(subst_seq(cont, {binder: ext[1]}),
                                  rest, tail)
            if ext[0] != "config":
                break
            ncfg = ext[1]
            if len(ncfg.frames) > start_height + _ELIDE_HEIGHT_SLACK:
                break
            key = canon_config(ncfg)
            if key in seen:
                break
            seen.add(key)
            elided += 1
            self.trace.elided += 1
            if elided >= _ELIDE_RUN_LIMIT:
                break
            head_cfg = ncfg
        node = self._new("let")
        node.binder = binder
        head_node = self._config_node(head_cfg)
        cont_node = self._task(cont, rest, tail)
        node.children = [(None, head_node), (None, cont_node)]
        return node

    # -- configuration nodes ----------------------------------------------

    def _config_node(self, cfg: Config) -> Node:
        # Fold: an instance of the most recent same-named ancestor.
        for anc in reversed(self.by_names.get(cfg.names(), ())):
            th = match_instance(anc.config, cfg)
            if th is not None:
                node = self._new("fold")
                node.config = cfg
                node.fold_target = anc
                node.theta = th
                self.trace.folds += 1
                return node
        # Lateral fold: an instance of a configuration finished earlier in
        # a sibling branch.  Without this, a shape whose loop has already
        # been closed elsewhere would be compared against far-away path
        # ancestors and could be generalized with the wrong control state.
        for anc in reversed(self.done.get(cfg.names(), ()) if self.lateral
                            else ()):
            th = match_instance(anc.config, cfg)
            if th is not None:
                node = self._new("fold")
                node.config = cfg
                node.fold_target = anc
                node.theta = th
                self.trace.lateral_folds += 1
                return node
        # Whistle.
        for anc in reversed(self.path):
            if suffix_related(anc.config, cfg):
                if split_veto(anc.config, cfg, self.emb):
                    raise _Replace(anc, ("split", cfg))
                self.trace.veto_continues += 1
                break
            if flat_related(anc.config, cfg, self.emb) and \
                    (anc.id, canon_config(cfg)) not in self.no_gen:
                raise _Replace(anc, ("gen", cfg))
        node = self._new("step")
        node.config = cfg
        while True:
            mark = len(self.done_log)
            self._push(node)
            action = None
            try:
                self._drive(node)
                self._remember(node)
                return node
            except _Replace as r:
                if r.node is not node:
                    raise
                action = r.action
            finally:
                self._pop(node)
            # The attempt's subtree is discarded on every route below, so
            # nodes it registered must not attract lateral folds.
            self._purge_done(mark)
            if action[0] == "split":
                return self._split_into(node, action[1])
            got = msg_config(node.config, action[1], self.gen)
            if got is None:
                # The two shapes cannot be abstracted without losing the
                # result slot; remember that and drive this node onward.
                self.no_gen.add((node.id, canon_config(action[1])))
                self.trace.msg_failures += 1
                node.children = []
                continue
            general, theta_anc, _ = got
            node.kind = "gen"
            node.gen_theta = theta_anc
            node.gen_desc = action[1]
            self.trace.gens += 1
            child = self._config_node(general)
            node.children = [(theta_anc, child)]
            return node

    def _drive(self, node: Node) -> None:
        results = explore(node.config, self.program, self.gen)
        children: list[tuple[Subst | None, Node]] = []
        for theta, rhs, ncfg in results:
            if rhs is None:
                child = self._new("bottom")
            else:
                child = self._task(rhs, ncfg.frames[1:], ncfg.tail)
            children.append((theta, child))
        node.children = children

    def _split_into(self, node: Node, desc: Config) -> Node:
        cfg = node.config
        c = shared_context_len(cfg, desc)
        cut = len(cfg.frames) - c
        assert cut >= 1 and c >= 1
        binder = self.gen.ev()
        head = Config(cfg.frames[:cut], (HOLE,))
        lead = fill_frame(cfg.frames[cut], ((("ev", binder),)))
        context = Config((lead,) + cfg.frames[cut + 1:], cfg.tail)
        node.kind = "let"
        node.binder = binder
        self.trace.splits += 1
        head_node = self._config_node(head)
        ctx_node = self._config_node(context)
        node.children = [(None, head_node), (None, ctx_node)]
        return node


def build_graph(program: Program, root_seq: Seq,
                max_nodes: int = DEFAULT_MAX_NODES,
                max_depth: int = DEFAULT_MAX_DEPTH,
                lateral: bool = True) -> tuple[Node, Trace]:
    builder = Builder(program, max_nodes=max_nodes, max_depth=max_depth,
                      lateral=lateral)
    root = builder.build(root_seq)
    return root, builder.trace


# ---------------------------------------------------------------------------
# Walking and dumping
# ---------------------------------------------------------------------------

def iter_nodes(root: Node):
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


def _edge_label(theta: Subst | None) -> str:
    if theta is None:
        return ""
    return "; ".join(f"{k} -> {image_to_str(v)}"
                     for k, v in sorted(theta.items()))


def graph_to_json(root: Node) -> str:
    nodes = []
    for n in iter_nodes(root):
        entry: dict = {"id": n.id, "kind": n.kind}
        if n.config is not None:
            entry["config"] = config_to_str(n.config)
        if n.kind == "value":
            entry["value"] = seq_to_str(n.value)
        if n.kind == "let":
            entry["binder"] = n.binder
        if n.kind == "fold":
            entry["target"] = n.fold_target.id
            entry["theta"] = _edge_label(n.theta)
        entry["children"] = [
            {"to": c.id, "label": _edge_label(th)}
            for th, c in n.children
        ]
        nodes.append(entry)
    return json.dumps({"format": "scpgraph-v1", "root": root.id,
                       "nodes": nodes}, indent=1)


# ---------------------------------------------------------------------------
# Trace monitors
# ---------------------------------------------------------------------------

def _timed_frames(cfg: Config, fname: str) -> set[tuple[str, int]]:
    return {(f.fname, f.time) for f in cfg.frames if f.fname == fname}


def monitor_no_shared_matching_frame(root: Node, fname: str = "Matching") -> list:
    """Fold and generalization pairs must not share a live timed frame
    of the given name: loop closure happens between iterations, never
    inside one."""
    bad = []
    for n in iter_nodes(root):
        if n.kind == "fold":
            shared = _timed_frames(n.config, fname) & \
                _timed_frames(n.fold_target.config, fname)
            if shared:
                bad.append(("fold", n.id, sorted(shared)))
        elif n.kind == "gen":
            shared = _timed_frames(n.config, fname) & \
                _timed_frames(n.gen_desc, fname)
            if shared:
                bad.append(("gen", n.id, sorted(shared)))
    return bad


def _atom_count(seq: Seq) -> int:
    n = 0
    for a in seq:
        n += 1
        if not isinstance(a, str):
            if a[0] == "par":
                n += _atom_count(a[1])
            elif a[0] == "call":
                n += sum(_atom_count(s) for s in a[2])
    return n


def monitor_branch_heads(root: Node, head: str = "Match") -> list:
    """Every non-transitive driving node (more than one child, or a single
    child reached under a contraction) must have a leading ``head``
    frame.  Returns the offending (id, leading name, child count)."""
    bad = []
    for n in iter_nodes(root):
        if n.kind != "step":
            continue
        if len(n.children) == 1 and not n.children[0][0]:
            continue
        if not (n.config.frames and n.config.frames[0].fname == head):
            lead = n.config.frames[0].fname if n.config.frames else None
            bad.append((n.id, lead, len(n.children)))
    return bad


def monitor_matcher_descent(root: Node, head: str = "Match") -> list:
    """Along every path, the combined first-argument size over all
    ``head`` frames (frame count breaking ties) strictly decreases from
    one ``head``-led configuration to the next.  Returns the offending
    (id, previous measure, measure)."""
    bad = []

    def measure(cfg: Config) -> tuple[int, int]:
        sizes = [_atom_count(f.args[0]) for f in cfg.frames
                 if f.fname == head]
        return (sum(sizes), len(sizes))

    def walk(node: Node, prev: tuple[int, int] | None) -> None:
        here = prev
        if node.kind == "step" and node.config.frames and \
                node.config.frames[0].fname == head:
            m = measure(node.config)
            if prev is not None and m >= prev:
                bad.append((node.id, prev, m))
            here = m
        for _, c in node.children:
            walk(c, here)

    walk(root, None)
    return bad


def abstraction_shape_report(root: Node, head: str = "Match",
                             mid: str = "Matching",
                             below: str = "Eval") -> dict:
    """Classify the loop closures of a graph over interpreter stacks.

    Folds that occur before the first generalization are sorted into
    matcher-shaped ones (leading ``head`` frame with a ``mid`` frame and
    ``below`` beneath it) and evaluator-shaped ones (no matcher frames at
    all); anything else lands in ``other_folds``.  ``exhausted_head_folds``
    counts matcher folds whose leading frame has already consumed its
    whole pattern argument.  The first generalization's frame names are
    reported alongside."""

    def classify(cfg: Config) -> tuple[str, bool]:
        names = [f.fname for f in cfg.frames]
        if names and names[0] == head and mid in names and \
                below in names[names.index(mid):]:
            return "matcher", cfg.frames[0].args[0] == ()
        if head not in names and mid not in names:
            return "evaluator", False
        return "other", False

    gens = sorted((n for n in iter_nodes(root) if n.kind == "gen"),
                  key=lambda n: n.id)
    first_gen = gens[0] if gens else None
    report = {"matcher_folds": 0, "exhausted_head_folds": 0,
              "evaluator_folds": 0, "other_folds": [], "first_gen": None}
    for n in iter_nodes(root):
        if n.kind != "fold" or (first_gen and n.id >= first_gen.id):
            continue
        kind_here, exhausted = classify(n.config)
        kind_target, _ = classify(n.fold_target.config)
        if kind_here == kind_target == "matcher":
            report["matcher_folds"] += 1
            report["exhausted_head_folds"] += exhausted
        elif kind_here == kind_target == "evaluator":
            report["evaluator_folds"] += 1
        else:
            report["other_folds"].append(n.id)
    if first_gen is not None:
        report["first_gen"] = {
            "node": first_gen.id,
            "heads": ([f.fname for f in first_gen.config.frames],
                      [f.fname for f in first_gen.gen_desc.frames]),
            "matcher_shaped": (
                classify(first_gen.config)[0] == "matcher"
                and classify(first_gen.gen_desc)[0] == "matcher"),
        }
    return report
