import pytest

from supercheck.config import template_to_seq, value_to_seq
from supercheck.driver import UnsupportedNonlinearPattern, build_graph
from supercheck.residual import (_drop_shadowed, _is_linear,
                                 patterns_may_overlap, residualize,
                                 seq_to_pattern)
from supercheck.semantics import expr_to_value, run_outcome
from supercheck.syntax import (PConsP, PConsS, PConsSym, PEVar, PNil, Sym,
                               parse_expr, parse_program, render_program)


def pat(text: str):
    """Pattern literal via the expression parser on ground-ish syntax."""
    return seq_to_pattern(value_to_seq(expr_to_value(parse_expr(text))))


def test_seq_to_pattern_round_trips_shapes():
    p = seq_to_pattern((("sv", "a"), ("par", ("iB",)), ("ev", "r")))
    assert p == PConsS("a", PConsP(PConsSym(Sym("id", "B"), PNil()),
                                   PEVar("r")))


def test_seq_to_pattern_rejects_mid_sequence_parameters():
    with pytest.raises(UnsupportedNonlinearPattern):
        seq_to_pattern((("ev", "r"), "iA"))


def test_overlap_is_conservative_but_sees_disjoint_symbols():
    a = pat("A : []")
    b = pat("B : []")
    assert not patterns_may_overlap(a, b)
    assert patterns_may_overlap(a, pat("A : []"))
    assert patterns_may_overlap(PEVar("x"), b)
    # a symbol can collide with a term variable, never with a paren
    assert patterns_may_overlap(a, PConsS("s", PNil()))
    assert not patterns_may_overlap(a, PConsP(PNil(), PNil()))


def test_linear_check_counts_repeats():
    assert _is_linear((PConsS("a", PEVar("r")),))
    assert not _is_linear((PConsS("a", PConsS("a", PEVar("r"))),))
    # repeats across arguments count too
    assert not _is_linear((PEVar("r"), PEVar("r")))


def test_shadowed_rules_drop_only_under_linear_generals():
    prog = parse_program("""
    F(e.x) => Q : [];
    F(A : e.r) => Z : [];
    G(s.a : s.a : e.r) => Q : [];
    G(A : A : e.r) => Z : [];
    """)
    cleaned = _drop_shadowed(prog)
    f, g = cleaned.defs
    # the linear catch-all shadows the specific rule
    assert len(f.rules) == 1
    # the nonlinear general must NOT shadow: it matches less than it looks
    assert len(g.rules) == 2


def test_entry_definition_keeps_requested_name_and_shape(synapse):
    root, _ = build_graph(synapse, template_to_seq("Main(e.d1)"))
    res = residualize(root, "Main", (PEVar("d1"),))
    assert res.defs[0].name == "Main"
    assert res.defs[0].rules[0].patterns == (PEVar("d1"),)
    # helper names do not collide with the entry
    names = [d.name for d in res.defs]
    assert len(names) == len(set(names))


def test_residual_rule_order_is_deterministic(synapse):
    texts = set()
    for _ in range(3):
        root, _ = build_graph(synapse, template_to_seq("Main(e.d1)"))
        res = residualize(root, "Main", (PEVar("d1"),))
        texts.add(render_program(res))
    assert len(texts) == 1


def test_residual_of_branching_match_keeps_order_semantics():
    # first-match-wins order must survive residualization
    src = """
    Pick(A : e.r) => One : [];
    Pick(s.x : e.r) => Two : [];
    Pick(e.x) => Rest : [];
    """
    prog = parse_program(src)
    root, _ = build_graph(prog, template_to_seq("Pick(e.q)"))
    res = residualize(root, "Pick", (PEVar("q"),))
    for text in ["A : []", "B : []", "'a' : []", "[]", "(A) : []"]:
        v = expr_to_value(parse_expr(text))
        assert run_outcome(prog, "Pick", (v,)) == \
            run_outcome(res, "Pick", (v,)), text
