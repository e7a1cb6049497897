import pytest

from supercheck.encoding import EncodingError, prog_ref
from supercheck.oracle import COHERENCE_TABLE, run as oracle_run
from supercheck.selfint import (INT_ENTRY, build_interpreted, int_args,
                                int_root_seq, interpret_call,
                                load_corpus_program, matcher_probe_seq)
from supercheck.semantics import (BottomError, expr_to_value, render_value,
                                  run_call, run_outcome)
from supercheck.syntax import parse_expr, parse_program


def outcome_via(prog, name, entry, v):
    try:
        return ("value", interpret_call(prog, name, entry, v))
    except BottomError:
        return ("bottom",)


def outcome_native(prog, entry, v):
    got = run_outcome(prog, entry, (v,))
    return ("bottom",) if got[0] == "bottom" else ("value", got[1])


def test_interpreter_structure(interpreter):
    names = [d.name for d in interpreter]
    assert names == ["Int", "Eval", "EvalCall", "Matching", "Match",
                     "PutVar", "PutV", "CheckRepVar", "Eq", "ContEq",
                     "LookFor", "Subst"]
    assert sum(len(d.rules) for d in interpreter) == 31


def protocol_datum(events, seed):
    text = "(" + (" ".join(events) or "[]") + ") : (" \
        + (" ".join(["I"] * seed) or "[]") + ")"
    return expr_to_value(parse_expr(text))


def test_interpreted_model_agrees_on_protocol_strings(synapse):
    cases = ["([]) : ([])", "(rm) : ([])", "(wm) : (Junk)",
             "(wh2 wm) : ([])", "(rm wh2 wm) : (I)"]
    for text in cases:
        v = expr_to_value(parse_expr(text))
        assert outcome_via(synapse, "synapse", "Main", v) == \
            outcome_native(synapse, "Main", v), text


def test_interpreted_outcomes_match_the_oracle(synapse):
    for events, seed in [((), 0), (("rm",), 1), (("wm", "wh2"), 0),
                         (("rm", "wh2", "wm"), 2)]:
        want = oracle_run(events, seed, COHERENCE_TABLE)
        got = outcome_via(synapse, "synapse", "Main",
                          protocol_datum(events, seed))
        if want == "Bottom":
            assert got == ("bottom",)
        else:
            assert got == ("value", ("i" + want,))


def test_nonlinear_patterns_expose_the_interpreter_divergence():
    # The environment scan drops already-bound variables when it hits a
    # repeat, so the interpreted run gets stuck where the native matcher
    # succeeds.  Linear programs (the whole corpus) never take that path.
    prog = parse_program("F(s.x : s.y : s.x) => s.y : [];")
    v = expr_to_value(parse_expr("A : B : A : []"))
    assert outcome_native(prog, "F", v) == ("value", ("iB",))
    assert outcome_via(prog, "nonlin", "F", v) == ("bottom",)
    # agreement is restored on inputs that never bind past the repeat
    miss = expr_to_value(parse_expr("A : B : C : []"))
    assert outcome_native(prog, "F", miss) == ("bottom",)
    assert outcome_via(prog, "nonlin", "F", miss) == ("bottom",)


def test_int_args_shape():
    v = expr_to_value(parse_expr("A : []"))
    args = int_args("Main", v, "synapse")
    assert len(args) == 2
    (call,) = args[0]
    assert call[0] == "iCall" and call[1] == "iMain"
    assert args[1] == (("iProg", "isynapse"),)


def test_int_root_seq_shape():
    (root,) = int_root_seq("Main", "synapse")
    assert root[0] == "call" and root[1] == INT_ENTRY
    enc_call, enc_prog = root[2]
    assert enc_call[0][0] == "par"
    assert enc_call[0][1][:2] == ("iCall", "iMain")
    assert ("ev", "d") in enc_call[0][1]
    assert enc_prog[0] == ("par", ("iProg", "isynapse"))


def test_matcher_probe_seq_shape(synapse):
    pattern = synapse.by_name["Main"].rules[0].patterns[0]
    (root,) = matcher_probe_seq(pattern)
    assert root[0] == "call" and root[1] == "Match"
    enc_pat, data, env = root[2]
    assert data == (("ev", "d"),)
    assert env == (("par", ()),)
    assert enc_pat  # encoded pattern is non-empty


def test_interpreter_cannot_interpret_itself(interpreter):
    with pytest.raises(EncodingError):
        build_interpreted(interpreter, "self")


def test_prog_lookup_serves_the_encoded_program(synapse):
    combined = build_interpreted(synapse, "synapse")
    # the lookup function takes the bare program name
    encoded = run_call(combined, "Prog", [("isynapse",)])
    from supercheck.encoding import decode_program
    assert decode_program((encoded,)).defs == synapse.defs


def test_mutants_stay_interpretable(mutants):
    v = expr_to_value(parse_expr("(wm : []) : ([])"))
    for name, prog in mutants.items():
        assert outcome_via(prog, name, "Main", v) == \
            outcome_native(prog, "Main", v), name
