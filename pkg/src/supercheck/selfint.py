"""Running programs through the bundled self-interpreter.

The interpreter (``corpus/selfint.l``) evaluates encoded calls against
an encoded program that it looks up by name through a synthesized
``Prog`` function.  Its own source is outside the encodable fragment
(it is not unary and uses ``++``), so it cannot be stacked on itself;
:func:`build_interpreted` rejects the attempt cleanly.
"""

from __future__ import annotations

from importlib import resources

from . import encoding
from .semantics import Value, run_call, DEFAULT_STEP_BUDGET
from .syntax import Program, parse_program

INT_ENTRY = "Int"


def corpus_text(name: str) -> str:
    """Text of a bundled corpus file, e.g. ``synapse.l`` or
    ``mutations/wm_double_dirty.l``."""
    root = resources.files("supercheck") / "corpus"
    return (root / name).read_text()


def load_interpreter() -> Program:
    return parse_program(corpus_text("selfint.l"))


def load_corpus_program(name: str) -> Program:
    return parse_program(corpus_text(name))


def build_interpreted(prog: Program, prog_name: str) -> Program:
    """The interpreter plus ``Prog(<name>) => <encoded prog>;``."""
    interp = load_interpreter()
    lookup = Program((encoding.make_prog_function(prog_name, prog),))
    return interp.extended(lookup)


def int_args(entry: str, data: Value, prog_name: str) -> list[Value]:
    """Arguments for ``Int``: the encoded call and the program name."""
    call = encoding.encoded_call(entry, encoding.encode_value(data))
    return [(call,), (encoding.prog_ref(prog_name),)]


def int_root_seq(entry: str, prog_name: str) -> "tuple":
    """Driving root for specializing the interpreter to a program: the
    interpreted entry call over fully parametric data."""
    from .config import value_to_seq
    call = (encoding.CALL, "i" + entry, ("ev", "d"))
    return (("call", INT_ENTRY, (
        (("par", call),),
        (("par", value_to_seq(encoding.prog_ref(prog_name))),),
    )),)


def matcher_probe_seq(pattern) -> "tuple":
    """Driving root for one encoded pattern against fully parametric
    data and an empty environment."""
    from .config import value_to_seq
    return (("call", "Match", (
        value_to_seq(encoding.encode_pattern(pattern)),
        (("ev", "d"),),
        (("par", ()),),
    )),)


def interpret_call(prog: Program, prog_name: str, entry: str, data: Value,
                   budget_limit: int = DEFAULT_STEP_BUDGET) -> Value:
    """Run ``entry(data)`` through the interpreter and decode the result.
    Raises BottomError when the interpreted program gets stuck."""
    combined = build_interpreted(prog, prog_name)
    encoded = run_call(combined, INT_ENTRY, int_args(entry, data, prog_name), budget_limit)
    return encoding.decode_value(encoded)
