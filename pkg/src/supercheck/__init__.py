"""supercheck: a supercompilation-based safety verifier for a small
first-order sequence-rewriting language.

The package can run programs directly, run them through a bundled
self-interpreter on encoded inputs, specialize the interpreter with
respect to a program (producing a compiled residual), and prove safety
properties by checking that no residual ever mentions the ``False``
symbol.
"""

from .syntax import parse_program, parse_expr, render_expr, render_program
from .semantics import run_call, run_outcome, BottomError
from .encoding import encode_program, decode_program
from .selfint import interpret_call, load_corpus_program, load_interpreter
from .driver import build_graph, graph_to_json
from .residual import residualize
from .verify import verify_program, VerifyResult

__all__ = [
    "parse_program", "parse_expr", "render_expr", "render_program",
    "run_call", "run_outcome", "BottomError",
    "encode_program", "decode_program",
    "interpret_call", "load_corpus_program", "load_interpreter",
    "build_graph", "graph_to_json", "residualize",
    "verify_program", "VerifyResult",
]

__version__ = "0.1.0"
