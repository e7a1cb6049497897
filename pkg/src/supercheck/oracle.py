"""Independent reference model for the bundled cache-coherence corpus.

The protocol state is abstracted to three unary counters (invalid,
dirty, valid lines).  This module recomputes run outcomes directly on
integers, with no shared code with the rewriting semantics, so the two
routes can be compared in tests.

Outcomes mirror the language-level observations:

* ``"True"``  - the run finished and the final state is safe,
* ``"False"`` - the run finished and the final state is unsafe,
* ``"Bottom"`` - some event's guard could not fire (the rewriting
  system gets stuck, which counts as safe behaviour).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable

EVENTS = ("rm", "wh2", "wm")

State = tuple[int, int, int]  # (invalid, dirty, valid)

# One transition per event: guard on the current state, then the next
# state.  Returns None when the guard fails.
Transition = Callable[[State], State | None]


def _rm(state: State) -> State | None:
    i, d, v = state
    if i < 1:
        return None
    return (d + (i - 1), 0, v + 1)


def _wh2(state: State) -> State | None:
    i, d, v = state
    if v < 1:
        return None
    return ((v - 1) + d + i, 1, 0)


def _wm(state: State) -> State | None:
    i, d, v = state
    if i < 1:
        return None
    return (v + d + (i - 1), 1, 0)


COHERENCE_TABLE: dict[str, Transition] = {"rm": _rm, "wh2": _wh2, "wm": _wm}


def is_unsafe(state: State) -> bool:
    _, d, v = state
    return (d >= 1 and v >= 1) or d >= 2


def initial_state(seed: int) -> State:
    """State before any event: 1 + seed invalid lines, nothing cached."""
    return (1 + seed, 0, 0)


def run(events: Iterable[str], seed: int,
        table: dict[str, Transition] = COHERENCE_TABLE) -> str:
    state = initial_state(seed)
    for ev in events:
        nxt = table[ev](state)
        if nxt is None:
            return "Bottom"
        state = nxt
    return "False" if is_unsafe(state) else "True"


@dataclass(frozen=True, slots=True)
class Violation:
    events: tuple[str, ...]
    seed: int


def search_violations(max_len: int, max_seed: int,
                      table: dict[str, Transition] = COHERENCE_TABLE) -> list[Violation]:
    """Exhaustively enumerate event strings up to ``max_len`` and seeds
    0..max_seed, collecting the runs that end unsafe."""
    found: list[Violation] = []
    for seed in range(max_seed + 1):
        for n in range(max_len + 1):
            for events in product(EVENTS, repeat=n):
                if run(events, seed, table) == "False":
                    found.append(Violation(events, seed))
    return found


def all_cases(max_len: int, seeds: Iterable[int]) -> list[tuple[tuple[str, ...], int]]:
    """The full (events, seed) grid used by the exhaustive agreement check."""
    cases = []
    for seed in seeds:
        for n in range(max_len + 1):
            for events in product(EVENTS, repeat=n):
                cases.append((events, seed))
    return cases


# Transition tables for the bundled unsafe mutants, derived rule by rule
# from their sources (each differs from COHERENCE_TABLE in one event).

def _wm_double_dirty(state: State) -> State | None:
    i, d, v = state
    if i < 1:
        return None
    return (v + d + (i - 1), 2, 0)


def _wm_keeps_valid(state: State) -> State | None:
    i, d, v = state
    if i < 1:
        return None
    return (d + (i - 1), 1, v)


def _rm_keeps_dirty(state: State) -> State | None:
    i, d, v = state
    if i < 1:
        return None
    return (d + (i - 1), d, v + 1)


MUTANT_TABLES: dict[str, dict[str, Transition]] = {
    "wm_double_dirty": {**COHERENCE_TABLE, "wm": _wm_double_dirty},
    "wm_keeps_valid": {**COHERENCE_TABLE, "wm": _wm_keeps_valid},
    "rm_keeps_dirty": {**COHERENCE_TABLE, "rm": _rm_keeps_dirty},
}

# Shortest violating runs, frozen by hand from the tables above:
#   wm_double_dirty: wm from (1,0,0) -> (0,2,0), two dirty lines.
#   wm_keeps_valid:  rm (2,0,0)->(1,0,1), wm -> (1,1,1), dirty next to valid.
#   rm_keeps_dirty:  wm (2,0,0)->(1,1,0), rm -> (1,1,1), dirty next to valid.
MUTANT_WITNESSES: dict[str, Violation] = {
    "wm_double_dirty": Violation(("wm",), 0),
    "wm_keeps_valid": Violation(("rm", "wm"), 1),
    "rm_keeps_dirty": Violation(("wm", "rm"), 1),
}
