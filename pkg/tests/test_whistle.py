from supercheck.config import Config, Embedder, Frame, HOLE
from supercheck.whistle import (flat_related, shared_context_len, split_veto,
                                suffix_related)


def stack(*frames):
    """Config from (name, time) pairs listed top-first; trivial slots."""
    built = []
    for i, (name, time) in enumerate(frames):
        args = ((HOLE,),) if i > 0 else (("iA",),)
        built.append(Frame(name, args, time))
    return Config(tuple(built), (HOLE,))


def test_shared_context_counts_timed_frames_from_the_bottom():
    a = stack(("G", 5), ("F", 2), ("T", 1))
    b = stack(("H", 8), ("F", 2), ("T", 1))
    assert shared_context_len(a, b) == 2
    c = stack(("G", 5), ("F", 2), ("T", 9))
    assert shared_context_len(a, c) == 0


def test_suffix_related_needs_growth_over_a_shared_base():
    anc = stack(("G", 5), ("F", 2), ("T", 1))
    desc = stack(("G", 9), ("H", 8), ("F", 2), ("T", 1))
    assert suffix_related(anc, desc)
    # top-down names above the shared segment must agree
    off = stack(("K", 9), ("H", 8), ("F", 2), ("T", 1))
    assert not suffix_related(anc, off)
    # irreflexive: everything is shared, nothing sits above it
    assert not suffix_related(anc, anc)
    # descendant may not be shorter
    assert not suffix_related(desc, anc)


def test_suffix_related_is_not_transitive():
    a = stack(("G", 5), ("F", 2), ("T", 1))
    b = stack(("G", 9), ("H", 8), ("F", 2), ("T", 1))
    c = stack(("G", 13), ("H", 12), ("G", 5), ("F", 2), ("T", 1))
    assert suffix_related(a, b)
    assert suffix_related(b, c)
    # a's top frame G@5 is *shared* with c, leaving nothing above
    assert not suffix_related(a, c)


def test_split_veto_compares_arguments_argwise():
    emb = Embedder()
    base = Frame("T", (("iA",),), 1)
    anc = Config((Frame("F", ((("sv", "x"),),), 2), base), (HOLE,))
    grown = Config((Frame("F", ((("sv", "y"), ("sv", "z")),), 7),
                    Frame("F", ((HOLE,),), 6), base), (HOLE,))
    shrunk = Config((Frame("F", ((),), 7),
                     Frame("F", ((HOLE,),), 6), base), (HOLE,))
    assert suffix_related(anc, grown) and suffix_related(anc, shrunk)
    # old argument embeds into the new one: stop and split
    assert split_veto(anc, grown, emb)
    # argument got strictly smaller: keep driving
    assert not split_veto(anc, shrunk, emb)


def test_flat_related_spots_same_shape_loops():
    emb = Embedder()
    a = Config((Frame("F", (("iA",),), 1),), (HOLE,))
    b = Config((Frame("F", (("iA", "iB"),), 9),), (HOLE,))
    assert flat_related(a, b, emb)
    assert not flat_related(b, a, emb)  # embedding direction matters
    other = Config((Frame("G", (("iA", "iB"),), 9),), (HOLE,))
    assert not flat_related(a, other, emb)


def test_embedding_basics():
    emb = Embedder()
    assert emb.seq((), ("iA",))
    assert emb.seq(("iA",), ("iB", "iA"))
    assert not emb.seq(("iA",), ("iB",))
    # diving into parentheses
    assert emb.seq(("iA",), (("par", ("iX", "iA")),))
    # coupling parentheses
    assert emb.seq((("par", ("iA",)),), (("par", ("iA", "iB")),))
    # parameters embed by kind
    assert emb.atom(("ev", "x"), ("ev", "y"))
    assert emb.atom(("sv", "x"), ("sv", "y"))
    assert not emb.atom(("sv", "x"), ("ev", "y"))


def test_embedding_keeps_counters_apart():
    emb = Embedder()
    # an empty group does not couple with a one-symbol group ...
    assert not emb.atom(("par", ()), ("par", ("iI",)))
    assert not emb.atom(("par", ()), ("par", (("sv", "n"),)))
    # ... but does with anything wider, and by diving it still relates
    assert emb.atom(("par", ()), ("par", ("iI", "iI")))
    assert emb.seq((("par", ()),), ("iX", ("par", ()),))
