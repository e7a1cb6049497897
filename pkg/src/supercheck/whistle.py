"""Loop detection over configuration stacks.

Two complementary relations between an ancestor configuration and a
descendant on the same driving path:

* ``suffix_related`` - the stacks share a nonempty bottom segment of
  frames created at the same moments (same name and same timestamp),
  the ancestor has at least one frame above that shared segment, the
  descendant is at least as tall, and the frames above the shared
  segment agree in name from the top down.  This spots a recursive
  descent that keeps stacking context.  It is deliberately irreflexive
  (the shared segment is maximal, so a configuration compared with
  itself has nothing above it) and not transitive.

* ``flat_related`` - equal-height stacks with pointwise equal names
  whose arguments and tails embed argwise.  This spots tail-recursive
  loops that never grow the stack, which the first relation can never
  catch because iterations share no timed frames.

When ``suffix_related`` holds, an argument-wise embedding check decides
between splitting the ancestor (stack growth with repeating argument
shapes) and driving on (arguments still shrinking toward a base case).
"""

from __future__ import annotations

from .config import Config, Embedder


def shared_context_len(anc: Config, desc: Config) -> int:
    """Length of the maximal common bottom segment of timed frames."""
    n = 0
    for fa, fb in zip(reversed(anc.frames), reversed(desc.frames)):
        if fa.fname != fb.fname or fa.time != fb.time:
            break
        n += 1
    return n


def suffix_related(anc: Config, desc: Config) -> bool:
    c = shared_context_len(anc, desc)
    if c < 1:
        return False
    k, m = len(anc.frames), len(desc.frames)
    if k > m or k - c < 1:
        return False
    for i in range(k - c):
        if anc.frames[i].fname != desc.frames[i].fname:
            return False
    return True


def split_veto(anc: Config, desc: Config, emb: Embedder) -> bool:
    """After ``suffix_related`` holds: True means the old arguments embed
    into the new ones (nothing is shrinking), so split; False means keep
    driving."""
    k = len(anc.frames)
    c = shared_context_len(anc, desc)
    for i in range(k - c):
        fa, fb = anc.frames[i], desc.frames[i]
        if len(fa.args) != len(fb.args):
            return False
        for sa, sb in zip(fa.args, fb.args):
            if not emb.seq(sa, sb):
                return False
    return emb.seq(anc.tail, desc.tail)


def flat_related(anc: Config, desc: Config, emb: Embedder) -> bool:
    if len(anc.frames) != len(desc.frames):
        return False
    if anc.names() != desc.names():
        return False
    for fa, fb in zip(anc.frames, desc.frames):
        if len(fa.args) != len(fb.args):
            return False
        for sa, sb in zip(fa.args, fb.args):
            if not emb.seq(sa, sb):
                return False
    return emb.seq(anc.tail, desc.tail)
