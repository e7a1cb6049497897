from pathlib import Path

from goldens import PKG_CORPUS, TOP_CORPUS, golden_texts
from supercheck.selfint import corpus_text
from supercheck.syntax import parse_program


def test_residuals_match_the_frozen_goldens():
    for fname, text in golden_texts().items():
        assert corpus_text(f"golden/{fname}") == text, fname


def test_both_corpus_copies_agree():
    for root in (PKG_CORPUS / "golden", TOP_CORPUS / "golden"):
        assert sorted(p.name for p in root.glob("*.l")) == [
            "rm_keeps_dirty_direct.l", "synapse_direct.l", "synapse_via.l",
            "wm_double_dirty_direct.l", "wm_keeps_valid_direct.l"]
    for p in (PKG_CORPUS / "golden").glob("*.l"):
        assert (TOP_CORPUS / "golden" / p.name).read_text() == p.read_text()


def test_goldens_are_valid_programs():
    for p in (PKG_CORPUS / "golden").glob("*.l"):
        prog = parse_program(p.read_text())
        assert prog.defs, p.name


def test_safe_goldens_never_mention_the_unsafe_answer():
    for fname in ("synapse_direct.l", "synapse_via.l"):
        assert "False" not in corpus_text(f"golden/{fname}"), fname
