"""Compiler tests: tape encodings, emitted game shape, dead-end labeling,
machine equivalence on a corpus slice, and the global safety scan.

The full-corpus equivalence run lives in the acceptance suite; here a
two-machine slice keeps the default run fast while covering both labeling
modes and both encodings.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prbatl import checker, lbatm, model
from prbatl.compile import (
    REDUCTION_FORMULA,
    CompileError,
    compile_digit,
    compile_unary,
    decode_tape,
    digit_game,
    encode_tape,
    max_value,
    safety_report,
    tape_errors,
    unary_game,
)
from prbatl.corpus import entry
from prbatl.hier import flatten_info

WORKED_TAPE = "<B11211B2BB>"


# ---------------------------------------------------------------------------
# Encodings


def test_encode_worked_triple():
    assert encode_tape(WORKED_TAPE, 5) == (30112, 1, 400201)


def test_encode_rightmost_cell_is_least_significant():
    # right part reads toward the head: cells "2", ">" give digits 4, 2
    assert encode_tape("<12>", 1) == (3, 1, 42)


def test_encode_head_on_delimiters():
    assert encode_tape("<1>", 0) == (0, 3, 41)
    assert encode_tape("<1>", 2) == (31, 4, 0)


def test_max_value_pattern():
    assert [max_value(n) for n in (2, 3, 4, 5)] == [34, 324, 3224, 32224]
    assert max_value(11) == 32222222224


@pytest.mark.parametrize("n", [0, 1])
def test_max_value_needs_both_delimiters(n):
    with pytest.raises(ValueError):
        max_value(n)


def test_parts_never_exceed_max_value():
    tape = "<2122B>"
    big = max_value(len(tape))
    for head in range(len(tape)):
        assert all(part <= big for part in encode_tape(tape, head))


interiors = st.text(alphabet="12B", min_size=0, max_size=8)


@settings(max_examples=60, deadline=None)
@given(interiors, st.data())
def test_decode_inverts_encode(word, data):
    tape = "<" + word + ">"
    head = data.draw(st.integers(0, len(tape) - 1))
    assert decode_tape(*encode_tape(tape, head)) == (tape, head)


def test_decode_rejects_foreign_digits():
    with pytest.raises(ValueError):
        decode_tape(95, 1, 4)
    with pytest.raises(ValueError):
        decode_tape(3, 7, 4)


def test_tape_errors():
    assert tape_errors("<1B2>") == []
    assert tape_errors("1>") == ["tape must start with '<'"]
    assert tape_errors("<1") == ["tape must end with '>'"]
    assert "bad interior symbol 'x' at cell 2" in tape_errors("<1x>")
    with pytest.raises(ValueError):
        encode_tape("<x>", 1)


# ---------------------------------------------------------------------------
# Emitted game shape


def test_digit_resources_and_caps():
    g, f = compile_digit(entry("scan_right").machine, "<1>")
    assert f == REDUCTION_FORMULA
    assert g.agents == ("ag1", "ag2")
    assert g.n_resources == 15  # six counterbalanced pairs plus lv, hv, rv
    caps = dict(zip(g.resources, g.m0))
    for x in ("mu", "muL", "muR", "i", "r", "t"):
        assert caps[x] == 324 and caps["~" + x] == 324
    assert (caps["lv"], caps["hv"], caps["rv"]) == encode_tape("<1>", 1)


def test_unary_resources_and_caps():
    g, f = compile_unary(entry("scan_right").machine, "<1>")
    assert f == REDUCTION_FORMULA
    # per-cell variables muL1..3 and muR1..3 plus mu, all paired, plus the
    # scratch pair t and one extra source per cell
    assert g.n_resources == 2 * (2 * 3 + 2) + 3
    caps = dict(zip(g.resources, g.m0))
    assert all(caps[x] == 4 for x in caps if not x.startswith("e"))
    assert (caps["e0"], caps["e1"], caps["e2"]) == (3, 1, 4)


def test_compiled_sizes_frozen():
    m = entry("scan_right").machine
    assert flatten_info(digit_game(m, "<1>")).structure.n_locations == 361
    assert flatten_info(unary_game(m, "<1>")).structure.n_locations == 369


def test_digit_rejects_oversized_tape():
    with pytest.raises(CompileError, match="finite-availability limit"):
        digit_game(entry("scan_right").machine, "<" + "1" * 14 + ">")


def test_rejects_bad_tape_and_labeling():
    m = entry("scan_right").machine
    with pytest.raises(CompileError, match="delimiters"):
        digit_game(m, "1")
    with pytest.raises(CompileError, match="p_labeling"):
        digit_game(m, "<1>", "sometimes")


def test_all_dead_ends_mode_rejects_existential_sink():
    # all_ones parks rejected inputs in the existential dead end r
    with pytest.raises(CompileError, match="existential dead end"):
        digit_game(entry("all_ones").machine, "<2>", "all_dead_ends")


def test_universal_only_labels_just_universal_dead_ends():
    h = digit_game(entry("all_ones").machine, "<2>", "universal_only")
    main = h.module("main")
    (atom,) = [a for a in main.atoms if a[0] == "p"]
    # h never moves, and u0 has no instruction for reading '<'; the
    # existential dead ends of r stay unlabeled
    assert set(atom[1]) == {f"fs_h_{t}" for t in
                            ("sB", "s1", "s2", "sL", "sR")} | {"fs_u0_sL"}


def test_chooser_follows_state_kind():
    # u0 is universal with two instructions on reading 1, e0 existential
    info = flatten_info(digit_game(entry("fork_agree").machine, "<1>",
                                   "universal_only"))
    fl = info.locs[info.loc_index["fs_u0_s1"]]
    assert fl.branching and info.structure.agents[fl.chooser] == "ag2"
    info = flatten_info(digit_game(entry("branchy").machine, "<1>"))
    fl = info.locs[info.loc_index["fs_e0_s1"]]
    assert fl.branching and info.structure.agents[fl.chooser] == "ag1"


def test_every_full_state_location_exists():
    m = entry("bounce").machine
    info = flatten_info(digit_game(m, "<1>"))
    for q in m.states:
        for tok in ("sB", "s1", "s2", "sL", "sR"):
            assert f"fs_{q}_{tok}" in info.loc_index


# ---------------------------------------------------------------------------
# Machine equivalence and safety on a slice


SLICE = [("scan_right", ("", "1", "2", "B")),
         ("all_ones", ("", "1", "2", "11"))]


@pytest.mark.parametrize("name,words", SLICE)
def test_reductions_match_acceptance(name, words):
    e = entry(name)
    m = e.machine
    for word in words:
        tape = "<" + word + ">"
        want = lbatm.accepts(m, lbatm.initial_config(m, word))
        got_d = checker.check(*compile_digit(m, tape, e.p_labeling))
        got_u = checker.check(*compile_unary(m, tape, e.p_labeling))
        assert got_d == want == got_u, (name, word)


@pytest.mark.parametrize("name,word", [("scan_right", "12"),
                                       ("all_ones", "21")])
def test_safety_scan_clean(name, word):
    e = entry(name)
    for maker in (digit_game, unary_game):
        h = maker(e.machine, "<" + word + ">", e.p_labeling)
        assert safety_report(h) == []


def test_safety_scan_flags_planted_violation():
    # an unbalanced variant of the toy loop leaves a pair sum short at the
    # gadget boundary, which the scan must notice
    from prbatl.hier import parse_hier

    h = parse_hier("""
game { agents ag1 ag2; max 4; pair x = 4; root main; }
module main() {
  nodes s q;
  entry s;
  exits;
  use g = leak();
  edge s -> g "-4 ~x, -1 x";
  edge g -> q "";
}
module leak() {
  nodes n m;
  entry n;
  exits m;
  edge n -> m "-1 x";
}
""")
    rep = safety_report(h)
    assert any("want 4" in r for r in rep)
