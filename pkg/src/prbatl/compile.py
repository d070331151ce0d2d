"""Machine-to-game compilers.

Both reductions turn a machine plus input tape into a two-agent priced
game and the formula <<ag1>> F p.  Locations fs_{state}_{symbol} stand for
full states; between them, forced gadget chains rewrite the head cell and
shift the head, so the only plays through the structure are the machine's
own computations.  Existential states hand the instruction choice to ag1,
universal states to ag2; p marks the halting locations.

The digit encoding keeps the whole tape in three counters (left part, head
cell, reversed right part, base 10 over cell digits).  The per-cell
encoding spends one head-relative variable per tape cell and keeps every
availability below a constant, trading resource count for magnitude.
"""

from __future__ import annotations

from typing import Iterable

from . import model
from .formulas import Atom, Formula, TeamUntil, Top
from .gadgets import LIBRARY, closure, load_module_text
from .hier import (
    HierarchicalGame,
    enabled_edges,
    flatten,
    flatten_info,
    parse_hier,
)
from .lbatm import DIGIT, SYMBOLS, Machine, validate_for_reduction
from .model import FINITE_LIMIT, UNBOUNDED, PricedGameStructure

__all__ = [
    "CompileError", "compile_digit", "compile_unary", "decode_tape",
    "digit_game", "encode_tape", "max_value", "safety_report",
    "tape_errors", "unary_game",
]


class CompileError(Exception):
    pass


# node-name fragment per tape symbol; digits double as move-exit ports
_SYMTOK = {"B": "sB", "1": "s1", "2": "s2", "<": "sL", ">": "sR"}

_WRITE_KIND = {0: "write_same", 1: "write_inc", 2: "write_inc2",
               -1: "write_dec", -2: "write_dec2"}
_MOVE_KIND = {"R": "move_right", "L": "move_left"}

REDUCTION_FORMULA: Formula = TeamUntil(
    ("ag1",), (UNBOUNDED, UNBOUNDED), Top(), Atom("p"))


def tape_errors(tape: str) -> list[str]:
    out = []
    if len(tape) < 2:
        out.append("tape needs both delimiters")
        return out
    if tape[0] != "<":
        out.append("tape must start with '<'")
    if tape[-1] != ">":
        out.append("tape must end with '>'")
    for i, c in enumerate(tape[1:-1], start=1):
        if c not in ("B", "1", "2"):
            out.append(f"bad interior symbol {c!r} at cell {i}")
    return out


def encode_tape(tape: str, head: int) -> tuple[int, int, int]:
    """Digit encoding of a tape: left part forward, head cell, right part
    reversed (the cell next to the head is the least significant digit)."""
    errs = tape_errors(tape)
    if errs:
        raise ValueError("; ".join(errs))
    if not 0 <= head < len(tape):
        raise ValueError(f"head {head} outside tape of length {len(tape)}")
    digits = [DIGIT[c] for c in tape]
    mul = 0
    for d in digits[:head]:
        mul = mul * 10 + d
    mur = 0
    for d in reversed(digits[head + 1:]):
        mur = mur * 10 + d
    return mul, digits[head], mur


def decode_tape(mul: int, mu: int, mur: int) -> tuple[str, int]:
    """Inverse of encode_tape.  Total on its image: the delimiters anchor
    both ends, so no digits are lost to leading zeros."""

    def part(value: int, what: str) -> str:
        if value == 0:
            return ""
        if any(c > "4" for c in str(value)):
            raise ValueError(f"{what} {value} has digits outside the alphabet")
        return "".join(SYMBOLS[int(c)] for c in str(value))

    if not 0 <= mu <= 4:
        raise ValueError(f"head digit {mu} outside the alphabet")
    left = part(mul, "left part")
    right = part(mur, "right part")[::-1]
    return left + SYMBOLS[mu] + right, len(left)


def max_value(length: int) -> int:
    """Largest digit encoding of a cell string of the given length, the
    one with every interior cell holding the symbol 2."""
    if length < 2:
        raise ValueError("tape length must be at least 2")
    return int("3" + "2" * (length - 2) + "4")


def _check_state_names(m: Machine) -> None:
    import re
    for q in m.states:
        if not re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", q):
            raise CompileError(f"state name {q!r} is not an identifier")


def _instruction_texture(m: Machine, p_labeling: str, move_mod) -> tuple[
        list[str], list[str], list[str], list[str], set[str]]:
    """Full-state nodes, use lines, edge lines, p nodes, used module names.

    move_mod maps a direction to the module name encoding that head shift.
    """
    nodes, uses, edges, p_nodes = [], [], [], []
    used: set[str] = set()
    for q in m.states:
        for sym in SYMBOLS:
            node = f"fs_{q}_{_SYMTOK[sym]}"
            nodes.append(node)
            matching = [ins for ins in m.instructions
                        if ins.state == q and ins.read == sym]
            if not matching:
                if p_labeling == "all_dead_ends" or m.is_universal(q):
                    p_nodes.append(node)
                continue
            chooser = "ag2" if m.is_universal(q) else "ag1"
            for k, ins in enumerate(matching):
                wmod = _WRITE_KIND[DIGIT[ins.write] - DIGIT[sym]]
                vmod = move_mod[ins.direction]
                used.add(wmod)
                used.add(vmod)
                w = f"w_{q}_{_SYMTOK[sym]}_{k}"
                v = f"v_{q}_{_SYMTOK[sym]}_{k}"
                uses.append(f"  use {w} = {wmod}();")
                uses.append(f"  use {v} = {vmod}();")
                edges.append(f'  edge {node} -> {w} "" [{chooser}];')
                edges.append(f'  edge {w} -> {v} "";')
                for d in range(5):
                    nxt = f"fs_{ins.next_state}_{_SYMTOK[SYMBOLS[d]]}"
                    edges.append(f'  edge {v}.{d} -> {nxt} "";')
    return nodes, uses, edges, p_nodes, used


def _assemble(header: list[str], main: list[str], module_texts: Iterable[str]
              ) -> HierarchicalGame:
    text = "\n".join(header) + "\n" + "\n".join(main) + "\n" \
        + "".join(module_texts)
    return parse_hier(text)


def _validated(m: Machine, tape: str, p_labeling: str) -> None:
    errs = tape_errors(tape)
    errs += validate_for_reduction(m, tape[1:-1], p_labeling)
    if errs:
        raise CompileError("; ".join(errs))
    _check_state_names(m)


def digit_game(m: Machine, tape: str,
               p_labeling: str = "all_dead_ends") -> HierarchicalGame:
    """Whole-tape game: six counterbalanced counters capped at Max plus
    three one-shot sources holding the input encoding."""
    _validated(m, tape, p_labeling)
    big = max_value(len(tape))
    if big > FINITE_LIMIT:
        raise CompileError(
            f"tape of length {len(tape)} needs Max={big} beyond the "
            f"finite-availability limit {FINITE_LIMIT}")
    lv, hv, rv = encode_tape(tape, 1)

    header = ["game {", "  agents ag1 ag2;", f"  max {big};"]
    header += [f"  pair {x} = {big};" for x in ("mu", "muL", "muR", "i", "r", "t")]
    header += [f"  res lv = {lv};", f"  res hv = {hv};", f"  res rv = {rv};",
               "  root main;", "}"]

    nodes, uses, edges, p_nodes, used = _instruction_texture(
        m, p_labeling, _MOVE_KIND)
    consume = ", ".join(f"-Max ~{x}" for x in ("mu", "muL", "muR", "i", "r", "t"))
    first = f"fs_{m.initial}_{_SYMTOK[tape[1]]}"
    main = ["module main() {",
            "  nodes start " + " ".join(nodes) + ";",
            "  entry start;",
            "  use ldL = load_muL();",
            "  use ldH = load_mu();",
            "  use ldR = load_muR();",
            *uses,
            f'  edge start -> ldL "{consume}";',
            '  edge ldL -> ldH "";',
            '  edge ldH -> ldR "";',
            f'  edge ldR -> {first} "";',
            *edges]
    if p_nodes:
        main.append("  atom p " + " ".join(p_nodes) + ";")
    main.append("}")

    lib_names: list[str] = []
    for g in sorted(used):
        for dep in closure(g):
            if dep not in lib_names:
                lib_names.append(dep)
    if "to_zero" not in lib_names:
        lib_names.insert(0, "to_zero")  # the loaders need it regardless
    texts = [LIBRARY[g] for g in lib_names]
    texts.append(load_module_text("load_muL", "muL", "lv", lv))
    texts.append(load_module_text("load_mu", "mu", "hv", hv))
    texts.append(load_module_text("load_muR", "muR", "rv", rv))
    return _assemble(header, main, texts)


def _ushift_text(name: str, direction: str, n: int) -> str:
    """Per-cell head shift as a chain of copies.

    The side the head leaves grows: it copies farthest-first so no cell is
    overwritten before it is read, and its nearest cell takes the old head
    value.  The head then takes the nearest cell of the other side, which
    closes up nearest-first.  The five-way exit reads the new head digit.
    """
    if direction == "R":
        steps = [(f"muL{j}", f"muL{j - 1}") for j in range(n, 1, -1)]
        steps += [("muL1", "mu"), ("mu", "muR1")]
        steps += [(f"muR{j}", f"muR{j + 1}") for j in range(1, n)]
    else:
        steps = [(f"muR{j}", f"muR{j - 1}") for j in range(n, 1, -1)]
        steps += [("muR1", "mu"), ("mu", "muL1")]
        steps += [(f"muL{j}", f"muL{j + 1}") for j in range(1, n)]
    lines = [f"module {name}() {{"]
    for k, (dst, src) in enumerate(steps):
        lines.append(f"  use a{k} = assign({dst}, {src});")
    lines.append("  use cns = choose_next_state(mu);")
    lines.append("  entry a0;")
    lines.append("  exits cns.0 cns.1 cns.2 cns.3 cns.4;")
    for k in range(len(steps) - 1):
        lines.append(f'  edge a{k} -> a{k + 1} "";')
    lines.append(f'  edge a{len(steps) - 1} -> cns "";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def unary_game(m: Machine, tape: str,
               p_labeling: str = "all_dead_ends") -> HierarchicalGame:
    """Per-cell game: head-relative digit variables muL1..muLn (left of
    head) and muR1..muRn (right), all capped at the largest cell digit.
    Variables indexed past a delimiter hold garbage by construction; the
    head can never travel far enough to read them back."""
    _validated(m, tape, p_labeling)
    n = len(tape)
    cap = max(DIGIT.values())
    primaries = ["mu", "t"] + [f"muL{j}" for j in range(1, n + 1)] \
        + [f"muR{j}" for j in range(1, n + 1)]

    header = ["game {", "  agents ag1 ag2;", f"  max {cap};"]
    header += [f"  pair {x} = {cap};" for x in primaries]
    header += [f"  res e{j} = {DIGIT[tape[j]]};" for j in range(n)]
    header += ["  root main;", "}"]

    move_mod = {"R": "ushift_right", "L": "ushift_left"}
    nodes, uses, edges, p_nodes, used = _instruction_texture(
        m, p_labeling, move_mod)
    # cell j of the input lands in the variable that is j - 1 cells from
    # the initial head position
    loads = [("load_muL1", "muL1", "e0")]
    loads.append(("load_mu", "mu", "e1"))
    loads += [(f"load_muR{j}", f"muR{j}", f"e{1 + j}") for j in range(1, n - 1)]

    consume = ", ".join(f"-Max ~{x}" for x in primaries)
    first = f"fs_{m.initial}_{_SYMTOK[tape[1]]}"
    chain = [f"ld{k}" for k in range(len(loads))]
    main = ["module main() {",
            "  nodes start " + " ".join(nodes) + ";",
            "  entry start;"]
    main += [f"  use {inst} = {mod}();"
             for inst, (mod, _, _) in zip(chain, loads)]
    main += uses
    main.append(f'  edge start -> {chain[0]} "{consume}";')
    for a, b in zip(chain, chain[1:]):
        main.append(f'  edge {a} -> {b} "";')
    main.append(f'  edge {chain[-1]} -> {first} "";')
    main += edges
    if p_nodes:
        main.append("  atom p " + " ".join(p_nodes) + ";")
    main.append("}")

    lib_names = ["to_zero", "assign", "choose_next_state"]
    for g in sorted(used):
        if g.startswith("write") and g not in lib_names:
            lib_names.append(g)
    texts = [LIBRARY[g] for g in lib_names]
    if "ushift_right" in used:
        texts.append(_ushift_text("ushift_right", "R", n))
    if "ushift_left" in used:
        texts.append(_ushift_text("ushift_left", "L", n))
    for mod, target, source in loads:
        texts.append(load_module_text(mod, target, source,
                                      DIGIT[tape[int(source[1:])]]))
    return _assemble(header, main, texts)


def safety_report(h: HierarchicalGame, limit: int = 2_000_000,
                  info=None) -> list[str]:
    """Scan every reachable configuration of a compiled game for the three
    global safety invariants: availability within [0, m0], counterbalance
    pair sums equal to Max at gadget boundary nodes, and exactly one
    enabled real edge at every non-branching gadget node.  Returns
    violation descriptions, empty when clean."""
    if info is None:
        info = flatten_info(h)
    g = info.structure
    ridx = h.resource_index()
    pair_idx = [(ridx[x], ridx[y]) for x, y in h.pairs]
    out: list[str] = []
    for c in sorted(model.reachable(g, limit=limit)):
        fl = info.locs[c.loc]
        for v, cap, name in zip(c.avail, g.m0, g.resources):
            if not 0 <= v <= cap:
                out.append(f"{fl.name}: {name}={v} outside [0, {cap}]")
        if fl.module == h.root:
            continue
        if fl.is_entry or fl.is_exit:
            for xi, yi in pair_idx:
                total = c.avail[xi] + c.avail[yi]
                if total != h.max_const:
                    out.append(
                        f"{fl.name}: {g.resources[xi]} + {g.resources[yi]}"
                        f" = {total}, want {h.max_const}")
        if not fl.branching and len(enabled_edges(info, c.loc, c.avail)) != 1:
            live = len(enabled_edges(info, c.loc, c.avail))
            out.append(f"{fl.name}: {live} enabled edges, want exactly 1")
    return out


def _finish(h: HierarchicalGame) -> tuple[PricedGameStructure, Formula]:
    g = flatten(h)
    errs = model.validate(g)
    if errs:
        raise CompileError("compiled structure invalid: " + "; ".join(errs))
    return g, REDUCTION_FORMULA


def compile_digit(m: Machine, tape: str, p_labeling: str = "all_dead_ends"
                  ) -> tuple[PricedGameStructure, Formula]:
    return _finish(digit_game(m, tape, p_labeling))


def compile_unary(m: Machine, tape: str, p_labeling: str = "all_dead_ends"
                  ) -> tuple[PricedGameStructure, Formula]:
    return _finish(unary_game(m, tape, p_labeling))
