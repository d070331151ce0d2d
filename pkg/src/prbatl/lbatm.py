"""Linearly bounded alternating machines over the fixed alphabet {1, 2, B, <, >}.

`<` and `>` are the tape delimiters (rendered that way in the text format).
The tape length never changes: any instruction reading `<` writes `<` and
moves right, any instruction reading `>` writes `>` and moves left, and no
other instruction may write a delimiter.

Acceptance is the usual alternating recursion: a universal configuration
accepts when every successor accepts (vacuously on dead ends), an existential
one when some successor accepts (rejecting on dead ends).  The decider
requires the halting normal form: revisiting a configuration on the current
path raises CycleError instead of emulating a step counter.

Text format, one instruction per line after the header:

    states: q0* q1!
    q0 , 1 -> q1 , 2 , R

`*` marks the initial state, `!` marks universal states, unmarked states are
existential.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

LEFT_END = "<"
RIGHT_END = ">"
BLANK = "B"
SYMBOLS = ("B", "1", "2", LEFT_END, RIGHT_END)
# digit encoding used by the reductions
DIGIT = {"B": 0, "1": 1, "2": 2, LEFT_END: 3, RIGHT_END: 4}


class MachineError(Exception):
    pass


class CycleError(MachineError):
    """A configuration repeated on one computation path."""


class Instruction(NamedTuple):
    state: str
    read: str
    next_state: str
    write: str
    direction: str  # "L" or "R"


@dataclass(frozen=True)
class Machine:
    states: tuple[str, ...]
    universal: frozenset[str]
    initial: str
    instructions: tuple[Instruction, ...]

    def is_universal(self, state: str) -> bool:
        return state in self.universal


class MachineConfig(NamedTuple):
    state: str
    tape: str
    head: int


def machine_errors(m: Machine) -> list[str]:
    out = []
    if m.initial not in m.states:
        out.append(f"initial state {m.initial!r} not declared")
    for bad in m.universal - set(m.states):
        out.append(f"universal state {bad!r} not declared")
    for ins in m.instructions:
        where = f"{ins.state},{ins.read}"
        if ins.state not in m.states:
            out.append(f"instruction {where}: unknown state {ins.state!r}")
        if ins.next_state not in m.states:
            out.append(f"instruction {where}: unknown target {ins.next_state!r}")
        if ins.read not in SYMBOLS or ins.write not in SYMBOLS:
            out.append(f"instruction {where}: symbol outside the alphabet")
            continue
        if ins.direction not in ("L", "R"):
            out.append(f"instruction {where}: direction must be L or R")
        if ins.read == LEFT_END and (ins.write != LEFT_END or ins.direction != "R"):
            out.append(f"instruction {where}: reading {LEFT_END} must rewrite it "
                       "and move right")
        if ins.read == RIGHT_END and (ins.write != RIGHT_END or ins.direction != "L"):
            out.append(f"instruction {where}: reading {RIGHT_END} must rewrite it "
                       "and move left")
        if ins.write in (LEFT_END, RIGHT_END) and ins.write != ins.read:
            out.append(f"instruction {where}: only the delimiter rules may "
                       "write a delimiter")
    return out


def parse_machine(text: str) -> Machine:
    states: list[str] = []
    universal = set()
    initial: Optional[str] = None
    instructions = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("states:"):
            if header_seen:
                raise MachineError(f"line {lineno}: duplicate states header")
            header_seen = True
            for token in line[len("states:"):].split():
                name = token.rstrip("*!")
                flags = token[len(name):]
                if not name:
                    raise MachineError(f"line {lineno}: empty state name")
                states.append(name)
                if "!" in flags:
                    universal.add(name)
                if "*" in flags:
                    if initial is not None:
                        raise MachineError(f"line {lineno}: two initial states")
                    initial = name
            continue
        if "->" not in line:
            raise MachineError(f"line {lineno}: expected 'state , symbol -> "
                               f"state , symbol , L|R'")
        left, right = line.split("->", 1)
        lparts = [p.strip() for p in left.split(",")]
        rparts = [p.strip() for p in right.split(",")]
        if len(lparts) != 2 or len(rparts) != 3:
            raise MachineError(f"line {lineno}: malformed instruction")
        instructions.append(Instruction(lparts[0], lparts[1],
                                        rparts[0], rparts[1], rparts[2]))
    if not header_seen:
        raise MachineError("missing 'states:' header")
    if initial is None:
        raise MachineError("no initial state marked with *")
    m = Machine(tuple(states), frozenset(universal), initial, tuple(instructions))
    errors = machine_errors(m)
    if errors:
        raise MachineError("; ".join(errors))
    return m


def render_machine(m: Machine) -> str:
    tokens = []
    for s in m.states:
        flag = ("*" if s == m.initial else "") + ("!" if s in m.universal else "")
        tokens.append(s + flag)
    lines = ["states: " + " ".join(tokens)]
    for ins in m.instructions:
        lines.append(f"{ins.state} , {ins.read} -> "
                     f"{ins.next_state} , {ins.write} , {ins.direction}")
    return "\n".join(lines) + "\n"


def initial_config(m: Machine, word: str) -> MachineConfig:
    """Tape <word> with the head on the first input cell (on > when empty)."""
    for ch in word:
        if ch not in ("1", "2", BLANK):
            raise MachineError(f"input symbol {ch!r} outside {{1,2,B}}")
    return MachineConfig(m.initial, LEFT_END + word + RIGHT_END, 1)


def _check_config(m: Machine, c: MachineConfig) -> None:
    tape = c.tape
    if len(tape) < 2 or tape[0] != LEFT_END or tape[-1] != RIGHT_END:
        raise MachineError(f"malformed tape {tape!r}")
    if any(ch in (LEFT_END, RIGHT_END) for ch in tape[1:-1]):
        raise MachineError(f"delimiter inside tape {tape!r}")
    if not 0 <= c.head < len(tape):
        raise MachineError(f"head {c.head} outside tape of length {len(tape)}")
    if c.state not in m.states:
        raise MachineError(f"unknown state {c.state!r}")


def next_configs(m: Machine, c: MachineConfig) -> list[MachineConfig]:
    """Successors in instruction declaration order, duplicates removed."""
    _check_config(m, c)
    seen = set()
    out = []
    symbol = c.tape[c.head]
    for ins in m.instructions:
        if ins.state != c.state or ins.read != symbol:
            continue
        tape = c.tape[:c.head] + ins.write + c.tape[c.head + 1:]
        head = c.head + (1 if ins.direction == "R" else -1)
        succ = MachineConfig(ins.next_state, tape, head)
        if succ not in seen:
            seen.add(succ)
            out.append(succ)
    return out


def accepts(m: Machine, c: MachineConfig, successor_key=None) -> bool:
    """Alternating acceptance; successor_key is an evaluation-order knob
    used by the memo-stability property test."""
    memo: dict[MachineConfig, bool] = {}
    path: set[MachineConfig] = set()

    def go(conf: MachineConfig) -> bool:
        if conf in memo:
            return memo[conf]
        if conf in path:
            raise CycleError(f"configuration repeats on a path: {conf}")
        path.add(conf)
        succs = next_configs(m, conf)
        if successor_key is not None:
            succs = sorted(succs, key=successor_key)
        if not succs:
            result = m.is_universal(conf.state)
        elif m.is_universal(conf.state):
            result = all(go(s) for s in succs)
        else:
            result = any(go(s) for s in succs)
        path.discard(conf)
        memo[conf] = result
        return result

    return go(c)


def reachable_configs(m: Machine, c0: MachineConfig,
                      limit: int = 1_000_000) -> set[MachineConfig]:
    seen = {c0}
    frontier = [c0]
    while frontier:
        nxt = []
        for c in frontier:
            for s in next_configs(m, c):
                if s not in seen:
                    seen.add(s)
                    nxt.append(s)
                    if len(seen) > limit:
                        raise MachineError("configuration space too large")
        frontier = nxt
    return seen


def validate_for_reduction(m: Machine, word: str,
                           p_labeling: str = "all_dead_ends") -> list[str]:
    """Normal-form checks required before compiling (M, word) to a game.

    all_dead_ends: every reachable dead end must be universal, so labeling p
    on all dead-end locations is sound.  universal_only: existential dead
    ends are allowed; the reduction labels p only on universal ones.
    Both modes reject machines that can repeat a configuration on a path.
    """
    if p_labeling not in ("all_dead_ends", "universal_only"):
        return [f"unknown p_labeling mode {p_labeling!r}"]
    out = machine_errors(m)
    if out:
        return out
    c0 = initial_config(m, word)
    try:
        accepts(m, c0)
    except CycleError as exc:
        out.append(str(exc))
        return out
    if p_labeling == "all_dead_ends":
        for c in sorted(reachable_configs(m, c0)):
            if not m.is_universal(c.state) and not next_configs(m, c):
                out.append(f"reachable existential dead end at {c} "
                           "(forbidden under all_dead_ends labeling)")
    return out
