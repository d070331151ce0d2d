"""Formula AST, concrete syntax, and the market-atom comparison.

Grammar (whitespace-insensitive, `&` left-associative, `!` tightest):

    formula  := conj
    conj     := unary ('&' unary)*
    unary    := '!' unary | team | primary
    team     := '<<' a1,a2,... ':' '[' money ']' '>>' body
    body     := 'X' unary | 'G' unary | 'F' unary | '[' formula 'U' formula ']'
    primary  := 'true' | 'avail' REL '[' ints ']' | IDENT | '(' formula ')'
    REL      := '<' | '<=' | '=' | '>=' | '>'

Money and bound entries are nonnegative integers or `inf`.  `F g` is sugar
for `[true U g]` and is expanded at parse time.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

from .model import UNBOUNDED, Vector

RESERVED = {"X", "U", "G", "F", "avail", "true", "inf"}

RELATIONS = ("<", "<=", "=", ">=", ">")


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class TeamNext:
    team: tuple[str, ...]
    money: Vector
    sub: "Formula"


@dataclass(frozen=True)
class TeamUntil:
    team: tuple[str, ...]
    money: Vector
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class TeamGlobally:
    team: tuple[str, ...]
    money: Vector
    sub: "Formula"


@dataclass(frozen=True)
class Market:
    rel: str
    bound: Vector


Formula = Union[Atom, Top, Not, And, TeamNext, TeamUntil, TeamGlobally, Market]

TEAM_OPS = (TeamNext, TeamUntil, TeamGlobally)


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"at position {pos}: {message}")
        self.pos = pos


# ---------------------------------------------------------------------------
# Tokenizer


_SYMBOLS = ("<<", ">>", "<=", ">=", "<", ">", "=", "!", "&", "(", ")", "[", "]", ":", ",")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Returns (kind, value, position); kinds are 'sym', 'int', 'ident'."""
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(("sym", sym, i))
                i += len(sym)
                break
        else:
            if ch.isdigit():
                j = i
                while j < len(text) and text[j].isdigit():
                    j += 1
                tokens.append(("int", text[i:j], i))
                i = j
            elif ch.isalpha() or ch == "_":
                j = i
                while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                tokens.append(("ident", text[i:j], i))
                i = j
            else:
                raise FormulaSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, agents: tuple[str, ...] | None, n_resources: int | None):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.agents = agents
        self.n_resources = n_resources

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value: str) -> tuple[str, str, int]:
        kind, val, pos = self.peek()
        if val != value or kind == "end":
            raise FormulaSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", pos)
        return self.next()

    def fail(self, message: str):
        raise FormulaSyntaxError(message, self.peek()[2])

    # grammar rules -------------------------------------------------------

    def formula(self) -> Formula:
        node = self.unary()
        while self.peek()[1] == "&":
            self.next()
            node = And(node, self.unary())
        return node

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if val == "!":
            self.next()
            return Not(self.unary())
        if val == "<<":
            return self.team()
        return self.primary()

    def team(self) -> Formula:
        self.expect("<<")
        names = []
        if self.peek()[1] != ":":  # <<:[...]>> is the empty team
            names.append(self.agent_name())
            while self.peek()[1] == ",":
                self.next()
                names.append(self.agent_name())
        self.expect(":")
        money = self.vector(expected_len=len(self.agents) if self.agents else None,
                            what="money")
        self.expect(">>")
        team = tuple(sorted(set(names)))
        if self.agents:
            self._warn_ignored_money(team, money)
        kind, val, pos = self.next()
        if val == "X":
            return TeamNext(team, money, self.unary())
        if val == "G":
            return TeamGlobally(team, money, self.unary())
        if val == "F":
            return TeamUntil(team, money, Top(), self.unary())
        if val == "[":
            left = self.formula()
            kind, val, pos = self.next()
            if val != "U":
                raise FormulaSyntaxError("expected 'U'", pos)
            right = self.formula()
            self.expect("]")
            return TeamUntil(team, money, left, right)
        raise FormulaSyntaxError("expected one of X, G, F, or '[... U ...]'", pos)

    def agent_name(self) -> str:
        kind, val, pos = self.next()
        if kind != "ident" or val in RESERVED:
            raise FormulaSyntaxError("expected an agent name", pos)
        if self.agents is not None and val not in self.agents:
            raise FormulaSyntaxError(f"unknown agent {val!r}", pos)
        return val

    def vector(self, expected_len: int | None, what: str) -> Vector:
        _, _, open_pos = self.expect("[")
        entries: list[int] = []
        if self.peek()[1] != "]":
            entries.append(self.vector_entry())
            while self.peek()[1] == ",":
                self.next()
                entries.append(self.vector_entry())
        self.expect("]")
        if expected_len is not None and len(entries) != expected_len:
            raise FormulaSyntaxError(
                f"{what} vector has {len(entries)} entries, expected {expected_len}",
                open_pos)
        return tuple(entries)

    def vector_entry(self) -> int:
        kind, val, pos = self.next()
        if kind == "int":
            return int(val)
        if val == "inf":
            return UNBOUNDED
        raise FormulaSyntaxError("expected a nonnegative integer or 'inf'", pos)

    def primary(self) -> Formula:
        kind, val, pos = self.next()
        if val == "(":
            node = self.formula()
            self.expect(")")
            return node
        if val == "true":
            return Top()
        if val == "avail":
            kind, rel, rel_pos = self.next()
            if rel not in RELATIONS:
                raise FormulaSyntaxError("expected a comparison operator", rel_pos)
            bound = self.vector(expected_len=self.n_resources, what="availability")
            return Market(rel, bound)
        if kind == "ident" and val not in RESERVED:
            return Atom(val)
        raise FormulaSyntaxError(f"unexpected {val or 'end of input'!r}", pos)

    def _warn_ignored_money(self, team: tuple[str, ...], money: Vector):
        # 0 and inf both mean "no budget stated"; only a finite nonzero
        # entry for a non-team agent looks like a mistake worth flagging.
        for idx, name in enumerate(self.agents):
            if (name not in team and idx < len(money)
                    and money[idx] not in (0, UNBOUNDED)):
                warnings.warn(
                    f"money entry for agent {name!r} is ignored (not in the team)",
                    stacklevel=4)


def parse_formula(text: str, agents: tuple[str, ...] | None = None,
                  n_resources: int | None = None) -> Formula:
    """Parse the concrete syntax; agent names and arities are checked when given."""
    parser = _Parser(text, tuple(agents) if agents else None, n_resources)
    node = parser.formula()
    kind, val, pos = parser.peek()
    if kind != "end":
        raise FormulaSyntaxError(f"trailing input {val!r}", pos)
    return node


# ---------------------------------------------------------------------------
# Rendering


def _render_entry(v: int) -> str:
    return "inf" if v >= UNBOUNDED else str(v)


def _render_team(team: tuple[str, ...], money: Vector) -> str:
    return "<<%s:[%s]>>" % (",".join(team), ",".join(_render_entry(v) for v in money))


def _paren_unary(f: Formula) -> str:
    """Render f as a unary-operator operand (conjunctions need parentheses)."""
    text = render_formula(f)
    return f"({text})" if isinstance(f, And) else text


def render_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Market):
        return "avail %s [%s]" % (f.rel, ",".join(_render_entry(v) for v in f.bound))
    if isinstance(f, Not):
        return "!" + _paren_unary(f.sub)
    if isinstance(f, And):
        left = render_formula(f.left)
        right = render_formula(f.right)
        if isinstance(f.right, And):
            right = f"({right})"
        return f"{left} & {right}"
    if isinstance(f, TeamNext):
        return f"{_render_team(f.team, f.money)} X {_paren_unary(f.sub)}"
    if isinstance(f, TeamGlobally):
        return f"{_render_team(f.team, f.money)} G {_paren_unary(f.sub)}"
    if isinstance(f, TeamUntil):
        if isinstance(f.left, Top):
            return f"{_render_team(f.team, f.money)} F {_paren_unary(f.right)}"
        return "%s [%s U %s]" % (_render_team(f.team, f.money),
                                 render_formula(f.left), render_formula(f.right))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Subformula table


def _children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Atom, Top, Market)):
        return ()
    if isinstance(f, Not):
        return (f.sub,)
    if isinstance(f, And):
        return (f.left, f.right)
    if isinstance(f, (TeamNext, TeamGlobally)):
        return (f.sub,)
    if isinstance(f, TeamUntil):
        return (f.left, f.right)
    raise TypeError(f"not a formula: {f!r}")


@dataclass(frozen=True)
class FormulaTable:
    """Structurally distinct subformulas, children before parents."""

    nodes: tuple[Formula, ...]
    index: dict[Formula, int]
    parents: tuple[tuple[int, ...], ...]


def subformulas(f: Formula) -> FormulaTable:
    nodes: list[Formula] = []
    index: dict[Formula, int] = {}
    parents: list[list[int]] = []

    def visit(node: Formula) -> int:
        if node in index:
            return index[node]
        child_ids = [visit(c) for c in _children(node)]
        idx = len(nodes)
        index[node] = idx
        nodes.append(node)
        parents.append([])
        for cid in child_ids:
            parents[cid].append(idx)
        return idx

    visit(f)
    return FormulaTable(tuple(nodes), index, tuple(tuple(p) for p in parents))


# ---------------------------------------------------------------------------
# Market atoms


def _entry_holds(rel: str, a: int, b: int) -> bool:
    if rel == "<":
        return a < b
    if rel == "<=":
        return a <= b
    if rel == "=":
        return a == b
    if rel == ">=":
        return a >= b
    if rel == ">":
        return a > b
    raise ValueError(f"unknown relation {rel!r}")


def eval_market(m: Vector, rel: str, bound: Vector, reading: str = "all") -> bool:
    """Vector comparison for market atoms.

    The pinned reading is "all": the relation must hold in every coordinate
    (strictly in every coordinate for < and >).  The "any" reading is kept
    implemented so the choice stays revisable in one place.
    """
    if len(m) != len(bound):
        raise ValueError("availability arity mismatch")
    if reading == "all":
        return all(_entry_holds(rel, a, b) for a, b in zip(m, bound))
    if reading == "any":
        return any(_entry_holds(rel, a, b) for a, b in zip(m, bound))
    raise ValueError(f"unknown reading {reading!r}")
