"""Brute-force reference checker built literally from the definitions.

Everything here favors literal quantifier structure over speed: full action
profiles are enumerated when testing feasibility, costs are recomputed per
step, and the fixpoints are naive whole-arena sweeps.  The arena couples a
configuration with the money already spent by every finite-budget team
member.  Intended for small structures only; the size guard raises before
anything expensive starts.
"""

from __future__ import annotations

import itertools
import os
from typing import Callable, Iterable

from . import model
from .formulas import (
    And,
    Atom,
    Formula,
    Market,
    Not,
    TeamGlobally,
    TeamNext,
    TeamUntil,
    Top,
    eval_market,
    subformulas,
)
from .model import Configuration, PricedGameStructure, Vector, consd, price, step

DEFAULT_LIMIT = 200_000

ArenaState = tuple[Configuration, tuple[int, ...]]


class OracleLimit(Exception):
    """Raised when the arena would exceed the oracle's size budget."""


def oracle_limit() -> int:
    return int(os.environ.get("PRBATL_ORACLE_LIMIT", DEFAULT_LIMIT))


def _team_indices(g: PricedGameStructure, team: Iterable[str]) -> tuple[int, ...]:
    return tuple(sorted(g.agent_index(name) for name in team))


def _choices(g: PricedGameStructure, q: int, members: tuple[int, ...]):
    ranges = [range(1, g.action_count[q][a] + 1) for a in members]
    return itertools.product(*ranges)


def _feasible_literal(g: PricedGameStructure, c: Configuration,
                      members: tuple[int, ...], choice: tuple[int, ...]) -> bool:
    """Definition of A-feasibility, quantifier implemented literally:
    some full profile extends the choice and keeps the TEAM delta in bounds."""
    for profile in g.profiles(c.loc):
        if any(profile[a] != act for a, act in zip(members, choice)):
            continue
        delta = model.qty_team(g, c.loc, set(members), profile)
        if model.apply_delta(c.avail, delta, g.m0) is not None:
            return True
    return False


def _step_cost(g: PricedGameStructure, c: Configuration, agent: int, action: int) -> int:
    pvec = price(g, c.avail, c.loc, agent)
    cvec = consd(g, c.loc, agent, action)
    return sum(p * v for p, v in zip(pvec, cvec))


def _safe_moves(g: PricedGameStructure, state: ArenaState, team: tuple[int, ...],
                opp: tuple[int, ...], money: Vector, tracked: tuple[int, ...]):
    """All consistent one-step team choices with their successor arena states.

    A choice qualifies when it is A-feasible, every feasible opponent
    completion gives a defined joint step, and the accumulated spending of
    each tracked agent stays within its endowment.
    """
    c, spent = state
    q = c.loc
    moves = []
    for sigma in _choices(g, q, team):
        if not _feasible_literal(g, c, team, sigma):
            continue
        new_spent = list(spent)
        within_budget = True
        for pos, k in enumerate(tracked):
            cost = _step_cost(g, c, k, sigma[team.index(k)])
            new_spent[pos] = spent[pos] + cost
            if new_spent[pos] > money[k]:
                within_budget = False
                break
        if not within_budget:
            continue
        succs = []
        always_defined = True
        for beta in _choices(g, q, opp):
            if not _feasible_literal(g, c, opp, beta):
                continue
            profile = [0] * g.n_agents
            for a, act in zip(team, sigma):
                profile[a] = act
            for a, act in zip(opp, beta):
                profile[a] = act
            nxt = step(g, c, tuple(profile))
            if nxt is None:
                always_defined = False
                break
            succs.append((nxt, tuple(new_spent)))
        if always_defined:
            moves.append((sigma, succs))
    return moves


class _Arena:
    """The full (configuration, spent-vector) grid for one team operator."""

    def __init__(self, g: PricedGameStructure, configs: set[Configuration],
                 team_names: tuple[str, ...], money: Vector, limit: int):
        self.g = g
        self.team = _team_indices(g, team_names)
        self.opp = tuple(a for a in range(g.n_agents) if a not in self.team)
        self.money = money
        self.tracked = tuple(k for k in self.team if money[k] < model.UNBOUNDED)
        grid_size = 1
        for k in self.tracked:
            grid_size *= money[k] + 1
        if len(configs) * grid_size > limit:
            raise OracleLimit(
                f"arena of {len(configs)} configurations x {grid_size} spending "
                f"levels exceeds the oracle limit {limit}")
        grids = [range(money[k] + 1) for k in self.tracked]
        self.states: list[ArenaState] = [
            (c, s) for c in sorted(configs) for s in itertools.product(*grids)]
        self._moves: dict[ArenaState, list] = {}

    def moves(self, state: ArenaState):
        if state not in self._moves:
            self._moves[state] = _safe_moves(self.g, state, self.team, self.opp,
                                             self.money, self.tracked)
        return self._moves[state]

    def zero_spent(self) -> tuple[int, ...]:
        return (0,) * len(self.tracked)


def solve_next_sweep(arena: _Arena, targets: set[Configuration]) -> set[Configuration]:
    out = set()
    zero = arena.zero_spent()
    for c, spent in arena.states:
        if spent != zero:
            continue
        for _, succs in arena.moves((c, spent)):
            if all(nc in targets for nc, _ in succs):
                out.add(c)
                break
    return out


def solve_until_sweep(arena: _Arena, set1: set[Configuration],
                      set2: set[Configuration]) -> set[Configuration]:
    winning = {s for s in arena.states if s[0] in set2}
    changed = True
    while changed:
        changed = False
        for s in arena.states:
            if s in winning or s[0] not in set1:
                continue
            for _, succs in arena.moves(s):
                if all(t in winning for t in succs):
                    winning.add(s)
                    changed = True
                    break
    zero = arena.zero_spent()
    return {c for c, spent in winning if spent == zero}


def solve_globally_sweep(arena: _Arena, set1: set[Configuration]) -> set[Configuration]:
    kept = {s for s in arena.states if s[0] in set1}
    changed = True
    while changed:
        changed = False
        for s in list(kept):
            good = False
            for _, succs in arena.moves(s):
                if all(t in kept for t in succs):
                    good = True
                    break
            if not good:
                kept.discard(s)
                changed = True
    zero = arena.zero_spent()
    return {c for c, spent in kept if spent == zero}


def opponent_attractor(arena: _Arena, set1: set[Configuration]) -> set[ArenaState]:
    """States from which every safe proponent move can be answered by a step
    out of set1 or into the attractor; the De Morgan dual of the greatest
    fixpoint, used as the determinacy cross-check."""
    attractor = {s for s in arena.states if s[0] not in set1}
    changed = True
    while changed:
        changed = False
        for s in arena.states:
            if s in attractor:
                continue
            if all(any(t in attractor for t in succs)
                   for _, succs in arena.moves(s)):
                attractor.add(s)
                changed = True
    return attractor


# ---------------------------------------------------------------------------
# Labeling


def oracle_label(g: PricedGameStructure, f: Formula, limit: int | None = None
                 ) -> dict[Formula, set[Configuration]]:
    if limit is None:
        limit = oracle_limit()
    try:
        configs = model.reachable(g, limit=limit)
    except model.ExplorationLimit as exc:
        raise OracleLimit(str(exc)) from exc
    table = subformulas(f)
    sat: dict[Formula, set[Configuration]] = {}
    for node in table.nodes:
        if isinstance(node, Atom):
            sat[node] = {c for c in configs if node.name in g.labeling[c.loc]}
        elif isinstance(node, Top):
            sat[node] = set(configs)
        elif isinstance(node, Market):
            sat[node] = {c for c in configs if eval_market(c.avail, node.rel, node.bound)}
        elif isinstance(node, Not):
            sat[node] = configs - sat[node.sub]
        elif isinstance(node, And):
            sat[node] = sat[node.left] & sat[node.right]
        elif isinstance(node, TeamNext):
            arena = _Arena(g, configs, node.team, node.money, limit)
            sat[node] = solve_next_sweep(arena, sat[node.sub])
        elif isinstance(node, TeamUntil):
            arena = _Arena(g, configs, node.team, node.money, limit)
            sat[node] = solve_until_sweep(arena, sat[node.left], sat[node.right])
        elif isinstance(node, TeamGlobally):
            arena = _Arena(g, configs, node.team, node.money, limit)
            sat[node] = solve_globally_sweep(arena, sat[node.sub])
        else:
            raise TypeError(f"not a formula node: {node!r}")
    return sat


def oracle_check(g: PricedGameStructure, f: Formula, limit: int | None = None) -> bool:
    sat = oracle_label(g, f, limit=limit)
    return g.initial_config() in sat[f]


# ---------------------------------------------------------------------------
# Literal strategy enumeration (tiny arenas only)


def strategy_enumeration_check(g: PricedGameStructure, team_names: tuple[str, ...],
                               money: Vector, kind: str,
                               set1: set[Configuration], set2: set[Configuration],
                               start: Configuration | None = None,
                               cap: int = 100_000) -> bool:
    """Decides one team operator by enumerating memoryless arena strategies.

    kind is 'next', 'until', or 'globally'; set2 is ignored for 'next'
    (set1 holds the targets) and 'globally'.  Exponential in the arena size:
    guarded by `cap` on the number of strategies.
    """
    limit = oracle_limit()
    configs = model.reachable(g, limit=limit)
    arena = _Arena(g, configs, team_names, money, limit)
    if start is None:
        start = g.initial_config()
    s0: ArenaState = (start, arena.zero_spent())

    states = arena.states
    move_lists = [arena.moves(s) for s in states]
    total = 1
    for moves in move_lists:
        total *= max(len(moves), 1)
        if total > cap:
            raise OracleLimit(f"more than {cap} memoryless strategies")

    state_index = {s: i for i, s in enumerate(states)}

    for picks in itertools.product(*[range(max(len(m), 1)) for m in move_lists]):
        if _strategy_wins(state_index, move_lists, picks, s0, kind, set1, set2):
            return True
    return False


def _strategy_wins(state_index, move_lists, picks, s0: ArenaState, kind: str,
                   set1: set[Configuration], set2: set[Configuration]) -> bool:
    def succs(s: ArenaState):
        i = state_index[s]
        if not move_lists[i]:
            return None
        return move_lists[i][picks[i]][1]

    if kind == "next":
        out = succs(s0)
        return out is not None and all(c in set1 for c, _ in out)

    if kind == "globally":
        seen = set()
        stack = [s0]
        while stack:
            s = stack.pop()
            if s in seen:
                continue
            seen.add(s)
            if s[0] not in set1:
                return False
            out = succs(s)
            if out is None:
                return False
            stack.extend(out)
        return True

    if kind == "until":
        # Every play must reach set2 while staying in set1; a revisit on the
        # current path means some play never gets there.
        def play(s: ArenaState, on_path: frozenset) -> bool:
            if s[0] in set2:
                return True
            if s[0] not in set1 or s in on_path:
                return False
            out = succs(s)
            if out is None:
                return False
            return all(play(t, on_path | {s}) for t in out)

        return play(s0, frozenset())

    raise ValueError(f"unknown objective kind {kind!r}")


# ---------------------------------------------------------------------------
# Outcome enumeration


def enumerate_outcome_prefixes(g: PricedGameStructure, start: Configuration,
                               team_names: tuple[str, ...],
                               strategy: Callable[[tuple[Configuration, ...]], dict[int, int]],
                               steps: int) -> set[tuple[Configuration, ...]]:
    """All outcome prefixes of the given length under a team strategy.

    The strategy maps a history (nonempty tuple of configurations) to a
    choice {agent index -> action}; opponents range over every feasible
    completion, per the definition of out(c, F_A).  Prefixes shorter than
    requested appear as-is when a joint step is undefined.
    """
    team = _team_indices(g, team_names)
    opp = tuple(a for a in range(g.n_agents) if a not in team)
    results: set[tuple[Configuration, ...]] = set()

    def extend(history: tuple[Configuration, ...]):
        if len(history) == steps:
            results.add(history)
            return
        c = history[-1]
        choice = strategy(history)
        sigma = tuple(choice[a] for a in team)
        opp_played = False
        for beta in _choices(g, c.loc, opp):
            if not _feasible_literal(g, c, opp, beta):
                continue
            opp_played = True
            profile = [0] * g.n_agents
            for a, act in zip(team, sigma):
                profile[a] = act
            for a, act in zip(opp, beta):
                profile[a] = act
            nxt = step(g, c, tuple(profile))
            if nxt is None:
                results.add(history)
            else:
                extend(history + (nxt,))
        if not opp_played:
            results.add(history)

    extend((start,))
    return results
