"""Bottom-up labeling of reachable configurations.

Each team operator is solved as a two-team fixpoint game on the
budget-augmented arena built in `engine`:

    next      one pass over safe moves
    until     least fixpoint (attractor toward the target set)
    globally  greatest fixpoint (safe region inside the constraint set)

Nested operators reset their own spent to zero; the money vector is supplied
per operator by the formula, so no cost state crosses operator boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import engine, model
from .engine import Arena, ArenaState, TeamContext
from .formulas import (And, Atom, Formula, Market, Not, TeamGlobally, TeamNext,
                       TeamUntil, Top, eval_market, render_formula, subformulas)
from .model import Configuration, PricedGameStructure, TeamChoice, Vector


def safe_moves(g: PricedGameStructure, c: Configuration, team: tuple[str, ...],
               money: Vector, spent: Optional[dict[str, int]] = None
               ) -> set[TeamChoice]:
    """A-feasible team choices with all opponent completions defined and affordable."""
    ctx = TeamContext(g, tuple(team), money)
    spent_tuple = tuple((spent or {}).get(g.agents[a], 0) for a in ctx.tracked)
    out = set()
    for choice_id, _ in ctx.safe_moves(c, spent_tuple):
        out.add(TeamChoice.of(ctx.choice_for(c.loc, choice_id)))
    return out


def _solve(g, team, money, kind, set1, set2, configs=None, limit=5_000_000,
           sink=None):
    if configs is None:
        configs = model.reachable(g)
    arena = Arena(g, configs, tuple(team), money, limit=limit)
    if sink is not None:
        sink.append(arena.n_states)
    return _solve_on_arena(arena, kind, set1, set2)


def _solve_on_arena(arena: Arena, kind: str, set1, set2) -> set[Configuration]:
    if kind == "next":
        mask = engine.one_step(arena, arena_mask(arena, set2))
    elif kind == "until":
        rank = engine.attractor(arena, arena_mask(arena, set1),
                                arena_mask(arena, set2))
        mask = rank >= 0
    elif kind == "globally":
        mask = engine.gfp(arena, arena_mask(arena, set1))
    else:
        raise ValueError(f"unknown objective {kind!r}")
    return arena.zero_spent_configs(mask)


def arena_mask(arena: Arena, configs) -> np.ndarray:
    return arena.state_mask(configs if isinstance(configs, set) else set(configs))


def solve_next(g: PricedGameStructure, team, money: Vector,
               targets: set[Configuration]) -> set[Configuration]:
    return _solve(g, team, money, "next", None, targets)


def solve_until(g: PricedGameStructure, team, money: Vector,
                set1: set[Configuration], set2: set[Configuration]
                ) -> set[Configuration]:
    return _solve(g, team, money, "until", set1, set2)


def solve_globally(g: PricedGameStructure, team, money: Vector,
                   set1: set[Configuration]) -> set[Configuration]:
    return _solve(g, team, money, "globally", set1, None)


@dataclass(frozen=True)
class Labeling:
    """Satisfaction sets per subformula, total on reachable configurations."""

    formula: Formula
    configs: frozenset[Configuration]
    sat: dict[Formula, frozenset[Configuration]]
    # (rendered team subformula, augmented-arena state count), outer last
    arena_sizes: tuple[tuple[str, int], ...] = ()

    def holds(self, f: Formula, c: Configuration) -> bool:
        if c not in self.configs:
            raise KeyError(f"not a reachable configuration: {c}")
        return c in self.sat[f]


def label(g: PricedGameStructure, f: Formula, limit: int = 5_000_000) -> Labeling:
    configs = model.reachable(g)
    table = subformulas(f)
    sat: dict[Formula, frozenset[Configuration]] = {}
    sizes: list[tuple[str, int]] = []
    sink: list[int] = []
    for node in table.nodes:
        if isinstance(node, Atom):
            result = {c for c in configs if node.name in g.labeling[c.loc]}
        elif isinstance(node, Top):
            result = set(configs)
        elif isinstance(node, Market):
            result = {c for c in configs
                      if eval_market(c.avail, node.rel, node.bound)}
        elif isinstance(node, Not):
            result = configs - sat[node.sub]
        elif isinstance(node, And):
            result = sat[node.left] & sat[node.right]
        elif isinstance(node, TeamNext):
            result = _solve(g, node.team, node.money, "next",
                            None, sat[node.sub], configs, limit, sink)
        elif isinstance(node, TeamUntil):
            result = _solve(g, node.team, node.money, "until",
                            sat[node.left], sat[node.right], configs, limit,
                            sink)
        elif isinstance(node, TeamGlobally):
            result = _solve(g, node.team, node.money, "globally",
                            sat[node.sub], None, configs, limit, sink)
        else:
            raise TypeError(f"not a formula node: {node!r}")
        if sink:
            sizes.append((render_formula(node), sink.pop()))
        sat[node] = frozenset(result)
    return Labeling(f, frozenset(configs), sat, tuple(sizes))


def check(g: PricedGameStructure, f: Formula, limit: int = 5_000_000) -> bool:
    return label(g, f, limit).holds(f, g.initial_config())


@dataclass(frozen=True)
class Witness:
    """Memoryless certificate for one team operator on the augmented arena."""

    node: Formula
    kind: str
    team: tuple[str, ...]
    tracked: tuple[str, ...]
    table: dict[ArenaState, TeamChoice]


def witness(g: PricedGameStructure, f: Formula) -> Optional[Witness]:
    """Strategy table certifying the outermost positively-placed team operator.

    Returns an empty-table Witness when the formula has no team operator in a
    positive position satisfied at the initial configuration; requires
    check(g, f) to be true.
    """
    lab = label(g, f)
    start = g.initial_config()
    if not lab.holds(f, start):
        return None
    node = _outer_team_node(f, lab, start)
    if node is None:
        return Witness(f, "none", (), (), {})
    if isinstance(node, TeamNext):
        kind, set1, set2 = "next", None, lab.sat[node.sub]
    elif isinstance(node, TeamUntil):
        kind, set1, set2 = "until", lab.sat[node.left], lab.sat[node.right]
    else:
        kind, set1, set2 = "globally", lab.sat[node.sub], None
    arena = Arena(g, set(lab.configs), node.team, node.money)
    table = _extract_strategy(arena, kind, set1, set2)
    tracked = tuple(g.agents[a] for a in arena.ctx.tracked)
    return Witness(node, kind, node.team, tracked, table)


def _outer_team_node(f: Formula, lab: Labeling, start: Configuration):
    """Leftmost shallowest team operator under And only, true at the start."""
    queue = [f]
    while queue:
        node = queue.pop(0)
        if isinstance(node, (TeamNext, TeamUntil, TeamGlobally)):
            if start in lab.sat[node]:
                return node
        elif isinstance(node, And):
            queue.append(node.left)
            queue.append(node.right)
    return None


def _extract_strategy(arena: Arena, kind: str, set1, set2
                      ) -> dict[ArenaState, TeamChoice]:
    in1 = arena_mask(arena, set1) if set1 is not None else None
    in2 = arena_mask(arena, set2) if set2 is not None else None
    table: dict[ArenaState, TeamChoice] = {}
    if kind == "next":
        good = engine.one_step(arena, in2)
        for s in np.flatnonzero(good):
            for j in range(arena.move_ptr[s], arena.move_ptr[s + 1]):
                succs = arena.succ_state[arena.succ_ptr[j]:arena.succ_ptr[j + 1]]
                if in2[succs].all():
                    table[arena.states[s]] = _choice(arena, s, j)
                    break
    elif kind == "until":
        rank = engine.attractor(arena, in1, in2)
        for s in np.flatnonzero(rank > 0):
            for j in range(arena.move_ptr[s], arena.move_ptr[s + 1]):
                succs = arena.succ_state[arena.succ_ptr[j]:arena.succ_ptr[j + 1]]
                ranks = rank[succs]
                if (ranks >= 0).all() and (ranks < rank[s]).all():
                    table[arena.states[s]] = _choice(arena, s, j)
                    break
    else:
        kept = engine.gfp(arena, in1)
        for s in np.flatnonzero(kept):
            for j in range(arena.move_ptr[s], arena.move_ptr[s + 1]):
                succs = arena.succ_state[arena.succ_ptr[j]:arena.succ_ptr[j + 1]]
                if kept[succs].all():
                    table[arena.states[s]] = _choice(arena, s, j)
                    break
    return table


def _choice(arena: Arena, state_id: int, move_id: int) -> TeamChoice:
    q = arena.states[state_id][0].loc
    return TeamChoice.of(arena.ctx.choice_for(q, int(arena.move_choice[move_id])))
