"""Seeded random instances for the differential suite.

The envelope stays small on purpose: at most 5 locations, 2 agents, at
most 2 resources, m0 entries at most 3, endowments at most 5, price
vectors with no zero entries, and team-operator nesting at most 2 over
next/until/globally plus market atoms.  That keeps the brute-force oracle
tractable while covering every operator, both price kinds, empty and full
teams, and availability bounds that actually bite.
"""

from __future__ import annotations

import random
from itertools import product

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
)
from .model import ConstantPrice, PricedGameStructure, TablePrice, Vector

ATOMS = ("p", "s")
AGENTS = ("a1", "a2")
MAX_LOCATIONS = 5
MAX_RESOURCES = 2
MAX_M0 = 3
MAX_MONEY = 5


def rng(seed: int) -> random.Random:
    return random.Random(seed)


def _random_vector(r: random.Random, n: int, lo: int, hi: int) -> Vector:
    return tuple(r.randint(lo, hi) for _ in range(n))


def _random_prices(r: random.Random, n_loc: int, n_res: int, m0: Vector):
    if r.random() < 0.4:
        return ConstantPrice(_random_vector(r, n_res, 1, 3))
    entries = []
    for _ in range(r.randint(1, 4)):
        avail = tuple(r.randint(0, c) for c in m0)
        entries.append(((avail, r.randrange(n_loc), r.randrange(len(AGENTS))),
                        _random_vector(r, n_res, 1, 3)))
    return TablePrice(tuple(entries), _random_vector(r, n_res, 1, 3))


def random_structure(r: random.Random) -> PricedGameStructure:
    n_loc = r.randint(1, MAX_LOCATIONS)
    n_res = r.randint(1, MAX_RESOURCES)
    m0 = _random_vector(r, n_res, 0, MAX_M0)
    labeling = tuple(frozenset(a for a in ATOMS if r.random() < 0.5)
                     for _ in range(n_loc))
    action_count = []
    qty = []
    transition = []
    for _ in range(n_loc):
        counts = tuple(r.randint(1, 3) for _ in AGENTS)
        action_count.append(counts)
        rows = []
        for a in range(len(AGENTS)):
            vecs = [tuple(0 for _ in range(n_res))]
            vecs.extend(_random_vector(r, n_res, -2, 2)
                        for _ in range(counts[a] - 1))
            rows.append(tuple(vecs))
        qty.append(tuple(rows))
        transition.append({prof: r.randrange(n_loc)
                           for prof in product(*(range(1, c + 1)
                                                 for c in counts))})
    return PricedGameStructure(
        agents=AGENTS,
        resources=tuple(f"r{i + 1}" for i in range(n_res)),
        locations=tuple(f"q{i}" for i in range(n_loc)),
        labeling=labeling,
        initial=0,
        action_count=tuple(action_count),
        qty=tuple(qty),
        transition=tuple(transition),
        prices=_random_prices(r, n_loc, n_res, m0),
        m0=m0)


def _random_team(r: random.Random) -> tuple[str, ...]:
    return r.choice(((), ("a1",), ("a2",), ("a1", "a2")))


def _random_state_formula(r: random.Random, g: PricedGameStructure) -> Formula:
    roll = r.random()
    if roll < 0.4:
        return Atom(r.choice(ATOMS))
    if roll < 0.5:
        return Top()
    rel = r.choice(("<", "<=", "=", ">=", ">"))
    return Market(rel, tuple(r.randint(0, c) for c in g.m0))


def random_formula(r: random.Random, g: PricedGameStructure,
                   depth: int = 2) -> Formula:
    if depth == 0:
        return _random_state_formula(r, g)
    roll = r.random()
    if roll < 0.15:
        return _random_state_formula(r, g)
    if roll < 0.3:
        return Not(random_formula(r, g, depth - 1))
    if roll < 0.4:
        return And(random_formula(r, g, depth - 1),
                   random_formula(r, g, depth - 1))
    team = _random_team(r)
    # One entry per structure agent; non-team entries are ignored, kept zero.
    money = tuple(r.randint(0, MAX_MONEY) if name in team else 0
                  for name in AGENTS)
    kind = r.choice(("next", "until", "globally"))
    if kind == "next":
        return TeamNext(team, money, random_formula(r, g, depth - 1))
    if kind == "until":
        return TeamUntil(team, money, random_formula(r, g, depth - 1),
                         random_formula(r, g, depth - 1))
    return TeamGlobally(team, money, random_formula(r, g, depth - 1))


def random_instance(r: random.Random) -> tuple[PricedGameStructure, Formula]:
    g = random_structure(r)
    return g, random_formula(r, g)


def monotone_budget_pair(r: random.Random, g: PricedGameStructure
                         ) -> tuple[Formula, Formula]:
    """One team operator instantiated at two componentwise-ordered budgets,
    for satisfaction-set inclusion checks."""
    team = ("a1", "a2") if r.random() < 0.5 else (r.choice(AGENTS),)
    low, high = [], []
    for name in g.agents:
        if name in team:
            a = r.randint(0, MAX_MONEY)
            b = r.randint(a, MAX_MONEY)
        else:
            a = b = 0
        low.append(a)
        high.append(b)
    kind = r.choice(("next", "until", "globally"))
    sub = random_formula(r, g, depth=1)
    if kind == "next":
        return (TeamNext(team, tuple(low), sub),
                TeamNext(team, tuple(high), sub))
    if kind == "globally":
        return (TeamGlobally(team, tuple(low), sub),
                TeamGlobally(team, tuple(high), sub))
    sub2 = random_formula(r, g, depth=1)
    return (TeamUntil(team, tuple(low), sub, sub2),
            TeamUntil(team, tuple(high), sub, sub2))
