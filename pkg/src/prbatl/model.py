"""Priced game structures: feasibility, stepping, and cost bookkeeping.

A structure holds n agents, r resource types, and a finite location graph.
Every agent has 1-based action indices at each location; action 1 is
do-nothing and must carry a zero resource delta.  Availability vectors live
in [0, m0] componentwise, where an m0 entry may be UNBOUNDED.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Union

# Sentinel for an infinite availability / money entry.  It is an ordinary
# int so plain comparisons work; only addition needs the clamp below.
UNBOUNDED = 2 ** 62

# Finite entries and deltas must stay far away from the sentinel so that
# sums can never be mistaken for it.
FINITE_LIMIT = 2 ** 48

Vector = tuple[int, ...]


def is_unbounded(value: int) -> bool:
    return value >= UNBOUNDED


def avail_entry_add(value: int, delta: int) -> int:
    """value + delta where an UNBOUNDED value absorbs any finite delta."""
    if value >= UNBOUNDED:
        return UNBOUNDED
    return value + delta


class Configuration(NamedTuple):
    loc: int
    avail: Vector


@dataclass(frozen=True)
class TeamChoice:
    """A joint action choice for one team, keyed by agent name."""

    agents: tuple[str, ...]
    actions: tuple[int, ...]

    @classmethod
    def of(cls, mapping: dict[str, int]) -> "TeamChoice":
        names = tuple(sorted(mapping))
        return cls(names, tuple(mapping[n] for n in names))

    def action_of(self, agent: str) -> int:
        return self.actions[self.agents.index(agent)]

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.agents, self.actions))


@dataclass(frozen=True)
class ConstantPrice:
    vector: Vector

    def __call__(self, m: Vector, q: int, a: int) -> Vector:
        return self.vector

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.vector)


@dataclass(frozen=True)
class TablePrice:
    """Finite lookup keyed by (availability, location, agent), with a default."""

    entries: tuple[tuple[tuple[Vector, int, int], Vector], ...]
    default: Vector

    def __call__(self, m: Vector, q: int, a: int) -> Vector:
        for key, vec in self.entries:
            if key == (m, q, a):
                return vec
        return self.default

    def is_zero(self) -> bool:
        if any(v != 0 for v in self.default):
            return False
        return all(all(v == 0 for v in vec) for _, vec in self.entries)


PriceFn = Union[ConstantPrice, TablePrice]


@dataclass(frozen=True)
class PricedGameStructure:
    agents: tuple[str, ...]
    resources: tuple[str, ...]
    locations: tuple[str, ...]
    labeling: tuple[frozenset[str], ...]
    initial: int
    action_count: tuple[tuple[int, ...], ...]
    # qty[q][a][action-1] is the delta vector of that action.
    qty: tuple[tuple[tuple[Vector, ...], ...], ...]
    # transition[q] maps full 1-based action profiles to target locations.
    transition: tuple[dict[Vector, int], ...]
    prices: PriceFn
    m0: Vector

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def n_resources(self) -> int:
        return len(self.resources)

    @property
    def n_locations(self) -> int:
        return len(self.locations)

    def agent_index(self, name: str) -> int:
        return self.agents.index(name)

    def location_index(self, name: str) -> int:
        return self.locations.index(name)

    def profiles(self, q: int) -> Iterator[Vector]:
        """D(q): the product of the agents' 1-based action ranges."""
        ranges = [range(1, d + 1) for d in self.action_count[q]]
        return (tuple(p) for p in itertools.product(*ranges))

    def initial_config(self) -> Configuration:
        return Configuration(self.initial, self.m0)


class ExplorationLimit(Exception):
    """Raised when reachable() would exceed its configuration budget."""


def validate(g: PricedGameStructure) -> list[str]:
    """Structural invariant check; returns one message per violation."""
    report: list[str] = []
    n, r = g.n_agents, g.n_resources
    if len(g.labeling) != g.n_locations:
        report.append("labeling must cover every location")
    if not (0 <= g.initial < g.n_locations):
        report.append("initial location out of range")
    if len(g.m0) != r:
        report.append("m0 arity mismatch")
    else:
        for i, v in enumerate(g.m0):
            if v < 0:
                report.append(f"m0[{i}] negative")
            elif v != UNBOUNDED and v > FINITE_LIMIT:
                report.append(f"m0[{i}] exceeds the finite-entry limit")
    if len(g.action_count) != g.n_locations or len(g.qty) != g.n_locations:
        report.append("action tables must cover every location")
        return report
    for q in range(g.n_locations):
        if len(g.action_count[q]) != n or len(g.qty[q]) != n:
            report.append(f"location {g.locations[q]}: per-agent tables have wrong arity")
            continue
        for a in range(n):
            d = g.action_count[q][a]
            if d < 1:
                report.append(f"location {g.locations[q]}, agent {g.agents[a]}: "
                              "at least one action required")
            if len(g.qty[q][a]) != d:
                report.append(f"location {g.locations[q]}, agent {g.agents[a]}: "
                              "qty table length differs from action count")
                continue
            for idx, delta in enumerate(g.qty[q][a], start=1):
                if len(delta) != r:
                    report.append(f"qty({g.locations[q]},{g.agents[a]},{idx}) arity mismatch")
                elif any(abs(v) > FINITE_LIMIT for v in delta):
                    report.append(f"qty({g.locations[q]},{g.agents[a]},{idx}) overflows "
                                  "the delta limit")
            if g.qty[q][a] and any(v != 0 for v in g.qty[q][a][0]):
                report.append(f"location {g.locations[q]}, agent {g.agents[a]}: "
                              "do-nothing must be zero")
        expected = set(g.profiles(q))
        present = set(g.transition[q].keys()) if q < len(g.transition) else set()
        if present != expected:
            report.append(f"location {g.locations[q]}: transition not total on D(q)")
        for target in g.transition[q].values():
            if not (0 <= target < g.n_locations):
                report.append(f"location {g.locations[q]}: transition target out of range")
    report.extend(_validate_prices(g))
    return report


def _validate_prices(g: PricedGameStructure) -> list[str]:
    report: list[str] = []
    vectors: list[Vector]
    if isinstance(g.prices, ConstantPrice):
        vectors = [g.prices.vector]
    else:
        vectors = [g.prices.default] + [vec for _, vec in g.prices.entries]
    for vec in vectors:
        if len(vec) != g.n_resources:
            report.append("price vector arity mismatch")
        elif any(v < 0 for v in vec):
            report.append("price values must be nonnegative")
        elif any(v > FINITE_LIMIT for v in vec):
            report.append("price values must be finite")
    return report


def qty_team(g: PricedGameStructure, q: int, team: frozenset[int] | set[int],
             profile: Vector) -> Vector:
    """Summed delta of the team members' actions in the given full profile."""
    total = [0] * g.n_resources
    for a in team:
        action = profile[a]
        if not (1 <= action <= g.action_count[q][a]):
            raise ValueError(f"action {action} out of range for agent index {a}")
        for i, v in enumerate(g.qty[q][a][action - 1]):
            total[i] += v
    return tuple(total)


def consd(g: PricedGameStructure, q: int, a: int, action: int) -> Vector:
    """Consumption part of a delta: productions zeroed, consumptions positive."""
    if not (1 <= action <= g.action_count[q][a]):
        raise ValueError(f"action {action} out of range for agent index {a}")
    return tuple(-v if v < 0 else 0 for v in g.qty[q][a][action - 1])


def price(g: PricedGameStructure, m: Vector, q: int, a: int) -> Vector:
    return g.prices(m, q, a)


def apply_delta(avail: Vector, delta: Vector, m0: Vector) -> Vector | None:
    """avail + delta if it stays within [0, m0] componentwise, else None."""
    out = []
    for value, d, cap in zip(avail, delta, m0):
        v = avail_entry_add(value, d)
        if v < 0 or v > cap:
            return None
        out.append(v)
    return tuple(out)


def step(g: PricedGameStructure, c: Configuration, profile: Vector) -> Configuration | None:
    """One joint move; None when the availability bound makes it undefined."""
    if len(profile) != g.n_agents:
        raise ValueError("profile arity mismatch")
    q = c.loc
    for a, action in enumerate(profile):
        if not (1 <= action <= g.action_count[q][a]):
            raise ValueError(f"action {action} out of range for agent index {a}")
    delta = qty_team(g, q, range(g.n_agents), profile)
    avail = apply_delta(c.avail, delta, g.m0)
    if avail is None:
        return None
    return Configuration(g.transition[q][profile], avail)


def team_feasible(g: PricedGameStructure, c: Configuration, tc: TeamChoice) -> bool:
    """A-feasibility: some full profile extends the choice with the TEAM delta in bounds.

    The bound only reads team coordinates, and the transition table is total,
    so existence of an extension reduces to the bound itself; kept as stated
    for clarity.
    """
    q = c.loc
    team = {g.agent_index(name) for name in tc.agents}
    choice = {g.agent_index(name): act for name, act in zip(tc.agents, tc.actions)}
    for a in team:
        if not (1 <= choice[a] <= g.action_count[q][a]):
            return False
    padded = tuple(choice.get(a, 1) for a in range(g.n_agents))
    delta = qty_team(g, q, team, padded)
    return apply_delta(c.avail, delta, g.m0) is not None


def reachable(g: PricedGameStructure, limit: int = 2_000_000) -> set[Configuration]:
    """Least set containing the initial configuration, closed under defined steps."""
    start = g.initial_config()
    seen = {start}
    frontier = [start]
    while frontier:
        nxt: list[Configuration] = []
        for c in frontier:
            for profile in g.profiles(c.loc):
                succ = step(g, c, profile)
                if succ is not None and succ not in seen:
                    seen.add(succ)
                    nxt.append(succ)
                    if len(seen) > limit:
                        raise ExplorationLimit(
                            f"more than {limit} reachable configurations")
        frontier = nxt
    return seen
