"""Budget-augmented arena construction and array fixpoint kernels.

A team operator is solved on an arena whose states are (configuration, spent)
pairs; spent holds the running cost per tracked team agent.  Safe moves are
resolved while the arena is built, so the kernels only see a two-level CSR:

    state i owns moves   move_ptr[i] : move_ptr[i+1]
    move  j reaches      succ_state[succ_ptr[j] : succ_ptr[j+1]]

One move is one A-feasible team choice (with its budget already checked)
together with every opponent-feasible completion; the joint step is defined
for all of them, which is what makes the move safe.  Compiled reductions run
with unbounded budgets, so their arenas collapse to plain configurations and
the fixpoints dominate; those run through numba kernels when available, with
a vectorized numpy fallback selected by PRBATL_DISABLE_NUMBA=1.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import model
from .model import Configuration, PricedGameStructure, UNBOUNDED, Vector

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised via the env flag instead
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def numba_enabled() -> bool:
    return NUMBA_AVAILABLE and os.environ.get("PRBATL_DISABLE_NUMBA", "") != "1"


def backend_name() -> str:
    return "numba" if numba_enabled() else "numpy"


class ArenaLimit(Exception):
    """The augmented arena would exceed the configured state limit."""


@dataclass(frozen=True)
class LocationTables:
    """Per-location choice tables, shared by every availability at that location."""

    team_actions: tuple[tuple[int, ...], ...]   # choice id -> action per team agent
    team_delta: tuple[Vector, ...]              # choice id -> summed team delta
    team_consd: tuple[tuple[Vector, ...], ...]  # choice id -> consd per team agent
    opp_actions: tuple[tuple[int, ...], ...]
    opp_delta: tuple[Vector, ...]


def location_tables(g: PricedGameStructure, q: int, team_idx: tuple[int, ...],
                    opp_idx: tuple[int, ...]) -> LocationTables:
    team_actions, team_delta, team_consd = [], [], []
    for actions in product(*(range(1, g.action_count[q][a] + 1) for a in team_idx)):
        delta = tuple(0 for _ in range(g.n_resources))
        consds = []
        for a, act in zip(team_idx, actions):
            vec = g.qty[q][a][act - 1]
            delta = tuple(d + v for d, v in zip(delta, vec))
            consds.append(tuple(-v if v < 0 else 0 for v in vec))
        team_actions.append(actions)
        team_delta.append(delta)
        team_consd.append(tuple(consds))
    opp_actions, opp_delta = [], []
    for actions in product(*(range(1, g.action_count[q][a] + 1) for a in opp_idx)):
        delta = tuple(0 for _ in range(g.n_resources))
        for a, act in zip(opp_idx, actions):
            vec = g.qty[q][a][act - 1]
            delta = tuple(d + v for d, v in zip(delta, vec))
        opp_actions.append(actions)
        opp_delta.append(delta)
    return LocationTables(tuple(team_actions), tuple(team_delta), tuple(team_consd),
                          tuple(opp_actions), tuple(opp_delta))


ArenaState = tuple[Configuration, tuple[int, ...]]


class TeamContext:
    """Per-team derived data: choice tables, tracked agents, budget charging.

    Tracked agents are the team members with a finite budget under a price
    function that is not identically zero; everyone else never constrains a
    move, so their spent coordinate is omitted.
    """

    def __init__(self, g: PricedGameStructure, team: tuple[str, ...], money: Vector):
        self.g = g
        self.team = team
        self.team_idx = tuple(sorted(g.agent_index(n) for n in team))
        self.opp_idx = tuple(a for a in range(g.n_agents)
                             if a not in self.team_idx)
        if g.prices.is_zero():
            self.tracked: tuple[int, ...] = ()
        else:
            self.tracked = tuple(a for a in self.team_idx
                                 if money[a] != UNBOUNDED)
        self.budgets = tuple(money[a] for a in self.tracked)
        self.zero_spent = tuple(0 for _ in self.tracked)
        self.tables = [location_tables(g, q, self.team_idx, self.opp_idx)
                       for q in range(g.n_locations)]

    def safe_moves(self, config: Configuration, spent: tuple[int, ...]):
        """Yield (choice id, successor states) for each safe move at a state."""
        g = self.g
        q, m = config
        tables = self.tables[q]
        completions = []
        for opp_id, odelta in enumerate(tables.opp_delta):
            if model.apply_delta(m, odelta, g.m0) is not None:
                completions.append(opp_id)
        for choice_id, tdelta in enumerate(tables.team_delta):
            if model.apply_delta(m, tdelta, g.m0) is None:
                continue
            if self.tracked:
                spent_next = self._charge(m, q, spent, tables.team_consd[choice_id])
                if spent_next is None:
                    continue
            else:
                spent_next = spent
            actions = tables.team_actions[choice_id]
            succs = []
            defined = True
            for opp_id in completions:
                profile = [0] * g.n_agents
                for a, act in zip(self.team_idx, actions):
                    profile[a] = act
                for a, act in zip(self.opp_idx, tables.opp_actions[opp_id]):
                    profile[a] = act
                succ = model.step(g, config, tuple(profile))
                if succ is None:
                    defined = False
                    break
                succs.append((succ, spent_next))
            if defined:
                yield choice_id, succs

    def choice_for(self, q: int, choice_id: int) -> dict[str, int]:
        actions = self.tables[q].team_actions[choice_id]
        return {self.g.agents[a]: act for a, act in zip(self.team_idx, actions)}

    def _charge(self, m: Vector, q: int, spent: tuple[int, ...],
                consds: tuple[Vector, ...]) -> tuple[int, ...] | None:
        out = []
        for pos, agent in enumerate(self.tracked):
            slot = self.team_idx.index(agent)
            price = model.price(self.g, m, q, agent)
            cost = sum(p * c for p, c in zip(price, consds[slot]))
            total = spent[pos] + cost
            if total > self.budgets[pos]:
                return None
            out.append(total)
        return tuple(out)


class Arena:
    """Safe-move graph over (configuration, spent) states for one team operator.

    States whose spent would exceed the budget are pruned at generation time
    inside TeamContext.safe_moves, so they are never materialized here.
    """

    def __init__(self, g: PricedGameStructure, configs: set[Configuration],
                 team: tuple[str, ...], money: Vector, limit: int = 5_000_000):
        self.g = g
        self.ctx = TeamContext(g, team, money)
        self.zero_spent = self.ctx.zero_spent

        states: list[ArenaState] = [(c, self.zero_spent) for c in sorted(configs)]
        index: dict[ArenaState, int] = {s: i for i, s in enumerate(states)}

        move_owner: list[int] = []
        move_choice: list[int] = []
        succ_lists: list[list[int]] = []

        cursor = 0
        while cursor < len(states):
            config, spent = states[cursor]
            for choice_id, succs in self.ctx.safe_moves(config, spent):
                succ_ids = []
                for succ in succs:
                    sid = index.get(succ)
                    if sid is None:
                        sid = len(states)
                        if sid >= limit:
                            raise ArenaLimit(f"arena exceeds {limit} states")
                        states.append(succ)
                        index[succ] = sid
                    succ_ids.append(sid)
                move_owner.append(cursor)
                move_choice.append(choice_id)
                succ_lists.append(succ_ids)
            cursor += 1

        self.states = states
        self.index = index
        self.n_states = len(states)
        self.n_moves = len(move_owner)
        self.move_owner = np.asarray(move_owner, dtype=np.int64)
        self.move_choice = np.asarray(move_choice, dtype=np.int64)
        # moves were emitted grouped by owner in ascending order
        counts = np.bincount(self.move_owner, minlength=self.n_states) \
            if self.n_moves else np.zeros(self.n_states, dtype=np.int64)
        self.move_ptr = np.zeros(self.n_states + 1, dtype=np.int64)
        np.cumsum(counts, out=self.move_ptr[1:])
        lengths = np.asarray([len(s) for s in succ_lists], dtype=np.int64)
        self.succ_ptr = np.zeros(self.n_moves + 1, dtype=np.int64)
        np.cumsum(lengths, out=self.succ_ptr[1:])
        self.succ_state = np.asarray(
            [sid for lst in succ_lists for sid in lst], dtype=np.int64)
        self.edge_move = np.repeat(np.arange(self.n_moves, dtype=np.int64), lengths)
        self._pred = None

    # -- derived arrays ------------------------------------------------------

    def pred_csr(self):
        """CSR over states: the moves that list each state as a successor."""
        if self._pred is None:
            order = np.argsort(self.succ_state, kind="stable")
            pred_move = self.edge_move[order]
            counts = np.bincount(self.succ_state, minlength=self.n_states)
            pred_ptr = np.zeros(self.n_states + 1, dtype=np.int64)
            np.cumsum(counts, out=pred_ptr[1:])
            self._pred = (pred_ptr, pred_move)
        return self._pred

    def state_mask(self, configs: set[Configuration]) -> np.ndarray:
        mask = np.zeros(self.n_states, dtype=np.bool_)
        for i, (c, _) in enumerate(self.states):
            if c in configs:
                mask[i] = True
        return mask

    def zero_spent_configs(self, mask: np.ndarray) -> set[Configuration]:
        return {c for i, (c, spent) in enumerate(self.states)
                if mask[i] and spent == self.zero_spent}


# ---------------------------------------------------------------------------
# Fixpoint kernels.  Both backends compute the same arrays:
#   attractor: rank[i] = -1 unreached, 0 target, k > 0 added at step k
#   gfp:       kept[i] boolean

@njit(cache=True)
def _attractor_numba(move_ptr, succ_ptr, succ_state, move_owner,
                     pred_ptr, pred_move, in_set1, in_set2):  # pragma: no cover
    n = in_set1.size
    m = move_owner.size
    rank = np.full(n, -1, np.int64)
    pending = np.empty(m, np.int64)
    for j in range(m):
        pending[j] = succ_ptr[j + 1] - succ_ptr[j]
    queue = np.empty(n, np.int64)
    tail = 0
    for i in range(n):
        if in_set2[i]:
            rank[i] = 0
            queue[tail] = i
            tail += 1
    # vacuous moves (no completions) win immediately
    for j in range(m):
        if pending[j] == 0:
            owner = move_owner[j]
            if rank[owner] == -1 and in_set1[owner]:
                rank[owner] = 1
                queue[tail] = owner
                tail += 1
    head = 0
    order = 1
    while head < tail:
        s = queue[head]
        head += 1
        for e in range(pred_ptr[s], pred_ptr[s + 1]):
            j = pred_move[e]
            pending[j] -= 1
            if pending[j] == 0:
                owner = move_owner[j]
                if rank[owner] == -1 and in_set1[owner]:
                    order += 1
                    rank[owner] = order
                    queue[tail] = owner
                    tail += 1
    return rank


def _attractor_numpy(succ_ptr, succ_state, move_owner, in_set1, in_set2, edge_move):
    n = in_set1.size
    m = move_owner.size
    rank = np.full(n, -1, np.int64)
    rank[in_set2] = 0
    pending = succ_ptr[1:] - succ_ptr[:-1]
    vac = np.unique(move_owner[pending == 0]) if m else np.empty(0, np.int64)
    vac = vac[in_set1[vac] & (rank[vac] == -1)] if vac.size else vac
    rank[vac] = 1
    frontier = np.concatenate([np.flatnonzero(in_set2), vac])
    step = 1
    while frontier.size:
        hit_mask = np.zeros(n, dtype=np.bool_)
        hit_mask[frontier] = True
        hit = hit_mask[succ_state]
        dec = np.bincount(edge_move[hit], minlength=m)
        pending = pending - dec
        ready = (pending == 0) & (dec > 0)
        owners = np.unique(move_owner[ready]) if ready.any() else np.empty(0, np.int64)
        newly = owners[in_set1[owners] & (rank[owners] == -1)] if owners.size else owners
        step += 1
        rank[newly] = step
        frontier = newly
    return rank


def attractor(arena: Arena, in_set1: np.ndarray, in_set2: np.ndarray) -> np.ndarray:
    if numba_enabled():
        pred_ptr, pred_move = arena.pred_csr()
        return _attractor_numba(arena.move_ptr, arena.succ_ptr, arena.succ_state,
                                arena.move_owner, pred_ptr, pred_move,
                                in_set1, in_set2)
    return _attractor_numpy(arena.succ_ptr, arena.succ_state, arena.move_owner,
                            in_set1, in_set2, arena.edge_move)


@njit(cache=True)
def _gfp_numba(move_ptr, succ_ptr, succ_state, move_owner,
               pred_ptr, pred_move, in_set1):  # pragma: no cover
    n = in_set1.size
    m = move_owner.size
    kept = in_set1.copy()
    bad = np.zeros(m, np.int64)
    alive = np.zeros(n, np.int64)
    for j in range(m):
        cnt = 0
        for e in range(succ_ptr[j], succ_ptr[j + 1]):
            if not kept[succ_state[e]]:
                cnt += 1
        bad[j] = cnt
        if cnt == 0:
            alive[move_owner[j]] += 1
    queue = np.empty(n, np.int64)
    head = 0
    tail = 0
    for i in range(n):
        if kept[i] and alive[i] == 0:
            kept[i] = False
            queue[tail] = i
            tail += 1
    while head < tail:
        s = queue[head]
        head += 1
        for e in range(pred_ptr[s], pred_ptr[s + 1]):
            j = pred_move[e]
            bad[j] += 1
            if bad[j] == 1:
                owner = move_owner[j]
                alive[owner] -= 1
                if alive[owner] == 0 and kept[owner]:
                    kept[owner] = False
                    queue[tail] = owner
                    tail += 1
    return kept


def _gfp_numpy(succ_ptr, succ_state, move_owner, in_set1, edge_move):
    n = in_set1.size
    m = move_owner.size
    kept = in_set1.copy()
    bad = np.bincount(edge_move[~kept[succ_state]], minlength=m) \
        if succ_state.size else np.zeros(m, dtype=np.int64)
    alive = np.bincount(move_owner[bad == 0], minlength=n)
    removed = kept & (alive == 0)
    kept[removed] = False
    while removed.any():
        hit = removed[succ_state]
        inc = np.bincount(edge_move[hit], minlength=m)
        died = (bad == 0) & (inc > 0)
        bad = bad + inc
        alive = alive - np.bincount(move_owner[died], minlength=n)
        removed = kept & (alive == 0)
        kept[removed] = False
    return kept


def gfp(arena: Arena, in_set1: np.ndarray) -> np.ndarray:
    if numba_enabled():
        pred_ptr, pred_move = arena.pred_csr()
        return _gfp_numba(arena.move_ptr, arena.succ_ptr, arena.succ_state,
                          arena.move_owner, pred_ptr, pred_move, in_set1)
    return _gfp_numpy(arena.succ_ptr, arena.succ_state, arena.move_owner,
                      in_set1, arena.edge_move)


def one_step(arena: Arena, in_targets: np.ndarray) -> np.ndarray:
    """States having a safe move whose every completion lands in the targets."""
    m = arena.n_moves
    if arena.succ_state.size:
        bad = np.bincount(arena.edge_move[~in_targets[arena.succ_state]],
                          minlength=m)
    else:
        bad = np.zeros(m, dtype=np.int64)
    good_moves = arena.move_owner[bad == 0]
    out = np.zeros(arena.n_states, dtype=np.bool_)
    out[good_moves] = True
    return out
