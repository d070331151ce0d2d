import itertools

import pytest

from prbatl import model
from prbatl.demo import demo_structure
from prbatl.formulas import parse_formula
from prbatl.model import UNBOUNDED, Configuration
from prbatl.oracle import (
    OracleLimit,
    _Arena,
    enumerate_outcome_prefixes,
    opponent_attractor,
    oracle_check,
    oracle_label,
    solve_globally_sweep,
    solve_next_sweep,
    solve_until_sweep,
    strategy_enumeration_check,
)

INF2 = (UNBOUNDED, UNBOUNDED)
PSI = "<<a1,a2:[inf,inf]>> X <<a1:[inf,0]>> G p"


def arena_for(g, team, money=INF2):
    return _Arena(g, model.reachable(g), team, money, limit=100_000)


def p_configs(g):
    return {c for c in model.reachable(g) if "p" in g.labeling[c.loc]}


def at_loc(g, name):
    q = g.location_index(name)
    return {c for c in model.reachable(g) if c.loc == q}


# --- golden verdicts, derived by hand over the five-location demo ------------

def test_golden_verdicts_for_nested_next_globally():
    assert oracle_check(demo_structure(1), parse_formula(PSI, agents=("a1", "a2"))) is True
    assert oracle_check(demo_structure(2), parse_formula(PSI, agents=("a1", "a2"))) is False
    assert oracle_check(demo_structure(0), parse_formula(PSI, agents=("a1", "a2"))) is False


def test_globally_region_m0_one():
    g = demo_structure(1)
    region = solve_globally_sweep(arena_for(g, ("a1",)), p_configs(g))
    assert region == {Configuration(0, (1,)), Configuration(1, (0,)),
                      Configuration(2, (0,))}


def test_globally_excludes_richer_market():
    # With two units the opponent can afford the escape to the unlabeled sink.
    g = demo_structure(2)
    region = solve_globally_sweep(arena_for(g, ("a1",)), p_configs(g))
    assert Configuration(1, (1,)) not in region
    assert region == {Configuration(2, (1,))}


def test_until_reaches_the_loop_location():
    g = demo_structure(1)
    result = solve_until_sweep(arena_for(g, ("a1",)), p_configs(g), at_loc(g, "q2"))
    assert Configuration(0, (1,)) in result


def test_next_examples():
    g = demo_structure(1)
    both = arena_for(g, ("a1", "a2"))
    assert Configuration(0, (1,)) in solve_next_sweep(both, {Configuration(1, (0,))})
    all_configs = model.reachable(g)
    assert solve_next_sweep(both, all_configs) == all_configs
    solo = arena_for(g, ("a1",))
    assert Configuration(0, (1,)) in solve_next_sweep(solo, {Configuration(4, (1,))})


def test_reachability_verdicts():
    g = demo_structure(1)
    # a1 alone forces q3 by doing nothing: q0 -> q4 -> q3.
    f = parse_formula("<<a1:[inf,0]>> F q3at", agents=("a1", "a2"))
    g3 = with_extra_label(g, "q3", "q3at")
    assert oracle_check(g3, f) is True
    # The empty team cannot force reaching q2: the play through q4 escapes.
    g2 = with_extra_label(g, "q2", "q2at")
    f2 = parse_formula("<<a2:[0,0]>> F q2at & true", agents=("a1", "a2"))
    # team {a2}: a2 has no influence at q0; the a1-outcome through q4 avoids q2.
    assert oracle_check(g2, f2) is False


def with_extra_label(g, loc_name, prop):
    q = g.location_index(loc_name)
    labeling = tuple(
        labels | {prop} if i == q else labels for i, labels in enumerate(g.labeling))
    return model.PricedGameStructure(**{**g.__dict__, "labeling": labeling})


# --- spec-level fixpoint identities ------------------------------------------

def test_until_with_empty_first_set_is_direct_membership():
    g = demo_structure(1)
    set2 = at_loc(g, "q2") | at_loc(g, "q4")
    assert solve_until_sweep(arena_for(g, ("a1",)), set(), set2) == set2


def test_until_with_empty_target_is_empty():
    g = demo_structure(1)
    assert solve_until_sweep(arena_for(g, ("a1",)), model.reachable(g), set()) == set()


def test_globally_over_everything_is_everything():
    g = demo_structure(1)
    every = model.reachable(g)
    assert solve_globally_sweep(arena_for(g, ("a1",)), every) == every


def test_one_step_until_includes_next():
    g = demo_structure(1)
    set1 = p_configs(g)
    set2 = at_loc(g, "q2")
    nxt = solve_next_sweep(arena_for(g, ("a1",)), set2)
    until = solve_until_sweep(arena_for(g, ("a1",)), set1, set2)
    assert (nxt & set1) <= until


def test_determinacy_dual():
    for m0 in (0, 1, 2):
        g = demo_structure(m0)
        arena = arena_for(g, ("a1",))
        set1 = p_configs(g)
        kept = solve_globally_sweep(arena, set1)
        attr = opponent_attractor(arena, set1)
        zero = arena.zero_spent()
        outside = {c for c, spent in attr if spent == zero}
        assert kept == model.reachable(g) - outside


# --- literal strategy enumeration cross-check ---------------------------------

def test_strategy_enumeration_agrees_on_demo():
    for m0 in (0, 1, 2):
        g = demo_structure(m0)
        set1 = p_configs(g)
        sweep = solve_globally_sweep(arena_for(g, ("a1",)), set1)
        enum = strategy_enumeration_check(
            g, ("a1",), INF2, "globally", set1, set(), start=g.initial_config())
        assert enum == (g.initial_config() in sweep)


def test_strategy_enumeration_until_agrees():
    g = demo_structure(1)
    set1 = model.reachable(g)
    set2 = at_loc(g, "q3")
    sweep = solve_until_sweep(arena_for(g, ("a1",)), set1, set2)
    enum = strategy_enumeration_check(g, ("a1",), INF2, "until", set1, set2)
    assert enum == (g.initial_config() in sweep)
    set2bad = at_loc(g, "q2")
    enum2 = strategy_enumeration_check(g, ("a2",), INF2, "until", set1, set2bad)
    sweep2 = solve_until_sweep(arena_for(g, ("a2",)), set1, set2bad)
    assert enum2 == (g.initial_config() in sweep2)


# --- outcome enumeration -------------------------------------------------------

def test_outcome_uniqueness_after_the_purchase():
    g = demo_structure(1)

    def strategy(history):
        return {0: 2} if len(history) == 1 else {0: 1}

    prefixes = enumerate_outcome_prefixes(g, g.initial_config(), ("a1",), strategy, 6)
    q = [g.location_index(n) for n in ("q0", "q1", "q2")]
    expected = (
        Configuration(q[0], (1,)), Configuration(q[1], (0,)),
        Configuration(q[2], (0,)), Configuration(q[2], (0,)),
        Configuration(q[2], (0,)), Configuration(q[2], (0,)),
    )
    assert prefixes == {expected}


def test_outcome_branches_without_the_purchase():
    g = demo_structure(2)

    def strategy(history):
        return {1: 1}  # a2 idles; a1 is the opponent here

    prefixes = enumerate_outcome_prefixes(g, g.initial_config(), ("a2",), strategy, 2)
    assert len(prefixes) == 2  # a1 may or may not buy the move to q1


# --- money bookkeeping ----------------------------------------------------------

def priced_demo(budget1):
    g = demo_structure(1)
    g = model.PricedGameStructure(**{**g.__dict__, "prices": model.ConstantPrice((1,))})
    return g, (budget1, UNBOUNDED)


def test_budget_blocks_consuming_action():
    g, money = priced_demo(budget1=0)
    # Buying the move to q1 costs 1, so a zero budget strands a1 at q0; the
    # do-nothing row at q1 still suffices because the opponent cannot afford
    # the escape there with the market drained.
    set1 = p_configs(g)
    arena = _Arena(g, model.reachable(g), ("a1",), money, limit=10_000)
    region = solve_globally_sweep(arena, set1)
    assert region == {Configuration(1, (0,)), Configuration(2, (0,))}
    assert Configuration(0, (1,)) not in region


def test_budget_one_restores_the_verdict():
    g, money = priced_demo(budget1=1)
    set1 = p_configs(g)
    arena = _Arena(g, model.reachable(g), ("a1",), money, limit=10_000)
    assert Configuration(0, (1,)) in solve_globally_sweep(arena, set1)


def test_oracle_limit_guard():
    g = demo_structure(1)
    with pytest.raises(OracleLimit):
        oracle_label(g, parse_formula(PSI, agents=("a1", "a2")), limit=3)


# --- whole-formula labeling -----------------------------------------------------

def test_label_handles_booleans_and_markets():
    g = demo_structure(1)
    f = parse_formula("!p & avail >= [1]", agents=("a1", "a2"), n_resources=1)
    sat = oracle_label(g, f)
    assert sat[f] == {Configuration(4, (1,)), Configuration(3, (1,))}


def test_empty_team_globally_on_single_loop():
    g = demo_structure(1)
    f = parse_formula("<<a1:[0,0]>> G true", agents=("a1", "a2"))
    assert oracle_check(g, f) is True
