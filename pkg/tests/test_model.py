import pytest

from prbatl.demo import demo_structure
from prbatl.model import (
    UNBOUNDED,
    Configuration,
    ConstantPrice,
    ExplorationLimit,
    PricedGameStructure,
    TablePrice,
    consd,
    price,
    qty_team,
    reachable,
    step,
    TeamChoice,
    team_feasible,
    validate,
)


def single_loop(m0=(2,), qty_a1=((0,),)):
    """One location, configurable single-agent action table."""
    return PricedGameStructure(
        agents=("a1",),
        resources=("R1",) * len(m0) if len(m0) == 1 else tuple(f"R{i}" for i in range(len(m0))),
        locations=("q0",),
        labeling=(frozenset({"p"}),),
        initial=0,
        action_count=((len(qty_a1),),),
        qty=((qty_a1,),),
        transition=({tuple([k]): 0 for k in range(1, len(qty_a1) + 1)},),
        prices=ConstantPrice((0,) * len(m0)),
        m0=m0,
    )


def test_demo_structure_is_well_formed():
    assert validate(demo_structure()) == []


def test_validate_flags_nonzero_do_nothing():
    g = single_loop(qty_a1=((-1,),))
    assert any("do-nothing" in msg for msg in validate(g))


def test_validate_flags_partial_transition():
    g = demo_structure()
    broken = PricedGameStructure(
        **{**g.__dict__, "transition": ({(1, 1): 4},) + g.transition[1:]})
    assert any("not total" in msg for msg in validate(broken))


def test_qty_team_sums_team_members_only():
    g = demo_structure()
    assert qty_team(g, 0, {0, 1}, (2, 1)) == (-1,)
    assert qty_team(g, 0, {1}, (2, 1)) == (0,)
    assert qty_team(g, 0, set(), (2, 1)) == (0,)


def test_qty_team_additive_over_partition():
    g = demo_structure()
    for q in range(g.n_locations):
        for profile in g.profiles(q):
            whole = qty_team(g, q, {0, 1}, profile)
            parts = zip(qty_team(g, q, {0}, profile), qty_team(g, q, {1}, profile))
            assert whole == tuple(x + y for x, y in parts)


def test_consd_splits_signs():
    g = demo_structure()
    assert consd(g, 0, 0, 2) == (1,)
    assert consd(g, 0, 0, 1) == (0,)
    mixed = single_loop(m0=(5, 5, 5), qty_a1=((0, 0, 0), (-2, 3, 0)))
    assert consd(mixed, 0, 0, 2) == (2, 0, 0)


def test_step_spends_and_moves():
    g = demo_structure()
    c = g.initial_config()
    assert step(g, c, (2, 1)) == Configuration(1, (0,))
    assert step(g, Configuration(1, (0,)), (1, 2)) is None
    assert step(g, Configuration(2, (0,)), (1, 1)) == Configuration(2, (0,))


def test_step_rejects_overproduction():
    g = single_loop(m0=(2,), qty_a1=((0,), (2,)))
    assert step(g, Configuration(0, (1,)), (2,)) is None
    assert step(g, Configuration(0, (0,)), (2,)) == Configuration(0, (2,))


def test_step_with_unbounded_entry_never_caps():
    g = single_loop(m0=(UNBOUNDED,), qty_a1=((0,), (5,)))
    c = Configuration(0, (UNBOUNDED,))
    assert step(g, c, (2,)) == c
    assert step(g, c, (1,)) == c


def test_team_feasibility_matches_worked_cases():
    g = demo_structure()
    assert not team_feasible(g, Configuration(1, (0,)), TeamChoice.of({"a2": 2}))
    assert team_feasible(g, Configuration(0, (1,)), TeamChoice.of({"a1": 2}))
    for q in range(g.n_locations):
        c = Configuration(q, (0,))
        assert team_feasible(g, c, TeamChoice.of({"a1": 1, "a2": 1}))


def test_reachable_demo_golden():
    g = demo_structure()
    assert reachable(g) == {
        Configuration(0, (1,)),
        Configuration(1, (0,)),
        Configuration(4, (1,)),
        Configuration(2, (0,)),
        Configuration(3, (1,)),
    }


def test_reachable_single_loop():
    g = single_loop()
    assert reachable(g) == {Configuration(0, (2,))}


def test_reachable_respects_bounds():
    g = demo_structure(m0=3)
    for c in reachable(g):
        assert all(0 <= v <= cap for v, cap in zip(c.avail, g.m0))


def test_reachable_limit_guard():
    g = single_loop(m0=(1000,), qty_a1=((0,), (-1,)))
    with pytest.raises(ExplorationLimit):
        reachable(g, limit=50)


def test_price_lookup():
    g = demo_structure()
    assert price(g, (1,), 0, 0) == (0,)
    table = TablePrice(entries=((((1,), 0, 0), (3,)),), default=(1,))
    g2 = PricedGameStructure(**{**g.__dict__, "prices": table})
    assert price(g2, (1,), 0, 0) == (3,)
    assert price(g2, (0,), 0, 0) == (1,)
    assert not table.is_zero()
    assert ConstantPrice((0,)).is_zero()


def test_do_nothing_profile_always_defined():
    for m0 in (0, 1, 2):
        g = demo_structure(m0=m0)
        for c in reachable(g):
            succ = step(g, c, (1, 1))
            assert succ is not None
            assert succ.avail == c.avail
