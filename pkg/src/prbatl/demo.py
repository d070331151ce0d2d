"""A small two-agent, one-resource demo structure used in docs and tests.

Five locations; agent a1 can spend the single resource at loc0 to steer the
play toward loc1/loc2, agent a2 can spend it at loc1 to escape to loc3.
With m0 = <1> only one of the two purchases can ever happen.
"""

from __future__ import annotations

from .model import ConstantPrice, PricedGameStructure


def demo_structure(m0: int = 1) -> PricedGameStructure:
    zero = (0,)
    cons = (-1,)
    return PricedGameStructure(
        agents=("a1", "a2"),
        resources=("R1",),
        locations=("q0", "q1", "q2", "q3", "q4"),
        labeling=(frozenset({"p"}), frozenset({"p"}), frozenset({"p"}),
                  frozenset(), frozenset()),
        initial=0,
        action_count=((2, 1), (1, 2), (1, 1), (1, 1), (1, 1)),
        qty=(
            ((zero, cons), (zero,)),
            ((zero,), (zero, cons)),
            ((zero,), (zero,)),
            ((zero,), (zero,)),
            ((zero,), (zero,)),
        ),
        transition=(
            {(1, 1): 4, (2, 1): 1},
            {(1, 1): 2, (1, 2): 3},
            {(1, 1): 2},
            {(1, 1): 3},
            {(1, 1): 3},
        ),
        prices=ConstantPrice((0,)),
        m0=(m0,),
    )
