"""Arithmetic gadget modules over counterbalanced resource pairs.

Every gadget is a module text for `hier`.  The working loops update a pair
(x, ~x) in opposite directions; a guard handshake (-Max ~x then +Max ~x) is
enabled exactly when x = 0, which forces a single enabled edge at every
node.  Each gadget carries one arithmetic contract relating entry and exit
valuations; the contracts are the oracle the simulator is tested against.

Scratch variables: t is the copy buffer used by assign/add, i the loop
counter of times_10/div_10, r the remainder cell of div_10.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional

from .hier import FlatInfo, HierarchicalGame, flatten_info, parse_hier

Valuation = Mapping[str, int]

LIBRARY: dict[str, str] = {
    # x := 0 by draining x into ~x; the guard fires once ~x holds all of Max.
    "to_zero": """
module to_zero(x) {
  nodes a m out;
  entry a;
  exits out;
  edge a -> a "-1 x, +1 ~x";
  edge a -> m "-Max ~x";
  edge m -> out "+Max ~x";
}
""",
    # x1 := x2, preserving x2: drain x2 into x1 and t together, then pour
    # t back into x2.
    "assign": """
module assign(x1, x2) {
  use z1 = to_zero(x1);
  use z2 = to_zero(t);
  nodes loop m rst m2 out;
  entry z1;
  exits out;
  edge z1 -> z2 "";
  edge z2 -> loop "";
  edge loop -> loop "-1 x2, +1 ~x2, +1 x1, -1 ~x1, +1 t, -1 ~t";
  edge loop -> m "-Max ~x2";
  edge m -> rst "+Max ~x2";
  edge rst -> rst "+1 x2, -1 ~x2, -1 t, +1 ~t";
  edge rst -> m2 "-Max ~t";
  edge m2 -> out "+Max ~t";
}
""",
    # x := 10 * x: copy x into the counter i, clear x, then add 10 per unit
    # of i.
    "times_10": """
module times_10(x) {
  use cp = assign(i, x);
  use z = to_zero(x);
  nodes loop m out;
  entry cp;
  exits out;
  edge cp -> z "";
  edge z -> loop "";
  edge loop -> loop "-1 i, +1 ~i, +10 x, -10 ~x";
  edge loop -> m "-Max ~i";
  edge m -> out "+Max ~i";
}
""",
    # x1 := x1 + x2, preserving x2.  The copy lands in r, not t: assign
    # already uses t as its internal buffer, so assign(t, x2) would write
    # the buffer into its own target and double the count.
    "add": """
module add(x1, x2) {
  use cp = assign(r, x2);
  nodes loop m out;
  entry cp;
  exits out;
  edge cp -> loop "";
  edge loop -> loop "-1 r, +1 ~r, +1 x1, -1 ~x1";
  edge loop -> m "-Max ~r";
  edge m -> out "+Max ~r";
}
""",
    # x := x div 10, r := x mod 10.  The quotient loop eats i ten at a
    # time; its guard -Max+9 ~i opens as soon as i <= 9, and the leftover
    # units of i are then moved into r.
    "div_10": """
module div_10(x) {
  use zr = to_zero(r);
  use cp = assign(i, x);
  use zx = to_zero(x);
  nodes loop m rem m2 out;
  entry zr;
  exits out;
  edge zr -> cp "";
  edge cp -> zx "";
  edge zx -> loop "";
  edge loop -> loop "-10 i, +10 ~i, +1 x, -1 ~x";
  edge loop -> m "-Max+9 ~i";
  edge m -> rem "+Max-9 ~i";
  edge rem -> rem "+1 r, -1 ~r, -1 i, +1 ~i";
  edge rem -> m2 "-Max ~i";
  edge m2 -> out "+Max ~i";
}
""",
    # Five-way branch on x in 0..4: decrement until the zero guard fires,
    # then restore the decrements so x leaves unchanged.  Exit port k is
    # taken exactly when x = k on entry.
    "choose_next_state": """
module choose_next_state(x) {
  nodes a c g h i am cm gm hm r1 r2 r3 e0 e1 e2 e3 e4;
  entry a;
  exits e0 e1 e2 e3 e4;
  edge a -> am "-Max ~x";
  edge am -> e0 "+Max ~x";
  edge a -> c "-1 x, +1 ~x";
  edge c -> cm "-Max ~x";
  edge cm -> r1 "+Max ~x";
  edge r1 -> e1 "+1 x, -1 ~x";
  edge c -> g "-1 x, +1 ~x";
  edge g -> gm "-Max ~x";
  edge gm -> r2 "+Max ~x";
  edge r2 -> e2 "+2 x, -2 ~x";
  edge g -> h "-1 x, +1 ~x";
  edge h -> hm "-Max ~x";
  edge hm -> r3 "+Max ~x";
  edge r3 -> e3 "+3 x, -3 ~x";
  edge h -> i "-1 x, +1 ~x";
  edge i -> e4 "+4 x, -4 ~x";
}
""",
    "write_same": """
module write_same() {
  nodes a out;
  entry a;
  exits out;
  edge a -> out "";
}
""",
    "write_inc": """
module write_inc() {
  nodes a out;
  entry a;
  exits out;
  edge a -> out "+1 mu, -1 ~mu";
}
""",
    "write_inc2": """
module write_inc2() {
  nodes a m out;
  entry a;
  exits out;
  edge a -> m "+1 mu, -1 ~mu";
  edge m -> out "+1 mu, -1 ~mu";
}
""",
    "write_dec": """
module write_dec() {
  nodes a out;
  entry a;
  exits out;
  edge a -> out "-1 mu, +1 ~mu";
}
""",
    "write_dec2": """
module write_dec2() {
  nodes a m out;
  entry a;
  exits out;
  edge a -> m "-1 mu, +1 ~mu";
  edge m -> out "-1 mu, +1 ~mu";
}
""",
    # Head step right over the digit-encoded tape: the head digit joins the
    # left number, the lowest digit of the right number becomes the head.
    "move_right": """
module move_right() {
  use t10 = times_10(muL);
  use ad = add(muL, mu);
  use dv = div_10(muR);
  use asg = assign(mu, r);
  use cns = choose_next_state(mu);
  entry t10;
  exits cns.0 cns.1 cns.2 cns.3 cns.4;
  edge t10 -> ad "";
  edge ad -> dv "";
  edge dv -> asg "";
  edge asg -> cns "";
}
""",
    "move_left": """
module move_left() {
  use t10 = times_10(muR);
  use ad = add(muR, mu);
  use dv = div_10(muL);
  use asg = assign(mu, r);
  use cns = choose_next_state(mu);
  entry t10;
  exits cns.0 cns.1 cns.2 cns.3 cns.4;
  edge t10 -> ad "";
  edge ad -> dv "";
  edge dv -> asg "";
  edge asg -> cns "";
}
""",
}

# Modules each gadget pulls in when a game text is assembled.
DEPENDS: dict[str, tuple[str, ...]] = {
    "to_zero": (),
    "assign": ("to_zero",),
    "times_10": ("assign",),
    "add": ("assign",),
    "div_10": ("to_zero", "assign"),
    "choose_next_state": (),
    "write_same": (),
    "write_inc": (),
    "write_inc2": (),
    "write_dec": (),
    "write_dec2": (),
    "move_right": ("times_10", "add", "div_10", "assign", "choose_next_state"),
    "move_left": ("times_10", "add", "div_10", "assign", "choose_next_state"),
}

# Canonical argument lists used by the contract harness.
HARNESS_ARGS: dict[str, tuple[str, ...]] = {
    "to_zero": ("mu",),
    "assign": ("muL", "muR"),
    "times_10": ("muL",),
    "add": ("muL", "muR"),
    "div_10": ("muR",),
    "choose_next_state": ("mu",),
    "write_same": (),
    "write_inc": (),
    "write_inc2": (),
    "write_dec": (),
    "write_dec2": (),
    "move_right": (),
    "move_left": (),
}


def closure(gadget: str) -> list[str]:
    """Transitive module dependencies, dependencies first, gadget last."""
    seen: list[str] = []

    def visit(name: str) -> None:
        if name in seen:
            return
        for dep in DEPENDS[name]:
            visit(dep)
        seen.append(name)

    visit(gadget)
    return seen


def load_module_text(name: str, target: str, source: str, amount: int) -> str:
    """One-shot transfer module: TARGET := AMOUNT by draining SOURCE.

    SOURCE is an unpaired resource whose initial availability is exactly
    AMOUNT; the exit handshake -AMOUNT/+AMOUNT on TARGET is what certifies
    the transfer completed.  Covers AMOUNT = 0 (the loop is never enabled
    and the handshake is a free pass).
    """
    hand = f"{amount} {target}" if amount else ""
    sign = "-" if amount else ""
    plus = "+" if amount else ""
    return f"""
module {name}() {{
  use z = to_zero({target});
  nodes a m out;
  entry z;
  exits out;
  edge z -> a "";
  edge a -> a "-1 {source}, +1 {target}, -1 ~{target}";
  edge a -> m "{sign}{hand}";
  edge m -> out "{plus}{hand}";
}}
"""


@dataclass(frozen=True)
class GadgetContract:
    """Arithmetic postcondition of one gadget.

    updates(entry, args) gives the resources the gadget rewrites and their
    exit values; every other resource must leave unchanged, and partners of
    rewritten paired resources must mirror to keep the pair sum at Max.
    port(entry, args) gives the expected exit port, None for single-exit.
    """

    gadget: str
    updates: Callable[[Valuation, tuple[str, ...]], dict[str, int]]
    port: Optional[Callable[[Valuation, tuple[str, ...]], int]] = None

    def check(self, h: HierarchicalGame, entry: Valuation, exit_val: Valuation,
              args: tuple[str, ...], got_port: int) -> list[str]:
        partner = h.partner_map()
        expected = dict(entry)
        for res, value in self.updates(entry, args).items():
            expected[res] = value
            if res in partner:
                expected[partner[res]] = h.max_const - value
        out = []
        for res in h.resources:
            if exit_val[res] != expected[res]:
                out.append(f"{self.gadget}: exit {res}={exit_val[res]}, "
                           f"want {expected[res]}")
        want_port = self.port(entry, args) if self.port else 0
        if got_port != want_port:
            out.append(f"{self.gadget}: exit port {got_port}, want {want_port}")
        return out


CONTRACTS: dict[str, GadgetContract] = {
    "to_zero": GadgetContract(
        "to_zero", lambda e, a: {a[0]: 0}),
    "assign": GadgetContract(
        "assign", lambda e, a: {a[0]: e[a[1]], "t": 0}),
    "times_10": GadgetContract(
        "times_10", lambda e, a: {a[0]: 10 * e[a[0]], "i": 0, "t": 0}),
    "add": GadgetContract(
        "add", lambda e, a: {a[0]: e[a[0]] + e[a[1]], "r": 0, "t": 0}),
    "div_10": GadgetContract(
        "div_10", lambda e, a: {a[0]: e[a[0]] // 10, "r": e[a[0]] % 10,
                                "i": 0, "t": 0}),
    "choose_next_state": GadgetContract(
        "choose_next_state", lambda e, a: {}, port=lambda e, a: e[a[0]]),
    "write_same": GadgetContract("write_same", lambda e, a: {}),
    "write_inc": GadgetContract(
        "write_inc", lambda e, a: {"mu": e["mu"] + 1}),
    "write_inc2": GadgetContract(
        "write_inc2", lambda e, a: {"mu": e["mu"] + 2}),
    "write_dec": GadgetContract(
        "write_dec", lambda e, a: {"mu": e["mu"] - 1}),
    "write_dec2": GadgetContract(
        "write_dec2", lambda e, a: {"mu": e["mu"] - 2}),
    # The remainder cell keeps the new head digit: assign(mu, r) copies it
    # without consuming it.  Domain: every decimal digit of muL/mu/muR in
    # 0..4, the cell alphabet; the five-way chooser cannot branch higher.
    "move_right": GadgetContract(
        "move_right",
        lambda e, a: {"muL": 10 * e["muL"] + e["mu"], "mu": e["muR"] % 10,
                      "muR": e["muR"] // 10, "i": 0, "r": e["muR"] % 10,
                      "t": 0},
        port=lambda e, a: e["muR"] % 10),
    "move_left": GadgetContract(
        "move_left",
        lambda e, a: {"muR": 10 * e["muR"] + e["mu"], "mu": e["muL"] % 10,
                      "muL": e["muL"] // 10, "i": 0, "r": e["muL"] % 10,
                      "t": 0},
        port=lambda e, a: e["muL"] % 10),
}

PAIRED = ("mu", "muL", "muR", "i", "r", "t")


def harness(gadget: str, max_const: int,
            args: Optional[tuple[str, ...]] = None
            ) -> tuple[HierarchicalGame, FlatInfo]:
    """A one-instance game wrapping the gadget, ready for simulate_module.

    The instance lives at path "g"; all six standard pairs are declared
    with availability cap max_const.
    """
    if args is None:
        args = HARNESS_ARGS[gadget]
    header = ["game {", "  agents ag1 ag2;", f"  max {max_const};"]
    header += [f"  pair {name} = {max_const};" for name in PAIRED]
    header += ["  root main;", "}"]
    main = [f"module main() {{",
            f"  use g = {gadget}({', '.join(args)});",
            f"  entry g;",
            f"}}"]
    text = "\n".join(header + main) + "\n"
    text += "".join(LIBRARY[name] for name in closure(gadget))
    h = parse_hier(text)
    return h, flatten_info(h)


def entry_valuation(h: HierarchicalGame, values: Optional[Valuation] = None
                    ) -> dict[str, int]:
    """Full valuation from a sparse one: partners mirror to Max, unpaired
    resources default to their initial availability."""
    values = dict(values or {})
    partner = h.partner_map()
    paired = {x for x, _ in h.pairs}
    out: dict[str, int] = {}
    for name, cap in zip(h.resources, h.m0):
        if name in paired:
            v = values.get(name, 0)
            out[name] = v
            out[partner[name]] = h.max_const - v
        elif name not in partner.values():
            out[name] = values.get(name, cap)
    for name, v in values.items():
        if name in partner.values():
            out[name] = v
    return out
