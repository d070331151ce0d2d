"""Hand-written machine corpus for the reduction differential suite.

Every machine has at most 4 states and is meant for tapes of length at most 4
(input words over {1,2,B} of length at most 2).  p_labeling names the dead-end
labeling mode the machine is valid under: machines listed as all_dead_ends
never reach an existential dead end, so they accept every input; rejection
needs the universal_only mode, where an existential dead end is a plain
non-accepting sink.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .lbatm import Machine, parse_machine


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    text: str
    p_labeling: str

    @property
    def machine(self) -> Machine:
        return parse_machine(self.text)


_ALL_DEAD_ENDS = [
    ("halt_all", """
states: u0*!
"""),
    ("scan_right", """
states: e0* h!
e0 , 1 -> e0 , 1 , R
e0 , 2 -> e0 , 2 , R
e0 , B -> e0 , B , R
e0 , > -> h , > , L
"""),
    ("flip_scan", """
states: f0* h!
f0 , 1 -> f0 , 2 , R
f0 , 2 -> f0 , 1 , R
f0 , B -> f0 , B , R
f0 , > -> h , > , L
"""),
    ("bounce", """
states: r0* l0 h!
r0 , 1 -> r0 , 1 , R
r0 , 2 -> r0 , 2 , R
r0 , B -> r0 , B , R
r0 , > -> l0 , > , L
l0 , 1 -> l0 , 1 , L
l0 , 2 -> l0 , 2 , L
l0 , B -> l0 , B , L
l0 , < -> h , < , R
"""),
    ("branchy", """
states: e0* a! b! h!
e0 , 1 -> a , 1 , R
e0 , 1 -> b , 2 , R
e0 , 2 -> e0 , 2 , R
e0 , B -> e0 , B , R
e0 , > -> h , > , L
"""),
    ("fork_all", """
states: u0*! ca h!
u0 , 1 -> ca , 1 , R
u0 , 1 -> ca , 2 , R
u0 , 2 -> ca , 2 , R
u0 , B -> ca , B , R
u0 , > -> h , > , L
ca , 1 -> ca , 1 , R
ca , 2 -> ca , 2 , R
ca , B -> ca , B , R
ca , > -> h , > , L
"""),
]

_UNIVERSAL_ONLY = [
    ("contains_two", """
states: e0* m h!
e0 , 1 -> e0 , 1 , R
e0 , B -> e0 , B , R
e0 , 2 -> m , 2 , R
m , 1 -> h , 1 , R
m , 2 -> h , 2 , R
m , B -> h , B , R
m , > -> h , > , L
"""),
    ("all_ones", """
states: u0*! r h!
u0 , 1 -> u0 , 1 , R
u0 , > -> h , > , L
u0 , 2 -> r , 2 , R
u0 , B -> r , B , R
"""),
    ("even_length", """
states: p0* p1 h!
p0 , > -> h , > , L
p0 , 1 -> p1 , 1 , R
p0 , 2 -> p1 , 2 , R
p0 , B -> p1 , B , R
p1 , 1 -> p0 , 1 , R
p1 , 2 -> p0 , 2 , R
p1 , B -> p0 , B , R
"""),
    ("fork_agree", """
states: u0*! ca cb h!
u0 , > -> h , > , L
u0 , 2 -> h , 2 , R
u0 , 1 -> ca , 1 , R
u0 , 1 -> cb , 1 , R
ca , 2 -> h , 2 , R
ca , 1 -> ca , 1 , R
ca , B -> ca , B , R
cb , 1 -> h , 1 , R
cb , 2 -> h , 2 , R
cb , B -> h , B , R
"""),
    ("flip_check", """
states: f0* v h!
f0 , 1 -> f0 , 2 , R
f0 , 2 -> f0 , 2 , R
f0 , B -> f0 , B , R
f0 , > -> v , > , L
v , 2 -> v , 2 , L
v , < -> h , < , R
"""),
    ("all_universal", """
states: w0*! w1! h!
w0 , 1 -> w0 , 1 , R
w0 , 2 -> w0 , 2 , R
w0 , B -> w0 , B , R
w0 , > -> w1 , > , L
w1 , 1 -> w1 , 1 , L
w1 , 2 -> w1 , 2 , L
w1 , B -> w1 , B , L
w1 , < -> h , < , R
"""),
]

CORPUS: tuple[CorpusEntry, ...] = tuple(
    [CorpusEntry(name, text, "all_dead_ends") for name, text in _ALL_DEAD_ENDS]
    + [CorpusEntry(name, text, "universal_only") for name, text in _UNIVERSAL_ONLY])

# repeats a configuration on a path; used by cycle-detection tests only
CYCLING_MACHINE = """
states: z* w h!
z , 1 -> w , 1 , R
w , 1 -> z , 1 , L
"""


def entry(name: str) -> CorpusEntry:
    for e in CORPUS:
        if e.name == name:
            return e
    raise KeyError(name)


def all_words(max_len: int = 2) -> list[str]:
    out = [""]
    for n in range(1, max_len + 1):
        out.extend("".join(p) for p in product("12B", repeat=n))
    return out
