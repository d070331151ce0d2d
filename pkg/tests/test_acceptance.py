"""End-to-end acceptance runs.

Each test prints one [PASS]/[FAIL] line with its measured wall time and
budget.  The corpus equivalence scan and its safety invariants share one
compiled run through a module-scoped fixture, since the invariants are
defined over exactly those instances.
"""

import time

import pytest

from prbatl import checker, corpus, lbatm, model, oracle, randgen
from prbatl.compile import (
    REDUCTION_FORMULA,
    digit_game,
    encode_tape,
    max_value,
    safety_report,
    unary_game,
)
from prbatl.demo import demo_structure
from prbatl.formulas import render_formula
from prbatl.gadgets import CONTRACTS, HARNESS_ARGS, entry_valuation, harness
from prbatl.hier import flatten_info, simulate_module


def _line(capsys, ok: bool, name: str, seconds: float, budget: float) -> None:
    status = "PASS" if ok else "FAIL"
    with capsys.disabled():
        print(f"[{status}] {name}: {seconds:.2f}s (budget {budget:.0f}s)")


GOLDEN_PSI = "<<a1,a2:[inf,inf]>> X <<a1:[inf,0]>> G p"


def test_criterion_1_golden_verdicts(capsys):
    from prbatl.formulas import parse_formula

    f = parse_formula(GOLDEN_PSI, ("a1", "a2"), 1)
    checker.check(demo_structure(1), f)  # absorb the one-time jit compile
    t0 = time.perf_counter()
    verdicts = tuple(checker.check(demo_structure(m0), f) for m0 in (1, 2, 0))
    dt = time.perf_counter() - t0
    ok = verdicts == (True, False, False) and dt < 1.0
    _line(capsys, ok, "criterion 1 golden verdicts", dt, 1.0)
    assert verdicts == (True, False, False)
    assert dt < 1.0


def test_criterion_2_outcome_uniqueness(capsys):
    # a1 fixes action 2 at q0 and its only action elsewhere; enumerating
    # every defined opponent continuation must leave a single outcome,
    # the play that reaches q2 and loops there
    g = demo_structure(1)
    t0 = time.perf_counter()
    start = g.initial_config()
    play = [start]
    seen = {start}
    unique = True
    c = start
    looped_at_q2 = False
    while True:
        fixed_a1 = 2 if c.loc == 0 else 1
        succs = {model.step(g, c, (fixed_a1, b))
                 for b in range(1, g.action_count[c.loc][1] + 1)}
        succs.discard(None)
        if len(succs) != 1:
            unique = False
            break
        (nxt,) = succs
        if nxt in seen:
            looped_at_q2 = nxt.loc == g.location_index("q2")
            break
        seen.add(nxt)
        play.append(nxt)
        c = nxt
    dt = time.perf_counter() - t0
    ok = unique and looped_at_q2 and dt < 1.0
    _line(capsys, ok, "criterion 2 outcome uniqueness", dt, 1.0)
    assert unique and looped_at_q2
    assert dt < 1.0


def test_criterion_3_oracle_differential(capsys):
    r = randgen.rng(1_000)
    t0 = time.perf_counter()
    mismatches = []
    for i in range(500):
        g, f = randgen.random_instance(r)
        if checker.check(g, f) != oracle.oracle_check(g, f):
            mismatches.append((i, render_formula(f)))
    dt = time.perf_counter() - t0
    ok = not mismatches and dt < 300.0
    _line(capsys, ok, "criterion 3 oracle differential (500)", dt, 300.0)
    assert mismatches == []
    assert dt < 300.0


def test_criterion_4_budget_monotonicity(capsys):
    r = randgen.rng(2_000)
    t0 = time.perf_counter()
    violations = []
    for i in range(100):
        g = randgen.random_structure(r)
        f_low, f_high = randgen.monotone_budget_pair(r, g)
        if not checker.label(g, f_low).sat[f_low] <= \
                checker.label(g, f_high).sat[f_high]:
            violations.append((i, render_formula(f_low)))
    dt = time.perf_counter() - t0
    ok = not violations and dt < 120.0
    _line(capsys, ok, "criterion 4 budget monotonicity (100)", dt, 120.0)
    assert violations == []
    assert dt < 120.0


GRID_MAX = 1_000
TRIPLE_MAX = max_value(11)
TRIPLE = {"muL": 30112, "mu": 1, "muR": 400201}


def _contract_runs():
    """(gadget, Max, entry values) for the grid and the worked triple."""
    for x in range(61):
        yield "to_zero", GRID_MAX, (x,)
        yield "times_10", GRID_MAX, (x,)
        yield "div_10", GRID_MAX, (x,)
    for x1 in range(61):
        for x2 in range(61):
            yield "assign", GRID_MAX, (x1, x2)
            yield "add", GRID_MAX, (x1, x2)
    yield "to_zero", TRIPLE_MAX, (TRIPLE["mu"],)
    yield "times_10", TRIPLE_MAX, (TRIPLE["muL"],)
    yield "div_10", TRIPLE_MAX, (TRIPLE["muR"],)
    yield "assign", TRIPLE_MAX, (TRIPLE["muL"], TRIPLE["muR"])
    yield "add", TRIPLE_MAX, (TRIPLE["muL"], TRIPLE["mu"])


def test_criterion_5_gadget_contracts(capsys):
    t0 = time.perf_counter()
    bad = []
    cache = {}
    for gadget, big, values in _contract_runs():
        if (gadget, big) not in cache:
            cache[(gadget, big)] = harness(gadget, big)
        h, info = cache[(gadget, big)]
        args = HARNESS_ARGS[gadget]
        ev = entry_valuation(h, dict(zip(args, values)))
        out, port = simulate_module(h, "g", ev, info)
        bad.extend(f"Max={big}: {r}" for r in
                   CONTRACTS[gadget].check(h, ev, out, args, port))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60.0
    _line(capsys, ok, "criterion 5 gadget contracts", dt, 60.0)
    assert bad == []
    assert dt < 60.0


@pytest.fixture(scope="module")
def corpus_run():
    """Compile and verify the whole corpus once; criteria 6 and 7 both
    read from this run."""
    words = corpus.all_words(2)
    diff_seconds = 0.0
    safety_seconds = 0.0
    mismatches = []
    violations = []
    count = 0
    for e in corpus.CORPUS:
        m = e.machine
        for word in words:
            tape = "<" + word + ">"
            want = lbatm.accepts(m, lbatm.initial_config(m, word))
            for mode, maker in (("digit", digit_game), ("unary", unary_game)):
                h = maker(m, tape, e.p_labeling)
                info = flatten_info(h)
                t0 = time.perf_counter()
                got = checker.label(
                    info.structure, REDUCTION_FORMULA).holds(
                        REDUCTION_FORMULA, info.structure.initial_config())
                diff_seconds += time.perf_counter() - t0
                if got != want:
                    mismatches.append((e.name, word, mode, want, got))
                t0 = time.perf_counter()
                rep = safety_report(h, info=info)
                safety_seconds += time.perf_counter() - t0
                violations.extend(
                    f"{e.name} {word!r} {mode}: {r}" for r in rep)
            count += 1
    return {"machines": len(corpus.CORPUS), "pairs": count,
            "diff_seconds": diff_seconds, "safety_seconds": safety_seconds,
            "mismatches": mismatches, "violations": violations}


def test_criterion_6_reduction_equivalence(capsys, corpus_run):
    r = corpus_run
    ok = (r["machines"] >= 10 and not r["mismatches"]
          and r["diff_seconds"] < 600.0)
    _line(capsys, ok,
          f"criterion 6 reduction equivalence ({r['machines']} machines, "
          f"{r['pairs']} inputs, both encodings)",
          r["diff_seconds"], 600.0)
    assert r["machines"] >= 10
    assert r["mismatches"] == []
    assert r["diff_seconds"] < 600.0


def test_criterion_7_safety_invariants(capsys, corpus_run):
    r = corpus_run
    ok = not r["violations"]
    _line(capsys, ok, "criterion 7 safety invariants (same corpus)",
          r["safety_seconds"], 600.0)
    assert r["violations"] == []


def test_criterion_8_encoding_goldens(capsys):
    t0 = time.perf_counter()
    triple = encode_tape("<B11211B2BB>", 5)
    big = max_value(11)
    dt = time.perf_counter() - t0
    ok = triple == (30112, 1, 400201) and big == 32222222224 and dt < 1.0
    _line(capsys, ok, "criterion 8 tape-encoding goldens", dt, 1.0)
    assert triple == (30112, 1, 400201)
    assert big == 32222222224
    assert dt < 1.0
