"""Command-line front end.

Subcommands: check (verify a formula against a structure file), reach
(sugar for a team-reachability formula), compile (machine + tape to a game
structure), simulate (run the alternating machine directly), flatten
(hierarchical file to structure file), selftest (seeded differential run
against the brute-force oracle), bench (fixpoint kernel timing, compiled
vs fallback backend).

Exit codes for check/reach/simulate: 0 when the property holds or the
machine accepts, 1 when it does not, 2 on usage or input errors.  The
other subcommands use 0/2.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import checker, engine, hier, lbatm, model
from .compile import (
    CompileError,
    compile_digit,
    compile_unary,
    max_value,
)
from .formulas import (
    Atom,
    FormulaSyntaxError,
    Top,
    TeamUntil,
    parse_formula,
    render_formula,
)
from .model import UNBOUNDED, PricedGameStructure
from .structio import (
    RunReport,
    Stopwatch,
    StructureFormatError,
    canonical_json,
    dumps_structure,
    loads_structure,
)


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_out(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_structure(path: str) -> PricedGameStructure:
    return loads_structure(_read(path))


def _load_formula(arg: str, g: PricedGameStructure):
    """The argument is a formula unless it names an existing file."""
    text = _read(arg) if os.path.exists(arg) else arg
    return parse_formula(text, g.agents, g.n_resources)


def _witness_rows(g: PricedGameStructure, w: checker.Witness) -> tuple[dict, ...]:
    rows = []
    for (conf, spent), choice in sorted(w.table.items()):
        rows.append({
            "location": g.locations[conf.loc],
            "avail": list(conf.avail),
            "spent": dict(zip(w.tracked, spent)),
            "actions": choice.as_dict(),
        })
    return tuple(rows)


def _emit_report(report: RunReport, as_json: bool) -> None:
    sys.stdout.write(report.to_json() if as_json else report.to_text())


def _verdict_report(g: PricedGameStructure, f, limit: int,
                    want_witness: bool) -> RunReport:
    with Stopwatch() as sw:
        lab = checker.label(g, f, limit=limit)
        verdict = lab.holds(f, g.initial_config())
        rows = None
        if want_witness and verdict:
            w = checker.witness(g, f)
            rows = _witness_rows(g, w) if w is not None else ()
    return RunReport(verdict=verdict, reachable=len(lab.configs),
                     arena_sizes=lab.arena_sizes, wall_seconds=sw.seconds,
                     witness=rows,
                     extra=(("formula", render_formula(f)),
                            ("backend", engine.backend_name())))


def cmd_check(args: argparse.Namespace) -> int:
    g = _load_structure(args.structure)
    f = _load_formula(args.formula, g)
    report = _verdict_report(g, f, args.limit, args.witness)
    _emit_report(report, args.json)
    return 0 if report.verdict else 1


def _parse_names(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _parse_money(text: str, g: PricedGameStructure,
                 team: tuple[str, ...]) -> tuple[int, ...]:
    """Money is one entry per structure agent; a per-team list is scattered."""
    parts = [s.strip() for s in text.split(",") if s.strip()] if text else []
    out = []
    for p in parts:
        if p == "inf":
            out.append(UNBOUNDED)
        elif p.isdigit():
            out.append(int(p))
        else:
            raise UsageError(f"bad money entry {p!r}")
    if len(out) == g.n_agents:
        return tuple(out)
    if len(out) == len(team):
        by_agent = dict(zip(team, out))
        return tuple(by_agent.get(name, 0) for name in g.agents)
    raise UsageError(
        f"money lists {len(out)} entries; give {g.n_agents} "
        f"(one per agent) or {len(team)} (one per team member)")


def cmd_reach(args: argparse.Namespace) -> int:
    g = _load_structure(args.structure)
    team = _parse_names(args.team)
    for name in team:
        if name not in g.agents:
            raise UsageError(f"unknown agent {name!r}")
    money = _parse_money(args.money, g, team)
    if args.prop not in {p for props in g.labeling for p in props}:
        raise UsageError(f"proposition {args.prop!r} labels no location")
    f = TeamUntil(team, money, Top(), Atom(args.prop))
    report = _verdict_report(g, f, args.limit, args.witness)
    _emit_report(report, args.json)
    return 0 if report.verdict else 1


def cmd_compile(args: argparse.Namespace) -> int:
    m = lbatm.parse_machine(_read(args.machine))
    tape = args.tape
    if not tape.startswith(lbatm.LEFT_END):
        tape = lbatm.LEFT_END + tape + lbatm.RIGHT_END
    compiler = compile_digit if args.mode == "digit" else compile_unary
    with Stopwatch() as sw:
        g, f = compiler(m, tape, args.p_labeling)
    if args.stats:
        n_cells = len(tape)
        if args.mode == "digit":
            big = max_value(n_cells)
            paired, extras = 12, 3
        else:
            big = 4
            paired, extras = 2 * (2 * n_cells + 2), n_cells
        print(f"Max={big}, {paired}+{extras} resources, "
              f"{g.n_locations} locations ({sw.seconds:.2f}s)")
    _write_out(dumps_structure(g), args.out)
    if args.formula_out:
        _write_out(render_formula(f) + "\n", args.formula_out)
    elif args.out not in (None, "-"):
        print(f"formula: {render_formula(f)}")
    return 0


def _accepting_subtree(m: lbatm.Machine, conf: lbatm.MachineConfig,
                       indent: int, out: list[str]) -> None:
    kind = "universal" if m.is_universal(conf.state) else "existential"
    succs = lbatm.next_configs(m, conf)
    mark = " accept" if not succs else ""
    out.append(f"{'  ' * indent}{conf.state} {conf.tape} "
               f"head={conf.head} [{kind}]{mark}")
    if m.is_universal(conf.state):
        for s in succs:
            _accepting_subtree(m, s, indent + 1, out)
    else:
        for s in succs:
            if lbatm.accepts(m, s):
                _accepting_subtree(m, s, indent + 1, out)
                return
        raise AssertionError("no accepting branch under an accepting config")


def cmd_simulate(args: argparse.Namespace) -> int:
    m = lbatm.parse_machine(_read(args.machine))
    c0 = lbatm.initial_config(m, args.word)
    verdict = lbatm.accepts(m, c0)
    print("accept" if verdict else "reject")
    if args.trace and verdict:
        lines: list[str] = []
        _accepting_subtree(m, c0, 0, lines)
        print("\n".join(lines))
    return 0 if verdict else 1


def cmd_flatten(args: argparse.Namespace) -> int:
    h = hier.parse_hier(_read(args.hier))
    errs = hier.validate(h)
    if errs:
        raise UsageError("; ".join(errs))
    g = hier.flatten(h)
    _write_out(dumps_structure(g), args.out)
    return 0


def cmd_selftest(args: argparse.Namespace) -> int:
    from . import oracle, randgen

    rng = randgen.rng(args.seed)
    bad = 0
    with Stopwatch() as sw:
        for i in range(args.count):
            g, f = randgen.random_instance(rng)
            got = checker.check(g, f)
            want = oracle.oracle_check(g, f)
            if got != want:
                bad += 1
                print(f"MISMATCH on instance {i}: check={got} oracle={want}")
                print(dumps_structure(g))
                print(render_formula(f))
    print(f"selftest: {args.count - bad}/{args.count} agree "
          f"(seed={args.seed}, {sw.seconds:.1f}s)")
    return 0 if bad == 0 else 1


def cmd_bench(args: argparse.Namespace) -> int:
    from .corpus import entry

    e = entry(args.machine)
    m = e.machine
    tape = lbatm.LEFT_END + args.word + lbatm.RIGHT_END
    g, f = compile_digit(m, tape, e.p_labeling)
    results = []
    for disable in ("0", "1"):
        os.environ["PRBATL_DISABLE_NUMBA"] = disable
        if engine.numba_enabled():
            checker.check(g, f)  # absorb the jit compile
        times = []
        for _ in range(args.repeat):
            with Stopwatch() as sw:
                verdict = checker.check(g, f)
            times.append(sw.seconds)
        results.append((engine.backend_name(), min(times), verdict))
    os.environ.pop("PRBATL_DISABLE_NUMBA", None)
    for name, best, verdict in results:
        print(f"{name:6s} best of {args.repeat}: {best:8.3f}s "
              f"(verdict {verdict})")
    if len({v for _, _, v in results}) != 1:
        print("backends disagree", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="prbatl",
        description="Priced resource-bounded ATL model checking tools")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true",
                       help="machine-readable report")
        p.add_argument("--witness", action="store_true",
                       help="include a strategy table when the verdict is true")
        p.add_argument("--limit", type=int, default=5_000_000,
                       help="augmented-arena state cap")

    p = sub.add_parser("check", help="verify a formula against a structure")
    p.add_argument("structure")
    p.add_argument("formula", help="formula text, or a file containing one")
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("reach", help="team reachability of a proposition")
    p.add_argument("structure")
    p.add_argument("--team", default="", help="comma-separated agent names")
    p.add_argument("--money", default="",
                   help="comma-separated endowments, one per team agent")
    p.add_argument("--prop", required=True)
    common(p)
    p.set_defaults(fn=cmd_reach)

    p = sub.add_parser("compile", help="compile a machine and tape to a game")
    p.add_argument("machine")
    p.add_argument("tape", help="tape contents; delimiters added when absent")
    p.add_argument("--mode", choices=("digit", "unary"), default="digit")
    p.add_argument("--p-labeling", choices=("all_dead_ends", "universal_only"),
                   default="all_dead_ends")
    p.add_argument("--stats", action="store_true")
    p.add_argument("-o", "--out", default=None)
    p.add_argument("--formula-out", default=None)
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("simulate", help="run the alternating machine")
    p.add_argument("machine")
    p.add_argument("word", nargs="?", default="")
    p.add_argument("--trace", action="store_true",
                   help="print the accepting subtree")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("flatten", help="flatten a hierarchical game file")
    p.add_argument("hier")
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(fn=cmd_flatten)

    p = sub.add_parser("selftest", help="differential run against the oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=50)
    p.set_defaults(fn=cmd_selftest)

    p = sub.add_parser("bench", help="time both fixpoint backends")
    p.add_argument("--machine", default="scan_right")
    p.add_argument("--word", default="11")
    p.add_argument("--repeat", type=int, default=3)
    p.set_defaults(fn=cmd_bench)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except FormulaSyntaxError as exc:
        print(f"error: formula: {exc}", file=sys.stderr)
        return 2
    except (UsageError, StructureFormatError, CompileError,
            lbatm.MachineError, hier.HierError, model.ExplorationLimit,
            engine.ArenaLimit, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
