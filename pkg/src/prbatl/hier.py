"""Hierarchical priced-game modules and their flattener.

A hierarchical game is a set of named modules: small edge-labeled graphs
whose edges carry resource deltas over declared resource variables.
Resources may come in counterbalanced pairs (x, ~x); working edges update
both sides so the pair sum stays constant, which is the mechanism that
forces deterministic execution inside a gadget.  Modules instantiate other
modules with resource-name substitution; flattening expands the
instantiation tree into one PricedGameStructure location per
(instance path, node).

Delta amounts may reference the game-level constant Max symbolically
("-Max ~x", "+Max-9 ~i"), so one module text serves every tape size.

Flat-structure action layout per location: every outgoing edge belongs to
one chooser agent.  When all edges are zero-delta the chooser's actions are
exactly the edges (action 1 already costs nothing); otherwise action 1 is a
synthetic do-nothing self-loop and the edges sit at actions 2+.  Non-chooser
agents always have the single do-nothing action.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional

from .model import ConstantPrice, PricedGameStructure, Vector


class HierError(Exception):
    pass


class HierSyntaxError(HierError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class BindingError(HierError):
    """Unbound parameter, unknown resource, or missing counterbalance partner."""


class CyclicInstantiationError(HierError):
    pass


class GadgetStuckError(HierError):
    """No enabled edge at a gadget node."""


class GadgetDeterminismError(HierError):
    """More than one enabled edge at a gadget node."""


class GadgetStepLimit(HierError):
    pass


@dataclass(frozen=True)
class DeltaTerm:
    """One "<amount> <token>" item; amount = max_coeff * Max + const."""

    token: str
    max_coeff: int
    const: int


@dataclass(frozen=True)
class Edge:
    src: str  # node, instance, or instance.PORT
    dst: str  # node or instance
    delta: tuple[DeltaTerm, ...]
    owner: str


@dataclass(frozen=True)
class Use:
    inst: str
    module: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class ModuleDef:
    name: str
    params: tuple[str, ...]
    nodes: tuple[str, ...]
    entry: str
    exits: tuple[str, ...]
    uses: tuple[Use, ...]
    edges: tuple[Edge, ...]
    atoms: tuple[tuple[str, tuple[str, ...]], ...] = ()


@dataclass(frozen=True)
class HierarchicalGame:
    agents: tuple[str, ...]
    max_const: int
    resources: tuple[str, ...]
    pairs: tuple[tuple[str, str], ...]
    m0: tuple[int, ...]
    modules: tuple[ModuleDef, ...]
    root: str

    def module(self, name: str) -> ModuleDef:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(f"no module named {name!r}")

    def partner_map(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for x, y in self.pairs:
            out[x] = y
            out[y] = x
        return out

    def resource_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.resources)}


_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_REF_RE = re.compile(rf"^({_IDENT})(?:\.(\d+))?$")
_AMOUNT_RE = re.compile(r"^([+-]?)(?:Max([+-]\d+)?|(\d+))$")
_USE_RE = re.compile(rf"^use\s+({_IDENT})\s*=\s*({_IDENT})\s*\(([^()]*)\)$")
_EDGE_RE = re.compile(
    rf"^edge\s+({_IDENT}(?:\.\d+)?)\s*->\s*({_IDENT})\s+\"([^\"]*)\""
    rf"(?:\s+\[({_IDENT})\])?$")
_BLOCK_RE = re.compile(rf"\b(game|module)\b")


def _parse_ref(text: str, line: int) -> tuple[str, Optional[int]]:
    m = _REF_RE.match(text)
    if not m:
        raise HierSyntaxError(line, f"bad endpoint reference {text!r}")
    return m.group(1), (int(m.group(2)) if m.group(2) is not None else None)


def parse_delta(text: str, line: int = 0) -> tuple[DeltaTerm, ...]:
    """Comma-separated "<amount> <resource>" terms; empty string = no delta."""
    text = text.strip()
    if not text:
        return ()
    terms = []
    for chunk in text.split(","):
        parts = chunk.split()
        if len(parts) != 2:
            raise HierSyntaxError(line, f"bad delta term {chunk.strip()!r}")
        amount, token = parts
        m = _AMOUNT_RE.match(amount)
        if not m:
            raise HierSyntaxError(line, f"bad delta amount {amount!r}")
        sign = -1 if m.group(1) == "-" else 1
        if m.group(3) is not None:
            coeff, const = 0, sign * int(m.group(3))
        else:
            coeff = sign
            const = int(m.group(2)) if m.group(2) else 0
        if not re.match(rf"^~?{_IDENT}$", token):
            raise HierSyntaxError(line, f"bad resource token {token!r}")
        terms.append(DeltaTerm(token, coeff, const))
    return tuple(terms)


def render_delta(delta: tuple[DeltaTerm, ...]) -> str:
    out = []
    for term in delta:
        if term.max_coeff:
            s = ("+" if term.max_coeff > 0 else "-") + "Max"
            if term.const:
                s += f"{term.const:+d}"
        else:
            s = f"{term.const:+d}"
        out.append(f"{s} {term.token}")
    return ", ".join(out)


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("#", 1)[0] for line in text.splitlines())


def _line_of(text: str, offset: int) -> int:
    return text.count("\n", 0, offset) + 1


def _split_statements(body: str, base_offset: int, text: str
                      ) -> Iterator[tuple[str, int]]:
    pos = 0
    for chunk in body.split(";"):
        stmt = chunk.strip()
        if stmt:
            yield stmt, _line_of(text, base_offset + pos + chunk.index(stmt[0]))
        pos += len(chunk) + 1


def parse_hier(text: str) -> HierarchicalGame:
    clean = _strip_comments(text)
    agents: tuple[str, ...] = ()
    max_const: Optional[int] = None
    resources: list[str] = []
    pairs: list[tuple[str, str]] = []
    m0: list[int] = []
    modules: list[ModuleDef] = []
    root: Optional[str] = None
    saw_game = False

    pos = 0
    while True:
        m = _BLOCK_RE.search(clean, pos)
        if not m:
            tail = clean[pos:].strip()
            if tail:
                raise HierSyntaxError(_line_of(clean, pos), f"unexpected text {tail[:30]!r}")
            break
        line = _line_of(clean, m.start())
        head = clean[pos:m.start()].strip()
        if head:
            raise HierSyntaxError(_line_of(clean, pos), f"unexpected text {head[:30]!r}")
        brace = clean.find("{", m.end())
        if brace < 0:
            raise HierSyntaxError(line, "expected '{'")
        close = clean.find("}", brace)
        if close < 0:
            raise HierSyntaxError(line, "unterminated block")
        header = clean[m.end():brace].strip()
        body = clean[brace + 1:close]
        if m.group(1) == "game":
            if saw_game:
                raise HierSyntaxError(line, "duplicate game block")
            if header:
                raise HierSyntaxError(line, "game block takes no header")
            saw_game = True
            for stmt, sline in _split_statements(body, brace + 1, clean):
                words = stmt.split()
                kind = words[0]
                if kind == "agents":
                    agents = tuple(words[1:])
                elif kind == "max":
                    if len(words) != 2 or not words[1].isdigit():
                        raise HierSyntaxError(sline, "max takes one integer")
                    max_const = int(words[1])
                elif kind in ("pair", "res"):
                    mm = re.match(rf"^{kind}\s+({_IDENT})\s*=\s*(\d+)$", stmt)
                    if not mm:
                        raise HierSyntaxError(sline, f"bad {kind} declaration")
                    name, value = mm.group(1), int(mm.group(2))
                    if name in resources or "~" + name in resources:
                        raise HierSyntaxError(sline, f"duplicate resource {name!r}")
                    resources.append(name)
                    m0.append(value)
                    if kind == "pair":
                        resources.append("~" + name)
                        m0.append(value)
                        pairs.append((name, "~" + name))
                elif kind == "root":
                    if len(words) != 2:
                        raise HierSyntaxError(sline, "root takes one module name")
                    root = words[1]
                else:
                    raise HierSyntaxError(sline, f"unknown game statement {kind!r}")
        else:
            hm = re.match(rf"^({_IDENT})\s*\(([^()]*)\)$", header)
            if not hm:
                raise HierSyntaxError(line, f"bad module header {header!r}")
            name = hm.group(1)
            params = tuple(p.strip() for p in hm.group(2).split(",") if p.strip())
            nodes: list[str] = []
            entry: Optional[str] = None
            exits: tuple[str, ...] = ()
            uses: list[Use] = []
            edges: list[Edge] = []
            atoms: list[tuple[str, tuple[str, ...]]] = []
            for stmt, sline in _split_statements(body, brace + 1, clean):
                kind = stmt.split()[0]
                if kind == "nodes":
                    for n in stmt.split()[1:]:
                        if not re.match(rf"^{_IDENT}$", n):
                            raise HierSyntaxError(sline, f"bad node name {n!r}")
                        nodes.append(n)
                elif kind == "entry":
                    words = stmt.split()
                    if len(words) != 2:
                        raise HierSyntaxError(sline, "entry takes one reference")
                    entry = words[1]
                    _parse_ref(entry, sline)
                elif kind == "exits":
                    exits = tuple(stmt.split()[1:])
                    for ref in exits:
                        _parse_ref(ref, sline)
                elif kind == "use":
                    um = _USE_RE.match(stmt)
                    if not um:
                        raise HierSyntaxError(sline, f"bad use statement {stmt!r}")
                    args = tuple(a.strip() for a in um.group(3).split(",") if a.strip())
                    uses.append(Use(um.group(1), um.group(2), args))
                elif kind == "edge":
                    em = _EDGE_RE.match(stmt)
                    if not em:
                        raise HierSyntaxError(sline, f"bad edge statement {stmt!r}")
                    delta = parse_delta(em.group(3), sline)
                    # default owner resolved after the game block is known
                    edges.append(Edge(em.group(1), em.group(2), delta,
                                      em.group(4) or ""))
                elif kind == "atom":
                    words = stmt.split()
                    if len(words) < 3:
                        raise HierSyntaxError(sline, "atom takes a name and nodes")
                    atoms.append((words[1], tuple(words[2:])))
                else:
                    raise HierSyntaxError(sline, f"unknown module statement {kind!r}")
            if entry is None:
                raise HierSyntaxError(line, f"module {name!r} has no entry")
            modules.append(ModuleDef(name, params, tuple(nodes), entry, exits,
                                     tuple(uses), tuple(edges), tuple(atoms)))
        pos = close + 1

    if not saw_game:
        raise HierSyntaxError(1, "missing game block")
    if not agents:
        raise HierSyntaxError(1, "game block declares no agents")
    if max_const is None:
        raise HierSyntaxError(1, "game block declares no max")
    if root is None:
        raise HierSyntaxError(1, "game block declares no root")
    modules = [
        ModuleDef(m.name, m.params, m.nodes, m.entry, m.exits, m.uses,
                  tuple(Edge(e.src, e.dst, e.delta, e.owner or agents[0])
                        for e in m.edges), m.atoms)
        for m in modules]
    return HierarchicalGame(agents, max_const, tuple(resources), tuple(pairs),
                            tuple(m0), tuple(modules), root)


def render_hier(h: HierarchicalGame) -> str:
    lines = ["game {"]
    lines.append("  agents " + " ".join(h.agents) + ";")
    lines.append(f"  max {h.max_const};")
    paired = {x for x, _ in h.pairs}
    partners = {y for _, y in h.pairs}
    for name, value in zip(h.resources, h.m0):
        if name in paired:
            lines.append(f"  pair {name} = {value};")
        elif name not in partners:
            lines.append(f"  res {name} = {value};")
    lines.append(f"  root {h.root};")
    lines.append("}")
    for mod in h.modules:
        lines.append("")
        lines.append(f"module {mod.name}({', '.join(mod.params)}) {{")
        if mod.nodes:
            lines.append("  nodes " + " ".join(mod.nodes) + ";")
        lines.append(f"  entry {mod.entry};")
        if mod.exits:
            lines.append("  exits " + " ".join(mod.exits) + ";")
        for use in mod.uses:
            lines.append(f"  use {use.inst} = {use.module}({', '.join(use.args)});")
        for e in mod.edges:
            tag = "" if e.owner == h.agents[0] else f" [{e.owner}]"
            lines.append(f'  edge {e.src} -> {e.dst} "{render_delta(e.delta)}"{tag};')
        for prop, where in mod.atoms:
            lines.append(f"  atom {prop} {' '.join(where)};")
        lines.append("}")
    return "\n".join(lines) + "\n"


def validate(h: HierarchicalGame) -> list[str]:
    """Well-formedness report; flatten() raises on the first violation instead."""
    report: list[str] = []
    names = [m.name for m in h.modules]
    if len(set(names)) != len(names):
        report.append("duplicate module names")
    if h.root not in names:
        report.append(f"root module {h.root!r} not defined")
    known = dict.fromkeys(names)
    partner = h.partner_map()
    for mod in h.modules:
        local = list(mod.nodes) + [u.inst for u in mod.uses]
        if len(set(local)) != len(local):
            report.append(f"{mod.name}: node/instance names collide")
        insts = {u.inst: u for u in mod.uses}

        def ref_ok(ref: str, as_src: bool) -> Optional[str]:
            base, port = _parse_ref(ref, 0)
            if base in mod.nodes:
                return None if port is None else f"port on plain node {ref!r}"
            if base not in insts:
                return f"unknown endpoint {ref!r}"
            child = insts[base].module
            if child not in known:
                return None  # reported via the use check below
            exits = h.module(child).exits
            if not as_src:
                return f"port on a target {ref!r}" if port is not None else None
            if port is None:
                return None if len(exits) == 1 else f"{ref!r} needs an exit port"
            return None if port < len(exits) else f"exit port {port} out of range"

        for u in mod.uses:
            if u.module not in known:
                report.append(f"{mod.name}: use of unknown module {u.module!r}")
                continue
            child = h.module(u.module)
            if len(child.params) != len(u.args):
                report.append(f"{mod.name}: {u.inst} passes {len(u.args)} args to "
                              f"{u.module} (wants {len(child.params)})")
            if not child.exits and any(e.src.split(".")[0] == u.inst for e in mod.edges):
                report.append(f"{mod.name}: {u.inst} has no exit ports")
            for a in u.args:
                if a not in mod.params and a not in h.resources:
                    report.append(f"{mod.name}: argument {a!r} unbound")
        for bad in filter(None, [ref_ok(mod.entry, False)]):
            report.append(f"{mod.name}: entry {bad}")
        for x in mod.exits:
            bad = ref_ok(x, True)
            if bad:
                report.append(f"{mod.name}: exits {bad}")
        owners: dict[str, str] = {}
        for e in mod.edges:
            for ref, as_src in ((e.src, True), (e.dst, False)):
                bad = ref_ok(ref, as_src)
                if bad:
                    report.append(f"{mod.name}: edge {bad}")
            if e.owner not in h.agents:
                report.append(f"{mod.name}: edge owner {e.owner!r} not an agent")
            src_base = e.src.split(".")[0]
            if owners.setdefault(src_base, e.owner) != e.owner:
                report.append(f"{mod.name}: mixed edge owners at {src_base!r}")
            for term in e.delta:
                base = term.token.lstrip("~")
                if base in mod.params:
                    continue
                if base not in h.resources:
                    report.append(f"{mod.name}: unknown resource {term.token!r}")
                elif term.token.startswith("~") and base not in partner:
                    report.append(f"{mod.name}: {base!r} has no partner")
        for prop, where in mod.atoms:
            for n in where:
                if n not in mod.nodes:
                    report.append(f"{mod.name}: atom on unknown node {n!r}")
    report.extend(_cycle_report(h))
    return report


def edge_imbalances(mod: ModuleDef) -> list[tuple[int, str]]:
    """Edges that change some pair sum x + ~x, as (edge index, base token).

    Symbolic over the module text (Max stays unresolved), so parameters are
    treated as paired resources.  Guard handshakes show up here by design;
    everything else in a well-formed gadget should balance.
    """
    out = []
    for i, e in enumerate(mod.edges):
        net: dict[str, tuple[int, int]] = {}
        for term in e.delta:
            base = term.token.lstrip("~")
            c, k = net.get(base, (0, 0))
            net[base] = (c + term.max_coeff, k + term.const)
        for base, (c, k) in sorted(net.items()):
            if (c, k) != (0, 0):
                out.append((i, base))
    return out


def _cycle_report(h: HierarchicalGame) -> list[str]:
    graph = {m.name: [u.module for u in m.uses] for m in h.modules}
    state: dict[str, int] = {}

    def visit(name: str, trail: list[str]) -> Optional[list[str]]:
        if state.get(name) == 2:
            return None
        if state.get(name) == 1:
            # The caller appended name before recursing, so the trail
            # already closes the loop.
            return trail[trail.index(name):]
        state[name] = 1
        for child in graph.get(name, ()):
            if child in graph:
                found = visit(child, trail + [child])
                if found:
                    return found
        state[name] = 2
        return None

    for name in graph:
        cyc = visit(name, [name])
        if cyc:
            return ["cyclic instantiation: " + " -> ".join(cyc)]
    return []


@dataclass(frozen=True)
class FlatEdge:
    action: int  # chooser's 1-based action index
    target: int
    delta: Vector
    sparse: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class FlatLoc:
    name: str
    path: str  # instance path, "" for the root instance
    module: str
    node: str
    chooser: int
    has_do_nothing: bool
    branching: bool
    is_entry: bool
    is_exit: bool
    exit_port: Optional[int]
    edges: tuple[FlatEdge, ...]


@dataclass(frozen=True)
class InstanceInfo:
    path: str
    module: str
    entry: int
    exits: tuple[int, ...]


@dataclass(frozen=True)
class FlatInfo:
    structure: PricedGameStructure
    locs: tuple[FlatLoc, ...]
    loc_index: dict[str, int]
    instances: dict[str, InstanceInfo]


def flatten(h: HierarchicalGame) -> PricedGameStructure:
    return flatten_info(h).structure


def flatten_info(h: HierarchicalGame) -> FlatInfo:
    cyc = _cycle_report(h)
    if cyc:
        raise CyclicInstantiationError(cyc[0])
    try:
        root = h.module(h.root)
    except KeyError as exc:
        raise BindingError(str(exc)) from None
    partner = h.partner_map()
    res_index = h.resource_index()
    n_res = len(h.resources)

    loc_names: list[str] = []
    loc_owner_node: list[tuple[str, str, str]] = []  # (path, module, node)
    raw_edges: list[tuple[int, int, Vector, str]] = []
    atoms: dict[int, set[str]] = {}
    instances: dict[str, InstanceInfo] = {}

    def resolve_amount(term: DeltaTerm) -> int:
        return term.max_coeff * h.max_const + term.const

    def resolve_token(token: str, binding: Mapping[str, str], where: str) -> int:
        base = token.lstrip("~")
        resolved = binding.get(base, base)
        if resolved not in res_index:
            raise BindingError(f"{where}: unbound resource token {token!r}")
        if token.startswith("~"):
            if resolved not in partner:
                raise BindingError(f"{where}: {resolved!r} has no partner")
            resolved = partner[resolved]
        return res_index[resolved]

    def expand(mod: ModuleDef, path: str, binding: Mapping[str, str]
               ) -> InstanceInfo:
        prefix = path + "/" if path else ""
        local: dict[str, int] = {}
        for node in mod.nodes:
            idx = len(loc_names)
            loc_names.append(prefix + node)
            loc_owner_node.append((path, mod.name, node))
            if node in local:
                raise BindingError(f"{mod.name}: duplicate node {node!r}")
            local[node] = idx
        children: dict[str, InstanceInfo] = {}
        for use in mod.uses:
            try:
                child_mod = h.module(use.module)
            except KeyError:
                raise BindingError(f"{mod.name}: unknown module {use.module!r}") from None
            if len(child_mod.params) != len(use.args):
                raise BindingError(f"{mod.name}: arity mismatch instantiating {use.module}")
            child_binding = {}
            for p, a in zip(child_mod.params, use.args):
                resolved = binding.get(a, a)
                if resolved not in res_index:
                    raise BindingError(f"{mod.name}: argument {a!r} unbound")
                child_binding[p] = resolved
            if use.inst in local or use.inst in children:
                raise BindingError(f"{mod.name}: duplicate name {use.inst!r}")
            children[use.inst] = expand(child_mod, prefix + use.inst, child_binding)

        def entry_of(ref: str) -> int:
            base, port = _parse_ref(ref, 0)
            if port is not None:
                raise BindingError(f"{mod.name}: target {ref!r} cannot carry a port")
            if base in local:
                return local[base]
            if base in children:
                return children[base].entry
            raise BindingError(f"{mod.name}: unknown endpoint {ref!r}")

        def exit_of(ref: str) -> int:
            base, port = _parse_ref(ref, 0)
            if base in local:
                if port is not None:
                    raise BindingError(f"{mod.name}: port on plain node {ref!r}")
                return local[base]
            if base not in children:
                raise BindingError(f"{mod.name}: unknown endpoint {ref!r}")
            exits = children[base].exits
            if port is None:
                if len(exits) != 1:
                    raise BindingError(f"{mod.name}: {ref!r} needs an exit port")
                return exits[0]
            if port >= len(exits):
                raise BindingError(f"{mod.name}: exit port {port} out of range")
            return exits[port]

        for e in mod.edges:
            terms: dict[int, int] = {}
            for term in e.delta:
                ridx = resolve_token(term.token, binding, mod.name)
                terms[ridx] = terms.get(ridx, 0) + resolve_amount(term)
            vec = [0] * n_res
            for ridx, v in terms.items():
                vec[ridx] = v
            if e.owner not in h.agents:
                raise BindingError(f"{mod.name}: edge owner {e.owner!r} not an agent")
            raw_edges.append((exit_of(e.src), entry_of(e.dst), tuple(vec), e.owner))
        for prop, where in mod.atoms:
            for node in where:
                if node not in local:
                    raise BindingError(f"{mod.name}: atom on unknown node {node!r}")
                atoms.setdefault(local[node], set()).add(prop)
        info = InstanceInfo(path, mod.name,
                            entry_of(mod.entry), tuple(exit_of(x) for x in mod.exits))
        instances[path] = info
        return info

    root_info = expand(root, "", {})

    n_loc = len(loc_names)
    n_agents = len(h.agents)
    agent_idx = {a: i for i, a in enumerate(h.agents)}
    by_src: list[list[tuple[int, Vector, str]]] = [[] for _ in range(n_loc)]
    for src, dst, vec, owner in raw_edges:
        by_src[src].append((dst, vec, owner))

    zero = tuple([0] * n_res)
    entry_locs = {info.entry: info.path for info in instances.values() if info.path}
    exit_locs: dict[int, int] = {}
    for info in instances.values():
        if info.path:
            for port, loc in enumerate(info.exits):
                exit_locs.setdefault(loc, port)

    locs: list[FlatLoc] = []
    action_count: list[tuple[int, ...]] = []
    qty: list[tuple[tuple[Vector, ...], ...]] = []
    transition: list[dict[Vector, int]] = []
    for q in range(n_loc):
        out = by_src[q]
        owners = {owner for _, _, owner in out}
        if len(owners) > 1:
            raise BindingError(f"mixed edge owners at {loc_names[q]}")
        chooser = agent_idx[next(iter(owners))] if owners else 0
        all_zero = all(vec == zero for _, vec, _ in out)
        has_dn = not (out and all_zero)
        flat_edges = []
        for i, (dst, vec, _) in enumerate(out):
            action = i + 1 + (1 if has_dn else 0)
            sparse = tuple((ridx, v) for ridx, v in enumerate(vec) if v)
            flat_edges.append(FlatEdge(action, dst, vec, sparse))
        counts = [1] * n_agents
        counts[chooser] = len(flat_edges) + (1 if has_dn else 0)
        deltas: list[tuple[Vector, ...]] = [(zero,) for _ in range(n_agents)]
        chooser_deltas = ([zero] if has_dn else []) + [e.delta for e in flat_edges]
        deltas[chooser] = tuple(chooser_deltas)
        trans: dict[Vector, int] = {}
        if has_dn:
            trans[tuple([1] * n_agents)] = q
        for e in flat_edges:
            prof = [1] * n_agents
            prof[chooser] = e.action
            trans[tuple(prof)] = e.target
        path, module, node = loc_owner_node[q]
        locs.append(FlatLoc(
            name=loc_names[q], path=path, module=module, node=node,
            chooser=chooser, has_do_nothing=has_dn,
            branching=bool(out) and all_zero and len(out) > 1,
            is_entry=q in entry_locs, is_exit=q in exit_locs,
            exit_port=exit_locs.get(q), edges=tuple(flat_edges)))
        action_count.append(tuple(counts))
        qty.append(tuple(deltas))
        transition.append(trans)

    structure = PricedGameStructure(
        agents=h.agents,
        resources=h.resources,
        locations=tuple(loc_names),
        labeling=tuple(frozenset(atoms.get(q, ())) for q in range(n_loc)),
        initial=root_info.entry,
        action_count=tuple(action_count),
        qty=tuple(qty),
        transition=tuple(transition),
        prices=ConstantPrice(zero),
        m0=h.m0,
    )
    return FlatInfo(structure, tuple(locs),
                    {name: i for i, name in enumerate(loc_names)}, instances)


def enabled_edges(info: FlatInfo, loc: int, avail: Vector) -> list[FlatEdge]:
    """Real (non-do-nothing) edges whose delta keeps avail within [0, m0]."""
    m0 = info.structure.m0
    out = []
    for e in info.locs[loc].edges:
        for ridx, dv in e.sparse:
            v = avail[ridx] + dv
            if v < 0 or v > m0[ridx]:
                break
        else:
            out.append(e)
    return out


def simulate_module(h: HierarchicalGame, instance: str,
                    entry_valuation: Mapping[str, int],
                    info: Optional[FlatInfo] = None,
                    max_steps: int = 20_000_000) -> tuple[dict[str, int], int]:
    """Run one gadget instance's forced dynamics from an entry valuation.

    At every node exactly one real edge must be enabled by the availability
    bounds; the walk ends on reaching one of the instance's exit ports.
    Returns the exit valuation and the 0-based exit port index.
    """
    if info is None:
        info = flatten_info(h)
    if instance not in info.instances:
        raise KeyError(f"no instance at path {instance!r}")
    inst = info.instances[instance]
    if not inst.exits:
        raise HierError(f"instance {instance!r} has no exit ports")
    res = h.resources
    missing = [name for name in res if name not in entry_valuation]
    if missing:
        raise ValueError(f"entry valuation misses {missing}")
    avail = [entry_valuation[name] for name in res]
    for name, v, cap in zip(res, avail, h.m0):
        if not 0 <= v <= cap:
            raise ValueError(f"entry valuation {name}={v} outside [0, {cap}]")
    exit_ports = {loc: port for port, loc in enumerate(inst.exits)}
    cur = inst.entry
    steps = 0
    while cur not in exit_ports:
        live = enabled_edges(info, cur, avail)  # type: ignore[arg-type]
        name = info.locs[cur].name
        if not live:
            raise GadgetStuckError(f"no enabled edge at {name}")
        if len(live) > 1:
            raise GadgetDeterminismError(f"{len(live)} enabled edges at {name}")
        edge = live[0]
        for ridx, dv in edge.sparse:
            avail[ridx] += dv
        cur = edge.target
        steps += 1
        if steps > max_steps:
            raise GadgetStepLimit(f"gadget run exceeded {max_steps} steps")
    return dict(zip(res, avail)), exit_ports[cur]
