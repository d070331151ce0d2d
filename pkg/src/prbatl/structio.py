"""Game-structure files and run reports.

The structure document is plain JSON: agents, resources, locations with
their propositions, m0, per-location-per-agent action delta lists (index 0
is the do-nothing action and must be all zero), transitions keyed by
comma-joined action profiles, and either a constant or a table price map.
Unbounded values serialize as the string "inf"; every other number is a
plain integer.  Rendering is canonical (sorted keys, two-space indent), so
parse -> render is byte-stable.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any, Optional

from . import model
from .model import (
    UNBOUNDED,
    ConstantPrice,
    PricedGameStructure,
    TablePrice,
    Vector,
)


class StructureFormatError(Exception):
    pass


def ser_int(v: int) -> Any:
    return "inf" if v >= UNBOUNDED else int(v)


def de_int(x: Any) -> int:
    if x == "inf":
        return UNBOUNDED
    if isinstance(x, bool) or not isinstance(x, int):
        raise StructureFormatError(f"expected integer or \"inf\", got {x!r}")
    return x


def _vec(xs: Any, what: str) -> Vector:
    if not isinstance(xs, list):
        raise StructureFormatError(f"{what} must be a list")
    return tuple(de_int(x) for x in xs)


def structure_to_dict(g: PricedGameStructure) -> dict:
    trans = {}
    for q, name in enumerate(g.locations):
        trans[name] = {
            ",".join(map(str, prof)): g.locations[dst]
            for prof, dst in sorted(g.transition[q].items())}
    if isinstance(g.prices, ConstantPrice):
        prices: dict = {"constant": [ser_int(v) for v in g.prices.vector]}
    elif isinstance(g.prices, TablePrice):
        prices = {
            "table": [
                {"avail": [ser_int(v) for v in avail],
                 "location": g.locations[q],
                 "agent": g.agents[a],
                 "price": [ser_int(v) for v in vec]}
                for (avail, q, a), vec in g.prices.entries],
            "default": [ser_int(v) for v in g.prices.default]}
    else:
        raise StructureFormatError(
            f"price map {type(g.prices).__name__} has no file form")
    return {
        "agents": list(g.agents),
        "resources": list(g.resources),
        "locations": [{"name": name, "props": sorted(g.labeling[q])}
                      for q, name in enumerate(g.locations)],
        "initial": g.locations[g.initial],
        "m0": [ser_int(v) for v in g.m0],
        "actions": {name: [[[ser_int(v) for v in vec]
                            for vec in g.qty[q][a]]
                           for a in range(len(g.agents))]
                    for q, name in enumerate(g.locations)},
        "transitions": trans,
        "prices": prices,
    }


def structure_from_dict(d: dict) -> PricedGameStructure:
    try:
        agents = tuple(d["agents"])
        resources = tuple(d["resources"])
        loc_entries = d["locations"]
        locations = tuple(e["name"] for e in loc_entries)
        loc_index = {name: q for q, name in enumerate(locations)}
        labeling = tuple(frozenset(e.get("props", [])) for e in loc_entries)
        initial = loc_index[d["initial"]]
        m0 = _vec(d["m0"], "m0")
        qty = []
        action_count = []
        for name in locations:
            rows = d["actions"][name]
            if len(rows) != len(agents):
                raise StructureFormatError(
                    f"actions at {name} must list every agent")
            qty.append(tuple(tuple(_vec(vec, "qty") for vec in row)
                             for row in rows))
            action_count.append(tuple(len(row) for row in rows))
        transition = []
        for name in locations:
            table = {}
            for prof, dst in d["transitions"][name].items():
                key = tuple(int(x) for x in prof.split(","))
                table[key] = loc_index[dst]
            transition.append(table)
        p = d["prices"]
        if "constant" in p:
            prices: ConstantPrice | TablePrice = ConstantPrice(
                _vec(p["constant"], "price"))
        else:
            prices = TablePrice(
                tuple(((_vec(e["avail"], "avail"), loc_index[e["location"]],
                        agents.index(e["agent"])), _vec(e["price"], "price"))
                      for e in p["table"]),
                _vec(p["default"], "price"))
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise StructureFormatError(f"bad structure file: {exc}") from None
    g = PricedGameStructure(
        agents=agents, resources=resources, locations=locations,
        labeling=labeling, initial=initial,
        action_count=tuple(action_count), qty=tuple(qty),
        transition=tuple(transition), prices=prices, m0=m0)
    errs = model.validate(g)
    if errs:
        raise StructureFormatError("; ".join(errs))
    return g


def _render_json(obj: Any, indent: int) -> str:
    """Two-space indent, sorted keys, flat scalar arrays kept on one line."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}  {json.dumps(k)}: {_render_json(obj[k], indent + 1)}"
                 for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, list):
        if all(not isinstance(x, (dict, list)) for x in obj):
            return "[" + ", ".join(json.dumps(x) for x in obj) + "]"
        items = [f"{pad}  {_render_json(x, indent + 1)}" for x in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    return json.dumps(obj)


def canonical_json(obj: Any) -> str:
    return _render_json(obj, 0) + "\n"


def dumps_structure(g: PricedGameStructure) -> str:
    return canonical_json(structure_to_dict(g))


def loads_structure(text: str) -> PricedGameStructure:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructureFormatError(f"bad JSON: {exc}") from None
    if not isinstance(d, dict):
        raise StructureFormatError("structure file must be a JSON object")
    return structure_from_dict(d)


@dataclass(frozen=True)
class RunReport:
    """Machine-readable outcome of one CLI verification run."""

    verdict: bool
    reachable: int
    arena_sizes: tuple[tuple[str, int], ...]
    wall_seconds: float
    witness: Optional[tuple[dict, ...]] = None
    extra: tuple[tuple[str, Any], ...] = ()

    def to_dict(self) -> dict:
        d: dict[str, Any] = {
            "verdict": self.verdict,
            "reachable": self.reachable,
            "arenas": [{"operator": op, "states": n}
                       for op, n in self.arena_sizes],
            "wall_seconds": round(self.wall_seconds, 6),
        }
        if self.witness is not None:
            d["witness"] = list(self.witness)
        d.update(dict(self.extra))
        return d

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def to_text(self) -> str:
        lines = [f"verdict: {'TRUE' if self.verdict else 'FALSE'}",
                 f"reachable configurations: {self.reachable}"]
        for op, n in self.arena_sizes:
            lines.append(f"arena[{op}]: {n} states")
        for key, value in self.extra:
            lines.append(f"{key}: {value}")
        lines.append(f"wall time: {self.wall_seconds:.3f}s")
        if self.witness is not None:
            lines.append(f"witness rows: {len(self.witness)}")
            for row in self.witness:
                lines.append("  " + json.dumps(row, sort_keys=True))
        return "\n".join(lines) + "\n"


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0
        return False
