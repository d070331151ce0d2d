"""Model checking for priced resource-bounded alternating-time temporal logic."""

from .model import (
    UNBOUNDED,
    Configuration,
    ConstantPrice,
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
from .formulas import (
    And,
    Atom,
    Formula,
    Market,
    Not,
    TeamGlobally,
    TeamNext,
    TeamUntil,
    Top,
    eval_market,
    parse_formula,
    render_formula,
    subformulas,
)
from .checker import Labeling, Witness, check, label, witness
from .compile import (
    CompileError,
    compile_digit,
    compile_unary,
    decode_tape,
    encode_tape,
    max_value,
    safety_report,
)
from .hier import HierarchicalGame, flatten, flatten_info, parse_hier, render_hier
from .lbatm import Machine, MachineConfig, accepts, parse_machine
from .oracle import OracleLimit, oracle_check, oracle_label
from .structio import RunReport, dumps_structure, loads_structure

__all__ = [
    "UNBOUNDED", "Configuration", "ConstantPrice", "PricedGameStructure",
    "TablePrice", "consd", "price", "qty_team", "reachable", "step",
    "TeamChoice", "team_feasible", "validate",
    "And", "Atom", "Formula", "Market", "Not", "TeamGlobally", "TeamNext",
    "TeamUntil", "Top", "eval_market", "parse_formula", "render_formula",
    "subformulas",
    "Labeling", "Witness", "check", "label", "witness",
    "CompileError", "compile_digit", "compile_unary", "decode_tape",
    "encode_tape", "max_value", "safety_report",
    "HierarchicalGame", "flatten", "flatten_info", "parse_hier", "render_hier",
    "Machine", "MachineConfig", "accepts", "parse_machine",
    "OracleLimit", "oracle_check", "oracle_label",
    "RunReport", "dumps_structure", "loads_structure",
]

__version__ = "0.1.0"
