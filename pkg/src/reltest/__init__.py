"""Relative-error property testers for conjunctions and decision lists."""

from .boolfn import (
    BooleanFunction,
    Conjunction,
    DecisionList,
    LazyRandomFunction,
    Literal,
    Restriction,
    TruthTable,
    count_satisfying,
    decompose,
    normalize,
    restrict,
    sample_satisfying,
    xor_shift,
)
from .oracle import OracleHandle, make_oracles

__version__ = "0.1.0"

__all__ = [
    "BooleanFunction",
    "Conjunction",
    "DecisionList",
    "LazyRandomFunction",
    "Literal",
    "OracleHandle",
    "Restriction",
    "TruthTable",
    "count_satisfying",
    "decompose",
    "make_oracles",
    "normalize",
    "restrict",
    "sample_satisfying",
    "xor_shift",
]
