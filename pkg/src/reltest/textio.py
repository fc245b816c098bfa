"""One-line text format for functions.

    conj n=4 x1 & !x3
    conj n=4 FALSE
    dl n=3 (x1,1,0);(x2,0,1) default=0
    tt n=2 hex=8
    rand n=14 p0=0.15 seed=7

Variables are 1-based. ``tt`` stores the table as an integer whose bit ``x`` is
``f(x)``, printed as zero-padded hex. A constant-1 conjunction has no literals.
"""

from __future__ import annotations

import re

from .boolfn import BooleanFunction, Conjunction, DecisionList, LazyRandomFunction, Literal, TruthTable


def dumps(f: BooleanFunction) -> str:
    if isinstance(f, Conjunction):
        if f.contradictory:
            return f"conj n={f.n} FALSE"
        lits = " & ".join(str(l) for l in sorted(f.literals))
        return f"conj n={f.n} {lits}".rstrip()
    if isinstance(f, DecisionList):
        rules = ";".join(f"(x{i + 1},{b},{v})" for i, b, v in f.rules)
        return f"dl n={f.n} {rules} default={f.default}".replace("  ", " ")
    if isinstance(f, TruthTable):
        width = max(1, (1 << f.n) // 4)
        return f"tt n={f.n} hex={f.to_int():0{width}x}"
    if isinstance(f, LazyRandomFunction):
        return f"rand n={f.n} p0={f.zero_prob!r} seed={f.seed}"
    raise TypeError(f"no text form for {type(f).__name__}")


_HEAD = re.compile(r"^\s*(conj|dl|tt|rand)\s+n=(\d+)\s*(.*?)\s*$")
_LIT = re.compile(r"^(!?)x(\d+)$")
_RULE = re.compile(r"^\(x(\d+),([01]),([01])\)$")


def loads(line: str) -> BooleanFunction:
    m = _HEAD.match(line)
    if not m:
        raise ValueError(f"unrecognised function line: {line!r}")
    kind, n, rest = m.group(1), int(m.group(2)), m.group(3)
    if kind == "conj":
        if rest == "FALSE":
            return Conjunction.false(n)
        lits = []
        for tok in filter(None, (t.strip() for t in rest.split("&"))):
            lm = _LIT.match(tok)
            if not lm:
                raise ValueError(f"bad literal {tok!r}")
            lits.append(Literal(int(lm.group(2)) - 1, lm.group(1) == "!"))
        return Conjunction(n, lits)
    if kind == "dl":
        dm = re.match(r"^(.*?)\s*default=([01])$", rest)
        if not dm:
            raise ValueError("decision list needs default=<bit>")
        rules = []
        for tok in filter(None, (t.strip() for t in dm.group(1).split(";"))):
            rm = _RULE.match(tok)
            if not rm:
                raise ValueError(f"bad rule {tok!r}")
            rules.append((int(rm.group(1)) - 1, int(rm.group(2)), int(rm.group(3))))
        return DecisionList(n, rules, int(dm.group(2)))
    fields = dict(kv.split("=", 1) for kv in rest.split())
    if kind == "tt":
        return TruthTable.from_int(n, int(fields["hex"], 16))
    return LazyRandomFunction(n, float(fields["p0"]), int(fields["seed"]))


def load_file(path: str) -> list[BooleanFunction]:
    with open(path) as fh:
        return [loads(line) for line in fh if line.strip() and not line.lstrip().startswith("#")]


def parse_fn_arg(arg: str) -> list[BooleanFunction]:
    """A ``--fn`` value is either an inline function line or a file path."""
    if _HEAD.match(arg):
        return [loads(arg)]
    return load_file(arg)
