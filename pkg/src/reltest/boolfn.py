"""Boolean functions over {0,1}^n and the exact operations on them.

Every function evaluates batches of bit-packed points (see :mod:`reltest.bits`).
Conjunctions, decision lists and truth tables carry enough structure for exact
counting and exactly uniform sampling of their satisfying sets; lazily hashed
random functions and the generic wrappers fall back to rejection sampling.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import bits as B
from .errors import DimensionMismatch, NoPivot, SamplerStall, Unsupported

TT_MAX_N = 24
DEFAULT_REJECTION_CAP = 10_000_000


class BooleanFunction:
    """Base class. Subclasses implement :meth:`_eval` on validated batches."""

    n: int

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.uint64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != B.n_words(self.n):
            raise DimensionMismatch(
                f"points have {X.shape[1]} words, function on n={self.n} needs {B.n_words(self.n)}"
            )
        if X.shape[0] == 0:
            return np.zeros(0, dtype=bool)
        return self._eval(X)

    def __call__(self, x) -> int:
        if isinstance(x, str):
            if len(x) != self.n:
                raise DimensionMismatch(f"bitstring of length {len(x)} for n={self.n}")
            x = B.point(x)
        x = np.asarray(x, dtype=np.uint64)
        if x.ndim != 1:
            raise DimensionMismatch("expected a single point")
        return int(self.evaluate(x[None, :])[0])

    def _eval(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def truth_bits(self) -> np.ndarray:
        """Values on all ``2^n`` points in index order (``n <= 24``)."""
        if self.n > TT_MAX_N:
            raise Unsupported(f"truth table needs n <= {TT_MAX_N}")
        out = np.empty(1 << self.n, dtype=bool)
        step = 1 << 16
        for lo in range(0, 1 << self.n, step):
            hi = min(lo + step, 1 << self.n)
            out[lo:hi] = self._eval(B.ints_to_points(np.arange(lo, hi, dtype=np.uint64), self.n))
        return out

    def truth_table(self) -> "TruthTable":
        return TruthTable.from_bits(self.n, self.truth_bits())

    @property
    def countable(self) -> bool:
        return False


@dataclass(frozen=True, order=True)
class Literal:
    """``x_var`` if not negated, else ``not x_var``; ``var`` is 0-based."""

    var: int
    negated: bool = False

    @property
    def required(self) -> int:
        return 0 if self.negated else 1

    def __str__(self) -> str:
        return f"{'!' if self.negated else ''}x{self.var + 1}"


class Conjunction(BooleanFunction):
    def __init__(self, n: int, literals: Iterable[Literal] = (), contradictory: bool = False):
        self.n = int(n)
        lits = frozenset(literals)
        for lit in lits:
            if not 0 <= lit.var < self.n:
                raise IndexError(f"literal {lit} outside n={self.n}")
        seen: dict[int, bool] = {}
        for lit in lits:
            if seen.get(lit.var, lit.negated) != lit.negated:
                contradictory = True
            seen[lit.var] = lit.negated
        self.literals = lits
        self.contradictory = bool(contradictory)

    @classmethod
    def from_assignment(cls, n: int, fixed: Mapping[int, int]) -> "Conjunction":
        """Conjunction forcing ``x_i = fixed[i]``."""
        return cls(n, (Literal(i, not b) for i, b in fixed.items()))

    @classmethod
    def false(cls, n: int) -> "Conjunction":
        return cls(n, (), contradictory=True)

    def __repr__(self) -> str:
        if self.contradictory:
            return f"Conjunction(n={self.n}, FALSE)"
        body = " & ".join(str(l) for l in sorted(self.literals)) or "TRUE"
        return f"Conjunction(n={self.n}, {body})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Conjunction)
            and self.n == other.n
            and self.contradictory == other.contradictory
            and (self.contradictory or self.literals == other.literals)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.contradictory, None if self.contradictory else self.literals))

    @property
    def countable(self) -> bool:
        return True

    @property
    def k(self) -> int:
        return len(self.literals)

    @property
    def is_antimonotone(self) -> bool:
        return self.contradictory or all(l.negated for l in self.literals)

    @cached_property
    def mask(self) -> np.ndarray:
        return B.index_mask(self.n, (l.var for l in self.literals))

    @cached_property
    def target(self) -> np.ndarray:
        return B.index_mask(self.n, (l.var for l in self.literals if not l.negated))

    def _eval(self, X):
        if self.contradictory:
            return np.zeros(X.shape[0], dtype=bool)
        return ((X & self.mask) == self.target).all(axis=1)


class DecisionList(BooleanFunction):
    """Ordered rules ``(var, b, v)``: output ``v`` for the first rule with ``x_var == b``."""

    def __init__(self, n: int, rules: Iterable[Sequence[int]] = (), default: int = 0):
        self.n = int(n)
        rs = tuple((int(i), int(b), int(v)) for i, b, v in rules)
        for i, b, v in rs:
            if not 0 <= i < self.n:
                raise IndexError(f"rule variable x{i + 1} outside n={self.n}")
            if b not in (0, 1) or v not in (0, 1):
                raise ValueError("rule bits must be 0 or 1")
        if default not in (0, 1):
            raise ValueError("default must be 0 or 1")
        self.rules = rs
        self.default = int(default)

    def __repr__(self) -> str:
        body = ", ".join(f"(x{i + 1},{b},{v})" for i, b, v in self.rules)
        return f"DecisionList(n={self.n}, [{body}], default={self.default})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DecisionList)
            and (self.n, self.rules, self.default) == (other.n, other.rules, other.default)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.rules, self.default))

    @property
    def countable(self) -> bool:
        return True

    @property
    def pivot(self) -> int | None:
        """1-based position of the first rule with output 1."""
        for j, (_, _, v) in enumerate(self.rules, start=1):
            if v == 1:
                return j
        return None

    def _eval(self, X):
        out = np.full(X.shape[0], bool(self.default))
        undecided = np.ones(X.shape[0], dtype=bool)
        for i, b, v in self.rules:
            fire = undecided & (B.get_bit(X, i) == bool(b))
            out[fire] = bool(v)
            undecided &= ~fire
            if not undecided.any():
                break
        return out

    @cached_property
    def subcubes(self) -> tuple[tuple[np.ndarray, np.ndarray, int], ...]:
        """Disjoint subcubes ``(mask, target, free_count)`` whose union is ``f^{-1}(1)``.

        Rule ``j`` owns the points that miss every earlier rule and fire rule ``j``;
        the default owns the points missing all rules. Lists with repeated variables
        are handled by tracking the accumulated constraints.
        """
        constraints: dict[int, int] = {}
        cubes = []

        def emit(extra: Mapping[int, int]):
            fixed = {**constraints, **extra}
            cubes.append(
                (
                    B.index_mask(self.n, fixed),
                    B.index_mask(self.n, (i for i, b in fixed.items() if b)),
                    self.n - len(fixed),
                )
            )

        for i, b, v in self.rules:
            if i in constraints:
                if constraints[i] == b:
                    # every remaining point fires here
                    if v:
                        emit({})
                    return tuple(cubes)
                continue
            if v:
                emit({i: b})
            constraints[i] = 1 - b
        if self.default:
            emit({})
        return tuple(cubes)


class TruthTable(BooleanFunction):
    """Dense table: bit ``x`` of ``words`` is ``f(x)`` for integer index ``x``."""

    def __init__(self, n: int, words: np.ndarray):
        if n > TT_MAX_N:
            raise Unsupported(f"truth tables are capped at n <= {TT_MAX_N}")
        self.n = int(n)
        need = max(1, (1 << n) // 64)
        words = np.asarray(words, dtype=np.uint64).copy()
        if words.shape != (need,):
            raise ValueError(f"table for n={n} needs {need} words")
        if n < 6:
            words[0] &= np.uint64((1 << (1 << n)) - 1)
        self.words = words

    @classmethod
    def from_bits(cls, n: int, values: np.ndarray) -> "TruthTable":
        values = np.asarray(values, dtype=bool)
        if values.shape != (1 << n,):
            raise ValueError(f"expected {1 << n} values")
        return cls(n, B.pack_rows(values[None, :])[0])

    @classmethod
    def from_int(cls, n: int, value: int) -> "TruthTable":
        need = max(1, (1 << n) // 64)
        return cls(n, np.array([(value >> (64 * j)) & 0xFFFFFFFFFFFFFFFF for j in range(need)], dtype=np.uint64))

    def to_int(self) -> int:
        return B.to_int(self.words)

    def __repr__(self) -> str:
        return f"TruthTable(n={self.n}, popcount={self.popcount})"

    def __eq__(self, other) -> bool:
        return isinstance(other, TruthTable) and self.n == other.n and np.array_equal(self.words, other.words)

    def __hash__(self) -> int:
        return hash((self.n, self.words.tobytes()))

    @property
    def countable(self) -> bool:
        return True

    @cached_property
    def popcount(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    @cached_property
    def satisfiers(self) -> np.ndarray:
        return np.flatnonzero(self.truth_bits()).astype(np.uint64)

    def truth_bits(self) -> np.ndarray:
        return B.unpack_rows(self.words[None, :], 1 << self.n)[0]

    def truth_table(self) -> "TruthTable":
        return self

    def _eval(self, X):
        idx = X[:, 0]
        return ((self.words[idx >> np.uint64(6)] >> (idx & np.uint64(63))) & np.uint64(1)).astype(bool)


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _splitmix(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class LazyRandomFunction(BooleanFunction):
    """Each point is 0 independently with probability ``zero_prob`` under a keyed hash."""

    def __init__(self, n: int, zero_prob: float, seed: int):
        if not 0.0 <= zero_prob <= 1.0:
            raise ValueError("zero_prob must lie in [0, 1]")
        self.n = int(n)
        self.zero_prob = float(zero_prob)
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF

    def __repr__(self) -> str:
        return f"LazyRandomFunction(n={self.n}, zero_prob={self.zero_prob!r}, seed={self.seed})"

    def __eq__(self, other) -> bool:
        return isinstance(other, LazyRandomFunction) and (self.n, self.zero_prob, self.seed) == (
            other.n,
            other.zero_prob,
            other.seed,
        )

    def __hash__(self) -> int:
        return hash((self.n, self.zero_prob, self.seed))

    def uniforms(self, X: np.ndarray) -> np.ndarray:
        """The hash of each point mapped to [0, 1)."""
        with np.errstate(over="ignore"):
            h = _splitmix(np.full(X.shape[0], self.seed, dtype=np.uint64) + _GOLDEN)
            for j in range(X.shape[1]):
                h = _splitmix((h ^ X[:, j]) + _GOLDEN)
        return (h >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def _eval(self, X):
        return self.uniforms(X) >= self.zero_prob


class XorShifted(BooleanFunction):
    """``x -> base(x xor y)`` for bases without a symbolic shift."""

    def __init__(self, base: BooleanFunction, y: np.ndarray):
        self.base = base
        self.n = base.n
        self.y = np.asarray(y, dtype=np.uint64)

    def __repr__(self) -> str:
        return f"XorShifted({self.base!r}, y={B.to_bitstring(self.y, self.n)})"

    def _eval(self, X):
        return self.base.evaluate(X ^ self.y)


@dataclass(frozen=True)
class Restriction:
    """Fixes coordinates ``fixed`` (0-based index to bit); the rest stay free, in ascending order."""

    n: int
    fixed: Mapping[int, int]

    def __post_init__(self):
        for i, b in self.fixed.items():
            if not 0 <= i < self.n:
                raise IndexError(f"fixed coordinate {i} outside n={self.n}")
            if b not in (0, 1):
                raise ValueError("fixed values must be bits")

    @cached_property
    def free(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in self.fixed)

    @cached_property
    def position(self) -> dict[int, int]:
        return {c: j for j, c in enumerate(self.free)}

    def embed(self, Xfree: np.ndarray) -> np.ndarray:
        """Compose free-coordinate points with the fixed bits into full points."""
        free_bits = B.unpack_rows(Xfree, len(self.free))
        full = np.zeros((free_bits.shape[0], self.n), dtype=bool)
        full[:, list(self.free)] = free_bits
        for i, b in self.fixed.items():
            full[:, i] = bool(b)
        return B.pack_rows(full)


class RestrictedFunction(BooleanFunction):
    def __init__(self, base: BooleanFunction, r: Restriction):
        self.base = base
        self.r = r
        self.n = len(r.free)

    def _eval(self, X):
        return self.base.evaluate(self.r.embed(X))


# ---------------------------------------------------------------- operations


def normalize(dl: DecisionList) -> DecisionList:
    """Equivalent list with each variable at most once and, when possible, a pivot.

    If every output is 0 and the default is 1, a rule ``(x_i, 1, 1)`` is appended for
    the smallest unused variable. When all variables are used the function has exactly
    one satisfying point and no pivot can be created; check ``pivot is None``.
    """
    seen: dict[int, int] = {}
    rules = []
    default = dl.default
    for i, b, v in dl.rules:
        if i not in seen:
            seen[i] = b
            rules.append((i, b, v))
        elif seen[i] != b:
            default = v
            break
    if default == 1 and not any(v for _, _, v in rules):
        unused = next((i for i in range(dl.n) if i not in seen), None)
        if unused is not None:
            rules.append((unused, 1, 1))
    return DecisionList(dl.n, rules, default)


def decompose(dl: DecisionList) -> tuple[int, Conjunction, DecisionList]:
    """Split at the pivot: ``dl = head AND tail`` with ``head`` the all-0 prefix as a conjunction."""
    p = dl.pivot
    if p is None:
        raise NoPivot("decision list has no rule with output 1")
    head = Conjunction(dl.n, (Literal(i, negated=(b == 1)) for i, b, _ in dl.rules[: p - 1]))
    tail = DecisionList(dl.n, dl.rules[p - 1 :], dl.default)
    return p, head, tail


def restrict(f: BooleanFunction, r: Restriction) -> BooleanFunction:
    """``f`` with the coordinates of ``r.fixed`` pinned, over the free coordinates."""
    if r.n != f.n:
        raise DimensionMismatch("restriction dimension differs from the function")
    k = len(r.free)
    pos = r.position
    if isinstance(f, Conjunction):
        if f.contradictory:
            return Conjunction.false(k)
        lits = []
        for lit in f.literals:
            if lit.var in r.fixed:
                if r.fixed[lit.var] != lit.required:
                    return Conjunction.false(k)
            else:
                lits.append(Literal(pos[lit.var], lit.negated))
        return Conjunction(k, lits)
    if isinstance(f, DecisionList):
        rules = []
        default = f.default
        for i, b, v in f.rules:
            if i in r.fixed:
                if r.fixed[i] == b:
                    default = v
                    break
            else:
                rules.append((pos[i], b, v))
        return DecisionList(k, rules, default)
    if isinstance(f, TruthTable):
        pts = r.embed(B.all_points(k)) if k else r.embed(np.zeros((1, 1), dtype=np.uint64))
        return TruthTable.from_bits(k, f.evaluate(pts))
    return RestrictedFunction(f, r)


def xor_shift(f: BooleanFunction, y: np.ndarray) -> BooleanFunction:
    """``x -> f(x xor y)``, kept symbolic where the representation allows."""
    y = np.asarray(y, dtype=np.uint64)
    if y.shape != (B.n_words(f.n),):
        raise DimensionMismatch("shift has the wrong length")
    ybits = B.unpack_rows(y[None, :], f.n)[0]
    if isinstance(f, Conjunction):
        if f.contradictory:
            return Conjunction.false(f.n)
        return Conjunction(f.n, (Literal(l.var, l.negated ^ bool(ybits[l.var])) for l in f.literals))
    if isinstance(f, DecisionList):
        return DecisionList(f.n, ((i, b ^ int(ybits[i]), v) for i, b, v in f.rules), f.default)
    if isinstance(f, TruthTable):
        idx = np.arange(1 << f.n, dtype=np.uint64) ^ y[0]
        return TruthTable.from_bits(f.n, f.truth_bits()[idx])
    if isinstance(f, XorShifted):
        return XorShifted(f.base, f.y ^ y)
    return XorShifted(f, y)


def count_satisfying(f: BooleanFunction) -> int:
    """Exact ``|f^{-1}(1)|`` as a Python integer."""
    if isinstance(f, Conjunction):
        return 0 if f.contradictory else 1 << (f.n - f.k)
    if isinstance(f, DecisionList):
        return sum(1 << free for _, _, free in f.subcubes)
    if isinstance(f, TruthTable):
        return f.popcount
    if isinstance(f, XorShifted) and f.base.countable:
        return count_satisfying(f.base)
    raise Unsupported(f"cannot count satisfying points of {type(f).__name__}")


def _force(R: np.ndarray, mask: np.ndarray, target: np.ndarray) -> np.ndarray:
    return (R & ~mask) | target


def sample_satisfying(
    f: BooleanFunction,
    rng: np.random.Generator,
    size: int | None = None,
    *,
    max_draws: int = DEFAULT_REJECTION_CAP,
) -> np.ndarray | None:
    """Uniform satisfying points: one point if ``size`` is None, else ``(size, W)``.

    Returns None when ``f`` has no satisfying point.
    """
    m = 1 if size is None else int(size)
    out = _sample(f, rng, m, max_draws)
    if out is None:
        return None
    return out[0] if size is None else out


def _sample(f, rng, m, max_draws):
    if isinstance(f, Conjunction):
        if f.contradictory:
            return None
        return _force(B.random_points(rng, m, f.n), f.mask, f.target)
    if isinstance(f, DecisionList):
        return _sample_dl(f, rng, m)
    if isinstance(f, TruthTable):
        sat = f.satisfiers
        if sat.size == 0:
            return None
        return B.ints_to_points(sat[rng.integers(0, sat.size, size=m)], f.n)
    if isinstance(f, XorShifted) and f.base.countable:
        base = _sample(f.base, rng, m, max_draws)
        return None if base is None else base ^ f.y
    return _rejection(f, rng, m, max_draws)


def _sample_dl(f: DecisionList, rng, m):
    cubes = f.subcubes
    if not cubes:
        return None
    sizes = [1 << free for _, _, free in cubes]
    total = sum(sizes)
    if total < (1 << 62):
        cum = np.cumsum(np.array(sizes, dtype=np.int64))
        which = np.searchsorted(cum, rng.integers(0, total, size=m), side="right")
    else:
        cum = list(np.cumsum(np.array(sizes, dtype=object)))
        py = random.Random(int(rng.integers(0, 2**63)))
        which = np.array([bisect.bisect_right(cum, py.randrange(total)) for _ in range(m)])
    out = B.random_points(rng, m, f.n)
    for c in np.unique(which):
        sel = which == c
        mask, target, _ = cubes[c]
        out[sel] = _force(out[sel], mask, target)
    return out


def _rejection(f, rng, m, max_draws):
    got = []
    have = 0
    drawn = 0
    batch = max(64, 2 * m)
    while have < m:
        if drawn >= max_draws:
            raise SamplerStall(f"rejection sampling drew {drawn} points without filling {m} samples")
        X = B.random_points(rng, batch, f.n)
        drawn += batch
        keep = X[f.evaluate(X)]
        got.append(keep)
        have += keep.shape[0]
        batch = min(batch * 2, 1 << 16)
    return np.concatenate(got)[:m]
