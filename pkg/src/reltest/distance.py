"""Exact distances, class enumeration, and the analysis objects g_f and W(a).

All values are :class:`fractions.Fraction`. Class distances use transforms over the
whole class rather than member-by-member loops, and the enumerators exist so that
tests can cross-check those transforms directly.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from . import bits as B
from .boolfn import (
    TT_MAX_N,
    BooleanFunction,
    Conjunction,
    DecisionList,
    Literal,
    TruthTable,
    count_satisfying,
)
from .errors import CapExceeded, EmptyBase, Unsupported
from .learn import greedy_decision_list

CONJ_ENUM_CAP = 10
DL_ENUM_CAP = 5
GF_CAP = 20


class ClassKind(enum.Enum):
    CONJUNCTIONS = "Conjunctions"
    ANTIMONOTONE = "AntiMonotoneConjunctions"
    DECISION_LISTS = "DecisionLists"


@dataclass(frozen=True)
class FunctionClass:
    kind: ClassKind
    n: int

    @property
    def cap(self) -> int:
        return DL_ENUM_CAP if self.kind is ClassKind.DECISION_LISTS else CONJ_ENUM_CAP

    def check_cap(self) -> None:
        if self.n > self.cap:
            raise CapExceeded(f"{self.kind.value} are enumerable only for n <= {self.cap}")


@dataclass(frozen=True)
class DistanceResult:
    value: Fraction
    witness: BooleanFunction | None = None


# ------------------------------------------------------------ pairwise distances


def _sym_diff(f: BooleanFunction, g: BooleanFunction) -> int:
    if f.n != g.n:
        raise ValueError("functions live on different dimensions")
    if isinstance(f, Conjunction) and isinstance(g, Conjunction):
        both = Conjunction(f.n, f.literals | g.literals, f.contradictory or g.contradictory)
        return count_satisfying(f) + count_satisfying(g) - 2 * count_satisfying(both)
    if f.n > TT_MAX_N:
        raise Unsupported("symmetric difference needs truth tables (n <= 24) or two conjunctions")
    a, b = f.truth_table().words, g.truth_table().words
    return int(np.bitwise_count(a ^ b).sum())


def _count(f: BooleanFunction) -> int:
    try:
        return count_satisfying(f)
    except Unsupported:
        if f.n > TT_MAX_N:
            raise
        return f.truth_table().popcount


def rel_dist(f: BooleanFunction, g: BooleanFunction) -> Fraction:
    """``|F xor G| / |F|`` with ``F = f^{-1}(1)``."""
    base = _count(f)
    if base == 0:
        raise EmptyBase("relative distance from a function with no satisfying points")
    return Fraction(_sym_diff(f, g), base)


def std_dist(f: BooleanFunction, g: BooleanFunction) -> Fraction:
    return Fraction(_sym_diff(f, g), 1 << f.n)


# ------------------------------------------------------------------ enumeration


def enumerate_class(c: FunctionClass) -> Iterator[BooleanFunction]:
    """Every syntactic member (duplicates as functions included)."""
    c.check_cap()
    n = c.n
    if c.kind is ClassKind.CONJUNCTIONS:
        for choice in itertools.product((None, False, True), repeat=n):
            yield Conjunction(n, (Literal(i, neg) for i, neg in enumerate(choice) if neg is not None))
        yield Conjunction.false(n)
    elif c.kind is ClassKind.ANTIMONOTONE:
        for choice in itertools.product((False, True), repeat=n):
            yield Conjunction(n, (Literal(i, True) for i, on in enumerate(choice) if on))
        yield Conjunction.false(n)
    else:
        for k in range(n + 1):
            for vars_ in itertools.permutations(range(n), k):
                for bv in itertools.product((0, 1), repeat=2 * k):
                    rules = [(vars_[j], bv[2 * j], bv[2 * j + 1]) for j in range(k)]
                    for default in (0, 1):
                        yield DecisionList(n, rules, default)


def class_size(c: FunctionClass) -> int:
    """Number of syntactic members produced by :func:`enumerate_class`."""
    n = c.n
    if c.kind is ClassKind.CONJUNCTIONS:
        return 3**n + 1
    if c.kind is ClassKind.ANTIMONOTONE:
        return 2**n + 1
    return sum(_perm(n, k) * 4**k * 2 for k in range(n + 1))


def _perm(n: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= n - j
    return out


# ------------------------------------------------------------ class distances


def _subcube_sums(values: np.ndarray, n: int) -> np.ndarray:
    """Sum of ``values`` over every subcube, indexed by a ternary pattern.

    Axis ``i`` of the result (reversed so that axis 0 is the top coordinate) takes
    value 0 or 1 for a fixed coordinate and 2 for a free one.
    """
    arr = values.astype(np.int64).reshape((2,) * n) if n else values.astype(np.int64).reshape(())
    for ax in range(n):
        arr = np.concatenate([arr, arr.sum(axis=ax, keepdims=True)], axis=ax)
    return arr


def _pattern_to_conj(n: int, pattern: tuple[int, ...]) -> Conjunction:
    # reshape put coordinate n-1 on axis 0
    lits = []
    for ax, val in enumerate(pattern):
        if val != 2:
            lits.append(Literal(n - 1 - ax, negated=(val == 0)))
    return Conjunction(n, lits)


def _conj_table(f: BooleanFunction, c: FunctionClass):
    """Per-pattern ``(|F and C|, |C|)`` arrays for all non-contradictory members."""
    n = c.n
    inter = _subcube_sums(f.truth_bits(), n)
    free = _subcube_sums(np.ones(1 << n, dtype=bool), n)
    if c.kind is ClassKind.ANTIMONOTONE:
        sl = tuple(np.array([0, 2]) for _ in range(n))
        inter = inter[np.ix_(*sl)] if n else inter
        free = free[np.ix_(*sl)] if n else free
    return inter, free


def _class_distance(f: BooleanFunction, c: FunctionClass, denom: int | None) -> DistanceResult:
    if f.n != c.n:
        raise ValueError("class dimension differs from the function")
    c.check_cap()
    n = c.n
    fc = _count(f)
    den = fc if denom is None else denom
    if c.kind is ClassKind.DECISION_LISTS:
        tables = dl_tables(n)
        ftab = np.uint64(B.to_int(f.truth_table().words))
        diffs = np.bitwise_count(tables ^ ftab)
        best = int(np.argmin(diffs))
        table = int(tables[best])
        witness = _dl_from_table(n, table)
        return DistanceResult(Fraction(int(diffs[best]), den), witness)
    inter, size = _conj_table(f, c)
    diff = fc + size - 2 * inter
    best = np.unravel_index(int(np.argmin(diff)), diff.shape) if n else ()
    best_diff = int(diff[best])
    if fc < best_diff:  # the all-0 member differs exactly on F
        return DistanceResult(Fraction(fc, den), Conjunction.false(n))
    pattern = tuple(int(v) for v in best)
    if c.kind is ClassKind.ANTIMONOTONE:
        pattern = tuple(0 if v == 0 else 2 for v in pattern)
    return DistanceResult(Fraction(best_diff, den), _pattern_to_conj(n, pattern))


def rel_dist_to_class(f: BooleanFunction, c: FunctionClass) -> DistanceResult:
    """Exact ``min_g rel-dist(f, g)`` over the class, with a minimising member."""
    if _count(f) == 0:
        raise EmptyBase("relative distance from a function with no satisfying points")
    return _class_distance(f, c, None)


def std_dist_to_class(f: BooleanFunction, c: FunctionClass) -> DistanceResult:
    return _class_distance(f, c, 1 << c.n)


@lru_cache(maxsize=None)
def dl_tables(n: int) -> np.ndarray:
    """Sorted distinct truth tables (as integers) of all decision lists on ``n <= 5`` variables."""
    if n > DL_ENUM_CAP:
        raise CapExceeded(f"decision lists are tabulated only for n <= {DL_ENUM_CAP}")
    full = (1 << (1 << n)) - 1
    idx = np.arange(1 << n, dtype=np.uint64)
    cube = {}
    for i in range(n):
        on = int(B.pack_rows(((idx >> np.uint64(i)) & np.uint64(1)).astype(bool)[None, :])[0, 0])
        cube[i, 1] = on
        cube[i, 0] = full ^ on

    @lru_cache(maxsize=None)
    def over(vars_mask: int) -> np.ndarray:
        acc = [np.array([0, full], dtype=np.uint64)]
        for i in range(n):
            if vars_mask >> i & 1:
                rest = over(vars_mask & ~(1 << i))
                for b in (0, 1):
                    c = np.uint64(cube[i, b])
                    nc = np.uint64(full ^ cube[i, b])
                    for v in (0, 1):
                        acc.append((c if v else np.uint64(0)) | (rest & nc))
        return np.unique(np.concatenate(acc))

    return over((1 << n) - 1)


def _dl_from_table(n: int, table: int) -> DecisionList:
    values = B.unpack_rows(np.array([[table]], dtype=np.uint64), 1 << n)[0]
    return greedy_decision_list(B.unpack_rows(B.all_points(n), n), values)


def is_member(f: BooleanFunction, c: FunctionClass) -> bool:
    return std_dist_to_class(f, c).value == 0


# --------------------------------------------------------- g_f and witnesses


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalised integer Walsh-Hadamard transform of a length ``2^n`` vector."""
    a = np.array(values, dtype=np.int64)
    h = 1
    while h < a.size:
        v = a.reshape(-1, 2, h)
        a = np.concatenate([v[:, 0] + v[:, 1], v[:, 0] - v[:, 1]], axis=1).reshape(-1)
        h *= 2
    return a


def xor_autocorrelation(f: BooleanFunction) -> np.ndarray:
    """``A[a] = |{x in F : a xor x in F}|`` for every ``a``."""
    if f.n > GF_CAP:
        raise CapExceeded(f"g_f is computed exactly only for n <= {GF_CAP}")
    spec = walsh_hadamard(f.truth_bits())
    return walsh_hadamard(spec * spec) >> f.n


def compute_gf(f: BooleanFunction) -> TruthTable:
    """``g_f(a) = 1`` iff ``Pr_{x ~ F}[f(a xor x) = 1] >= 1/2``."""
    A = xor_autocorrelation(f)
    N = int(A[0])
    if N == 0:
        raise EmptyBase("g_f needs a satisfying point")
    return TruthTable.from_bits(f.n, 2 * A >= N)


def witness_counts(f: BooleanFunction) -> np.ndarray:
    """``|W(a)|`` for every ``a``, where ``W(a) = {x in F : f(a xor x) != f(a)}``."""
    A = xor_autocorrelation(f)
    vals = f.truth_bits()
    return np.where(vals, A[0] - A, A)


def witness_fraction(f: BooleanFunction, a: np.ndarray | int) -> Fraction:
    counts = witness_counts(f)
    N = int(f.truth_bits().sum())
    if N == 0:
        raise EmptyBase("witness fraction needs a satisfying point")
    idx = a if isinstance(a, int) else B.to_int(a)
    return Fraction(int(counts[idx]), N)


def heavy_set(f: BooleanFunction, delta: Fraction = Fraction(1, 36)) -> np.ndarray:
    """Indices ``a`` with ``|W(a)| / N > delta``."""
    counts = witness_counts(f)
    N = int(xor_autocorrelation(f)[0])
    return np.flatnonzero(counts * delta.denominator > delta.numerator * N)


# ------------------------------------------------------------- set predicates


def _as_int_set(points: Iterable) -> np.ndarray:
    arr = np.asarray(list(points) if not isinstance(points, np.ndarray) else points)
    if arr.ndim == 2:
        arr = arr[:, 0]
    return np.unique(arr.astype(np.uint64))


def gf2_rank(vectors: Iterable[int]) -> int:
    basis: list[int] = []
    for v in vectors:
        v = int(v)
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return len(basis)


def is_linear_subspace(points: Iterable) -> bool:
    """Closed under xor (and so contains the zero point)."""
    s = _as_int_set(points)
    return s.size > 0 and s.size == 1 << gf2_rank(s)


def is_antimonotone(points: Iterable) -> bool:
    """Closed under clearing any 1-bit."""
    s = _as_int_set(points)
    if s.size == 0:
        return True
    top = int(s.max()).bit_length()
    for i in range(top):
        bit = np.uint64(1 << i)
        has = (s & bit) != 0
        if not np.isin(s[has] ^ bit, s).all():
            return False
    return True


def satisfying_indices(f: BooleanFunction) -> np.ndarray:
    return np.flatnonzero(f.truth_bits()).astype(np.uint64)
