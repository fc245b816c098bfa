"""Exhaustive verification suites for the structural facts the testers rely on.

Each suite returns the number of checks it made and the first counterexample, if
any. :func:`verify_lemmas` runs the suites and collects a ledger.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from . import bits as B
from .boolfn import (
    Conjunction,
    DecisionList,
    Literal,
    TruthTable,
    decompose,
    xor_shift,
)
from .distance import (
    ClassKind,
    FunctionClass,
    compute_gf,
    dl_tables,
    enumerate_class,
    is_antimonotone,
    is_linear_subspace,
    rel_dist,
    std_dist,
    witness_counts,
)
from .dltest import Partition, gamma_exact

RelDist = Callable[[TruthTable, TruthTable], Fraction]


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    counterexample: str | None = None
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.counterexample is None

    def fail(self, message: str) -> None:
        if self.counterexample is None:
            self.counterexample = message


@dataclass
class LemmaLedger:
    entries: list[SuiteResult] = field(default_factory=list)

    @property
    def total_checks(self) -> int:
        return sum(e.checks for e in self.entries)

    @property
    def valid(self) -> bool:
        """A run that checked nothing proves nothing."""
        return self.total_checks > 0

    @property
    def passed(self) -> bool:
        return self.valid and all(e.passed for e in self.entries)

    def by_name(self, name: str) -> SuiteResult:
        return next(e for e in self.entries if e.name == name)

    def lines(self) -> list[str]:
        out = []
        for e in self.entries:
            status = "PASS" if e.passed else "FAIL"
            line = f"{status} {e.name}: {e.checks} checks in {e.seconds:.2f}s"
            if e.counterexample:
                line += f" counterexample: {e.counterexample}"
            out.append(line)
        verdict = "VALID" if self.valid else "INVALID (no checks)"
        out.append(f"total {self.total_checks} checks, {verdict}, {'PASS' if self.passed else 'FAIL'}")
        return out

    def as_dict(self) -> dict:
        return {
            "suites": [
                {"name": e.name, "checks": e.checks, "passed": e.passed, "counterexample": e.counterexample}
                for e in self.entries
            ],
            "total_checks": self.total_checks,
            "valid": self.valid,
            "passed": self.passed,
        }


# ---------------------------------------------------------------- helpers


def _tables(n: int) -> Iterable[np.ndarray]:
    """Every function on ``n`` variables as a boolean value vector."""
    idx = np.arange(1 << n)
    for t in range(1 << (1 << n)):
        yield ((t >> idx) & 1).astype(bool)


def _tt(n: int, values: np.ndarray) -> TruthTable:
    return TruthTable.from_bits(n, values)


def _point_bits(n: int) -> np.ndarray:
    return B.unpack_rows(B.all_points(n), n)


def _dl_batch(P: np.ndarray, vars_: tuple[int, ...], Bm: np.ndarray, Vm: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Tables of many lists sharing a variable order: ``(m, 2^n)`` booleans."""
    out = np.repeat(D[:, None].astype(bool), P.shape[0], axis=1)
    undecided = np.ones_like(out)
    for j, v in enumerate(vars_):
        fire = undecided & (P[None, :, v] == Bm[:, j, None].astype(bool))
        out = np.where(fire, Vm[:, j, None].astype(bool), out)
        undecided &= ~fire
    return out


def _dl_families(n: int):
    """Yield ``(vars, B, V, D)`` covering every syntactic list with distinct variables."""
    for k in range(n + 1):
        combos = np.array(list(itertools.product((0, 1), repeat=2 * k + 1)), dtype=np.int8).reshape(-1, 2 * k + 1)
        Bm, Vm, D = combos[:, 0 : 2 * k : 2], combos[:, 1 : 2 * k : 2], combos[:, -1]
        for vars_ in itertools.permutations(range(n), k):
            yield vars_, Bm, Vm, D


# ----------------------------------------------------------------- suites


def suite_triangle(n_cap: int, rel: RelDist, rng: np.random.Generator, random_trials: int = 10_000) -> SuiteResult:
    """``rel(f,h) <= rel(f,g) + (1 + rel(f,g)) rel(g,h)`` for nonempty ``f`` and ``g``."""
    res = SuiteResult("approx-triangle")

    def check(n, f, g, h):
        a, b, c = rel(f, g), rel(g, h), rel(f, h)
        res.checks += 1
        if c > a + (1 + a) * b:
            res.fail(f"n={n} f={f.to_int():x} g={g.to_int():x} h={h.to_int():x}: {c} > {a} + (1+{a}){b}")

    for n in range(1, min(2, n_cap) + 1):
        fns = [_tt(n, t) for t in _tables(n)]
        nonempty = [f for f in fns if f.popcount]
        for f in nonempty:
            for g in nonempty:
                for h in fns:
                    check(n, f, g, h)
    n = max(1, n_cap)
    for _ in range(random_trials):
        dens = rng.random(3)
        vals = [rng.random(1 << n) < d for d in dens]
        vals[0][rng.integers(1 << n)] = True
        vals[1][rng.integers(1 << n)] = True
        check(n, *(_tt(n, v) for v in vals))
    return res


def suite_dist_to_rel(n_cap: int, rel: RelDist, rng: np.random.Generator, random_trials: int = 25) -> SuiteResult:
    """If ``dist(f, C) > eps`` then ``rel-dist(f, C) > eps / p_f``, with ``rel`` minimised over ``C``."""
    res = SuiteResult("dist-to-rel-dist")
    eps_grid = [Fraction(1, 16), Fraction(1, 8), Fraction(1, 4), Fraction(3, 8)]

    def members(n):
        out = {}
        for kind in ClassKind:
            if kind is ClassKind.DECISION_LISTS:
                out[kind] = [_tt(n, B.unpack_rows(np.array([[t]], dtype=np.uint64), 1 << n)[0]) for t in dl_tables(n)]
            else:
                out[kind] = [m.truth_table() for m in enumerate_class(FunctionClass(kind, n))]
        return out

    def check(n, f, cls):
        p = Fraction(f.popcount, 1 << n)
        for kind, mem in cls.items():
            d = min(std_dist(f, g) for g in mem)
            r = min(rel(f, g) for g in mem)
            for eps in eps_grid:
                res.checks += 1
                if d > eps and not r > eps / p:
                    res.fail(f"n={n} f={f.to_int():x} {kind.value} eps={eps}: dist={d} rel={r} p={p}")

    for n in range(1, min(3, n_cap) + 1):
        cls = members(n)
        for t in _tables(n):
            if t.any():
                check(n, _tt(n, t), cls)
    if n_cap > 3:
        n = n_cap
        cls = members(n)
        for _ in range(random_trials):
            v = rng.random(1 << n) < rng.random()
            v[rng.integers(1 << n)] = True
            check(n, _tt(n, v), cls)
    return res


def suite_decision_lists(n_cap: int) -> list[SuiteResult]:
    """Low-bias tail, head/tail decomposition, and the unanimity observation, exhaustively."""
    tail = SuiteResult("low-bias-tail")
    dec = SuiteResult("decomposition")
    obs = SuiteResult("observation-head")
    for n in range(1, n_cap + 1):
        P = _point_bits(n)
        for vars_, Bm, Vm, D in _dl_families(n):
            k = len(vars_)
            if k == 0:
                continue
            has = Vm.any(axis=1)
            if not has.any():
                continue
            Bh, Vh, Dh = Bm[has], Vm[has], D[has]
            piv = Vh.argmax(axis=1)  # 0-based pivot position
            T = _dl_batch(P, vars_, Bh, Vh, Dh)
            size = T.sum(axis=1)
            for p in np.unique(piv):
                sel = piv == p
                Tp, Bp, Vp, Dp, Np = T[sel], Bh[sel], Vh[sel], Dh[sel], size[sel]
                ip = vars_[p]
                at_b = (Tp & (P[None, :, ip] == Bp[:, p, None].astype(bool))).sum(axis=1)
                tail.checks += Tp.shape[0]
                bad = 2 * at_b < Np
                if bad.any():
                    tail.fail(f"n={n} vars={vars_} b={Bp[bad][0]} v={Vp[bad][0]}: pivot bias")
                for j in range(p + 1, k):
                    ones = (Tp & P[None, :, vars_[j]]).sum(axis=1)
                    tail.checks += Tp.shape[0]
                    bad = (4 * ones < Np) | (4 * ones > 3 * Np)
                    if bad.any():
                        tail.fail(f"n={n} vars={vars_} b={Bp[bad][0]} v={Vp[bad][0]}: tail x{vars_[j] + 1}")
                head = np.ones_like(Tp)
                for j in range(p):
                    head &= P[None, :, vars_[j]] != Bp[:, j, None].astype(bool)
                tl = _dl_batch(P, vars_[p:], Bp[:, p:], Vp[:, p:], Dp)
                dec.checks += Tp.shape[0]
                if ((head & tl) != Tp).any():
                    dec.fail(f"n={n} vars={vars_}: head AND tail differs from the list")
                obs.checks += Tp.shape[0]
                if (Tp & ~head).any():
                    obs.fail(f"n={n} vars={vars_}: a satisfying point violates the head")
    return [tail, dec, obs]


def suite_characterization(n_cap: int) -> SuiteResult:
    """``F`` is a nonempty xor-closed, downward-closed set iff ``f`` is an anti-monotone conjunction."""
    res = SuiteResult("am-characterization")
    for n in range(1, min(4, n_cap) + 1):
        N = 1 << n
        members = {m.truth_table().to_int() for m in enumerate_class(FunctionClass(ClassKind.ANTIMONOTONE, n))}
        T = np.arange(1, 1 << N, dtype=np.int64)
        V = ((T[:, None] >> np.arange(N)) & 1).astype(bool)
        idx = np.arange(N)
        linear = V[:, 0].copy()
        for a in range(1, N):
            shifted = V[:, idx ^ a]
            linear &= ~V[:, a] | (shifted == V).all(axis=1)
        anti = np.ones(T.size, dtype=bool)
        for i in range(n):
            up = (idx >> i) & 1 == 1
            anti &= ~(V[:, up] & ~V[:, idx[up] ^ (1 << i)]).any(axis=1)
        is_mem = np.array([int(t) in members for t in T])
        res.checks += T.size
        bad = np.flatnonzero((linear & anti) != is_mem)
        if bad.size:
            res.fail(f"n={n} table={int(T[bad[0]]):x}")
        if n <= 3:
            # cross-check the set predicates used elsewhere
            for t, lin, am in zip(T, linear, anti):
                pts = np.flatnonzero((int(t) >> idx) & 1)
                res.checks += 1
                if is_linear_subspace(pts) != lin or is_antimonotone(pts) != am:
                    res.fail(f"n={n} table={int(t):x}: predicate mismatch")
    return res


def _subspaces(n: int) -> np.ndarray:
    """Membership masks (bit ``x`` set iff ``x`` in H) of all subspaces of F_2^n."""
    seen = {1}
    frontier = [1]
    while frontier:
        nxt = []
        for mask in frontier:
            pts = [x for x in range(1 << n) if mask >> x & 1]
            for v in range(1 << n):
                if mask >> v & 1:
                    continue
                new = mask
                for x in pts:
                    new |= 1 << (x ^ v)
                if new not in seen:
                    seen.add(new)
                    nxt.append(new)
        frontier = nxt
    return np.array(sorted(seen), dtype=object)


def suite_subspace_fact(n_cap: int) -> SuiteResult:
    """For subspaces with ``H`` not inside ``H'``, ``|H & H'| <= |H| / 2``."""
    res = SuiteResult("subspace-intersection")
    for n in range(1, n_cap + 1):
        masks = _subspaces(n)
        if n <= 5:
            M = np.array([int(m) for m in masks], dtype=np.uint64)
            inter = np.bitwise_count(M[:, None] & M[None, :]).astype(np.int64)
            size = np.bitwise_count(M).astype(np.int64)[:, None]
            contained = inter == size
            res.checks += int((~contained).sum())
            bad = ~contained & (2 * inter > size)
            if bad.any():
                i, j = np.argwhere(bad)[0]
                res.fail(f"n={n} H={int(M[i]):x} H'={int(M[j]):x}")
    return res


def suite_gf(n_cap: int, rng: np.random.Generator, random_trials: int = 300) -> SuiteResult:
    """Transform-based ``g_f`` and ``|W(a)|`` against the defining double loop."""
    res = SuiteResult("gf-recompute")

    def check(n, v):
        f = _tt(n, v)
        F = np.flatnonzero(v)
        N = F.size
        idx = np.arange(1 << n)
        hits = np.array([v[a ^ F].sum() for a in idx])
        direct_g = 2 * hits >= N
        direct_w = np.array([(v[a ^ F] != v[a]).sum() for a in idx])
        res.checks += 1
        if not np.array_equal(compute_gf(f).truth_bits(), direct_g) or not np.array_equal(witness_counts(f), direct_w):
            res.fail(f"n={n} f={f.to_int():x}")

    for n in range(1, min(3, n_cap) + 1):
        for t in _tables(n):
            if t.any():
                check(n, t)
    for n in range(4, max(4, n_cap) + 1):
        for _ in range(random_trials):
            v = rng.random(1 << n) < rng.random()
            v[rng.integers(1 << n)] = True
            check(n, v)
    # anti-monotone conjunctions are their own g_f
    for n in range(1, min(4, n_cap) + 1):
        for m in enumerate_class(FunctionClass(ClassKind.ANTIMONOTONE, n)):
            if isinstance(m, Conjunction) and m.contradictory:
                continue
            res.checks += 1
            if compute_gf(m).truth_bits().tolist() != m.truth_bits().tolist():
                res.fail(f"g_f differs from {m!r}")
    return res


def suite_gamma(n_cap: int, rng: np.random.Generator) -> SuiteResult:
    """``Gamma`` equals the head restricted to ``U`` on partitions meeting the completeness assumption."""
    res = SuiteResult("gamma-equals-head")
    for n in range(1, min(4, n_cap) + 1):
        for dl in enumerate_class(FunctionClass(ClassKind.DECISION_LISTS, n)):
            if dl.pivot is None:
                continue
            p, head, _ = decompose(dl)
            head_vars = [i for i, _, _ in dl.rules[: p - 1]]
            tail_vars = [i for i, _, _ in dl.rules[p - 1 :]]
            others = [i for i in range(n) if i not in head_vars and i not in tail_vars]
            for choice in itertools.product((False, True), repeat=len(others)):
                U = sorted(head_vars + [o for o, c in zip(others, choice) if c])
                fixed = {i: 1 - b for i, b, _ in dl.rules[: p - 1]}
                for o in U:
                    fixed.setdefault(o, int(rng.integers(2)))
                Um = B.index_mask(n, U)
                u = B.index_mask(n, [i for i, b in fixed.items() if b])
                part = Partition(n, Um, B.full_mask(n) & ~Um, u)
                g = gamma_exact(dl, part)
                # head as a conjunction over U (ascending order)
                pos = {c: j for j, c in enumerate(U)}
                cstar = Conjunction(len(U), (Literal(pos[l.var], l.negated) for l in head.literals))
                res.checks += 1
                if not np.array_equal(g.truth_bits(), cstar.truth_bits()):
                    res.fail(f"{dl!r} U={U}")
    return res


def suite_xor(n_cap: int, rng: np.random.Generator, trials: int = 200) -> SuiteResult:
    """Symbolic xor-shifts agree with pointwise shifting and are involutions."""
    res = SuiteResult("xor-involution")
    n = max(1, n_cap)
    pts = B.all_points(n)
    for _ in range(trials):
        y = B.random_points(rng, 1, n)[0]
        k = int(rng.integers(0, n + 1))
        vars_ = rng.choice(n, size=k, replace=False)
        fs = [
            Conjunction(n, (Literal(int(v), bool(rng.integers(2))) for v in vars_)),
            DecisionList(n, ((int(v), int(rng.integers(2)), int(rng.integers(2))) for v in vars_), int(rng.integers(2))),
            _tt(n, rng.random(1 << n) < 0.5),
        ]
        for f in fs:
            g = xor_shift(f, y)
            res.checks += 1
            if not np.array_equal(g.evaluate(pts), f.evaluate(pts ^ y)):
                res.fail(f"shift of {f!r}")
            if not np.array_equal(xor_shift(g, y).evaluate(pts), f.evaluate(pts)):
                res.fail(f"involution of {f!r}")
    return res


SUITES = (
    "approx-triangle",
    "dist-to-rel-dist",
    "decision-lists",
    "am-characterization",
    "subspace-intersection",
    "gf-recompute",
    "gamma-equals-head",
    "xor-involution",
)


def verify_lemmas(
    n_cap: int,
    *,
    rel_dist: RelDist = rel_dist,
    suites: Iterable[str] | None = None,
    seed: int = 0,
) -> LemmaLedger:
    """Run the named suites (all by default) up to dimension ``n_cap <= 5``.

    ``rel_dist`` is injectable so that a faulty distance can be shown to be caught.
    """
    if not 1 <= n_cap <= 5:
        raise ValueError("n_cap must lie in [1, 5]")
    rng = np.random.default_rng(seed)
    names = SUITES if suites is None else tuple(suites)
    unknown = set(names) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suites: {sorted(unknown)}")
    ledger = LemmaLedger()
    runners = {
        "approx-triangle": lambda: [suite_triangle(n_cap, rel_dist, rng)],
        "dist-to-rel-dist": lambda: [suite_dist_to_rel(n_cap, rel_dist, rng)],
        "decision-lists": lambda: suite_decision_lists(n_cap),
        "am-characterization": lambda: [suite_characterization(n_cap)],
        "subspace-intersection": lambda: [suite_subspace_fact(n_cap)],
        "gf-recompute": lambda: [suite_gf(n_cap, rng)],
        "gamma-equals-head": lambda: [suite_gamma(n_cap, rng)],
        "xor-involution": lambda: [suite_xor(n_cap, rng)],
    }
    for name in names:
        t = time.perf_counter()
        results = runners[name]()
        dt = time.perf_counter() - t
        for r in results:
            r.seconds = dt / len(results)
            ledger.entries.append(r)
    return ledger
