"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line (also collected into the
terminal summary) before asserting.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from reltest import bits as B
from reltest.adversary import FaultyKind, FaultySamp, certify_far_from_dl, dno_function, random_instance
from reltest.boolfn import Conjunction, DecisionList, TruthTable, count_satisfying, sample_satisfying
from reltest.conjtest import ConjTestParams, call_ceiling as conj_ceiling, conj_test
from reltest.distance import ClassKind, FunctionClass, enumerate_class, rel_dist_to_class, std_dist_to_class
from reltest.dltest import (
    DlTestParams,
    LearnerTester,
    Variant,
    call_ceiling as dl_ceiling,
    default_std_tester,
    dl_test,
)
from reltest.harness import trial_rngs, trial_seed, wilson
from reltest.lemmas import verify_lemmas
from reltest.oracle import make_oracles
from reltest.reduction import ReductionParams, std_conj_mq_constant, std_conj_test

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance

CONJ_K = 3 * 5967 + 3 * 91 + 4  # samp + mq calls of one conjunction test are at most CONJ_K / eps
DL_A = 77_500  # adaptive decision-list calls <= DL_A * log2(1/eps)^2 / eps for every eps <= 1/2
DL_A_NA = 30_600  # non-adaptive MQ calls <= DL_A_NA * log2(1/eps)^2 / eps^2


def record(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def rngs(base: int, cell: int, trial: int):
    return trial_rngs(trial_seed(base, cell, trial))


def run_conj(f, eps, base, cell, trial, oracle_kind=None):
    orng, trng = rngs(base, cell, trial)
    if oracle_kind is None:
        o = make_oracles(f, orng)
    else:
        o = FaultySamp(f, oracle_kind).oracle(orng)
    params = ConjTestParams(eps)
    rep = conj_test(o, params, trng)
    s_cap, q_cap = conj_ceiling(params)
    assert rep.samp_calls <= s_cap and rep.mq_calls <= q_cap
    return rep


def run_dl(f, eps, base, cell, trial, variant=Variant.ADAPTIVE):
    orng, trng = rngs(base, cell, trial)
    params = DlTestParams.desk(eps, variant=variant)
    std = default_std_tester(variant)
    rep = dl_test(make_oracles(f, orng), params, std, trng)
    s_cap, q_cap = dl_ceiling(params, std.max_queries(eps / 100, rep.info.get("R", 0)))
    assert rep.samp_calls <= s_cap and rep.mq_calls <= q_cap
    return rep


# ---------------------------------------------------------------- corpora


def conj_corpus_small():
    return [f for n in range(1, 5) for f in enumerate_class(FunctionClass(ClassKind.CONJUNCTIONS, n))]


def conj_corpus_random():
    rng = np.random.default_rng(2024)
    out = []
    for n in (16, 64):
        for _ in range(1000):
            k = int(rng.integers(0, n + 1))
            out.append(random_instance("conj", n, k, rng))
    return out


def far_conj_corpus():
    """50 instances at n <= 10 with exact rel-dist to conjunctions >= 0.2.

    Half are random tables; half are conjunctions with points added or removed until
    they just cross the threshold, which are the hardest cases for the tester.
    """
    rng = np.random.default_rng(77)
    out = []
    while len(out) < 25:
        n = int(rng.integers(3, 11))
        v = rng.random(1 << n) < rng.uniform(0.1, 0.9)
        if not v.any():
            continue
        f = TruthTable.from_bits(n, v)
        d = rel_dist_to_class(f, FunctionClass(ClassKind.CONJUNCTIONS, n)).value
        if d >= Fraction(1, 5):
            out.append((f, d))
    while len(out) < 50:
        n = int(rng.integers(5, 11))
        k = int(rng.integers(1, n - 2))
        base = random_instance("conj", n, k, rng).truth_bits()
        v = base.copy()
        for flip in rng.permutation(1 << n):
            v[flip] = ~v[flip]
            if not v.any():
                break
            f = TruthTable.from_bits(n, v)
            d = rel_dist_to_class(f, FunctionClass(ClassKind.CONJUNCTIONS, n)).value
            if d >= Fraction(1, 5):
                out.append((f, d))
                break
    return out


# --------------------------------------------------------------- criteria


def test_criterion_1_conjunction_completeness():
    t0 = time.perf_counter()
    rejections = runs = 0
    for i, f in enumerate(conj_corpus_small()):
        for s in range(100):
            rejections += not run_conj(f, 0.1, 1, i, s).accepted
            runs += 1
    for i, f in enumerate(conj_corpus_random()):
        for s in range(10):
            rejections += not run_conj(f, 0.2, 2, i, s).accepted
            runs += 1
    dt = time.perf_counter() - t0
    ok = rejections == 0 and dt <= 60
    record(1, ok, f"{rejections} rejections in {runs} runs, {dt:.1f}s (limit 60s)")
    assert ok


def test_criterion_2_conjunction_soundness():
    t0 = time.perf_counter()
    corpus = far_conj_corpus()
    worst = (1.0, None)
    for i, (f, d) in enumerate(corpus):
        for j, eps in enumerate((0.1, 0.2)):
            assert d >= Fraction(str(eps))
            rej = sum(not run_conj(f, eps, 3, 2 * i + j, t).accepted for t in range(400))
            lo, _ = wilson(rej, 400)
            if lo < worst[0]:
                worst = (lo, f"n={f.n} d={d} eps={eps} rejects={rej}/400")
    dt = time.perf_counter() - t0
    ok = worst[0] >= 0.85 and dt <= 300
    record(2, ok, f"{len(corpus)} instances, lowest Wilson lower bound {worst[0]:.3f} ({worst[1]}), {dt:.1f}s")
    assert ok


def test_criterion_3_conjunction_query_budget():
    grid = (0.4, 0.2, 0.1, 0.05, 0.025)
    rng = np.random.default_rng(3)
    instances = [random_instance("conj", 32, 5, rng), Conjunction(12), TruthTable.from_int(3, 0b10010110)]
    ok = True
    worst = 0.0
    for j, eps in enumerate(grid):
        s_cap, q_cap = conj_ceiling(ConjTestParams(eps))
        r1 = math.ceil(5967 / eps - 1e-9)
        ok &= (s_cap, q_cap) == (1 + 2 * r1 + 2 * 91, r1 + 91)
        ok &= s_cap + q_cap <= CONJ_K / eps
        for i, f in enumerate(instances):
            for t in range(5):
                rep = run_conj(f, eps, 4, 10 * j + i, t)
                total = rep.samp_calls + rep.mq_calls
                worst = max(worst, total * eps)
                ok &= total <= CONJ_K / eps
                if rep.accepted and count_satisfying(f):
                    ok &= (rep.samp_calls, rep.mq_calls) == (s_cap, q_cap)
    record(3, ok, f"K={CONJ_K}, max calls*eps={worst:.0f}")
    assert ok


def test_criterion_4_dl_completeness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    rates = {}
    for c, k in enumerate((2, 8, 32)):
        acc = 0
        for t in range(200):
            f = random_instance("dl", 64, k, rng)
            acc += run_dl(f, 0.1, 5, c, t).accepted
        rates[k] = acc / 200
    dt = time.perf_counter() - t0
    ok = all(r >= 0.65 for r in rates.values()) and dt <= 600
    record(4, ok, f"accept rates by rule count {rates}, {dt:.1f}s")
    assert ok


def far_dl_small():
    """n <= 5 instances with exact rel-dist to decision lists >= 0.05."""
    out = []
    bit = lambda i, n: ((np.arange(1 << n) >> i) & 1).astype(bool)
    out.append(TruthTable.from_bits(2, bit(0, 2) ^ bit(1, 2)))
    out.append(TruthTable.from_bits(3, (bit(0, 3).astype(int) + bit(1, 3) + bit(2, 3)) >= 2))
    out.append(TruthTable.from_bits(4, bit(0, 4) ^ bit(1, 4) ^ bit(2, 4)))
    # a decision list with a few stray points added
    dl = DecisionList(5, [(0, 1, 0), (1, 0, 1), (2, 1, 1)], 0).truth_bits()
    v = dl.copy()
    v[[0b10011, 0b11110]] = True
    out.append(TruthTable.from_bits(5, v))
    rng = np.random.default_rng(55)
    while len(out) < 10:
        n = int(rng.integers(3, 6))
        f = TruthTable.from_bits(n, rng.random(1 << n) < rng.uniform(0.3, 0.8))
        if f.popcount:
            out.append(f)
    keep = []
    for f in out:
        d = rel_dist_to_class(f, FunctionClass(ClassKind.DECISION_LISTS, f.n)).value
        if d >= Fraction(1, 20):
            keep.append((f, d))
    return keep


def test_criterion_5_dl_soundness():
    t0 = time.perf_counter()
    eps = 0.05
    small = far_dl_small()
    dno = []
    s = 0
    while len(dno) < 5:
        f = dno_function(14, eps, s)
        s += 1
        try:
            certify_far_from_dl(f, eps)
            dno.append(f)
        except Exception:
            continue
    lines = []
    ok = len(small) >= 8
    for i, f in enumerate([f for f, _ in small] + dno):
        rej = sum(not run_dl(f, eps, 6, i, t).accepted for t in range(200))
        lines.append(rej / 200)
        ok &= rej / 200 >= 0.65
    dt = time.perf_counter() - t0
    ok &= dt <= 900
    record(5, ok, f"{len(small)} enumerated + {len(dno)} certified instances, min reject rate {min(lines):.3f}, {dt:.1f}s")
    assert ok


def test_criterion_6_dl_query_budget():
    grid = (0.4, 0.2, 0.1, 0.05, 0.025)
    bound = lambda e: DL_A * math.log2(1 / e) ** 2 / e
    bound_na = lambda e: DL_A_NA * math.log2(1 / e) ** 2 / e**2
    # the constants cover the analytic ceiling at every eps = 2^-k, not only the grid
    ok = True
    bf = default_std_tester()
    for k in range(1, 41):
        e = 2.0**-k
        stdq = max(bf.max_queries(e / 100, 16), LearnerTester().max_queries(e / 100))
        s, q = dl_ceiling(DlTestParams.desk(e), stdq)
        ok &= s + q <= bound(e)
        stdq = max(bf.max_queries(e / 100, 16), LearnerTester(variant=Variant.NONADAPTIVE).max_queries(e / 100))
        _, q = dl_ceiling(DlTestParams.desk(e, variant=Variant.NONADAPTIVE), stdq)
        ok &= q <= bound_na(e)
    rng = np.random.default_rng(6)
    fs = [random_instance("dl", 64, 8, rng), random_instance("dl", 64, 32, rng), dno_function(14, 0.05, 0)]
    worst = worst_na = 0.0
    for j, e in enumerate(grid):
        for i, f in enumerate(fs):
            rep = run_dl(f, e, 7, 10 * j + i, 0)
            worst = max(worst, (rep.samp_calls + rep.mq_calls) / bound(e))
            if e >= 0.05:
                rep = run_dl(f, e, 8, 10 * j + i, 0, Variant.NONADAPTIVE)
                worst_na = max(worst_na, rep.mq_calls / bound_na(e))
    ok &= worst <= 1 and worst_na <= 1
    record(6, ok, f"A={DL_A} (max used {worst:.3f}), A'={DL_A_NA} (max used {worst_na:.3f})")
    assert ok


def test_criterion_7_reduction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    eps = 0.2
    cap = std_conj_mq_constant(ReductionParams(eps)) / eps
    ok = True
    accepted = runs = 0
    for i, (n, k) in enumerate([(8, 0), (8, 3), (20, 2), (64, 1), (64, 5), (100, 4)]):
        f = random_instance("conj", n, k, rng)
        for t in range(10):
            _, trng = rngs(9, i, t)
            rep = std_conj_test(f.evaluate, n, eps, trng)
            accepted += rep.accepted
            runs += 1
            ok &= rep.mq_calls <= cap and rep.samp_calls == 0
    ok &= accepted == runs
    idx = np.arange(1 << 10)
    far = [TruthTable.from_bits(10, ((idx & 1) ^ (idx >> 1 & 1)).astype(bool))]
    while len(far) < 3:
        n = int(rng.integers(4, 9))
        f = TruthTable.from_bits(n, rng.random(1 << n) < 0.5)
        if std_dist_to_class(f, FunctionClass(ClassKind.CONJUNCTIONS, n)).value > eps:
            far.append(f)
    rates = []
    for i, f in enumerate(far):
        rej = 0
        for t in range(400):
            _, trng = rngs(10, i, t)
            rep = std_conj_test(f.evaluate, f.n, eps, trng)
            ok &= rep.mq_calls <= cap
            rej += not rep.accepted
        rates.append(rej / 400)
    ok &= min(rates) >= 0.7
    dt = time.perf_counter() - t0
    record(7, ok, f"{accepted}/{runs} conjunction runs accepted, far reject rates {rates}, K'={cap * eps:.0f}, {dt:.1f}s")
    assert ok


def test_criterion_8_faulty_oracles():
    t0 = time.perf_counter()
    rejections = runs = 0
    for i, f in enumerate(conj_corpus_small()):
        if not f.truth_bits().any():
            continue  # the faulty samplers need a nonempty support
        for s in range(100):
            rejections += not run_conj(f, 0.1, 11, i, s, FaultyKind.SUPPORTED_BIASED).accepted
            runs += 1
    for i, f in enumerate(conj_corpus_random()):
        for s in range(10):
            rejections += not run_conj(f, 0.2, 12, i, s, FaultyKind.SUPPORTED_BIASED).accepted
            runs += 1
    worst = 1.0
    for i, (f, d) in enumerate(far_conj_corpus()):
        for j, eps in enumerate((0.1, 0.2)):
            rej = sum(not run_conj(f, eps, 13, 2 * i + j, t, FaultyKind.MIN_MASS).accepted for t in range(400))
            worst = min(worst, wilson(rej, 400)[0])
    ok = rejections == 0 and worst >= 0.85
    dt = time.perf_counter() - t0
    record(8, ok, f"SupportedBiased: {rejections} rejections in {runs} runs; MinMass lowest Wilson lower {worst:.3f}; {dt:.1f}s")
    assert ok


def test_criterion_9_lemma_ledger():
    t0 = time.perf_counter()
    ledger = verify_lemmas(5)
    dt = time.perf_counter() - t0
    ok = ledger.passed and ledger.total_checks >= 100_000 and dt <= 300
    record(9, ok, f"{len(ledger.entries)} suites, {ledger.total_checks} checks, {dt:.1f}s")
    assert ok, ledger.lines()


def test_criterion_10_sampler_exactness():
    rng = np.random.default_rng(10)
    f = DecisionList(10, [(3, 1, 0), (0, 0, 1), (7, 1, 1), (5, 0, 0), (2, 1, 1)], 1)
    truth = f.truth_bits()
    p = truth / truth.sum()
    X = sample_satisfying(f, rng, 1_000_000)
    emp = np.bincount(B.points_to_ints(X).astype(np.int64), minlength=1 << 10) / X.shape[0]
    tv = 0.5 * np.abs(emp - p).sum()
    ok = tv <= 0.02
    support_ok = True
    for n in range(1, 13):
        for _ in range(3):
            k = int(rng.integers(1, n + 1))
            g = random_instance("dl", n, k, rng)
            t = g.truth_bits()
            seen = np.zeros(1 << n, dtype=bool)
            seen[B.points_to_ints(sample_satisfying(g, rng, 200_000)).astype(np.int64)] = True
            support_ok &= bool(np.array_equal(seen, t))
    ok &= support_ok
    record(10, ok, f"TV={tv:.4f} at n=10 (|F|={int(truth.sum())}), support exact n<=12: {support_ok}")
    assert ok
