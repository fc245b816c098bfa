import math

import numpy as np
import pytest

from reltest import bits as B
from reltest.adversary import FaultyKind, FaultySamp
from reltest.boolfn import Conjunction, Literal, TruthTable, sample_satisfying
from reltest.conjtest import (
    ConjTestParams,
    RejectSite,
    TestReport,
    Verdict,
    antimono_conj_test,
    call_ceiling,
    conj_test,
    conj_test_with_oracles,
)
from reltest.distance import ClassKind, FunctionClass, rel_dist_to_class
from reltest.oracle import OracleHandle, make_oracles

from _ref import conj_tables


def run(f, eps=0.1, seed=0, tester=conj_test):
    rng = np.random.default_rng(seed)
    return tester(make_oracles(f, np.random.default_rng(seed + 10**6)), ConjTestParams(eps), rng, seed)


def padded(values: np.ndarray, n: int) -> TruthTable:
    """Extend a table on its low coordinates to ``n`` variables."""
    k = int(np.log2(values.size))
    idx = np.arange(1 << n) & ((1 << k) - 1)
    return TruthTable.from_bits(n, values[idx])


def far_corpus(kind, eps, count, n_range=(3, 6), seed=0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(*n_range))
        v = rng.random(1 << n) < rng.uniform(0.2, 0.8)
        if not v.any():
            continue
        f = TruthTable.from_bits(n, v)
        if rel_dist_to_class(f, FunctionClass(kind, n)).value >= eps:
            out.append(f)
    return out


def test_params_validation():
    with pytest.raises(ValueError):
        ConjTestParams(0.0)
    with pytest.raises(ValueError):
        ConjTestParams(1.5)
    assert ConjTestParams(0.1).phase1_rounds == 59670


def test_report_enforces_site_iff_reject():
    with pytest.raises(ValueError):
        TestReport(Verdict.REJECT, None, 0, 0)
    with pytest.raises(ValueError):
        TestReport(Verdict.ACCEPT, RejectSite.PHASE1, 0, 0)


# ---- anti-monotone tester


def test_antimonotone_conjunctions_always_accepted():
    for n in (1, 3, 5):
        for mask in range(1 << n):
            f = Conjunction(n, [Literal(i, True) for i in range(n) if mask >> i & 1])
            for seed in range(5):
                assert run(f, 0.2, seed, antimono_conj_test).accepted


def test_constant_one_accepted():
    assert run(Conjunction(6), tester=antimono_conj_test).accepted


def test_empty_function_accepts_after_one_samp_call():
    rep = run(Conjunction.false(4))
    assert rep.accepted and rep.samp_calls == 1 and rep.mq_calls == 0


def test_antimono_rejects_non_antimonotone_conjunction():
    f = Conjunction(5, [Literal(0)])  # rel-dist 1 from every anti-monotone conjunction
    rejects = sum(not run(f, 0.1, s, antimono_conj_test).accepted for s in range(200))
    assert rejects >= 180


def test_antimono_soundness_rate():
    far = far_corpus(ClassKind.ANTIMONOTONE, 0.2, 5, seed=3)
    for f in far:
        rejects = sum(not run(f, 0.2, s, antimono_conj_test).accepted for s in range(1000))
        assert rejects >= 900, (f, rejects)


# ---- general tester


def test_every_small_conjunction_accepted():
    for n in (1, 2, 3):
        for t in conj_tables(n):
            f = TruthTable.from_bits(n, np.array(t))
            for seed in range(10):
                assert run(f, 0.2, seed).accepted


def test_wide_conjunctions_accepted(rng):
    for n in (100, 200):
        for _ in range(5):
            vars_ = rng.choice(n, size=8, replace=False)
            f = Conjunction(n, [Literal(int(v), bool(rng.integers(2))) for v in vars_])
            assert run(f, 0.1, int(rng.integers(1 << 30))).accepted


def test_xor_padded_is_rejected():
    f = padded(np.array([0, 1, 1, 0], dtype=bool), 10)
    assert rel_dist_to_class(f, FunctionClass(ClassKind.CONJUNCTIONS, 10)).value == pytest.approx(0.5)
    rejects = sum(not run(f, 0.2, s).accepted for s in range(300))
    assert rejects >= 270


def test_conj_soundness_rate():
    for f in far_corpus(ClassKind.CONJUNCTIONS, 0.2, 5, seed=4):
        rejects = sum(not run(f, 0.2, s).accepted for s in range(1000))
        assert rejects >= 900, (f, rejects)


@pytest.mark.parametrize("eps", [0.4, 0.2, 0.1, 0.05])
def test_call_ceiling_formula(eps):
    p = ConjTestParams(eps)
    s_cap, q_cap = call_ceiling(p)
    r1 = math.ceil(5967 / eps - 1e-9)
    assert (s_cap, q_cap) == (1 + 2 * r1 + 2 * 91, r1 + 91)
    K = 3 * 5967 + 3 * 91 + 4
    assert s_cap + q_cap <= K / eps
    rep = run(Conjunction(20, [Literal(3)]), eps)
    assert (rep.samp_calls, rep.mq_calls) == (s_cap, q_cap)  # an accepting run uses every round
    far = run(padded(np.array([0, 1, 1, 0], dtype=bool), 8), eps)
    assert far.samp_calls <= s_cap and far.mq_calls <= q_cap


# ---- weaker sampling assumptions


def test_supported_sampler_never_causes_rejection(rng):
    for n in (4, 12, 40):
        f = Conjunction(n, [Literal(0), Literal(2, True)])
        for seed in range(20):
            o = FaultySamp(f, FaultyKind.SUPPORTED_BIASED).oracle(np.random.default_rng(seed))
            assert conj_test(o, ConjTestParams(0.2), np.random.default_rng(seed)).accepted


def test_point_mass_sampler_accepts():
    f = Conjunction(6, [Literal(1)])
    z = B.point("010000")
    rep = conj_test_with_oracles(lambda x: f(x), lambda: z, ConjTestParams(0.4), np.random.default_rng(0), 6)
    assert rep.accepted


def test_min_mass_sampler_still_rejects_far_functions():
    for f in far_corpus(ClassKind.CONJUNCTIONS, 0.2, 3, seed=5):
        rejects = 0
        for s in range(300):
            o = FaultySamp(f, FaultyKind.MIN_MASS).oracle(np.random.default_rng(s))
            rejects += not conj_test(o, ConjTestParams(0.2), np.random.default_rng(s)).accepted
        assert rejects >= 270


# ---- non-adaptivity


class Recorder(OracleHandle):
    def __init__(self, f, rng, answer_all_true=False):
        self.queries = []

        def mq(X):
            self.queries.append(X.copy())
            return np.ones(X.shape[0], dtype=bool) if answer_all_true else f.evaluate(X)

        super().__init__(f.n, mq, lambda k: sample_satisfying(f, rng, k))


def test_queries_do_not_depend_on_answers():
    f = padded(np.array([0, 1, 1, 0], dtype=bool), 8)
    for seed in range(10):
        real = Recorder(f, np.random.default_rng(seed))
        rep = conj_test(real, ConjTestParams(0.2), np.random.default_rng(seed + 99))
        fake = Recorder(f, np.random.default_rng(seed), answer_all_true=True)
        conj_test(fake, ConjTestParams(0.2), np.random.default_rng(seed + 99))
        a = np.concatenate(real.queries)
        b = np.concatenate(fake.queries)
        assert not rep.accepted
        assert np.array_equal(a, b[: a.shape[0]])
