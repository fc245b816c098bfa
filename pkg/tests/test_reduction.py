import numpy as np
import pytest

from reltest.boolfn import Conjunction, Literal, TruthTable
from reltest.conjtest import RejectSite, TestReport, Verdict
from reltest.distance import ClassKind, FunctionClass, std_dist_to_class
from reltest.reduction import (
    ReductionParams,
    RelTesterHandle,
    conj_budget,
    std_conj_mq_constant,
    std_conj_test,
    std_from_rel,
)

XOR10 = TruthTable.from_bits(10, (np.arange(1024) & 1) != ((np.arange(1024) >> 1) & 1))


def test_constant_frozen():
    assert std_conj_mq_constant(ReductionParams(0.1)) == 1469368
    assert conj_budget()(0.5) == (3 * 5967 + 3 * 91 + 4) / 0.5


def test_all_zero_accepts_in_phase_one():
    rep = std_conj_test(Conjunction.false(8).evaluate, 8, 0.2, np.random.default_rng(0))
    assert rep.accepted and rep.info["phase"] == 1 and rep.info["p_hat"] == 0


@pytest.mark.parametrize("n,k", [(6, 0), (10, 2), (30, 3), (70, 1)])
def test_conjunctions_always_accepted(n, k):
    rng = np.random.default_rng(n)
    for seed in range(4):
        vars_ = rng.choice(n, size=k, replace=False)
        f = Conjunction(n, [Literal(int(v), bool(rng.integers(2))) for v in vars_])
        rep = std_conj_test(f.evaluate, n, 0.2, np.random.default_rng(seed))
        assert rep.accepted
        assert rep.samp_calls == 0
        assert rep.mq_calls <= std_conj_mq_constant(ReductionParams(0.2)) / 0.2


def test_padded_xor_rejected():
    assert std_dist_to_class(XOR10, FunctionClass(ClassKind.CONJUNCTIONS, 10)).value == pytest.approx(0.25)
    rejects = sum(not std_conj_test(XOR10.evaluate, 10, 0.2, np.random.default_rng(s)).accepted for s in range(40))
    assert rejects >= 28


def test_sparse_functions_accept_early():
    # density below eps/2: every conjunction-like verdict is allowed, and the reduction stops in phase 1
    f = Conjunction(12, [Literal(i) for i in range(6)])
    rep = std_conj_test(f.evaluate, 12, 0.2, np.random.default_rng(1))
    assert rep.accepted and rep.info["phase"] == 1


def _stub(verdict):
    calls = []

    def run(oracle, eps, rng):
        calls.append(eps)
        oracle.samp(5)
        site = None if verdict is Verdict.ACCEPT else RejectSite.PHASE1
        return TestReport(verdict, site, oracle.mq_calls, oracle.samp_calls)

    return RelTesterHandle(run, lambda eps: 10 / eps), calls


def test_one_sided_inner_tester_keeps_reduction_one_sided():
    handle, calls = _stub(Verdict.ACCEPT)
    for s in range(10):
        rep = std_from_rel(XOR10.evaluate, 10, ReductionParams(0.2), handle, np.random.default_rng(s))
        assert rep.accepted
    # p_hat is close to 1/2, so the inner distance eps / (2 p_hat) is close to eps
    assert calls and all(e == pytest.approx(0.2, abs=0.01) for e in calls)


def test_inner_rejection_propagates_with_its_site():
    handle, _ = _stub(Verdict.REJECT)
    rep = std_from_rel(XOR10.evaluate, 10, ReductionParams(0.2), handle, np.random.default_rng(0))
    assert not rep.accepted and rep.reject_site is RejectSite.PHASE1
    assert rep.info["samples_used"] == 5 and rep.info["g_size"] > 10 / rep.info["inner_eps"]


def test_mq_is_the_only_access():
    seen = []

    def mq(X):
        seen.append(X.shape[0])
        return XOR10.evaluate(X)

    rep = std_conj_test(mq, 10, 0.4, np.random.default_rng(3))
    assert sum(seen) == rep.mq_calls
