import numpy as np
import pytest

from reltest import bits as B
from reltest.adversary import random_instance
from reltest.boolfn import Conjunction, Literal, TruthTable, decompose, sample_satisfying
from reltest.conjtest import RejectSite
from reltest.distance import ClassKind, FunctionClass, enumerate_class, rel_dist_to_class
from reltest.dltest import (
    BruteForceTester,
    DlTestParams,
    GammaAnswer,
    LearnerTester,
    Partition,
    SubcubeOracle,
    Variant,
    call_ceiling,
    dl_test,
    gamma_exact,
    gamma_query,
    gamma_sample,
    unanimous_partition,
)
from reltest.oracle import make_oracles


def partition(n, fixed: dict) -> Partition:
    U = B.index_mask(n, fixed)
    u = B.index_mask(n, [i for i, b in fixed.items() if b])
    return Partition(n, U, B.full_mask(n) & ~U, u)


def oracle(f, seed=0):
    return make_oracles(f, np.random.default_rng(seed))


# ---- parameters


def test_param_defaults_and_desk_preset():
    p = DlTestParams(0.1)
    assert (p.c2, p.c1) == (400, 16000)
    assert p.step4.epsilon == pytest.approx(0.001)
    d = DlTestParams.desk(0.1)
    assert (d.c2, d.c1, d.step4.c1, d.step4.c2, d.step0.c1) == (100, 4000, 1, 20, 5967)
    assert d.gamma_repeats == 333  # ceil(100 * log2 10)
    assert DlTestParams(0.75).gamma_repeats >= 1


# ---- partition


def test_partition_examples():
    S = np.stack([B.point("101"), B.point("100")])
    p = unanimous_partition(S, 3)
    assert p.U == (0, 1) and p.R == (2,) and p.u_bits == {0: 1, 1: 0}
    p = unanimous_partition(B.point("0110")[None, :], 4)
    assert p.U == (0, 1, 2, 3) and p.R == ()


def test_partition_of_whole_subcube_is_its_fixed_coordinates():
    f = Conjunction(6, [Literal(1), Literal(4, True)])
    S = B.all_points(6)[f.truth_bits()]
    p = unanimous_partition(S, 6)
    assert p.U == (1, 4) and p.u_bits == {1: 1, 4: 0}


# ---- Gamma simulators


def test_gamma_zero_slice_answers_zero():
    f = Conjunction(5, [Literal(0)])
    part = partition(5, {0: 1, 1: 0})
    alpha = B.point("00000")  # x1 = 0 kills f on the whole slice
    params = DlTestParams.desk(0.1)
    for s in range(20):
        assert gamma_query(oracle(f), part, alpha, params, np.random.default_rng(s)) is GammaAnswer.ZERO


def test_gamma_at_u_never_rejects():
    rng = np.random.default_rng(0)
    for _ in range(20):
        f = TruthTable.from_bits(6, rng.random(64) < 0.5)
        part = partition(6, {0: 1, 3: 0})
        ans = gamma_query(oracle(f), part, part.u, DlTestParams.desk(0.2), rng)
        hit = f.truth_bits()[B.points_to_ints(B.deposit(np.arange(16, dtype=np.uint64), part.R, 6) | part.u).astype(int)].any()
        assert ans is not GammaAnswer.REJECT
        if not hit:
            assert ans is GammaAnswer.ZERO


def test_gamma_constant_one_answers_one():
    part = partition(5, {2: 1})
    ans = gamma_query(oracle(Conjunction(5)), part, B.point("00000"), DlTestParams.desk(0.1), np.random.default_rng(0))
    assert ans is GammaAnswer.ONE


def test_gamma_sample_single_point():
    z = B.point("10110")
    f = Conjunction(5, [Literal(i, not int(c)) for i, c in enumerate("10110")])
    part = partition(5, {0: 1, 2: 1})
    out = gamma_sample(oracle(f), part, 50)
    assert (out == (z & part.U_mask)).all()


def test_gamma_sample_satisfies_head_on_u():
    rng = np.random.default_rng(4)
    for dl in list(enumerate_class(FunctionClass(ClassKind.DECISION_LISTS, 4)))[::97]:
        if dl.pivot is None:
            continue
        _, head, _ = decompose(dl)
        S = sample_satisfying(dl, rng, 40)
        part = unanimous_partition(S, 4)
        out = gamma_sample(oracle(dl, 1), part, 40)
        head_U = [l for l in head.literals if l.var in part.U]
        assert Conjunction(4, head_U).evaluate(out).all()


def test_gamma_exact_matches_double_loop():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(3, 9))
        f = TruthTable.from_bits(n, rng.random(1 << n) < rng.random())
        U = sorted(rng.choice(n, size=int(rng.integers(1, n)), replace=False).tolist())
        part = partition(n, {i: int(rng.integers(2)) for i in U})
        R = part.R
        want = []
        v = f.truth_bits()
        for a in range(1 << len(U)):
            base = sum(((a >> j) & 1) << c for j, c in enumerate(U))
            hits = sum(v[base + sum(((w >> j) & 1) << c for j, c in enumerate(R))] for w in range(1 << len(R)))
            want.append(16 * hits >= (1 << len(R)))
        assert gamma_exact(f, part).truth_bits().tolist() == want


def test_gamma_exact_all_zero():
    assert not gamma_exact(Conjunction.false(6), partition(6, {0: 1, 1: 1})).truth_bits().any()


# ---- standard-model surrogate


def test_exact_tier_accepts_decision_lists():
    rng = np.random.default_rng(0)
    for _ in range(10):
        f = random_instance("dl", 12, 5, rng)
        part = partition(12, {i: int(rng.integers(2)) for i in range(4)})
        assert BruteForceTester()(SubcubeOracle(oracle(f), part), 0.01, rng)


def test_exact_tier_rejects_xor():
    f = TruthTable.from_bits(4, np.array([((k & 1) ^ (k >> 1 & 1)) for k in range(16)], dtype=bool))
    part = partition(4, {2: 0, 3: 1})
    for eps in (0.25, 0.1, 0.01):
        assert not BruteForceTester()(SubcubeOracle(oracle(f), part), eps, np.random.default_rng(0))


def test_learner_accepts_true_lists_with_many_free_variables():
    rng = np.random.default_rng(1)
    acc = 0
    for t in range(100):
        f = random_instance("dl", 48, 6, rng)
        part = partition(48, {i: int(rng.integers(2)) for i in range(8)})
        acc += LearnerTester()(SubcubeOracle(oracle(f), part), 0.05, rng)
    assert acc >= 95


def test_learner_rejects_majority():
    rng = np.random.default_rng(2)
    idx = np.arange(1 << 10)
    maj = ((idx & 1) + (idx >> 1 & 1) + (idx >> 2 & 1)) >= 2
    f = TruthTable.from_bits(10, maj)
    part = partition(10, {9: 0})
    rej = sum(not LearnerTester()(SubcubeOracle(oracle(f), part), 0.05, rng) for _ in range(100))
    assert rej >= 95


def test_constants_accepted_by_both_tiers():
    rng = np.random.default_rng(3)
    for f in (Conjunction(30), Conjunction.false(30)):
        part = partition(30, {0: 1})
        assert LearnerTester()(SubcubeOracle(oracle(f), part), 0.05, rng)
    part = partition(8, {0: 1})
    assert BruteForceTester()(SubcubeOracle(oracle(Conjunction(8)), part), 0.05, rng)


def test_nonadaptive_validation_is_quadratic():
    na = LearnerTester(variant=Variant.NONADAPTIVE)
    assert na.validation_size(0.01) == 10000
    assert LearnerTester().validation_size(0.01) == 2000


# ---- the tester


def run(f, eps=0.1, seed=0, **kw):
    params = DlTestParams.desk(eps, **kw)
    return dl_test(oracle(f, seed + 10**6), params, rng=np.random.default_rng(seed), seed=seed)


def test_conjunction_accepted_at_step_zero():
    rep = run(Conjunction(64, [Literal(3), Literal(9, True)]))
    assert rep.accepted and rep.info["step"] == 0


def test_random_lists_accepted():
    rng = np.random.default_rng(11)
    acc = sum(run(random_instance("dl", 64, 8, rng), 0.1, s).accepted for s in range(30))
    assert acc >= 27


def test_far_small_functions_rejected():
    rng = np.random.default_rng(5)
    found = 0
    while found < 6:
        n = int(rng.integers(3, 6))
        f = TruthTable.from_bits(n, rng.random(1 << n) < 0.6)
        if f.popcount == 0 or rel_dist_to_class(f, FunctionClass(ClassKind.DECISION_LISTS, n)).value < 0.1:
            continue
        found += 1
        rej = sum(not run(f, 0.1, s).accepted for s in range(40))
        assert rej >= 28, (f, rej)


def test_reject_sites_are_dl_sites():
    f = TruthTable.from_bits(3, np.array([0, 1, 1, 0, 1, 0, 0, 1], dtype=bool))
    rep = run(f, 0.1)
    assert not rep.accepted
    assert rep.reject_site in {
        RejectSite.STEP2_DENSITY,
        RejectSite.STEP2_STANDARD,
        RejectSite.STEP3,
        RejectSite.STEP4_SIMULATOR,
        RejectSite.STEP4_CONJ,
    }


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05])
def test_calls_within_ceiling(eps):
    rng = np.random.default_rng(8)
    std = BruteForceTester()
    for s in range(5):
        f = random_instance("dl", 64, 16, rng)
        params = DlTestParams.desk(eps)
        rep = dl_test(oracle(f, s), params, std, np.random.default_rng(s))
        s_cap, q_cap = call_ceiling(params, std.max_queries(eps / 100, rep.info.get("R", 0)))
        assert rep.samp_calls <= s_cap and rep.mq_calls <= q_cap
