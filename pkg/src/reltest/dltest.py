"""Relative-error decision-list tester.

Steps:

0. accept if the conjunction tester accepts at ``eps``;
1. split coordinates into unanimous ``U`` (with shared bits ``u``) and the rest ``R``
   using ``ceil(c1/eps)`` samples;
2. reject unless ``f`` restricted to ``u`` is dense and passes a standard-model
   decision-list tester at ``eps/100``;
3. reject if ``f(z_U . w) != f(u . w)`` for a sampled ``z`` and uniform ``w``;
4. run the conjunction tester at ``eps/100`` on ``Gamma`` over ``{0,1}^U`` through the
   simulated oracles :func:`gamma_query` and :func:`gamma_sample`.

Points on ``{0,1}^U`` are stored as full ``n``-bit points whose ``R`` bits are zero,
so ``alpha . w`` is simply ``alpha | w`` for ``w`` supported on ``R``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Protocol

import numpy as np

from . import bits as B
from ._num import ceil_div, ceil_log2_inv, check_eps
from .boolfn import BooleanFunction, Restriction, TruthTable
from .conjtest import (
    ConjTestParams,
    RejectSite,
    TestReport,
    Verdict,
    _batches,
    conj_test,
)
from .conjtest import call_ceiling as conj_call_ceiling
from .distance import ClassKind, FunctionClass, std_dist_to_class
from .errors import CapExceeded, LearnFail
from .learn import greedy_decision_list
from .oracle import OracleHandle


class Variant(enum.Enum):
    ADAPTIVE = "adaptive"
    NONADAPTIVE = "nonadaptive"


@dataclass(frozen=True)
class DlTestParams:
    """Constants of the decision-list tester.

    ``conj_c1``/``conj_c2`` configure the conjunction test of Step 0. Step 4 uses
    ``gamma_c1``/``gamma_c2`` when given and the Step 0 constants otherwise.
    """

    epsilon: float
    c2: int = 400
    c1: int | None = None
    conj_c1: int = 5967
    conj_c2: int = 91
    gamma_c1: int | None = None
    gamma_c2: int | None = None
    variant: Variant = Variant.ADAPTIVE
    small_support_probes: int = 100

    def __post_init__(self):
        check_eps(self.epsilon)
        if self.c1 is None:
            object.__setattr__(self, "c1", 40 * self.c2)
        if min(self.c1, self.c2, self.conj_c1, self.conj_c2) < 1:
            raise ValueError("constants must be positive")

    @classmethod
    def desk(cls, epsilon: float, **overrides) -> "DlTestParams":
        """Smaller constants that keep Step 4 affordable at desk scale."""
        base = dict(c2=100, gamma_c1=1, gamma_c2=20)
        base.update(overrides)
        return cls(epsilon, **base)

    def with_epsilon(self, epsilon: float) -> "DlTestParams":
        return replace(self, epsilon=epsilon)

    @property
    def step0(self) -> ConjTestParams:
        return ConjTestParams(self.epsilon, self.conj_c1, self.conj_c2)

    @property
    def step4(self) -> ConjTestParams:
        return ConjTestParams(
            self.epsilon / 100,
            self.gamma_c1 or self.conj_c1,
            self.gamma_c2 or self.conj_c2,
        )

    @property
    def c0(self) -> int:
        """Conjunction test at ``eps/100`` makes at most ``c0/eps`` calls."""
        p = self.step4
        return 300 * p.c1 + 3 * p.c2 + 4

    @property
    def step1_samples(self) -> int:
        return ceil_div(self.c1, self.epsilon)

    @property
    def step3_rounds(self) -> int:
        return ceil_div(self.c2, self.epsilon)

    @property
    def gamma_repeats(self) -> int:
        return max(1, math.ceil(self.c2 * math.log2(1 / self.epsilon) - 1e-9))


# ------------------------------------------------------------------ partition


@dataclass(frozen=True)
class Partition:
    """``U`` and ``R`` as coordinate masks; ``u`` is a full point carrying ``u`` on ``U``."""

    n: int
    U_mask: np.ndarray
    R_mask: np.ndarray
    u: np.ndarray

    @property
    def U(self) -> tuple[int, ...]:
        return tuple(int(i) for i in B.mask_coords(self.U_mask, self.n))

    @property
    def R(self) -> tuple[int, ...]:
        return tuple(int(i) for i in B.mask_coords(self.R_mask, self.n))

    @property
    def u_bits(self) -> dict[int, int]:
        bits = B.unpack_rows(self.u[None, :], self.n)[0]
        return {i: int(bits[i]) for i in self.U}

    def compose(self, alpha: np.ndarray, W: np.ndarray) -> np.ndarray:
        """``alpha . w`` for batches (``alpha`` may be a single point)."""
        return (alpha & self.U_mask) | (W & self.R_mask)

    def restriction(self) -> Restriction:
        return Restriction(self.n, self.u_bits)


class _PartitionBuilder:
    """Streaming unanimity over sample batches."""

    def __init__(self, n: int):
        self.n = n
        self.all_and = B.full_mask(n).copy()
        self.any_or = np.zeros(B.n_words(n), dtype=np.uint64)
        self.count = 0

    def add(self, S: np.ndarray) -> None:
        self.all_and &= np.bitwise_and.reduce(S, axis=0)
        self.any_or |= np.bitwise_or.reduce(S, axis=0)
        self.count += S.shape[0]

    def partition(self) -> Partition:
        full = B.full_mask(self.n)
        U = (self.all_and | ~self.any_or) & full
        return Partition(self.n, U, full & ~U, self.all_and & U)


def unanimous_partition(samples: np.ndarray, n: int) -> Partition:
    samples = np.atleast_2d(np.asarray(samples, dtype=np.uint64))
    if samples.shape[0] == 0:
        raise ValueError("need at least one sample")
    pb = _PartitionBuilder(n)
    pb.add(samples)
    return pb.partition()


# ---------------------------------------------------------------- simulators


class GammaAnswer(enum.IntEnum):
    ZERO = 0
    ONE = 1
    REJECT = 2


class GammaReject(Exception):
    """Raised by the batched query simulator to halt the whole run."""


def _uniform_R(rng, m: int, part: Partition) -> np.ndarray:
    return B.random_points(rng, m, part.n) & part.R_mask


def gamma_query_batch(
    oracle: OracleHandle, part: Partition, alphas: np.ndarray, repeats: int, rng: np.random.Generator
) -> np.ndarray:
    """Simulated ``Gamma`` answers (``GammaAnswer`` codes) for a batch of ``alpha``.

    For each ``alpha``: ``repeats`` uniform ``w``; answer 0 when ``f(alpha . w) = 0``
    for all of them, otherwise compare against ``f(u . w)`` on the same ``w`` and
    answer REJECT on any disagreement, else 1.
    """
    m = alphas.shape[0]
    out = np.empty(m, dtype=np.int8)
    W = _uniform_R(rng, m * repeats, part)
    fa = oracle.mq(part.compose(np.repeat(alphas, repeats, axis=0), W)).reshape(m, repeats)
    nonzero = fa.any(axis=1)
    out[~nonzero] = GammaAnswer.ZERO
    if nonzero.any():
        Wn = W.reshape(m, repeats, -1)[nonzero].reshape(-1, W.shape[1])
        fu = oracle.mq(Wn | part.u).reshape(-1, repeats)
        agree = (fu == fa[nonzero]).all(axis=1)
        out[nonzero] = np.where(agree, GammaAnswer.ONE, GammaAnswer.REJECT)
    return out


def gamma_query(
    oracle: OracleHandle, part: Partition, alpha: np.ndarray, params: DlTestParams, rng: np.random.Generator
) -> GammaAnswer:
    """Single-point query simulator for ``Gamma``."""
    code = gamma_query_batch(oracle, part, np.asarray(alpha, dtype=np.uint64)[None, :], params.gamma_repeats, rng)
    return GammaAnswer(int(code[0]))


def gamma_sample(oracle: OracleHandle, part: Partition, k: int = 1) -> np.ndarray | None:
    """``z_U`` for ``k`` fresh samples ``z``; None when ``f`` has no satisfying point."""
    Z = oracle.samp(k)
    return None if Z is None else Z & part.U_mask


def gamma_exact(f: BooleanFunction, part: Partition) -> TruthTable:
    """Exact ``Gamma`` as a table over ``{0,1}^U`` (coordinates of ``U`` in ascending order)."""
    U, R = part.U, part.R
    if len(R) > 20 or len(U) > 20:
        raise CapExceeded("exact Gamma needs |U|, |R| <= 20")
    W = B.deposit(np.arange(1 << len(R), dtype=np.uint64), R, part.n)
    out = np.zeros(1 << len(U), dtype=bool)
    for a in range(1 << len(U)):
        alpha = B.deposit(np.array([a], dtype=np.uint64), U, part.n)[0]
        hits = int(f.evaluate(alpha | W).sum())
        out[a] = 16 * hits >= (1 << len(R))
    return TruthTable.from_bits(len(U), out)


class _GammaOracle(OracleHandle):
    """Oracle view of ``Gamma`` handed to the Step 4 conjunction test."""

    MAX_POINTS = 1 << 19

    def __init__(self, base: OracleHandle, part: Partition, repeats: int, rng):
        self.base = base
        self.part = part
        self.repeats = repeats
        self.rng = rng
        super().__init__(base.n, self._mq_batch, lambda k: gamma_sample(base, part, k))

    def _mq_batch(self, A: np.ndarray) -> np.ndarray:
        out = np.ones(A.shape[0], dtype=bool)
        step = max(1, self.MAX_POINTS // self.repeats)
        for lo in range(0, A.shape[0], step):
            codes = gamma_query_batch(self.base, self.part, A[lo : lo + step], self.repeats, self.rng)
            bad = np.flatnonzero(codes == GammaAnswer.REJECT)
            zero = np.flatnonzero(codes == GammaAnswer.ZERO)
            if bad.size and not (zero.size and zero[0] < bad[0]):
                raise GammaReject
            out[lo : lo + step] = codes != GammaAnswer.ZERO
            if zero.size:
                # the conjunction test halts on this answer; later queries are never asked
                break
        return out


# ---------------------------------------------------- standard-model testers


class SubcubeOracle:
    """Membership access to ``f`` restricted to ``u``, as a function on ``{0,1}^R``.

    Points are boolean rows indexed by the coordinates of ``R`` in ascending order.
    """

    def __init__(self, oracle: OracleHandle, part: Partition):
        self.oracle = oracle
        self.part = part
        self.R = np.array(part.R, dtype=np.int64)
        self.r = len(self.R)

    def query_bits(self, Wbits: np.ndarray) -> np.ndarray:
        full = np.zeros((Wbits.shape[0], self.part.n), dtype=bool)
        full[:, self.R] = Wbits
        return self.oracle.mq(B.pack_rows(full) | self.part.u)

    def sample(self, m: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """``m`` uniform labelled points of ``{0,1}^R``."""
        X = B.random_points(rng, m, self.part.n) & self.part.R_mask
        y = self.oracle.mq(X | self.part.u)
        return B.unpack_rows(X, self.part.n)[:, self.R], y

    def table(self) -> np.ndarray:
        """All ``2^r`` values in index order (bit ``j`` of the index is coordinate ``R[j]``)."""
        W = B.deposit(np.arange(1 << self.r, dtype=np.uint64), self.R, self.part.n)
        return self.oracle.mq(W | self.part.u)


class StandardDlTester(Protocol):
    def __call__(self, sub: SubcubeOracle, eps: float, rng: np.random.Generator) -> bool: ...


@dataclass(frozen=True)
class LearnerTester:
    """Greedy-learn on ``ceil(c_train/eps * log2(1/eps))`` points, then validate.

    Adaptive validation uses ``ceil(c_val/eps)`` points; the non-adaptive variant uses
    ``ceil(c_val_na/eps^2)``. Accepts iff the validation error rate is at most ``eps/2``.
    """

    c_train: float = 4.0
    c_val: float = 20.0
    c_val_na: float = 1.0
    variant: Variant = Variant.ADAPTIVE

    def train_size(self, eps: float) -> int:
        return ceil_div(self.c_train * max(1, ceil_log2_inv(eps)), eps)

    def validation_size(self, eps: float) -> int:
        if self.variant is Variant.NONADAPTIVE:
            return ceil_div(self.c_val_na, eps * eps)
        return ceil_div(self.c_val, eps)

    def max_queries(self, eps: float) -> int:
        return self.train_size(eps) + self.validation_size(eps)

    def __call__(self, sub: SubcubeOracle, eps: float, rng: np.random.Generator) -> bool:
        X, y = sub.sample(self.train_size(eps), rng)
        try:
            h = greedy_decision_list(X, y)
        except LearnFail:
            return False
        Xv, yv = sub.sample(self.validation_size(eps), rng)
        Vpacked = B.pack_rows(Xv) if Xv.shape[1] else np.zeros((Xv.shape[0], 1), dtype=np.uint64)
        errors = int((h.evaluate(Vpacked) != yv).sum())
        return 2 * errors <= eps * Xv.shape[0]


@dataclass(frozen=True)
class BruteForceTester:
    """Exact tiers on small ``R``; falls back to ``fallback`` above ``r_max``.

    ``|R| <= 5``: exact distance to decision lists, accept iff below ``eps/2``.
    ``|R| <= r_max``: run the greedy learner on the full table; it succeeds exactly
    when the restricted function is a decision list, and we accept iff it does.
    """

    r_max: int = 16
    fallback: LearnerTester = LearnerTester()

    def max_queries(self, eps: float, r: int) -> int:
        return (1 << r) if r <= self.r_max else self.fallback.max_queries(eps)

    def __call__(self, sub: SubcubeOracle, eps: float, rng: np.random.Generator) -> bool:
        r = sub.r
        if r > self.r_max:
            return self.fallback(sub, eps, rng)
        values = sub.table()
        if r <= 5:
            f = TruthTable.from_bits(r, values)
            return std_dist_to_class(f, FunctionClass(ClassKind.DECISION_LISTS, r)).value < eps / 2
        pts = B.unpack_rows(B.all_points(r), r)
        try:
            greedy_decision_list(pts, values)
        except LearnFail:
            return False
        return True


def std_dl_test_bruteforce(sub: SubcubeOracle, eps: float, rng: np.random.Generator, r_max: int = 16) -> bool:
    return BruteForceTester(r_max)(sub, eps, rng)


def std_dl_test_learner(
    sub: SubcubeOracle, eps: float, rng: np.random.Generator, variant: Variant = Variant.ADAPTIVE
) -> bool:
    return LearnerTester(variant=variant)(sub, eps, rng)


def default_std_tester(variant: Variant = Variant.ADAPTIVE) -> BruteForceTester:
    return BruteForceTester(fallback=LearnerTester(variant=variant))


# ------------------------------------------------------------------- tester


def _report(oracle, verdict, site=None, seed=None, **info) -> TestReport:
    return TestReport(verdict, site, oracle.mq_calls, oracle.samp_calls, seed, info)


def dl_test(
    oracle: OracleHandle,
    params: DlTestParams,
    std: StandardDlTester | None = None,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
) -> TestReport:
    """Relative-error decision-list tester. ``std`` defaults to the exact/learner surrogate."""
    rng = rng if rng is not None else np.random.default_rng(seed)
    std = std or default_std_tester(params.variant)
    eps = params.epsilon
    n = oracle.n

    # Step 0
    r0 = conj_test(oracle, params.step0, rng)
    if r0.accepted:
        return _report(oracle, Verdict.ACCEPT, None, seed, step=0)

    # Step 1
    pb = _PartitionBuilder(n)
    for k in _batches(params.step1_samples):
        S = oracle.samp(k)
        if S is None:
            return _report(oracle, Verdict.ACCEPT, None, seed, step=1, note="empty")
        pb.add(S)
    part = pb.partition()
    info = {"U": len(part.U), "R": len(part.R)}

    if not part.R_mask.any():
        # every sample was the same point z*
        z = part.u
        if oracle.query(z) == 1:
            probes = B.random_points(rng, params.small_support_probes, n)
            probes = probes[(probes != z).any(axis=1)]
            if not oracle.mq(probes).any():
                return _report(oracle, Verdict.ACCEPT, None, seed, step=1, note="single point", **info)

    # Step 2
    W = _uniform_R(rng, params.c2, part)
    dense = int(oracle.mq(W | part.u).sum())
    if 4 * dense < params.c2:
        return _report(oracle, Verdict.REJECT, RejectSite.STEP2_DENSITY, seed, step=2, **info)
    if not std(SubcubeOracle(oracle, part), eps / 100, rng):
        return _report(oracle, Verdict.REJECT, RejectSite.STEP2_STANDARD, seed, step=2, **info)

    # Step 3
    for k in _batches(params.step3_rounds):
        Z = oracle.samp(k)
        W = _uniform_R(rng, k, part)
        a = oracle.mq(part.compose(Z, W))
        b = oracle.mq(W | part.u)
        if (a != b).any():
            return _report(oracle, Verdict.REJECT, RejectSite.STEP3, seed, step=3, **info)

    # Step 4
    gamma = _GammaOracle(oracle, part, params.gamma_repeats, rng)
    try:
        r4 = conj_test(gamma, params.step4, rng)
    except GammaReject:
        return _report(oracle, Verdict.REJECT, RejectSite.STEP4_SIMULATOR, seed, step=4, **info)
    if r4.accepted:
        return _report(oracle, Verdict.ACCEPT, None, seed, step=4, **info)
    return _report(oracle, Verdict.REJECT, RejectSite.STEP4_CONJ, seed, step=4, **info)


def call_ceiling(params: DlTestParams, std_queries: int) -> tuple[int, int]:
    """Worst-case ``(samp_calls, mq_calls)`` given the standard tester's query bound."""
    s0, q0 = conj_call_ceiling(params.step0)
    s4, q4 = conj_call_ceiling(params.step4)
    samp = s0 + params.step1_samples + params.step3_rounds + s4
    mq = (
        q0
        + 1
        + params.small_support_probes
        + params.c2
        + std_queries
        + 2 * params.step3_rounds
        + 2 * params.gamma_repeats * q4
    )
    return samp, mq

